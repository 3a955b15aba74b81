//! Tree-cover loss in year windows around planting.

use serde::Serialize;

use crate::error::{Evaluated, NotEvaluable};
use crate::raster::{GridLayer, ZoneMask};
use crate::Scalar;

/// First and last year covered by a loss-year layer.
pub const LOSS_FIRST_YEAR: i32 = 2001;
pub const LOSS_LAST_YEAR: i32 = 2023;
/// Accepted planting years.
pub const PLANTING_YEAR_RANGE: (i32, i32) = (2000, 2023);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowCoverage {
    Full,
    Partial,
    None,
}

/// Inclusive year window clipped to the layer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct YearWindow {
    pub first: i32,
    pub last: i32,
    pub coverage: WindowCoverage,
}

impl YearWindow {
    pub fn clipped(first: i32, last: i32) -> Self {
        let (f, l) = (first.max(LOSS_FIRST_YEAR), last.min(LOSS_LAST_YEAR));
        let coverage = if f > l {
            WindowCoverage::None
        } else if f == first && l == last {
            WindowCoverage::Full
        } else {
            WindowCoverage::Partial
        };
        YearWindow { first: f, last: l, coverage }
    }

    pub fn contains(&self, year: i32) -> bool {
        self.coverage != WindowCoverage::None && year >= self.first && year <= self.last
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossWindow<T: Scalar> {
    /// `None` when the window lies wholly outside the layer's years.
    pub fraction: Option<T>,
    pub window: YearWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossWindows<T: Scalar> {
    pub pre5: LossWindow<T>,
    pub pre1: LossWindow<T>,
    pub post5: LossWindow<T>,
    pub pixel_count: usize,
}

/// Windows `[y-5, y-1]`, `{y-1}` and `[y+1, y+5]` for planting year `y`.
pub fn loss_windows_for(planting_year: i32) -> [YearWindow; 3] {
    let y = planting_year;
    [
        YearWindow::clipped(y - 5, y - 1),
        YearWindow::clipped(y - 1, y - 1),
        YearWindow::clipped(y + 1, y + 5),
    ]
}

/// Loss-year code of a cell as a calendar year; 0 and unknown codes give `None`.
fn loss_year<T: Scalar>(v: T) -> Option<i32> {
    let k = v.to_i32()?;
    (T::from_i32(k) == Some(v) && k >= 1).then_some(2000 + k)
}

pub fn tree_loss_windows<T: Scalar>(
    lossyear: &GridLayer<T>,
    mask: &ZoneMask,
    planting_year: i32,
) -> Evaluated<LossWindows<T>> {
    if planting_year < PLANTING_YEAR_RANGE.0 || planting_year > PLANTING_YEAR_RANGE.1 {
        return Err(NotEvaluable::YearOutOfRange);
    }
    let windows = loss_windows_for(planting_year);
    let mut hits = [0usize; 3];
    let mut valid = 0usize;
    for &i in mask.indices() {
        let v = lossyear.values[i];
        if !lossyear.is_valid(v) {
            continue;
        }
        valid += 1;
        if let Some(year) = loss_year(v) {
            for (h, w) in hits.iter_mut().zip(&windows) {
                if w.contains(year) {
                    *h += 1;
                }
            }
        }
    }
    if valid == 0 {
        return Err(NotEvaluable::NoValidPixels);
    }
    let n = T::from_count(valid);
    let mk = |k: usize| LossWindow {
        fraction: (windows[k].coverage != WindowCoverage::None).then(|| T::from_count(hits[k]) / n),
        window: windows[k],
    };
    Ok(LossWindows {
        pre5: mk(0),
        pre1: mk(1),
        post5: mk(2),
        pixel_count: valid,
    })
}
