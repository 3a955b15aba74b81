//! North-up lon/lat grids.

use geo::{Coord, Rect};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

/// How cell values are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantics {
    ClassCoded,
    Continuous,
    /// 0 = no loss, k = loss in year 2000 + k.
    LossYear,
    MonthlyBand,
}

/// Georeferencing of a north-up grid. Rows run south from `origin`, columns
/// run east.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T: Scalar> {
    /// Upper-left corner of the upper-left pixel.
    pub origin: Coord<T>,
    pub pixel_width: T,
    pub pixel_height: T,
    pub width: usize,
    pub height: usize,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(origin: Coord<T>, pixel_width: T, pixel_height: T, width: usize, height: usize) -> Result<Self> {
        if !(pixel_width > T::zero()) || !(pixel_height > T::zero()) {
            return Err(Error::InvalidLayer(format!(
                "pixel size must be positive, got {pixel_width} x {pixel_height}"
            )));
        }
        if !origin.x.is_finite() || !origin.y.is_finite() || !pixel_width.is_finite() || !pixel_height.is_finite() {
            return Err(Error::InvalidLayer("non-finite georeferencing".into()));
        }
        Ok(GridSpec {
            origin,
            pixel_width,
            pixel_height,
            width,
            height,
        })
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn center_x(&self, col: usize) -> T {
        self.origin.x + (T::from_count(col) + T::lit(0.5)) * self.pixel_width
    }

    #[inline]
    pub fn center_y(&self, row: usize) -> T {
        self.origin.y - (T::from_count(row) + T::lit(0.5)) * self.pixel_height
    }

    pub fn pixel_center(&self, row: usize, col: usize) -> Coord<T> {
        Coord {
            x: self.center_x(col),
            y: self.center_y(row),
        }
    }

    pub fn extent(&self) -> Rect<T> {
        Rect::new(
            Coord {
                x: self.origin.x,
                y: self.origin.y - T::from_count(self.height) * self.pixel_height,
            },
            Coord {
                x: self.origin.x + T::from_count(self.width) * self.pixel_width,
                y: self.origin.y,
            },
        )
    }

    /// Cell containing `c`. A coordinate on a shared cell edge goes to the
    /// lower row/column index; coordinates outside the extent give `None`.
    pub fn nearest_cell(&self, c: Coord<T>) -> Option<(usize, usize)> {
        let col = edge_index((c.x - self.origin.x) / self.pixel_width, self.width)?;
        let row = edge_index((self.origin.y - c.y) / self.pixel_height, self.height)?;
        Some((row, col))
    }

    pub fn same_grid(&self, other: &GridSpec<T>) -> bool {
        self == other
    }
}

fn edge_index<T: Scalar>(f: T, n: usize) -> Option<usize> {
    if !(f >= T::zero()) || f > T::from_count(n) || n == 0 {
        return None;
    }
    let fl = f.floor();
    let mut i = fl.to_usize()?;
    if fl == f && i > 0 {
        i -= 1;
    }
    Some(i.min(n - 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridLayer<T: Scalar> {
    pub spec: GridSpec<T>,
    pub nodata: Option<T>,
    /// Row-major cell values.
    pub values: Vec<T>,
    pub semantics: Semantics,
}

impl<T: Scalar> GridLayer<T> {
    pub fn new(spec: GridSpec<T>, nodata: Option<T>, values: Vec<T>, semantics: Semantics) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidLayer(format!(
                "expected {} x {} = {} values, got {}",
                spec.width,
                spec.height,
                spec.len(),
                values.len()
            )));
        }
        Ok(GridLayer {
            spec,
            nodata,
            values,
            semantics,
        })
    }

    /// Constant-valued layer.
    pub fn filled(spec: GridSpec<T>, value: T, semantics: Semantics) -> Self {
        GridLayer {
            spec,
            nodata: None,
            values: vec![value; spec.len()],
            semantics,
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * self.spec.width + col]
    }

    /// NaN and the nodata sentinel are both treated as missing.
    #[inline]
    pub fn is_valid(&self, v: T) -> bool {
        !v.is_nan() && self.nodata != Some(v)
    }

    pub fn value_at(&self, c: Coord<T>) -> Option<T> {
        let (r, k) = self.spec.nearest_cell(c)?;
        let v = self.get(r, k);
        self.is_valid(v).then_some(v)
    }
}
