//! Builds DiD panels from per-site zone index series.

use std::collections::BTreeMap;

use crate::stats::did::PanelRow;
use crate::vegetation::{VegIndex, Zone, ZoneIndexSeries};
use crate::Scalar;

/// Horizons fitted by the pipeline, in years relative to planting.
pub const DID_HORIZONS: [i32; 4] = [-1, 1, 2, 5];

/// `(pre, post)` periods for a horizon. The pre-planting horizon contrasts
/// one year before with the planting year; later ones contrast the planting
/// year with `h` years after.
pub fn horizon_periods(horizon: i32) -> (i32, i32) {
    if horizon < 0 {
        (horizon, 0)
    } else {
        (0, horizon)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonPanel<T: Scalar> {
    pub horizon: i32,
    pub rows: Vec<PanelRow<T>>,
    pub units: usize,
    /// Sites lacking a finite value in at least one of the four cells.
    pub dropped_units: usize,
}

/// Keeps only sites with a finite mean for both zones at both periods, so
/// the panel is balanced by construction.
pub fn build_did_panel<T: Scalar>(series: &[ZoneIndexSeries<T>], index: VegIndex, horizon: i32) -> HorizonPanel<T> {
    let (pre, post) = horizon_periods(horizon);
    let mut cells: BTreeMap<&str, [Option<T>; 4]> = BTreeMap::new();
    for s in series.iter().filter(|s| s.index == index) {
        let t = if s.period == pre {
            0
        } else if s.period == post {
            1
        } else {
            continue;
        };
        let g = match s.zone {
            Zone::Site => 1,
            Zone::Annulus => 0,
        };
        let entry = cells.entry(s.site_id.as_str()).or_insert([None; 4]);
        entry[g * 2 + t] = s.mean.as_ref().ok().copied().filter(|v| v.is_finite());
    }
    let mut rows = Vec::new();
    let mut units = 0;
    let mut dropped = 0;
    for (unit, vals) in &cells {
        if vals.iter().any(Option::is_none) {
            dropped += 1;
            continue;
        }
        units += 1;
        for (k, v) in vals.iter().enumerate() {
            rows.push(PanelRow {
                unit_id: unit.to_string(),
                g: (k / 2) as u8,
                t: (k % 2) as u8,
                y: v.unwrap(),
            });
        }
    }
    HorizonPanel {
        horizon,
        rows,
        units,
        dropped_units: dropped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{NotEvaluable, SiteId};

    fn rec(site: &str, zone: Zone, period: i32, mean: Option<f64>) -> ZoneIndexSeries<f64> {
        ZoneIndexSeries {
            site_id: SiteId::new(site),
            zone,
            period,
            index: VegIndex::Ndvi,
            mean: mean.ok_or(NotEvaluable::NoValidPixels),
            pixel_count: 1,
        }
    }

    #[test]
    fn periods() {
        assert_eq!(horizon_periods(-1), (-1, 0));
        assert_eq!(horizon_periods(5), (0, 5));
    }

    #[test]
    fn drops_incomplete_units() {
        let mut s = Vec::new();
        for site in ["a", "b"] {
            for zone in [Zone::Site, Zone::Annulus] {
                for p in [-1, 0, 1] {
                    let missing = site == "b" && zone == Zone::Annulus && p == 1;
                    s.push(rec(site, zone, p, (!missing).then_some(0.3)));
                }
            }
        }
        let p1 = build_did_panel(&s, VegIndex::Ndvi, 1);
        assert_eq!((p1.units, p1.dropped_units, p1.rows.len()), (1, 1, 4));
        let pm1 = build_did_panel(&s, VegIndex::Ndvi, -1);
        assert_eq!((pm1.units, pm1.rows.len()), (2, 8));
        assert!(build_did_panel(&s, VegIndex::Savi, 1).rows.is_empty());
    }
}
