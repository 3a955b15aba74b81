//! Matching site polygons against administrative boundaries.

use geo::{MultiPolygon, Polygon, Rect};
use rstar::primitives::{GeomWithData, Rectangle};
use rstar::RTree;
use serde::Serialize;

use super::index::{rect_envelope, rects_overlap};
use super::overlap::{multi_overlap_ratio, OverlapOptions};
use crate::error::Result;
use crate::geometry::polygon_bounds;
use crate::Scalar;

/// Both ratios must exceed this for a site to equal an admin unit.
pub const ADMIN_MATCH_THRESHOLD: f64 = 0.98;

#[derive(Debug, Clone, PartialEq)]
pub struct AdminUnit<T: Scalar> {
    pub id: String,
    pub geometry: MultiPolygon<T>,
}

#[derive(Debug)]
pub struct AdminLayer<T: Scalar> {
    units: Vec<AdminUnit<T>>,
    bounds: Vec<Option<Rect<T>>>,
    tree: RTree<GeomWithData<Rectangle<[T; 2]>, usize>>,
}

fn multi_rect<T: Scalar>(mp: &MultiPolygon<T>) -> Option<Rect<T>> {
    let mut out: Option<Rect<T>> = None;
    for p in &mp.0 {
        if let Some(r) = polygon_bounds(p) {
            out = Some(match out {
                None => r,
                Some(o) => Rect::new(
                    geo::Coord { x: o.min().x.min(r.min().x), y: o.min().y.min(r.min().y) },
                    geo::Coord { x: o.max().x.max(r.max().x), y: o.max().y.max(r.max().y) },
                ),
            });
        }
    }
    out
}

impl<T: Scalar> AdminLayer<T> {
    pub fn new(units: Vec<AdminUnit<T>>) -> Self {
        let bounds: Vec<Option<Rect<T>>> = units.iter().map(|u| multi_rect(&u.geometry)).collect();
        let entries = bounds
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.map(|r| GeomWithData::new(Rectangle::from_aabb(rect_envelope(&r)), i)))
            .collect();
        AdminLayer {
            units,
            bounds,
            tree: RTree::bulk_load(entries),
        }
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn units(&self) -> &[AdminUnit<T>] {
        &self.units
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdminMatch<T: Scalar> {
    pub unit_id: String,
    /// Share of the site inside the unit.
    pub site_ratio: T,
    /// Share of the unit inside the site.
    pub unit_ratio: T,
    /// Both ratios above the match threshold.
    pub matched: bool,
}

/// Best-overlapping admin unit for a site polygon.
///
/// Returns `Ok(None)` when the layer is empty (the check cannot be evaluated).
/// A site that touches no unit yields a zero-ratio, unmatched result with an
/// empty unit id. The best unit maximizes the smaller of the two ratios; ties
/// go to the smaller unit id.
pub fn admin_area_match<T: Scalar>(
    site: &Polygon<T>,
    layer: &AdminLayer<T>,
    threshold: T,
    opts: &OverlapOptions,
) -> Result<Option<AdminMatch<T>>> {
    if layer.is_empty() {
        return Ok(None);
    }
    let Some(sb) = polygon_bounds(site) else {
        return Ok(Some(AdminMatch { unit_id: String::new(), site_ratio: T::zero(), unit_ratio: T::zero(), matched: false }));
    };
    let site_mp = MultiPolygon(vec![site.clone()]);
    let mut best: Option<AdminMatch<T>> = None;
    let mut best_key = T::zero();
    let mut hits: Vec<usize> = layer
        .tree
        .locate_in_envelope_intersecting(&rect_envelope(&sb))
        .map(|e| e.data)
        .collect();
    hits.sort_unstable();
    for i in hits {
        let unit = &layer.units[i];
        match layer.bounds[i] {
            Some(ub) if rects_overlap(&sb, &ub) => {}
            _ => continue,
        }
        let (rs, ru) = multi_overlap_ratio(&site_mp, &unit.geometry, opts)?;
        let key = rs.min(ru);
        let better = match &best {
            None => true,
            Some(b) => key > best_key || (key == best_key && unit.id < b.unit_id),
        };
        if better {
            best_key = key;
            best = Some(AdminMatch {
                unit_id: unit.id.clone(),
                site_ratio: rs,
                unit_ratio: ru,
                matched: rs > threshold && ru > threshold,
            });
        }
    }
    Ok(Some(best.unwrap_or(AdminMatch {
        unit_id: String::new(),
        site_ratio: T::zero(),
        unit_ratio: T::zero(),
        matched: false,
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use geo::{Coord, LineString};

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon<f64> {
        Polygon::new(
            LineString(vec![
                Coord { x: x0, y: y0 },
                Coord { x: x1, y: y0 },
                Coord { x: x1, y: y1 },
                Coord { x: x0, y: y1 },
                Coord { x: x0, y: y0 },
            ]),
            vec![],
        )
    }

    fn layer() -> AdminLayer<f64> {
        AdminLayer::new(vec![
            AdminUnit { id: "u1".into(), geometry: MultiPolygon(vec![rect(0.0, 0.0, 0.1, 0.1)]) },
            AdminUnit { id: "u2".into(), geometry: MultiPolygon(vec![rect(0.1, 0.0, 0.2, 0.1)]) },
        ])
    }

    #[test]
    fn exact_copy_matches() {
        let m = admin_area_match(&rect(0.0, 0.0, 0.1, 0.1), &layer(), 0.98, &OverlapOptions::default())
            .unwrap()
            .unwrap();
        assert_eq!(m.unit_id, "u1");
        assert!(m.matched);
    }

    #[test]
    fn small_site_does_not_match() {
        let m = admin_area_match(&rect(0.01, 0.01, 0.02, 0.02), &layer(), 0.98, &OverlapOptions::default())
            .unwrap()
            .unwrap();
        assert_eq!(m.unit_id, "u1");
        assert!(!m.matched);
        assert!(m.site_ratio > 0.99);
    }

    #[test]
    fn empty_layer_is_not_evaluable() {
        let empty = AdminLayer::new(vec![]);
        assert!(admin_area_match(&rect(0.0, 0.0, 1.0, 1.0), &empty, 0.98, &OverlapOptions::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn outside_all_units() {
        let m = admin_area_match(&rect(5.0, 5.0, 5.1, 5.1), &layer(), 0.98, &OverlapOptions::default())
            .unwrap()
            .unwrap();
        assert_eq!(m.unit_id, "");
        assert!(!m.matched);
    }
}
