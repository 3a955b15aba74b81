//! Intersection-over-own-area ratios between two polygons.

use geo::{Coord, MultiPolygon, Polygon, Rect};
use serde::{Deserialize, Serialize};

use super::index::rects_overlap;
use crate::error::{Error, Result};
use crate::geometry::frame::LocalFrame;
use crate::geometry::planar::{polygon_area, ring_centroid};
use crate::geometry::spherical_area_km2;
use crate::Scalar;

/// Chooses the surface on which intersection areas are measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OverlapOptions {
    /// Pairs whose joint bounding box spans less than this many degrees are
    /// measured on the tangent plane at their joint centroid; larger pairs
    /// use spherical areas.
    pub planar_max_span_deg: f64,
}

impl Default for OverlapOptions {
    fn default() -> Self {
        OverlapOptions { planar_max_span_deg: 5.0 }
    }
}

fn multi_bounds<T: Scalar>(mp: &MultiPolygon<T>) -> Option<Rect<T>> {
    let mut coords = mp.0.iter().flat_map(|p| p.exterior().0.iter());
    let first = *coords.next()?;
    let (mut min, mut max) = (first, first);
    for c in coords {
        min.x = min.x.min(c.x);
        min.y = min.y.min(c.y);
        max.x = max.x.max(c.x);
        max.y = max.y.max(c.y);
    }
    Some(Rect::new(min, max))
}

fn multi_centroid<T: Scalar>(mp: &MultiPolygon<T>) -> Option<Coord<T>> {
    let cs: Vec<Coord<T>> = mp.0.iter().filter_map(|p| ring_centroid(&p.exterior().0)).collect();
    if cs.is_empty() {
        return None;
    }
    let n = T::from_count(cs.len());
    let sum = cs.iter().fold(Coord { x: T::zero(), y: T::zero() }, |acc, &c| acc + c);
    Some(Coord { x: sum.x / n, y: sum.y / n })
}

fn planar_multi_area<T: Scalar>(mp: &MultiPolygon<T>) -> T {
    mp.0.iter().map(polygon_area).fold(T::zero(), |acc, a| acc + a)
}

fn spherical_multi_area<T: Scalar>(mp: &MultiPolygon<T>) -> T {
    mp.0.iter().map(spherical_area_km2).fold(T::zero(), |acc, a| acc + a)
}

fn clamp_unit<T: Scalar>(v: T) -> T {
    v.max(T::zero()).min(T::one())
}

/// `(area(a∩b)/area(a), area(a∩b)/area(b))` for lon/lat multipolygons.
pub fn multi_overlap_ratio<T: Scalar>(
    a: &MultiPolygon<T>,
    b: &MultiPolygon<T>,
    opts: &OverlapOptions,
) -> Result<(T, T)> {
    let (ba, bb) = match (multi_bounds(a), multi_bounds(b)) {
        (Some(ba), Some(bb)) => (ba, bb),
        _ => return Err(Error::DegenerateGeometry("polygon without vertices".into())),
    };
    let span_x = ba.max().x.max(bb.max().x) - ba.min().x.min(bb.min().x);
    let span_y = ba.max().y.max(bb.max().y) - ba.min().y.min(bb.min().y);
    let planar = span_x.max(span_y) < T::lit(opts.planar_max_span_deg);

    let (area_a, area_b, inter) = if planar {
        let (ca, cb) = match (multi_centroid(a), multi_centroid(b)) {
            (Some(ca), Some(cb)) => (ca, cb),
            _ => return Err(Error::DegenerateGeometry("polygon without vertices".into())),
        };
        let two = T::lit(2.0);
        let frame = LocalFrame::at(Coord {
            x: (ca.x + cb.x) / two,
            y: (ca.y + cb.y) / two,
        });
        let pa = frame.project_multi(a);
        let pb = frame.project_multi(b);
        let area_a = planar_multi_area(&pa);
        let area_b = planar_multi_area(&pb);
        let inter = if rects_overlap(&ba, &bb) && area_a > T::zero() && area_b > T::zero() {
            planar_multi_area(&T::intersection(&pa, &pb))
        } else {
            T::zero()
        };
        (area_a, area_b, inter)
    } else {
        let area_a = spherical_multi_area(a);
        let area_b = spherical_multi_area(b);
        let inter = if rects_overlap(&ba, &bb) && area_a > T::zero() && area_b > T::zero() {
            spherical_multi_area(&T::intersection(a, b))
        } else {
            T::zero()
        };
        (area_a, area_b, inter)
    };
    if !(area_a > T::zero()) || !(area_b > T::zero()) {
        return Err(Error::DegenerateGeometry("zero-area polygon in overlap test".into()));
    }
    if !inter.is_finite() {
        return Err(Error::DegenerateGeometry("non-finite intersection area".into()));
    }
    Ok((clamp_unit(inter / area_a), clamp_unit(inter / area_b)))
}

/// Ratios of the intersection area to each polygon's own area.
pub fn pairwise_overlap_ratio<T: Scalar>(a: &Polygon<T>, b: &Polygon<T>, opts: &OverlapOptions) -> Result<(T, T)> {
    multi_overlap_ratio(
        &MultiPolygon(vec![a.clone()]),
        &MultiPolygon(vec![b.clone()]),
        opts,
    )
}
