//! Road length and buffered road area inside a zone.

use geo::{Coord, LineString, MultiLineString, MultiPolygon, Polygon, Rect};
use rstar::primitives::{GeomWithData, Rectangle};
use rstar::RTree;

use crate::error::{Evaluated, NotEvaluable};
use crate::geometry::frame::LocalFrame;
use crate::geometry::planar::{polygon_area, polygon_contains, ring_centroid};
use crate::geometry::polygon_bounds;
use crate::Scalar;

/// Arc step for round joins of buffered roads.
const JOIN_STEP_RAD: f64 = std::f64::consts::TAU / 64.0;

/// Road polylines in lon/lat with a bounding-box index.
#[derive(Debug)]
pub struct RoadLayer<T: Scalar> {
    lines: Vec<LineString<T>>,
    tree: RTree<GeomWithData<Rectangle<[T; 2]>, usize>>,
}

fn line_bounds<T: Scalar>(l: &LineString<T>) -> Option<Rect<T>> {
    let first = *l.0.first()?;
    let (mut min, mut max) = (first, first);
    for c in &l.0 {
        min.x = min.x.min(c.x);
        min.y = min.y.min(c.y);
        max.x = max.x.max(c.x);
        max.y = max.y.max(c.y);
    }
    Some(Rect::new(min, max))
}

impl<T: Scalar> RoadLayer<T> {
    pub fn new(lines: Vec<LineString<T>>) -> Self {
        let entries = lines
            .iter()
            .enumerate()
            .filter_map(|(i, l)| {
                line_bounds(l).map(|r| {
                    GeomWithData::new(Rectangle::from_corners([r.min().x, r.min().y], [r.max().x, r.max().y]), i)
                })
            })
            .collect();
        RoadLayer {
            lines,
            tree: RTree::bulk_load(entries),
        }
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn lines(&self) -> &[LineString<T>] {
        &self.lines
    }

    /// Lines whose bounding box meets `r`, in layer order.
    fn candidates(&self, r: &Rect<T>) -> Vec<&LineString<T>> {
        let env = rstar::AABB::from_corners([r.min().x, r.min().y], [r.max().x, r.max().y]);
        let mut idx: Vec<usize> = self.tree.locate_in_envelope_intersecting(&env).map(|e| e.data).collect();
        idx.sort_unstable();
        idx.into_iter().map(|i| &self.lines[i]).collect()
    }
}

fn zone_frame<T: Scalar>(zone: &Polygon<T>) -> Option<LocalFrame<T>> {
    ring_centroid(&zone.exterior().0).map(LocalFrame::at)
}

/// Length of segment `a`-`b` inside `zone` (planar, same units as input).
fn clipped_segment_length<T: Scalar>(a: Coord<T>, b: Coord<T>, zone: &Polygon<T>) -> T {
    let d = b - a;
    let len = d.x.hypot(d.y);
    if !(len > T::zero()) {
        return T::zero();
    }
    let mut ts = vec![T::zero(), T::one()];
    for ring in std::iter::once(zone.exterior()).chain(zone.interiors()) {
        for e in ring.lines() {
            let (p, q) = (e.start, e.end);
            let r = q - p;
            let denom = d.x * r.y - d.y * r.x;
            if denom == T::zero() {
                continue;
            }
            let w = p - a;
            let t = (w.x * r.y - w.y * r.x) / denom;
            let u = (w.x * d.y - w.y * d.x) / denom;
            if t > T::zero() && t < T::one() && u >= T::zero() && u <= T::one() {
                ts.push(t);
            }
        }
    }
    ts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let half = T::lit(0.5);
    let mut inside = T::zero();
    for w in ts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 <= t0 {
            continue;
        }
        let tm = (t0 + t1) * half;
        let mid = Coord {
            x: a.x + d.x * tm,
            y: a.y + d.y * tm,
        };
        if polygon_contains(zone, mid) {
            inside = inside + (t1 - t0) * len;
        }
    }
    inside
}

/// Total road length (km) inside `zone`, measured on the zone's tangent plane.
pub fn clipped_road_length<T: Scalar>(roads: &RoadLayer<T>, zone: &Polygon<T>) -> Evaluated<T> {
    if roads.is_empty() {
        return Err(NotEvaluable::LayerMissing);
    }
    let bounds = polygon_bounds(zone).ok_or(NotEvaluable::InvalidGeometry)?;
    let frame = zone_frame(zone).ok_or(NotEvaluable::InvalidGeometry)?;
    let pz = frame.project_polygon(zone);
    let mut total = T::zero();
    for line in roads.candidates(&bounds) {
        let pl = frame.project_line(line);
        for seg in pl.lines() {
            total = total + clipped_segment_length(seg.start, seg.end, &pz);
        }
    }
    Ok(total)
}

/// Road kilometres per square kilometre of zone.
pub fn road_density<T: Scalar>(roads: &RoadLayer<T>, zone: &Polygon<T>) -> Evaluated<T> {
    let length = clipped_road_length(roads, zone)?;
    let frame = zone_frame(zone).ok_or(NotEvaluable::InvalidGeometry)?;
    let area = polygon_area(&frame.project_polygon(zone));
    if !(area > T::zero()) {
        return Err(NotEvaluable::InvalidGeometry);
    }
    Ok(length / area)
}

/// Share of the zone covered by roads buffered by `buffer_m` on each side.
pub fn road_area_fraction<T: Scalar>(roads: &RoadLayer<T>, zone: &Polygon<T>, buffer_m: T) -> Evaluated<T> {
    if roads.is_empty() {
        return Err(NotEvaluable::LayerMissing);
    }
    let bounds = polygon_bounds(zone).ok_or(NotEvaluable::InvalidGeometry)?;
    let frame = zone_frame(zone).ok_or(NotEvaluable::InvalidGeometry)?;
    let pz = frame.project_polygon(zone);
    let area = polygon_area(&pz);
    if !(area > T::zero()) {
        return Err(NotEvaluable::InvalidGeometry);
    }
    // Roads up to buffer_m outside the zone still reach into it.
    let pad = buffer_m / T::lit(1000.0);
    let pad_deg_y = pad / frame.km_per_deg_y();
    let pad_deg_x = pad / frame.km_per_deg_x().max(T::lit(1e-9));
    let grown = Rect::new(
        Coord { x: bounds.min().x - pad_deg_x, y: bounds.min().y - pad_deg_y },
        Coord { x: bounds.max().x + pad_deg_x, y: bounds.max().y + pad_deg_y },
    );
    let lines: Vec<LineString<T>> = roads.candidates(&grown).into_iter().map(|l| frame.project_line(l)).collect();
    if lines.is_empty() || !(buffer_m > T::zero()) {
        return Ok(T::zero());
    }
    let buffered = T::buffer_lines(&MultiLineString(lines), pad, T::lit(JOIN_STEP_RAD));
    let covered = T::intersection(&buffered, &MultiPolygon(vec![pz]));
    let inter: T = covered.0.iter().map(polygon_area).fold(T::zero(), |a, b| a + b);
    Ok((inter / area).max(T::zero()).min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn km_square(frame: &LocalFrame<f64>, half: f64) -> Polygon<f64> {
        let pts = [(-half, -half), (half, -half), (half, half), (-half, half), (-half, -half)];
        Polygon::new(
            LineString(pts.iter().map(|&(x, y)| frame.unproject(Coord { x, y })).collect()),
            vec![],
        )
    }

    fn line(frame: &LocalFrame<f64>, pts: &[(f64, f64)]) -> LineString<f64> {
        LineString(pts.iter().map(|&(x, y)| frame.unproject(Coord { x, y })).collect())
    }

    #[test]
    fn two_km_polyline_in_unit_square() {
        let f = LocalFrame::at(Coord { x: 36.0, y: -1.0 });
        let zone = km_square(&f, 0.5);
        // 0.9 + 0.9 + 0.2 km
        let road = line(&f, &[(-0.45, -0.45), (0.45, -0.45), (0.45, 0.45), (0.25, 0.45)]);
        let layer = RoadLayer::new(vec![road]);
        assert_relative_eq!(road_density(&layer, &zone).unwrap(), 2.0, max_relative = 1e-9);
        let long = line(&f, &[(-0.45, -0.45), (0.45, -0.45), (0.45, 0.45), (-0.45, 0.45), (-0.45, 0.25)]);
        let layer = RoadLayer::new(vec![long]);
        assert_relative_eq!(road_density(&layer, &zone).unwrap(), 2.9, max_relative = 1e-6);
    }

    #[test]
    fn no_intersection_is_zero_and_empty_layer_is_na() {
        let f = LocalFrame::at(Coord { x: 0.0, y: 0.0 });
        let zone = km_square(&f, 0.5);
        let layer = RoadLayer::new(vec![line(&f, &[(2.0, 2.0), (3.0, 3.0)])]);
        assert_eq!(road_density(&layer, &zone).unwrap(), 0.0);
        let empty = RoadLayer::new(vec![]);
        assert_eq!(road_density(&empty, &zone), Err(NotEvaluable::LayerMissing));
    }

    #[test]
    fn crossing_segment_partial_length() {
        let f = LocalFrame::at(Coord { x: 0.0, y: 0.0 });
        let zone = km_square(&f, 0.5);
        // 2.5 km long, 1 km of it inside
        let layer = RoadLayer::new(vec![line(&f, &[(-1.0, 0.0), (1.5, 0.0)])]);
        assert_relative_eq!(clipped_road_length(&layer, &zone).unwrap(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn buffered_fraction() {
        let f = LocalFrame::at(Coord { x: 0.0, y: 0.0 });
        let zone = km_square(&f, 0.5);
        let layer = RoadLayer::new(vec![line(&f, &[(-1.0, 0.0), (1.0, 0.0)])]);
        // a 100 m wide strip across a 1 km square
        assert_relative_eq!(road_area_fraction(&layer, &zone, 50.0).unwrap(), 0.1, max_relative = 1e-6);
    }
}
