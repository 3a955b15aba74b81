//! Measures on the authalic sphere.
//!
//! All inputs are WGS84 longitude/latitude in degrees; outputs are kilometres
//! or square kilometres.

use std::cmp::Ordering;

use geo::{Coord, LineString, Polygon};

use crate::Scalar;

/// Radius of the sphere with the same surface area as the WGS84 ellipsoid.
pub const AUTHALIC_RADIUS_KM: f64 = 6371.0088;

/// Great-circle distance between two lon/lat points (haversine).
pub fn haversine_km<T: Scalar>(a: Coord<T>, b: Coord<T>) -> T {
    let r = T::lit(AUTHALIC_RADIUS_KM);
    let (lat1, lat2) = (a.y.to_radians(), b.y.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.x - a.x).to_radians();
    let two = T::lit(2.0);
    let h = (dlat / two).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / two).sin().powi(2);
    two * r * h.sqrt().min(T::one()).asin()
}

/// Length of a lon/lat line string along great circles.
pub fn line_length_km<T: Scalar>(line: &LineString<T>) -> T {
    line.0
        .windows(2)
        .map(|w| haversine_km(w[0], w[1]))
        .fold(T::zero(), |acc, d| acc + d)
}

/// Point reached from `origin` after travelling `distance_km` along the initial
/// `bearing_deg` (clockwise from north).
pub fn destination<T: Scalar>(origin: Coord<T>, bearing_deg: T, distance_km: T) -> Coord<T> {
    let delta = distance_km / T::lit(AUTHALIC_RADIUS_KM);
    let theta = bearing_deg.to_radians();
    let lat1 = origin.y.to_radians();
    let lon1 = origin.x.to_radians();
    let lat2 = (lat1.sin() * delta.cos() + lat1.cos() * delta.sin() * theta.cos()).asin();
    let lon2 = lon1
        + (theta.sin() * delta.sin() * lat1.cos()).atan2(delta.cos() - lat1.sin() * lat2.sin());
    Coord {
        x: normalize_lon(lon2.to_degrees()),
        y: lat2.to_degrees(),
    }
}

fn normalize_lon<T: Scalar>(lon: T) -> T {
    let full = T::lit(360.0);
    let half = T::lit(180.0);
    if lon > half {
        lon - full
    } else if lon < -half {
        lon + full
    } else {
        lon
    }
}

/// Unsigned area of a ring (great-circle edges) in km².
///
/// The ring is canonicalised before summation (start vertex and traversal
/// direction), so the result is bit-identical for any rotation or reversal of
/// the same vertex cycle.
pub fn ring_area_km2<T: Scalar>(ring: &[Coord<T>]) -> T {
    let cycle = canonical_cycle(ring);
    if cycle.len() < 3 {
        return T::zero();
    }
    let r = T::lit(AUTHALIC_RADIUS_KM);
    let excess = (0..cycle.len())
        .map(|i| edge_excess(cycle[i], cycle[(i + 1) % cycle.len()]))
        .fold(T::zero(), |acc, e| acc + e);
    (excess * r * r).abs()
}

/// Area of a lon/lat polygon with holes on the authalic sphere, in km².
pub fn spherical_area_km2<T: Scalar>(polygon: &Polygon<T>) -> T {
    let outer = ring_area_km2(&polygon.exterior().0);
    let holes = polygon
        .interiors()
        .iter()
        .map(|h| ring_area_km2(&h.0))
        .fold(T::zero(), |acc, a| acc + a);
    (outer - holes).max(T::zero())
}

/// Signed spherical excess of the trapezoid between an edge and the equator.
fn edge_excess<T: Scalar>(a: Coord<T>, b: Coord<T>) -> T {
    let two = T::lit(2.0);
    let mut dlon = (b.x - a.x).to_radians();
    let pi = T::lit(std::f64::consts::PI);
    if dlon > pi {
        dlon = dlon - two * pi;
    } else if dlon < -pi {
        dlon = dlon + two * pi;
    }
    let t1 = (a.y.to_radians() / two).tan();
    let t2 = (b.y.to_radians() / two).tan();
    two * ((dlon / two).tan() * (t1 + t2)).atan2(T::one() + t1 * t2)
}

fn cmp_coord<T: Scalar>(a: &Coord<T>, b: &Coord<T>) -> Ordering {
    a.x.partial_cmp(&b.x)
        .unwrap_or(Ordering::Equal)
        .then(a.y.partial_cmp(&b.y).unwrap_or(Ordering::Equal))
}

/// Vertex cycle without the closing vertex, starting at the lexicographically
/// smallest vertex and heading towards its smaller neighbour.
fn canonical_cycle<T: Scalar>(ring: &[Coord<T>]) -> Vec<Coord<T>> {
    let mut pts: Vec<Coord<T>> = ring.to_vec();
    if pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
    let n = pts.len();
    if n < 3 {
        return pts;
    }
    let start = (0..n)
        .min_by(|&i, &j| cmp_coord(&pts[i], &pts[j]).then(i.cmp(&j)))
        .unwrap_or(0);
    let next = pts[(start + 1) % n];
    let prev = pts[(start + n - 1) % n];
    let forward = cmp_coord(&next, &prev) != Ordering::Greater;
    (0..n)
        .map(|k| {
            if forward {
                pts[(start + k) % n]
            } else {
                pts[(start + n - k) % n]
            }
        })
        .collect()
}
