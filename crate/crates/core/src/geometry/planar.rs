//! Planar primitives on coordinate slices.

use geo::{Coord, Polygon};

use crate::Scalar;

/// Signed shoelace area; positive for counter-clockwise rings. Accepts open or
/// closed rings.
pub fn ring_signed_area<T: Scalar>(ring: &[Coord<T>]) -> T {
    let n = ring.len();
    if n < 3 {
        return T::zero();
    }
    // relative to the first vertex, so rings far from the origin keep their digits
    let o = ring[0];
    let mut twice = T::zero();
    for i in 1..n - 1 {
        let (a, b) = (ring[i] - o, ring[i + 1] - o);
        twice = twice + (a.x * b.y - b.x * a.y);
    }
    twice / T::lit(2.0)
}

pub fn ring_perimeter<T: Scalar>(ring: &[Coord<T>]) -> T {
    let n = ring.len();
    if n < 2 {
        return T::zero();
    }
    let mut total = T::zero();
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        total = total + (b.x - a.x).hypot(b.y - a.y);
    }
    total
}

pub fn polygon_area<T: Scalar>(p: &Polygon<T>) -> T {
    let outer = ring_signed_area(&p.exterior().0).abs();
    p.interiors()
        .iter()
        .fold(outer, |acc, h| acc - ring_signed_area(&h.0).abs())
}

pub fn polygon_perimeter<T: Scalar>(p: &Polygon<T>) -> T {
    p.interiors()
        .iter()
        .fold(ring_perimeter(&p.exterior().0), |acc, h| acc + ring_perimeter(&h.0))
}

/// Crossing-number test (W. R. Franklin's formulation).
///
/// The zonal rasteriser evaluates exactly the same expression per row, so the
/// two agree bit-for-bit on which pixel centres fall inside.
pub fn ring_contains<T: Scalar>(ring: &[Coord<T>], p: Coord<T>) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (vi, vj) = (ring[i], ring[j]);
        if (vi.y > p.y) != (vj.y > p.y) && p.x < (vj.x - vi.x) * (p.y - vi.y) / (vj.y - vi.y) + vi.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Even-odd containment over all rings of a polygon.
pub fn polygon_contains<T: Scalar>(p: &Polygon<T>, c: Coord<T>) -> bool {
    let mut inside = ring_contains(&p.exterior().0, c);
    for h in p.interiors() {
        if ring_contains(&h.0, c) {
            inside = !inside;
        }
    }
    inside
}

/// Area centroid of a ring; falls back to the vertex mean when the ring has
/// no area.
pub fn ring_centroid<T: Scalar>(ring: &[Coord<T>]) -> Option<Coord<T>> {
    let pts: &[Coord<T>] = if ring.len() > 1 && ring.first() == ring.last() {
        &ring[..ring.len() - 1]
    } else {
        ring
    };
    if pts.is_empty() {
        return None;
    }
    // Shift to the first vertex to limit cancellation.
    let o = pts[0];
    let n = pts.len();
    let (mut a2, mut cx, mut cy) = (T::zero(), T::zero(), T::zero());
    for i in 0..n {
        let p = pts[i] - o;
        let q = pts[(i + 1) % n] - o;
        let cross = p.x * q.y - q.x * p.y;
        a2 = a2 + cross;
        cx = cx + (p.x + q.x) * cross;
        cy = cy + (p.y + q.y) * cross;
    }
    if a2 != T::zero() && a2.is_finite() {
        let k = T::lit(3.0) * a2;
        return Some(Coord {
            x: o.x + cx / k,
            y: o.y + cy / k,
        });
    }
    let count = T::from_count(n);
    let sum = pts.iter().fold(Coord { x: T::zero(), y: T::zero() }, |acc, &c| acc + c);
    Some(Coord {
        x: sum.x / count,
        y: sum.y / count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> Coord<f64> {
        Coord { x, y }
    }

    #[test]
    fn unit_square_measures() {
        let sq = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)];
        assert_eq!(ring_signed_area(&sq), 1.0);
        assert_eq!(ring_perimeter(&sq), 4.0);
        assert_eq!(ring_centroid(&sq), Some(c(0.5, 0.5)));
        assert!(ring_contains(&sq, c(0.5, 0.5)));
        assert!(!ring_contains(&sq, c(1.5, 0.5)));
    }

    #[test]
    fn clockwise_ring_is_negative() {
        let sq = [c(0.0, 0.0), c(0.0, 1.0), c(1.0, 1.0), c(1.0, 0.0)];
        assert_eq!(ring_signed_area(&sq), -1.0);
    }
}
