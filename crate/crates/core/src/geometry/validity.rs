//! Ring and polygon validity: closure, minimum size, non-zero area, and
//! absence of self-intersections.
//!
//! Edge pairs are pruned with a sort-and-sweep over x-extents before the
//! robust orientation tests run.

use geo::kernels::{Kernel, Orientation};
use geo::{Coord, GeoNum, LineString};

use super::planar::{ring_contains, ring_signed_area};
use crate::Scalar;

/// Why a ring or polygon failed validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingDefect {
    Open,
    TooFewVertices,
    ZeroArea,
    SelfIntersection,
    RingsCross,
    HoleOutsideShell,
}

fn orient<T: Scalar>(a: Coord<T>, b: Coord<T>, c: Coord<T>) -> Orientation {
    <T as GeoNum>::Ker::orient2d(a, b, c)
}

fn on_segment<T: Scalar>(a: Coord<T>, b: Coord<T>, p: Coord<T>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, including touching and collinear overlap.
pub fn segments_intersect<T: Scalar>(p1: Coord<T>, p2: Coord<T>, q1: Coord<T>, q2: Coord<T>) -> bool {
    let o1 = orient(p1, p2, q1);
    let o2 = orient(p1, p2, q2);
    let o3 = orient(q1, q2, p1);
    let o4 = orient(q1, q2, p2);
    use Orientation::Collinear;
    if o1 != o2 && o3 != o4 && o1 != Collinear && o2 != Collinear && o3 != Collinear && o4 != Collinear {
        return true;
    }
    (o1 == Collinear && on_segment(p1, p2, q1))
        || (o2 == Collinear && on_segment(p1, p2, q2))
        || (o3 == Collinear && on_segment(q1, q2, p1))
        || (o4 == Collinear && on_segment(q1, q2, p2))
}

#[derive(Clone, Copy)]
struct Edge<T: Scalar> {
    ring: usize,
    index: usize,
    a: Coord<T>,
    b: Coord<T>,
}

impl<T: Scalar> Edge<T> {
    fn min_x(&self) -> T {
        self.a.x.min(self.b.x)
    }
    fn max_x(&self) -> T {
        self.a.x.max(self.b.x)
    }
    fn y_overlaps(&self, other: &Self) -> bool {
        self.a.y.min(self.b.y) <= other.a.y.max(other.b.y) && other.a.y.min(other.b.y) <= self.a.y.max(self.b.y)
    }
}

/// Drops consecutive duplicate vertices; keeps the closing vertex.
fn dedup_ring<T: Scalar>(ring: &[Coord<T>]) -> Vec<Coord<T>> {
    let mut out: Vec<Coord<T>> = Vec::with_capacity(ring.len());
    for &c in ring {
        if out.last() != Some(&c) {
            out.push(c);
        }
    }
    out
}

fn check_ring_shape<T: Scalar>(ring: &[Coord<T>]) -> Result<Vec<Coord<T>>, RingDefect> {
    if ring.len() < 4 {
        return Err(if ring.len() >= 2 && ring.first() != ring.last() {
            RingDefect::Open
        } else {
            RingDefect::TooFewVertices
        });
    }
    if ring.first() != ring.last() {
        return Err(RingDefect::Open);
    }
    let dedup = dedup_ring(ring);
    if dedup.len() < 4 {
        return Err(RingDefect::TooFewVertices);
    }
    if ring_signed_area(&dedup) == T::zero() {
        return Err(RingDefect::ZeroArea);
    }
    Ok(dedup)
}

/// Validates the rings of one polygon (first ring is the shell).
pub fn polygon_rings_defect<T: Scalar>(rings: &[LineString<T>]) -> Option<RingDefect> {
    let mut cleaned = Vec::with_capacity(rings.len());
    for r in rings {
        match check_ring_shape(&r.0) {
            Ok(c) => cleaned.push(c),
            Err(d) => return Some(d),
        }
    }
    if cleaned.is_empty() {
        return Some(RingDefect::TooFewVertices);
    }
    let mut edges = Vec::new();
    let mut ring_sizes = Vec::with_capacity(cleaned.len());
    for (ri, ring) in cleaned.iter().enumerate() {
        ring_sizes.push(ring.len() - 1);
        for (i, w) in ring.windows(2).enumerate() {
            edges.push(Edge {
                ring: ri,
                index: i,
                a: w[0],
                b: w[1],
            });
        }
    }
    if let Some(d) = sweep_for_intersections(&edges, &ring_sizes) {
        return Some(d);
    }
    let shell = &cleaned[0];
    for hole in &cleaned[1..] {
        if !ring_contains(shell, hole[0]) {
            return Some(RingDefect::HoleOutsideShell);
        }
    }
    None
}

pub fn ring_is_valid<T: Scalar>(ring: &LineString<T>) -> bool {
    polygon_rings_defect(std::slice::from_ref(ring)).is_none()
}

fn adjacent(i: usize, j: usize, m: usize) -> bool {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    hi == lo + 1 || (lo == 0 && hi == m - 1)
}

fn sweep_for_intersections<T: Scalar>(edges: &[Edge<T>], ring_sizes: &[usize]) -> Option<RingDefect> {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&i, &j| {
        edges[i]
            .min_x()
            .partial_cmp(&edges[j].min_x())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for (k, &i) in order.iter().enumerate() {
        let ei = &edges[i];
        let max_x = ei.max_x();
        for &j in &order[k + 1..] {
            let ej = &edges[j];
            if ej.min_x() > max_x {
                break;
            }
            if !ei.y_overlaps(ej) {
                continue;
            }
            if let Some(d) = pair_defect(ei, ej, ring_sizes) {
                return Some(d);
            }
        }
    }
    None
}

fn pair_defect<T: Scalar>(e1: &Edge<T>, e2: &Edge<T>, ring_sizes: &[usize]) -> Option<RingDefect> {
    if e1.ring != e2.ring {
        return segments_intersect(e1.a, e1.b, e2.a, e2.b).then_some(RingDefect::RingsCross);
    }
    let m = ring_sizes[e1.ring];
    if adjacent(e1.index, e2.index, m) {
        // Consecutive edges share one vertex; they are only invalid when the
        // path doubles back over itself.
        let (first, second) = if e2.index == (e1.index + 1) % m { (e1, e2) } else { (e2, e1) };
        let (a, b, c) = (first.a, first.b, second.b);
        if m == 2 {
            return Some(RingDefect::SelfIntersection);
        }
        if orient(a, b, c) == Orientation::Collinear {
            let dot = (a.x - b.x) * (c.x - b.x) + (a.y - b.y) * (c.y - b.y);
            if dot > T::zero() {
                return Some(RingDefect::SelfIntersection);
            }
        }
        return None;
    }
    segments_intersect(e1.a, e1.b, e2.a, e2.b).then_some(RingDefect::SelfIntersection)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(pts: &[(f64, f64)]) -> LineString<f64> {
        LineString(pts.iter().map(|&(x, y)| Coord { x, y }).collect())
    }

    #[test]
    fn unit_square_is_valid() {
        let sq = ring(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.), (0., 0.)]);
        assert!(ring_is_valid(&sq));
    }

    #[test]
    fn open_ring_is_invalid() {
        let sq = ring(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)]);
        assert_eq!(polygon_rings_defect(&[sq]), Some(RingDefect::Open));
    }

    #[test]
    fn bow_tie_is_invalid() {
        let bt = ring(&[(0., 0.), (2., 1.), (2., 0.), (0., 1.), (0., 0.)]);
        let skew = ring(&[(0., 0.), (3., 1.), (3., 0.), (0., 2.), (0., 0.)]);
        assert_eq!(polygon_rings_defect(&[skew]), Some(RingDefect::SelfIntersection));
        assert!(polygon_rings_defect(&[bt]).is_some());
    }

    #[test]
    fn spike_is_invalid() {
        let sp = ring(&[(0., 0.), (2., 0.), (1., 0.), (1., 1.), (0., 0.)]);
        assert!(!ring_is_valid(&sp));
    }

    #[test]
    fn flat_ring_has_zero_area() {
        let flat = ring(&[(0., 0.), (1., 0.), (2., 0.), (0., 0.)]);
        assert_eq!(polygon_rings_defect(&[flat]), Some(RingDefect::ZeroArea));
    }

    #[test]
    fn hole_handling() {
        let shell = ring(&[(0., 0.), (4., 0.), (4., 4.), (0., 4.), (0., 0.)]);
        let hole = ring(&[(1., 1.), (1., 2.), (2., 2.), (2., 1.), (1., 1.)]);
        assert_eq!(polygon_rings_defect(&[shell.clone(), hole]), None);
        let outside = ring(&[(5., 5.), (5., 6.), (6., 6.), (6., 5.), (5., 5.)]);
        assert_eq!(
            polygon_rings_defect(&[shell.clone(), outside]),
            Some(RingDefect::HoleOutsideShell)
        );
        let crossing = ring(&[(3., 3.), (3., 5.), (5., 5.), (5., 3.), (3., 3.)]);
        assert_eq!(polygon_rings_defect(&[shell, crossing]), Some(RingDefect::RingsCross));
    }

    #[test]
    fn repeated_vertices_are_tolerated() {
        let sq = ring(&[(0., 0.), (1., 0.), (1., 0.), (1., 1.), (0., 1.), (0., 0.)]);
        assert!(ring_is_valid(&sq));
    }
}
