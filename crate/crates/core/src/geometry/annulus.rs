//! Outer-buffer annulus: the ring-shaped zone between a polygon's boundary and
//! its outward offset.

use geo::{LineString, MultiPolygon, Polygon};

use super::frame::LocalFrame;
use super::planar::{polygon_area, polygon_contains, ring_centroid, ring_contains};
use crate::error::{Error, Result};
use crate::Scalar;

/// Default offset distance of the control annulus.
pub const DEFAULT_ANNULUS_M: f64 = 500.0;

/// Arc step used for round joins of the offset (one 64th of a turn).
const JOIN_STEP_RAD: f64 = std::f64::consts::TAU / 64.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Annulus<T: Scalar> {
    /// Lon/lat zone. The source polygon's own rings are reused verbatim as
    /// hole boundaries, so pixel-centre membership never overlaps the site.
    pub zone: MultiPolygon<T>,
    /// Area of the annulus on the local tangent plane.
    pub area_km2: T,
    pub offset_area_km2: T,
    pub inner_area_km2: T,
}

impl<T: Scalar> Annulus<T> {
    pub fn is_empty(&self) -> bool {
        self.zone.0.is_empty()
    }
}

/// Builds the annulus between `p` and its outward offset by `distance_m`.
///
/// The offset is computed on the tangent plane at the polygon centroid with
/// round joins. Holes of `p` that the offset reaches become islands of the
/// annulus.
pub fn outer_buffer_annulus<T: Scalar>(p: &Polygon<T>, distance_m: T) -> Result<Annulus<T>> {
    if !(distance_m >= T::zero()) {
        return Err(Error::InvalidInput(format!("annulus distance must be >= 0, got {distance_m}")));
    }
    let origin = ring_centroid(&p.exterior().0)
        .ok_or_else(|| Error::DegenerateGeometry("polygon without vertices".into()))?;
    let frame = LocalFrame::at(origin);
    let projected = frame.project_polygon(p);
    let inner_area = polygon_area(&projected);
    if !(inner_area > T::zero()) {
        return Err(Error::DegenerateGeometry("annulus requires a polygon with positive area".into()));
    }
    if distance_m == T::zero() {
        return Ok(Annulus {
            zone: MultiPolygon(vec![]),
            area_km2: T::zero(),
            offset_area_km2: inner_area,
            inner_area_km2: inner_area,
        });
    }

    let offset = T::offset_polygon(&projected, distance_m / T::lit(1000.0), T::lit(JOIN_STEP_RAD));
    if offset.0.len() != 1 {
        return Err(Error::Annulus(format!(
            "offset produced {} components, expected 1",
            offset.0.len()
        )));
    }
    let offset = &offset.0[0];
    let probe = projected.exterior().0[0];
    if !polygon_contains(offset, probe) {
        return Err(Error::Annulus("offset does not enclose the source polygon".into()));
    }

    // Offset holes either sit in the gaps left around the shell or inside one
    // of the source polygon's own holes.
    let mut main_holes: Vec<&LineString<T>> = Vec::new();
    let mut island_holes: Vec<Vec<&LineString<T>>> = vec![Vec::new(); projected.interiors().len()];
    for h in offset.interiors() {
        let Some(&v) = h.0.first() else { continue };
        match projected.interiors().iter().position(|ph| ring_contains(&ph.0, v)) {
            Some(k) => island_holes[k].push(h),
            None => main_holes.push(h),
        }
    }

    let mut planar_parts = Vec::with_capacity(1 + island_holes.len());
    let mut zone = Vec::with_capacity(1 + island_holes.len());

    let mut main_planar: Vec<LineString<T>> = main_holes.iter().map(|&h| h.clone()).collect();
    main_planar.push(projected.exterior().clone());
    planar_parts.push(Polygon::new(offset.exterior().clone(), main_planar));
    let mut main_ll: Vec<LineString<T>> = main_holes.iter().map(|&h| frame.unproject_line(h)).collect();
    main_ll.push(p.exterior().clone());
    zone.push(Polygon::new(frame.unproject_line(offset.exterior()), main_ll));

    for (k, holes) in island_holes.iter().enumerate() {
        planar_parts.push(Polygon::new(
            projected.interiors()[k].clone(),
            holes.iter().map(|&h| h.clone()).collect(),
        ));
        zone.push(Polygon::new(
            p.interiors()[k].clone(),
            holes.iter().map(|&h| frame.unproject_line(h)).collect(),
        ));
    }

    let area = planar_parts.iter().map(polygon_area).fold(T::zero(), |acc, a| acc + a);
    Ok(Annulus {
        zone: MultiPolygon(zone),
        area_km2: area,
        offset_area_km2: polygon_area(offset),
        inner_area_km2: inner_area,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::planar::polygon_contains;
    use approx::assert_relative_eq;
    use geo::Coord;

    fn km_square_at(lon: f64, lat: f64) -> Polygon<f64> {
        let frame = LocalFrame::at(Coord { x: lon, y: lat });
        let pts = [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5)];
        Polygon::new(
            LineString(pts.iter().map(|&(x, y)| frame.unproject(Coord { x, y })).collect()),
            vec![],
        )
    }

    #[test]
    fn square_annulus_area_matches_rounded_rectangle() {
        let sq = km_square_at(36.8, -1.3);
        let a = outer_buffer_annulus(&sq, 500.0).unwrap();
        let expected = 2.0 * 2.0 - (4.0 - std::f64::consts::PI) * 0.25 - 1.0;
        assert_relative_eq!(a.area_km2, expected, max_relative = 0.01);
        assert_relative_eq!(a.area_km2 + a.inner_area_km2, a.offset_area_km2, max_relative = 1e-9);
    }

    #[test]
    fn zero_distance_gives_empty_annulus() {
        let a = outer_buffer_annulus(&km_square_at(0.0, 0.0), 0.0).unwrap();
        assert!(a.is_empty());
        assert_eq!(a.area_km2, 0.0);
    }

    #[test]
    fn annulus_excludes_interior() {
        let sq = km_square_at(10.0, 45.0);
        let a = outer_buffer_annulus(&sq, 500.0).unwrap();
        let centre = Coord { x: 10.0, y: 45.0 };
        assert!(polygon_contains(&sq, centre));
        assert!(!a.zone.0.iter().any(|p| polygon_contains(p, centre)));
    }

    #[test]
    fn hole_reached_by_offset_becomes_island() {
        let frame = LocalFrame::at(Coord { x: 0.0, y: 0.0 });
        let ll = |pts: &[(f64, f64)]| LineString(pts.iter().map(|&(x, y)| frame.unproject(Coord { x, y })).collect());
        let shell = ll(&[(-3., -3.), (3., -3.), (3., 3.), (-3., 3.), (-3., -3.)]);
        let hole = ll(&[(-2., -2.), (-2., 2.), (2., 2.), (2., -2.), (-2., -2.)]);
        let p = Polygon::new(shell, vec![hole]);
        let a = outer_buffer_annulus(&p, 500.0).unwrap();
        assert_eq!(a.zone.0.len(), 2);
        assert_eq!(a.zone.0[1].interiors().len(), 1);
        assert_relative_eq!(a.area_km2 + a.inner_area_km2, a.offset_area_km2, max_relative = 1e-9);
    }

    #[test]
    fn negative_distance_is_rejected() {
        assert!(outer_buffer_annulus(&km_square_at(0.0, 0.0), -1.0).is_err());
    }
}
