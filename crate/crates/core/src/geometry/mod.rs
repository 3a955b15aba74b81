//! Site geometry ingestion primitives: validity, circularity, derived
//! geometries (point buffers, outer-buffer annuli) and spherical measures.

pub mod annulus;
pub mod frame;
pub mod planar;
pub mod sphere;
pub mod validity;

use geo::{Coord, LineString, Polygon, Rect};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;
pub use annulus::{outer_buffer_annulus, Annulus, DEFAULT_ANNULUS_M};
pub use frame::LocalFrame;
pub use sphere::{spherical_area_km2, AUTHALIC_RADIUS_KM};
use validity::polygon_rings_defect;

/// Default geodesic radius of the disc substituted for point sites.
pub const POINT_BUFFER_M: f64 = 100.0;
/// Number of vertices used to discretise the point buffer.
pub const POINT_BUFFER_SEGMENTS: usize = 64;
/// Latitude beyond which a point buffer is not constructed.
pub const MAX_BUFFER_LATITUDE: f64 = 89.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    Point,
    Polygon,
    Multipart,
}

impl GeometryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GeometryKind::Point => "point",
            GeometryKind::Polygon => "polygon",
            GeometryKind::Multipart => "multipart",
        }
    }
}

/// Geometry exactly as supplied by the source. Rings are lon/lat degrees,
/// shell first.
#[derive(Debug, Clone, PartialEq)]
pub enum ReportedGeometry<T: Scalar> {
    Point(Coord<T>),
    Polygon(Vec<LineString<T>>),
    MultiPolygon(Vec<Vec<LineString<T>>>),
}

impl<T: Scalar> ReportedGeometry<T> {
    pub fn kind(&self) -> GeometryKind {
        match self {
            ReportedGeometry::Point(_) => GeometryKind::Point,
            ReportedGeometry::Polygon(_) => GeometryKind::Polygon,
            ReportedGeometry::MultiPolygon(_) => GeometryKind::Multipart,
        }
    }

    fn coords(&self) -> Vec<Coord<T>> {
        match self {
            ReportedGeometry::Point(c) => vec![*c],
            ReportedGeometry::Polygon(rings) => rings.iter().flat_map(|r| r.0.iter().copied()).collect(),
            ReportedGeometry::MultiPolygon(parts) => parts
                .iter()
                .flat_map(|rings| rings.iter().flat_map(|r| r.0.iter().copied()))
                .collect(),
        }
    }
}

/// A planting site's reported geometry together with its derived polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteGeometry<T: Scalar> {
    pub reported: ReportedGeometry<T>,
    /// Present for every site once [`derive_geometry`] has run.
    pub derived: Option<Polygon<T>>,
    pub centroid: Option<Coord<T>>,
}

impl<T: Scalar> SiteGeometry<T> {
    pub fn new(reported: ReportedGeometry<T>) -> Self {
        SiteGeometry {
            reported,
            derived: None,
            centroid: None,
        }
    }

    pub fn kind(&self) -> GeometryKind {
        self.reported.kind()
    }

    pub fn is_point_origin(&self) -> bool {
        matches!(self.reported, ReportedGeometry::Point(_))
    }

    pub fn bounding_rect(&self) -> Option<Rect<T>> {
        self.derived.as_ref().and_then(polygon_bounds)
    }
}

pub(crate) fn polygon_bounds<T: Scalar>(p: &Polygon<T>) -> Option<Rect<T>> {
    let mut it = p.exterior().0.iter();
    let first = *it.next()?;
    let (mut min, mut max) = (first, first);
    for c in it {
        min.x = min.x.min(c.x);
        min.y = min.y.min(c.y);
        max.x = max.x.max(c.x);
        max.y = max.y.max(c.y);
    }
    Some(Rect::new(min, max))
}

/// Geometric quality attributes of one site.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryQuality<T: Scalar> {
    pub is_valid: bool,
    /// Defined only for valid geometries.
    pub circularity: Option<T>,
    pub is_perfectly_circular: bool,
    pub is_point_origin: bool,
    pub area_km2: T,
    pub perimeter_km: T,
}

impl<T: Scalar> GeometryQuality<T> {
    fn validity_only(is_valid: bool, is_point_origin: bool) -> Self {
        GeometryQuality {
            is_valid,
            circularity: None,
            is_perfectly_circular: false,
            is_point_origin,
            area_km2: T::zero(),
            perimeter_km: T::zero(),
        }
    }
}

fn check_coordinates<T: Scalar>(g: &ReportedGeometry<T>, site: &str) -> Result<()> {
    for (vertex, c) in g.coords().iter().enumerate() {
        let reason = if !c.x.is_finite() || !c.y.is_finite() {
            "non-finite coordinate"
        } else if c.x < T::lit(-180.0) || c.x > T::lit(180.0) {
            "longitude outside [-180, 180]"
        } else if c.y < T::lit(-90.0) || c.y > T::lit(90.0) {
            "latitude outside [-90, 90]"
        } else {
            continue;
        };
        return Err(Error::InvalidCoordinate {
            site: site.to_string(),
            vertex,
            reason: reason.to_string(),
        });
    }
    Ok(())
}

/// Checks coordinates and polygon validity of the reported geometry.
///
/// A bare point is well-formed but is not a valid polygon until it has been
/// derived; only `is_valid` and `is_point_origin` are filled in.
pub fn validate_geometry<T: Scalar>(g: &SiteGeometry<T>, site: &str) -> Result<GeometryQuality<T>> {
    check_coordinates(&g.reported, site)?;
    let is_valid = match &g.reported {
        ReportedGeometry::Point(_) => false,
        ReportedGeometry::Polygon(rings) => polygon_rings_defect(rings).is_none(),
        ReportedGeometry::MultiPolygon(parts) => {
            !parts.is_empty() && parts.iter().all(|rings| polygon_rings_defect(rings).is_none())
        }
    };
    Ok(GeometryQuality::validity_only(is_valid, g.is_point_origin()))
}

/// Isoperimetric quotient `4πA/P²` of a planar polygon.
pub fn planar_circularity<T: Scalar>(p: &Polygon<T>) -> Option<T> {
    let area = planar::polygon_area(p);
    let perimeter = planar::polygon_perimeter(p);
    if !(area > T::zero()) || !(perimeter > T::zero()) {
        return None;
    }
    let four_pi = T::lit(4.0 * std::f64::consts::PI);
    Some((four_pi * area / (perimeter * perimeter)).min(T::one()))
}

fn circularity_unchecked<T: Scalar>(p: &Polygon<T>) -> Option<T> {
    let origin = planar::ring_centroid(&p.exterior().0)?;
    let frame = LocalFrame::at(origin);
    planar_circularity(&frame.project_polygon(p))
}

/// Circularity of a lon/lat polygon, evaluated on the tangent plane at its
/// centroid.
pub fn circularity<T: Scalar>(p: &Polygon<T>) -> Result<T> {
    let mut rings = vec![p.exterior().clone()];
    rings.extend(p.interiors().iter().cloned());
    if let Some(defect) = polygon_rings_defect(&rings) {
        return Err(Error::DegenerateGeometry(format!("invalid polygon: {defect:?}")));
    }
    circularity_unchecked(p).ok_or_else(|| Error::DegenerateGeometry("polygon has zero area".into()))
}

/// Full quality record for a derived site.
///
/// Polygon sites are judged on their reported rings; point sites on the
/// buffer polygon that replaced them.
pub fn assess_geometry<T: Scalar>(g: &SiteGeometry<T>, site: &str, circle_threshold: T) -> Result<GeometryQuality<T>> {
    let mut q = validate_geometry(g, site)?;
    let Some(derived) = g.derived.as_ref() else {
        return Ok(q);
    };
    if g.is_point_origin() {
        let mut rings = vec![derived.exterior().clone()];
        rings.extend(derived.interiors().iter().cloned());
        q.is_valid = polygon_rings_defect(&rings).is_none();
    }
    q.area_km2 = spherical_area_km2(derived);
    q.perimeter_km = std::iter::once(derived.exterior())
        .chain(derived.interiors())
        .map(sphere::line_length_km)
        .fold(T::zero(), |acc, l| acc + l);
    if q.is_valid {
        q.circularity = circularity_unchecked(derived);
        q.is_perfectly_circular = q.circularity.is_some_and(|c| c >= circle_threshold);
    }
    Ok(q)
}

/// Regular polygon approximating a geodesic disc around `center`.
pub fn point_buffer<T: Scalar>(center: Coord<T>, radius_km: T, segments: usize) -> Polygon<T> {
    let step = T::lit(360.0) / T::from_count(segments);
    // Bearings run anticlockwise so the ring is counter-clockwise.
    let mut ring: Vec<Coord<T>> = (0..segments)
        .map(|k| sphere::destination(center, -(step * T::from_count(k)), radius_km))
        .collect();
    ring.push(ring[0]);
    Polygon::new(LineString(ring), vec![])
}

fn close_ring<T: Scalar>(ring: &LineString<T>) -> LineString<T> {
    let mut pts = ring.0.clone();
    if let (Some(&first), Some(&last)) = (pts.first(), pts.last()) {
        if first != last {
            pts.push(first);
        }
    }
    LineString(pts)
}

fn polygon_from_rings<T: Scalar>(rings: &[LineString<T>]) -> Polygon<T> {
    let shell = rings.first().map(close_ring).unwrap_or_else(|| LineString(vec![]));
    let holes = rings.iter().skip(1).map(close_ring).collect();
    Polygon::new(shell, holes)
}

fn with_derived<T: Scalar>(reported: ReportedGeometry<T>, derived: Polygon<T>) -> SiteGeometry<T> {
    let centroid = planar::ring_centroid(&derived.exterior().0);
    SiteGeometry {
        reported,
        derived: Some(derived),
        centroid,
    }
}

/// Derives the analysis polygon for a site.
///
/// Points become a 64-gon of 100 m geodesic radius; polygons are copied (open
/// rings are closed); multipart geometries are split into one site geometry
/// per part, in input order.
pub fn derive_geometry<T: Scalar>(g: &SiteGeometry<T>, site: &str) -> Result<Vec<SiteGeometry<T>>> {
    derive_geometry_with(g, site, T::lit(POINT_BUFFER_M), POINT_BUFFER_SEGMENTS)
}

pub fn derive_geometry_with<T: Scalar>(
    g: &SiteGeometry<T>,
    site: &str,
    point_buffer_m: T,
    segments: usize,
) -> Result<Vec<SiteGeometry<T>>> {
    match &g.reported {
        ReportedGeometry::Point(c) => {
            if c.y.abs() > T::lit(MAX_BUFFER_LATITUDE) {
                return Err(Error::UnsupportedLatitude {
                    site: site.to_string(),
                    lat: c.y.as_f64(),
                });
            }
            let buffer = point_buffer(*c, point_buffer_m / T::lit(1000.0), segments);
            Ok(vec![SiteGeometry {
                reported: g.reported.clone(),
                derived: Some(buffer),
                centroid: Some(*c),
            }])
        }
        ReportedGeometry::Polygon(rings) => Ok(vec![with_derived(g.reported.clone(), polygon_from_rings(rings))]),
        ReportedGeometry::MultiPolygon(parts) => Ok(parts
            .iter()
            .map(|rings| with_derived(ReportedGeometry::Polygon(rings.clone()), polygon_from_rings(rings)))
            .collect()),
    }
}
