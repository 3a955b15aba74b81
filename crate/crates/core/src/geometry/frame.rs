//! Local tangent-plane frame used for planar measurements around a site.

use geo::{Coord, LineString, MultiPolygon, Polygon};

use super::sphere::AUTHALIC_RADIUS_KM;
use crate::Scalar;

/// Equirectangular projection about a reference point; planar units are km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame<T: Scalar> {
    origin: Coord<T>,
    km_per_deg_x: T,
    km_per_deg_y: T,
}

impl<T: Scalar> LocalFrame<T> {
    pub fn at(origin: Coord<T>) -> Self {
        let km_per_deg = T::lit(AUTHALIC_RADIUS_KM).to_radians();
        LocalFrame {
            origin,
            km_per_deg_x: km_per_deg * origin.y.to_radians().cos(),
            km_per_deg_y: km_per_deg,
        }
    }

    pub fn km_per_deg_x(&self) -> T {
        self.km_per_deg_x
    }

    pub fn km_per_deg_y(&self) -> T {
        self.km_per_deg_y
    }

    pub fn origin(&self) -> Coord<T> {
        self.origin
    }

    pub fn project(&self, c: Coord<T>) -> Coord<T> {
        Coord {
            x: (c.x - self.origin.x) * self.km_per_deg_x,
            y: (c.y - self.origin.y) * self.km_per_deg_y,
        }
    }

    pub fn unproject(&self, c: Coord<T>) -> Coord<T> {
        Coord {
            x: c.x / self.km_per_deg_x + self.origin.x,
            y: c.y / self.km_per_deg_y + self.origin.y,
        }
    }

    pub fn project_line(&self, line: &LineString<T>) -> LineString<T> {
        LineString(line.0.iter().map(|&c| self.project(c)).collect())
    }

    pub fn unproject_line(&self, line: &LineString<T>) -> LineString<T> {
        LineString(line.0.iter().map(|&c| self.unproject(c)).collect())
    }

    pub fn project_polygon(&self, p: &Polygon<T>) -> Polygon<T> {
        Polygon::new(
            self.project_line(p.exterior()),
            p.interiors().iter().map(|r| self.project_line(r)).collect(),
        )
    }

    pub fn unproject_polygon(&self, p: &Polygon<T>) -> Polygon<T> {
        Polygon::new(
            self.unproject_line(p.exterior()),
            p.interiors().iter().map(|r| self.unproject_line(r)).collect(),
        )
    }

    pub fn project_multi(&self, mp: &MultiPolygon<T>) -> MultiPolygon<T> {
        MultiPolygon(mp.0.iter().map(|p| self.project_polygon(p)).collect())
    }
}
