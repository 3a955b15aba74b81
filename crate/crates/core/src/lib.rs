//! Location-data integrity scoring for georeferenced reforestation planting
//! sites.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the pipeline and file formats use.

pub mod augment;
pub mod error;
pub mod geometry;
pub mod ids;
pub mod pipeline;
pub mod raster;
pub mod relations;
pub mod scalar;
pub mod scoring;
pub mod stats;
pub mod vegetation;

pub use error::{Error, Evaluated, NotEvaluable, Result};
pub use ids::SiteId;
pub use scalar::Scalar;

pub type SiteGeometry = geometry::SiteGeometry<f64>;
pub type GeometryQuality = geometry::GeometryQuality<f64>;
pub type Annulus = geometry::Annulus<f64>;
