//! Georeferenced single-band grids and pixel-centre zonal statistics.

mod grid;
mod io;
mod zonal;

pub use grid::{GridLayer, GridSpec, Semantics};
pub use io::{parse_ascii_grid, read_ascii_grid, read_geotiff, read_grid, write_ascii_grid, write_geotiff};
pub use zonal::{class_fraction, fraction_where, polygon_mask, zonal_mean, zone_mask, ZoneMask};
