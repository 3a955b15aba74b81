//! Elevation and slope statistics from a DEM.

use serde::Serialize;

use crate::error::{Evaluated, NotEvaluable};
use crate::geometry::sphere::AUTHALIC_RADIUS_KM;
use crate::raster::{GridLayer, ZoneMask};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TerrainStats<T: Scalar> {
    pub mean_elevation_m: T,
    pub mean_slope_deg: T,
    pub pixel_count: usize,
}

/// Horn slope (degrees) at a cell. Off-grid or missing neighbours take the
/// centre value.
pub fn horn_slope_deg<T: Scalar>(dem: &GridLayer<T>, row: usize, col: usize) -> T {
    let s = &dem.spec;
    let z0 = dem.get(row, col);
    let at = |dr: isize, dc: isize| -> T {
        let (r, c) = (row as isize + dr, col as isize + dc);
        if r < 0 || c < 0 || r >= s.height as isize || c >= s.width as isize {
            return z0;
        }
        let v = dem.get(r as usize, c as usize);
        if dem.is_valid(v) {
            v
        } else {
            z0
        }
    };
    let (z1, z2, z3) = (at(-1, -1), at(-1, 0), at(-1, 1));
    let (z4, z6) = (at(0, -1), at(0, 1));
    let (z7, z8, z9) = (at(1, -1), at(1, 0), at(1, 1));
    let two = T::lit(2.0);
    let eight = T::lit(8.0);
    let m_per_deg = T::lit(AUTHALIC_RADIUS_KM * 1000.0).to_radians();
    let lat = s.center_y(row).to_radians();
    let dx_m = s.pixel_width * m_per_deg * lat.cos();
    let dy_m = s.pixel_height * m_per_deg;
    let dzdx = ((z3 + two * z6 + z9) - (z1 + two * z4 + z7)) / (eight * dx_m);
    // Rows run south, so the northward gradient is top minus bottom.
    let dzdy = ((z1 + two * z2 + z3) - (z7 + two * z8 + z9)) / (eight * dy_m);
    dzdx.hypot(dzdy).atan().to_degrees()
}

/// Mean elevation and mean Horn slope over the valid zone cells.
pub fn terrain_stats<T: Scalar>(dem: &GridLayer<T>, mask: &ZoneMask) -> Evaluated<TerrainStats<T>> {
    let w = dem.spec.width;
    let (mut elev, mut slope, mut n) = (T::zero(), T::zero(), 0usize);
    for &i in mask.indices() {
        let v = dem.values[i];
        if !dem.is_valid(v) {
            continue;
        }
        elev = elev + v;
        slope = slope + horn_slope_deg(dem, i / w, i % w);
        n += 1;
    }
    if n == 0 {
        return Err(NotEvaluable::NoValidPixels);
    }
    let count = T::from_count(n);
    Ok(TerrainStats {
        mean_elevation_m: elev / count,
        mean_slope_deg: slope / count,
        pixel_count: n,
    })
}
