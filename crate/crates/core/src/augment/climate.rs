//! Monthly climate samples at a site centroid.

use std::collections::BTreeMap;

use geo::Coord;
use serde::Serialize;

use crate::error::{Evaluated, NotEvaluable};
use crate::raster::GridLayer;
use crate::Scalar;

/// Year offsets from planting at which climate is sampled.
pub const CLIMATE_OFFSETS: [i32; 4] = [0, 1, 2, 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClimateVar {
    Precip,
    Tmin,
    Tmax,
}

impl ClimateVar {
    pub const ALL: [ClimateVar; 3] = [ClimateVar::Precip, ClimateVar::Tmin, ClimateVar::Tmax];

    pub fn as_str(&self) -> &'static str {
        match self {
            ClimateVar::Precip => "precip",
            ClimateVar::Tmin => "tmin",
            ClimateVar::Tmax => "tmax",
        }
    }
}

/// Monthly grids keyed by `(variable, year, month)`.
#[derive(Debug, Default)]
pub struct ClimateLayers<T: Scalar> {
    layers: BTreeMap<(ClimateVar, i32, u32), GridLayer<T>>,
}

impl<T: Scalar> ClimateLayers<T> {
    pub fn new() -> Self {
        ClimateLayers { layers: BTreeMap::new() }
    }

    pub fn insert(&mut self, var: ClimateVar, year: i32, month: u32, layer: GridLayer<T>) {
        self.layers.insert((var, year, month), layer);
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn get(&self, var: ClimateVar, year: i32, month: u32) -> Option<&GridLayer<T>> {
        self.layers.get(&(var, year, month))
    }
}

/// Mean over the 12 months of `year` of the nearest-cell value at `at`.
pub fn annual_mean_at<T: Scalar>(layers: &ClimateLayers<T>, var: ClimateVar, year: i32, at: Coord<T>) -> Evaluated<T> {
    let mut sum = T::zero();
    for month in 1..=12 {
        let layer = layers.get(var, year, month).ok_or(NotEvaluable::MissingYear)?;
        let (r, c) = layer.spec.nearest_cell(at).ok_or(NotEvaluable::OutsideExtent)?;
        let v = layer.get(r, c);
        if !layer.is_valid(v) {
            return Err(NotEvaluable::NoValidPixels);
        }
        sum = sum + v;
    }
    Ok(sum / T::lit(12.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClimateSample<T: Scalar> {
    pub offset: i32,
    pub precip: Evaluated<T>,
    pub tmin: Evaluated<T>,
    pub tmax: Evaluated<T>,
}

/// Samples every variable at each offset from the planting year.
pub fn sample_climate_at_centroid<T: Scalar>(
    layers: &ClimateLayers<T>,
    centroid: Coord<T>,
    planting_year: Option<i32>,
    offsets: &[i32],
) -> Vec<ClimateSample<T>> {
    offsets
        .iter()
        .map(|&offset| {
            let get = |var| match planting_year {
                None => Err(NotEvaluable::NoPlantingYear),
                Some(_) if layers.is_empty() => Err(NotEvaluable::LayerMissing),
                Some(y) => annual_mean_at(layers, var, y + offset, centroid),
            };
            ClimateSample {
                offset,
                precip: get(ClimateVar::Precip),
                tmin: get(ClimateVar::Tmin),
                tmax: get(ClimateVar::Tmax),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{GridSpec, Semantics};

    fn spec() -> GridSpec<f64> {
        GridSpec::new(Coord { x: 0.0, y: 2.0 }, 1.0, 1.0, 2, 2).unwrap()
    }

    fn layers(f: impl Fn(u32) -> Vec<f64>) -> ClimateLayers<f64> {
        let mut l = ClimateLayers::new();
        for m in 1..=12 {
            for var in ClimateVar::ALL {
                l.insert(var, 2015, m, GridLayer::new(spec(), None, f(m), Semantics::MonthlyBand).unwrap());
            }
        }
        l
    }

    #[test]
    fn constant_layer() {
        let l = layers(|_| vec![50.0; 4]);
        let s = sample_climate_at_centroid(&l, Coord { x: 0.5, y: 0.5 }, Some(2015), &[0]);
        assert_eq!(s[0].precip, Ok(50.0));
    }

    #[test]
    fn monthly_mean() {
        let l = layers(|m| vec![m as f64; 4]);
        assert_eq!(annual_mean_at(&l, ClimateVar::Precip, 2015, Coord { x: 1.5, y: 1.5 }), Ok(6.5));
    }

    #[test]
    fn boundary_tie_goes_to_lower_index() {
        // cells: [0, 1; 2, 3]; the centre point touches all four
        let l = layers(|_| vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(annual_mean_at(&l, ClimateVar::Tmax, 2015, Coord { x: 1.0, y: 1.0 }), Ok(0.0));
        assert_eq!(annual_mean_at(&l, ClimateVar::Tmax, 2015, Coord { x: 1.0, y: 0.5 }), Ok(2.0));
    }

    #[test]
    fn missing_year_and_unknown_planting() {
        let l = layers(|_| vec![1.0; 4]);
        let s = sample_climate_at_centroid(&l, Coord { x: 0.5, y: 0.5 }, Some(2015), &CLIMATE_OFFSETS);
        assert!(s[0].tmin.is_ok());
        assert_eq!(s[1].tmin, Err(NotEvaluable::MissingYear));
        let s = sample_climate_at_centroid(&l, Coord { x: 0.5, y: 0.5 }, None, &[0]);
        assert_eq!(s[0].precip, Err(NotEvaluable::NoPlantingYear));
    }
}
