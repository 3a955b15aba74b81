//! Band stacks and normalized-difference indices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{GridLayer, GridSpec, Semantics};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Red,
    Nir,
    RedEdge,
    QaCloud,
}

impl Band {
    pub fn as_str(&self) -> &'static str {
        match self {
            Band::Red => "red",
            Band::Nir => "nir",
            Band::RedEdge => "rededge",
            Band::QaCloud => "qa_cloud",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VegIndex {
    Ndvi,
    Ndre,
    Savi,
}

impl VegIndex {
    pub const ALL: [VegIndex; 3] = [VegIndex::Ndvi, VegIndex::Ndre, VegIndex::Savi];

    pub fn as_str(&self) -> &'static str {
        match self {
            VegIndex::Ndvi => "ndvi",
            VegIndex::Ndre => "ndre",
            VegIndex::Savi => "savi",
        }
    }

    pub fn required_bands(&self) -> [Band; 2] {
        match self {
            VegIndex::Ndvi | VegIndex::Savi => [Band::Nir, Band::Red],
            VegIndex::Ndre => [Band::Nir, Band::RedEdge],
        }
    }
}

/// Soil-brightness correction factor of SAVI.
pub const SAVI_L: f64 = 0.5;

/// Index value from reflectances; `None` where the denominator is zero or
/// an input is not finite.
#[inline]
pub fn index_value<T: Scalar>(index: VegIndex, nir: T, red: T, rededge: T) -> Option<T> {
    let (num, den, scale) = match index {
        VegIndex::Ndvi => (nir - red, nir + red, T::one()),
        VegIndex::Ndre => (nir - rededge, nir + rededge, T::one()),
        VegIndex::Savi => {
            let l = T::lit(SAVI_L);
            (nir - red, nir + red + l, T::one() + l)
        }
    };
    if den == T::zero() || !num.is_finite() || !den.is_finite() {
        return None;
    }
    Some(num / den * scale)
}

/// Bands of one acquisition (or composite) on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BandStack<T: Scalar> {
    pub year: i32,
    pub month: u32,
    bands: BTreeMap<Band, GridLayer<T>>,
}

impl<T: Scalar> BandStack<T> {
    pub fn new(year: i32, month: u32, bands: BTreeMap<Band, GridLayer<T>>) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidInput(format!("month {month} out of range")));
        }
        let mut specs = bands.values().map(|l| l.spec);
        if let Some(first) = specs.next() {
            if specs.any(|s| s != first) {
                return Err(Error::InvalidLayer(format!(
                    "bands of stack {year}-{month:02} do not share one grid"
                )));
            }
        }
        Ok(BandStack { year, month, bands })
    }

    pub fn band(&self, b: Band) -> Result<&GridLayer<T>> {
        self.bands.get(&b).ok_or_else(|| Error::MissingBand(b.as_str().into()))
    }

    pub fn has_band(&self, b: Band) -> bool {
        self.bands.contains_key(&b)
    }

    pub fn spec(&self) -> Option<&GridSpec<T>> {
        self.bands.values().next().map(|l| &l.spec)
    }

    pub fn bands(&self) -> &BTreeMap<Band, GridLayer<T>> {
        &self.bands
    }
}

/// Per-pixel index layer; undefined pixels are NaN.
pub fn compute_index<T: Scalar>(stack: &BandStack<T>, index: VegIndex) -> Result<GridLayer<T>> {
    let nir = stack.band(Band::Nir)?;
    let other = match index {
        VegIndex::Ndvi | VegIndex::Savi => stack.band(Band::Red)?,
        VegIndex::Ndre => stack.band(Band::RedEdge)?,
    };
    let values = nir
        .values
        .iter()
        .zip(&other.values)
        .map(|(&n, &o)| {
            if !nir.is_valid(n) || !other.is_valid(o) {
                return T::nan();
            }
            let v = match index {
                VegIndex::Ndvi | VegIndex::Savi => index_value(index, n, o, T::zero()),
                VegIndex::Ndre => index_value(index, n, T::zero(), o),
            };
            v.unwrap_or_else(T::nan)
        })
        .collect();
    GridLayer::new(nir.spec, None, values, Semantics::Continuous)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use geo::Coord;

    fn stack(nir: f64, red: f64, re: f64) -> BandStack<f64> {
        let spec = GridSpec::new(Coord { x: 0.0, y: 1.0 }, 0.5, 0.5, 2, 2).unwrap();
        let mut b = BTreeMap::new();
        b.insert(Band::Nir, GridLayer::filled(spec, nir, Semantics::MonthlyBand));
        b.insert(Band::Red, GridLayer::filled(spec, red, Semantics::MonthlyBand));
        b.insert(Band::RedEdge, GridLayer::filled(spec, re, Semantics::MonthlyBand));
        BandStack::new(2020, 6, b).unwrap()
    }

    #[test]
    fn hand_values() {
        let s = stack(0.8, 0.2, 0.4);
        assert_relative_eq!(compute_index(&s, VegIndex::Ndvi).unwrap().values[0], 0.6, epsilon = 1e-15);
        assert_relative_eq!(compute_index(&s, VegIndex::Ndre).unwrap().values[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(compute_index(&s, VegIndex::Savi).unwrap().values[0], 0.6, epsilon = 1e-15);
    }

    #[test]
    fn zero_denominator_is_nodata() {
        let s = stack(0.0, 0.0, 0.0);
        assert!(compute_index(&s, VegIndex::Ndvi).unwrap().values[0].is_nan());
        // SAVI's denominator carries +L and stays defined
        assert_eq!(compute_index(&s, VegIndex::Savi).unwrap().values[0], 0.0);
    }

    #[test]
    fn missing_band_is_named() {
        let spec = GridSpec::new(Coord { x: 0.0, y: 1.0 }, 0.5, 0.5, 2, 2).unwrap();
        let mut b = BTreeMap::new();
        b.insert(Band::Nir, GridLayer::filled(spec, 0.5, Semantics::MonthlyBand));
        b.insert(Band::Red, GridLayer::filled(spec, 0.1, Semantics::MonthlyBand));
        let s = BandStack::new(2020, 1, b).unwrap();
        let err = compute_index(&s, VegIndex::Ndre).unwrap_err();
        assert!(err.to_string().contains("rededge"));
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = GridSpec::new(Coord { x: 0.0, y: 1.0 }, 0.5, 0.5, 2, 2).unwrap();
        let b = GridSpec::new(Coord { x: 0.0, y: 1.0 }, 0.25, 0.25, 4, 4).unwrap();
        let mut m = BTreeMap::new();
        m.insert(Band::Nir, GridLayer::filled(a, 0.5, Semantics::MonthlyBand));
        m.insert(Band::Red, GridLayer::filled(b, 0.1, Semantics::MonthlyBand));
        assert!(BandStack::new(2020, 1, m).is_err());
    }
}
