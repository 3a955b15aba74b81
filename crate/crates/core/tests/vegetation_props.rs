use std::collections::BTreeMap;

use geo::{Coord, LineString, MultiPolygon, Polygon};
use proptest::prelude::*;

use ldis_core::geometry::outer_buffer_annulus;
use ldis_core::raster::{polygon_mask, zonal_mean, zone_mask, GridLayer, GridSpec, Semantics};
use ldis_core::vegetation::{compute_index, index_value, median_composite, Band, BandStack, VegIndex};

const W: usize = 12;
const H: usize = 10;

fn spec() -> GridSpec<f64> {
    GridSpec::new(Coord { x: 10.0, y: 1.0 }, 0.001, 0.001, W, H).unwrap()
}

fn band() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, W * H)
}

fn qa() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![4 => Just(0.0), 1 => Just(1.0)], W * H)
}

fn stack(month: u32, red: &[f64], nir: &[f64], re: &[f64], qa: &[f64]) -> BandStack<f64> {
    let mut bands = BTreeMap::new();
    for (b, v) in [(Band::Red, red), (Band::Nir, nir), (Band::RedEdge, re), (Band::QaCloud, qa)] {
        bands.insert(b, GridLayer::new(spec(), None, v.to_vec(), Semantics::MonthlyBand).unwrap());
    }
    BandStack::new(2020, month, bands).unwrap()
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon<f64> {
    Polygon::new(
        LineString(vec![
            Coord { x: x0, y: y0 },
            Coord { x: x1, y: y0 },
            Coord { x: x1, y: y1 },
            Coord { x: x0, y: y1 },
            Coord { x: x0, y: y0 },
        ]),
        vec![],
    )
}

proptest! {
    #[test]
    fn indices_stay_in_range(nir in 0.0..1.0f64, red in 0.0..1.0f64, re in 0.0..1.0f64) {
        for index in VegIndex::ALL {
            if let Some(v) = index_value(index, nir, red, re) {
                let bound = if index == VegIndex::Savi { 1.5 } else { 1.0 };
                prop_assert!(v.abs() <= bound + 1e-15, "{index:?} = {v}");
            }
        }
    }

    #[test]
    fn zonal_mean_of_index_equals_mean_of_pixel_indices(
        red in band(), nir in band(), re in band(),
        x0 in 0.0..0.006f64, y0 in 0.0..0.005f64,
    ) {
        let s = stack(6, &red, &nir, &re, &[0.0; W * H]);
        let zone = rect(10.0 + x0, 1.0 - 0.01 + y0, 10.0 + x0 + 0.006, 1.0 - 0.01 + y0 + 0.005);
        let mask = polygon_mask(&spec(), &zone).unwrap();
        for index in VegIndex::ALL {
            let layer = compute_index(&s, index).unwrap();
            let got = zonal_mean(&layer, &mask);
            let vals: Vec<f64> = mask
                .indices()
                .iter()
                .filter_map(|&i| index_value(index, nir[i], red[i], re[i]))
                .filter(|v| v.is_finite())
                .collect();
            if vals.is_empty() {
                prop_assert!(got.is_err());
            } else {
                let want = vals.iter().sum::<f64>() / vals.len() as f64;
                let (mean, n) = got.unwrap();
                prop_assert_eq!(n, vals.len());
                prop_assert!((mean - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn site_and_annulus_pixels_are_disjoint(
        x0 in 0.001..0.006f64, y0 in 0.001..0.005f64, dx in 0.001..0.005f64, dy in 0.001..0.004f64, d in 30.0..300.0f64,
    ) {
        let site = rect(10.0 + x0, 0.99 + y0, 10.0 + x0 + dx, 0.99 + y0 + dy);
        let ann = outer_buffer_annulus(&site, d).unwrap();
        let a = zone_mask(&spec(), &MultiPolygon(vec![site])).unwrap_or_default();
        let b = zone_mask(&spec(), &ann.zone).unwrap_or_default();
        for i in a.indices() {
            prop_assert!(!b.indices().contains(i));
        }
    }

    #[test]
    fn composite_ignores_stack_order(
        bands in prop::collection::vec((band(), band(), band(), qa()), 2..5),
        rot in 0usize..5,
    ) {
        let stacks: Vec<BandStack<f64>> = bands
            .iter()
            .enumerate()
            .map(|(k, (r, n, e, q))| stack(k as u32 + 5, r, n, e, q))
            .collect();
        let refs: Vec<&BandStack<f64>> = stacks.iter().collect();
        let k = rot % refs.len();
        let rotated: Vec<&BandStack<f64>> = refs[k..].iter().chain(&refs[..k]).copied().collect();
        let reversed: Vec<&BandStack<f64>> = refs.iter().rev().copied().collect();
        let a = median_composite(&refs, 2020, 6).unwrap();
        for other in [rotated, reversed] {
            let b = median_composite(&other, 2020, 6).unwrap();
            for band in [Band::Red, Band::Nir, Band::RedEdge] {
                let (x, y) = (&a.band(band).unwrap().values, &b.band(band).unwrap().values);
                prop_assert!(x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits() || (p.is_nan() && q.is_nan())));
            }
        }
    }
}
