//! Synthetic control series weighted to the sites' NDVI-at-planting mix.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::Scalar;

pub const DEFAULT_BUCKETS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlPoint<T: Scalar> {
    pub ndvi_at_planting: T,
    /// One value per period, aligned with the output series.
    pub series: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticSeries<T: Scalar> {
    pub values: Vec<T>,
    /// Lower edges of the buckets plus the upper edge of the last.
    pub edges: Vec<T>,
    /// Bucket weights after empty buckets were dropped.
    pub weights: Vec<T>,
    pub controls_per_bucket: Vec<usize>,
    pub empty_buckets: Vec<usize>,
    /// Controls outside the site range, or with non-finite values.
    pub excluded_controls: usize,
}

fn bucket_of<T: Scalar>(x: T, lo: T, hi: T, n: usize) -> Option<usize> {
    if !(x >= lo && x <= hi) {
        return None;
    }
    if hi == lo {
        return Some(0);
    }
    let k = ((x - lo) / (hi - lo) * T::from_count(n)).floor().to_usize()?;
    Some(k.min(n - 1))
}

fn sorted_sum<T: Scalar>(mut v: Vec<T>) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v.into_iter().fold(T::zero(), |acc, x| acc + x)
}

/// Weighted mean of control trajectories, with bucket weights equal to the
/// share of sites whose planting-date NDVI falls in each equal-width bucket
/// over the site range.
///
/// Controls outside the site range are left out. Buckets holding sites but
/// no controls are dropped and the remaining weights renormalised.
pub fn synthetic_control_series<T: Scalar>(
    controls: &[ControlPoint<T>],
    site_ndvi_at_planting: &[T],
    n_buckets: usize,
) -> Result<SyntheticSeries<T>> {
    if n_buckets == 0 {
        return Err(Error::InvalidInput("bucket count must be positive".into()));
    }
    let sites: Vec<T> = site_ndvi_at_planting.iter().copied().filter(|v| v.is_finite()).collect();
    if sites.is_empty() {
        return Err(Error::InsufficientData("no site NDVI values at planting".into()));
    }
    let periods = controls.first().map(|c| c.series.len()).unwrap_or(0);
    let lo = sites.iter().copied().fold(T::infinity(), T::min);
    let hi = sites.iter().copied().fold(T::neg_infinity(), T::max);
    let n = if hi == lo { 1 } else { n_buckets };
    let width = (hi - lo) / T::from_count(n);
    let mut edges: Vec<T> = (0..n).map(|k| lo + width * T::from_count(k)).collect();
    edges.push(hi);

    let mut site_counts = vec![0usize; n];
    for &s in &sites {
        if let Some(k) = bucket_of(s, lo, hi, n) {
            site_counts[k] += 1;
        }
    }
    let mut members: Vec<Vec<&ControlPoint<T>>> = vec![Vec::new(); n];
    let mut excluded = 0usize;
    for c in controls {
        if c.series.len() != periods {
            return Err(Error::InvalidInput("control series lengths differ".into()));
        }
        let finite = c.ndvi_at_planting.is_finite() && c.series.iter().all(|v| v.is_finite());
        match bucket_of(c.ndvi_at_planting, lo, hi, n).filter(|_| finite) {
            Some(k) => members[k].push(c),
            None => excluded += 1,
        }
    }

    let mut empty = Vec::new();
    let mut kept_sites = 0usize;
    for k in 0..n {
        if site_counts[k] > 0 && members[k].is_empty() {
            empty.push(k);
        } else if site_counts[k] > 0 {
            kept_sites += site_counts[k];
        }
    }
    if kept_sites == 0 {
        return Err(Error::InsufficientData("no bucket holding sites contains a control point".into()));
    }
    if !empty.is_empty() {
        log::warn!("synthetic control: {} bucket(s) without controls dropped", empty.len());
    }
    let weights: Vec<T> = (0..n)
        .map(|k| {
            if members[k].is_empty() {
                T::zero()
            } else {
                T::from_count(site_counts[k]) / T::from_count(kept_sites)
            }
        })
        .collect();
    let values = (0..periods)
        .map(|p| {
            let contributions: Vec<T> = (0..n)
                .filter(|&k| weights[k] > T::zero())
                .map(|k| {
                    let mean = sorted_sum(members[k].iter().map(|c| c.series[p]).collect())
                        / T::from_count(members[k].len());
                    weights[k] * mean
                })
                .collect();
            sorted_sum(contributions)
        })
        .collect();
    Ok(SyntheticSeries {
        values,
        edges,
        weights,
        controls_per_bucket: members.iter().map(Vec::len).collect(),
        empty_buckets: empty,
        excluded_controls: excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cp(at: f64, series: &[f64]) -> ControlPoint<f64> {
        ControlPoint {
            ndvi_at_planting: at,
            series: series.to_vec(),
        }
    }

    #[test]
    fn constant_controls() {
        let controls: Vec<_> = (0..20).map(|i| cp(0.1 + i as f64 * 0.03, &[0.3, 0.3, 0.3])).collect();
        let sites = [0.1, 0.2, 0.5, 0.6, 0.65];
        let s = synthetic_control_series(&controls, &sites, 10).unwrap();
        for v in s.values {
            assert_abs_diff_eq!(v, 0.3, epsilon = 1e-15);
        }
    }

    #[test]
    fn two_bucket_weighted_mean() {
        // sites: three in the low bucket, one in the high
        let sites = [0.0, 0.1, 0.2, 1.0];
        let controls = [cp(0.1, &[0.1]), cp(0.3, &[0.3]), cp(0.9, &[0.6])];
        let s = synthetic_control_series(&controls, &sites, 2).unwrap();
        assert_eq!(s.weights, vec![0.75, 0.25]);
        assert_abs_diff_eq!(s.values[0], 0.75 * 0.2 + 0.25 * 0.6, epsilon = 1e-15);
    }

    #[test]
    fn empty_bucket_renormalised_and_out_of_range_excluded() {
        let sites = [0.0, 0.5, 1.0];
        let controls = [cp(0.1, &[0.2]), cp(0.95, &[0.4]), cp(1.5, &[9.0])];
        let s = synthetic_control_series(&controls, &sites, 2).unwrap();
        assert_eq!(s.excluded_controls, 1);
        assert!(s.empty_buckets.is_empty());
        let s = synthetic_control_series(&controls[..1], &sites, 2).unwrap();
        assert_eq!(s.empty_buckets, vec![1]);
        assert_eq!(s.values, vec![0.2]);
        assert!(synthetic_control_series(&controls[2..], &sites, 2).is_err());
    }

    #[test]
    fn order_invariant() {
        let sites = [0.1, 0.3, 0.5, 0.7];
        let mut controls: Vec<_> = (0..30).map(|i| cp(0.1 + i as f64 * 0.02, &[i as f64 * 0.01, 0.5])).collect();
        let a = synthetic_control_series(&controls, &sites, 10).unwrap();
        controls.reverse();
        assert_eq!(synthetic_control_series(&controls, &sites, 10).unwrap().values, a.values);
    }
}
