//! Percentile bootstrap of the mean.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::Scalar;

/// Type-7 (linear interpolation) quantile of sorted data.
pub fn quantile_sorted<T: Scalar>(sorted: &[T], q: T) -> T {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * T::from_count(n - 1);
    let lo = h.floor();
    let i = lo.to_usize().unwrap_or(0).min(n - 1);
    let j = (i + 1).min(n - 1);
    sorted[i] + (h - lo) * (sorted[j] - sorted[i])
}

/// Mean computed about the first value, which keeps constant data exact.
fn shifted_mean<T: Scalar>(values: impl Iterator<Item = T>, pivot: T, n: usize) -> T {
    let s = values.fold(T::zero(), |acc, v| acc + (v - pivot));
    pivot + s / T::from_count(n)
}

/// Bootstrap means, one independent random stream per replicate so the
/// result does not depend on thread scheduling.
pub fn bootstrap_means<T: Scalar>(samples: &[T], reps: usize, seed: u64) -> Vec<T> {
    let n = samples.len();
    let pivot = samples[0];
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep as u64);
            shifted_mean((0..n).map(|_| samples[rng.random_range(0..n)]), pivot, n)
        })
        .collect()
}

/// Percentile interval for the mean at confidence `level`.
pub fn bootstrap_mean_ci<T: Scalar>(samples: &[T], level: T, reps: usize, seed: u64) -> Result<(T, T)> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "bootstrap needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if !(level > T::zero() && level < T::one()) {
        return Err(Error::InvalidInput(format!("confidence level must lie in (0, 1), got {level}")));
    }
    if reps == 0 {
        return Err(Error::InvalidInput("bootstrap needs at least one replicate".into()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample".into()));
    }
    let mut means = bootstrap_means(samples, reps, seed);
    means.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let alpha = (T::one() - level) / T::lit(2.0);
    Ok((quantile_sorted(&means, alpha), quantile_sorted(&means, T::one() - alpha)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples() {
        let s = vec![0.37; 50];
        assert_eq!(bootstrap_mean_ci(&s, 0.95, 200, 1).unwrap(), (0.37, 0.37));
    }

    #[test]
    fn deterministic_for_seed() {
        let s: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = bootstrap_mean_ci(&s, 0.95, 500, 42).unwrap();
        let b = bootstrap_mean_ci(&s, 0.95, 500, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, bootstrap_mean_ci(&s, 0.95, 500, 43).unwrap());
    }

    #[test]
    fn wider_for_higher_level() {
        let s: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let (l90, h90) = bootstrap_mean_ci(&s, 0.90, 500, 7).unwrap();
        let (l99, h99) = bootstrap_mean_ci(&s, 0.99, 500, 7).unwrap();
        assert!(l99 <= l90 && h99 >= h90);
    }

    #[test]
    fn too_few_samples() {
        assert!(bootstrap_mean_ci(&[1.0], 0.95, 10, 0).is_err());
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
    }
}
