//! Corpus-level completeness, score histogram and size-bin table.

use std::collections::BTreeMap;

use serde::Serialize;

use super::indicators::{Indicator, IndicatorVector, LdisScore};

/// Lower edges (km²) of the size bins; the last bin is open-ended.
pub const SIZE_BIN_EDGES: [f64; 8] = [0.0, 10.0, 50.0, 100.0, 500.0, 1000.0, 2000.0, 5000.0];

pub fn size_bin_label(k: usize) -> String {
    if k == 0 {
        format!("<{}", SIZE_BIN_EDGES[1])
    } else if k + 1 == SIZE_BIN_EDGES.len() {
        format!(">{}", SIZE_BIN_EDGES[k])
    } else {
        format!("{}-{}", SIZE_BIN_EDGES[k], SIZE_BIN_EDGES[k + 1])
    }
}

/// Bin of an area; bins are half-open `[lo, hi)`.
pub fn size_bin_of(area_km2: f64) -> usize {
    SIZE_BIN_EDGES.iter().rposition(|&lo| area_km2 >= lo).unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeBin {
    pub label: String,
    pub count: usize,
    pub count_pct: f64,
    pub total_area_km2: f64,
    pub total_pct: f64,
    /// Area of sites lying inside another site.
    pub nested_area_km2: f64,
    pub nested_pct: f64,
}

/// Input row of the size table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteSize {
    pub area_km2: f64,
    pub nested: bool,
}

pub fn size_bins(sites: &[SiteSize]) -> Vec<SizeBin> {
    let n = SIZE_BIN_EDGES.len();
    let mut count = vec![0usize; n];
    let mut area = vec![0.0f64; n];
    let mut nested = vec![0.0f64; n];
    for s in sites {
        let k = size_bin_of(s.area_km2);
        count[k] += 1;
        area[k] += s.area_km2;
        if s.nested {
            nested[k] += s.area_km2;
        }
    }
    let total_n = sites.len();
    let total_area: f64 = area.iter().sum();
    let pct = |a: f64, b: f64| if b > 0.0 { 100.0 * a / b } else { 0.0 };
    (0..n)
        .map(|k| SizeBin {
            label: size_bin_label(k),
            count: count[k],
            count_pct: pct(count[k] as f64, total_n as f64),
            total_area_km2: area[k],
            total_pct: pct(area[k], total_area),
            nested_area_km2: nested[k],
            nested_pct: pct(nested[k], area[k]),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletenessReport {
    pub sites: usize,
    /// Evaluable share (0..=1) per indicator.
    pub completeness: BTreeMap<String, f64>,
    /// Failing share among evaluable sites per indicator.
    pub failure_rate: BTreeMap<String, f64>,
    /// `passed_histogram[k]` = sites with exactly k passes.
    pub passed_histogram: Vec<usize>,
    pub evaluated_histogram: Vec<usize>,
    pub perfect: usize,
    /// Sites with every indicator evaluated.
    pub fully_evaluated: usize,
    pub size_bins: Vec<SizeBin>,
}

pub fn completeness_report(vectors: &[IndicatorVector], scores: &[LdisScore], sizes: &[SiteSize]) -> CompletenessReport {
    let n = vectors.len();
    let mut completeness = BTreeMap::new();
    let mut failure_rate = BTreeMap::new();
    if n > 0 {
        for ind in Indicator::ALL {
            let evaluated = vectors.iter().filter(|v| v.get(ind).is_evaluated()).count();
            let failed = vectors
                .iter()
                .filter(|v| v.get(ind) == super::indicators::Outcome::Fail)
                .count();
            completeness.insert(ind.as_str().to_string(), evaluated as f64 / n as f64);
            failure_rate.insert(
                ind.as_str().to_string(),
                if evaluated > 0 { failed as f64 / evaluated as f64 } else { 0.0 },
            );
        }
    }
    let mut passed_histogram = vec![0usize; 11];
    let mut evaluated_histogram = vec![0usize; 11];
    for s in scores {
        passed_histogram[s.passed as usize] += 1;
        evaluated_histogram[s.evaluated as usize] += 1;
    }
    CompletenessReport {
        sites: n,
        completeness,
        failure_rate,
        passed_histogram,
        evaluated_histogram,
        perfect: scores.iter().filter(|s| s.perfect).count(),
        fully_evaluated: scores.iter().filter(|s| s.evaluated == 10).count(),
        size_bins: if sizes.is_empty() { vec![] } else { size_bins(sizes) },
    }
}
