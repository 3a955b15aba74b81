//! Location data integrity indicators, scores and corpus reports.

mod indicators;
mod report;

pub use indicators::{
    evaluate_indicators, ldis_score, Indicator, IndicatorVector, LdisScore, Outcome, ScoringConfig, SiteEvidence,
};
pub use report::{
    completeness_report, size_bin_label, size_bin_of, size_bins, CompletenessReport, SiteSize, SizeBin,
    SIZE_BIN_EDGES,
};
