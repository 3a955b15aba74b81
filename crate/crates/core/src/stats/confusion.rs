//! Agreement between derived indicators and manual labels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Tallies `(predicted, actual)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut c = ConfusionCounts::default();
        for (pred, actual) in pairs {
            match (pred, actual) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfusionMetrics {
    pub accuracy: f64,
    /// `None` when there are no positive predictions or labels.
    pub f1: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

pub fn confusion_metrics(c: &ConfusionCounts) -> Result<ConfusionMetrics> {
    let total = c.total();
    if total == 0 {
        return Err(Error::InsufficientData("confusion matrix is empty".into()));
    }
    let ratio = |a: u64, b: u64| (b > 0).then(|| a as f64 / b as f64);
    Ok(ConfusionMetrics {
        accuracy: (c.tp + c.tn) as f64 / total as f64,
        f1: ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_),
        precision: ratio(c.tp, c.tp + c.fp),
        recall: ratio(c.tp, c.tp + c.fn_),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_counts() {
        let m = confusion_metrics(&ConfusionCounts { tp: 9, fp: 1, fn_: 1, tn: 9 }).unwrap();
        assert!((m.accuracy - 0.9).abs() < 1e-15);
        assert!((m.f1.unwrap() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn no_positives() {
        let m = confusion_metrics(&ConfusionCounts { tp: 0, fp: 0, fn_: 0, tn: 10 }).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.f1, None);
    }

    #[test]
    fn all_zero_is_error() {
        assert!(confusion_metrics(&ConfusionCounts::default()).is_err());
    }

    #[test]
    fn from_pairs_and_serde_name() {
        let c = ConfusionCounts::from_pairs([(true, true), (true, false), (false, true), (false, false)]);
        assert_eq!(c, ConfusionCounts { tp: 1, fp: 1, fn_: 1, tn: 1 });
        assert!(serde_json::to_string(&c).unwrap().contains("\"fn\":1"));
    }
}
