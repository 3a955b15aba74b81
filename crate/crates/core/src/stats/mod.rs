//! Validation statistics: DiD regression, bootstrap intervals, synthetic
//! control series and confusion-matrix agreement.

pub mod bootstrap;
pub mod confusion;
pub mod did;
pub mod panel;
pub mod synth;

pub use bootstrap::{bootstrap_mean_ci, bootstrap_means, quantile_sorted};
pub use confusion::{confusion_metrics, ConfusionCounts, ConfusionMetrics};
pub use did::{did_fit, read_panel_csv, stars, Coefficient, DidResult, PanelRow};
pub use panel::{build_did_panel, horizon_periods, HorizonPanel, DID_HORIZONS};
pub use synth::{synthetic_control_series, ControlPoint, SyntheticSeries, DEFAULT_BUCKETS};
