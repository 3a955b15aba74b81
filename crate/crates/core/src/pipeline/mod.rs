//! End-to-end pipeline: config, catalog ingestion, layer loading, stage
//! orchestration and output tables.

pub mod catalog;
pub mod config;
pub mod layers;
pub mod output;
pub mod run;
pub mod summary;

pub use catalog::{ingest_catalog, Catalog, DroppedRecord, PlantingDateType, SiteRecord};
pub use config::{LoadedConfig, RunConfig};
pub use run::{execute, ExitStatus, PreparedSite, RunOptions, RunOutcome, Stage};
pub use summary::{build_summary, Summary, SummaryRow};
