use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("site {site}: invalid coordinate at vertex {vertex}: {reason}")]
    InvalidCoordinate {
        site: String,
        vertex: usize,
        reason: String,
    },

    #[error("site {site}: point at latitude {lat} is too close to a pole for buffering")]
    UnsupportedLatitude { site: String, lat: f64 },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("annulus construction failed: {0}")]
    Annulus(String),

    #[error("duplicate site ids: {}", .0.join(", "))]
    DuplicateSiteIds(Vec<String>),

    #[error("intersection of {a} and {b} failed: {reason}")]
    Intersection { a: String, b: String, reason: String },

    #[error("invalid layer: {0}")]
    InvalidLayer(String),

    #[error("missing band `{0}` in band stack")]
    MissingBand(String),

    #[error("degenerate panel: {0}")]
    DegeneratePanel(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("stage `{stage}` requires {what}")]
    MissingLayer { stage: String, what: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Why an indicator or statistic has no value for a site.
///
/// This is distinct from a failing value: it means the check could not be
/// run with the inputs supplied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotEvaluable {
    LayerMissing,
    OutsideExtent,
    NoValidPixels,
    NoPlantingYear,
    YearOutOfRange,
    MissingYear,
    InvalidGeometry,
    TooFewMonths,
    NoComposite,
}

impl NotEvaluable {
    pub fn as_str(&self) -> &'static str {
        match self {
            NotEvaluable::LayerMissing => "layer_missing",
            NotEvaluable::OutsideExtent => "outside_extent",
            NotEvaluable::NoValidPixels => "no_valid_pixels",
            NotEvaluable::NoPlantingYear => "no_planting_year",
            NotEvaluable::YearOutOfRange => "year_out_of_range",
            NotEvaluable::MissingYear => "missing_year",
            NotEvaluable::InvalidGeometry => "invalid_geometry",
            NotEvaluable::TooFewMonths => "too_few_months",
            NotEvaluable::NoComposite => "no_composite",
        }
    }
}

impl std::fmt::Display for NotEvaluable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Value that may be missing for a documented reason.
pub type Evaluated<T> = std::result::Result<T, NotEvaluable>;
