use std::path::PathBuf;

use thiserror::Error;

use crate::factors::EnergySource;
use crate::mode::TransportMode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no technology emission factor for energy source `{0}`")]
    MissingTechFactor(EnergySource),

    #[error("{0}")]
    Domain(String),

    #[error("mode `{0}` draws electricity but no grid intensity was supplied")]
    MissingGrid(TransportMode),

    #[error("no emission factor for mode `{0}`")]
    MissingFactor(TransportMode),

    #[error("inconsistent case anchors: {0}")]
    InconsistentAnchors(String),

    #[error("LTM scenario {scenario} is not applicable to case `{case}`")]
    ScenarioNotApplicable { case: String, scenario: u8 },

    #[error("unknown LTM scenario {0}")]
    UnknownScenario(u8),

    #[error("unknown case study `{0}`")]
    UnknownCase(String),

    #[error("unknown electricity grid `{0}`")]
    UnknownGrid(String),

    #[error("invalid `{field}`: {message}")]
    InvalidInput { field: String, message: String },

    #[error("failed to read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed dataset `{name}`: {source}")]
    Dataset {
        name: String,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidInput { field: field.into(), message: message.into() }
    }

    /// Stable machine-readable code, used on the wire.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MissingTechFactor(_) => "configuration",
            Error::Domain(_) => "domain_error",
            Error::MissingGrid(_) => "missing_grid",
            Error::MissingFactor(_) => "missing_factor",
            Error::InconsistentAnchors(_) => "inconsistent_anchors",
            Error::ScenarioNotApplicable { .. } => "scenario_not_applicable",
            Error::UnknownScenario(_) => "unknown_scenario",
            Error::UnknownCase(_) => "unknown_case",
            Error::UnknownGrid(_) => "unknown_grid",
            Error::InvalidInput { .. } => "invalid_input",
            Error::Io { .. } => "io_error",
            Error::Dataset { .. } => "dataset_error",
            Error::Csv(_) => "csv_error",
        }
    }

    /// The request field the error points at, when there is one.
    pub fn field(&self) -> Option<String> {
        match self {
            Error::InvalidInput { field, .. } => Some(field.clone()),
            Error::MissingFactor(mode) | Error::MissingGrid(mode) => Some(mode.to_string()),
            Error::UnknownScenario(_) | Error::ScenarioNotApplicable { .. } => Some("scenario".to_owned()),
            Error::UnknownGrid(_) => Some("grid".to_owned()),
            Error::UnknownCase(_) => Some("case".to_owned()),
            _ => None,
        }
    }
}
