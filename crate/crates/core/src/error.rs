use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate at index {index} out of range: {detail}")]
    CoordinateRange { index: usize, detail: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("malformed OSM XML at byte {offset}: {message}")]
    Xml { offset: usize, message: String },

    #[error("way {way} references missing node {node}")]
    MissingNode { way: String, node: String },

    #[error("road map is empty")]
    EmptyMap,

    #[error("scenario file schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("scenario list is empty")]
    EmptyScenarioList,

    #[error("no valid scenarios: {0}")]
    NoValidScenarios(String),

    #[error("DTW input sequence is empty")]
    EmptySequence,

    #[error("requested path length {requested} m exceeds every road (longest {longest:.1} m)")]
    PathTooLong { requested: f64, longest: f64 },

    #[error("unknown scenario id {id:?}; available: {available}")]
    UnknownScenario { id: String, available: String },

    #[error("report has no scenarios")]
    NoScenarios,

    #[error("config error: {0}")]
    Config(String),

    #[error("cannot open {path}: {source}")]
    Open {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
