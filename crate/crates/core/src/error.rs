use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no records")]
    NoRecords,

    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },

    #[error("line {line}: duplicate record for ({date}, {ticker})")]
    DuplicatePair {
        line: u64,
        date: NaiveDate,
        ticker: String,
    },

    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("window of {length} days starting at index {start} is outside a panel of {n_dates} dates")]
    WindowOutOfRange {
        start: usize,
        length: usize,
        n_dates: usize,
    },

    #[error("panel has {n_dates} trading days, shorter than the {window}-day window")]
    PanelTooShort { n_dates: usize, window: usize },

    #[error("date {0} is not in the panel")]
    UnknownDate(NaiveDate),

    #[error("window has {0} trading days, at least 2 are required")]
    TooFewDays(usize),

    #[error("unknown ticker {0}")]
    UnknownTicker(String),

    #[error("ticker {0} has no complete price series inside the window")]
    NotSurvivor(String),

    #[error("ticker {0} has zero return variance in the window")]
    ZeroVariance(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("vertex {0} is not in the tree")]
    VertexNotInTree(String),

    #[error("at least {needed} vertices are required, got {got}")]
    TooFewVertices { needed: usize, got: usize },

    #[error("power-law fit needs at least 2 populated degrees in [{lo}, {hi}], found {points}")]
    DegenerateFit { lo: usize, hi: usize, points: usize },

    #[error("edge {a}-{b} has length {weight:e}, below the minimum of {min:e}")]
    EdgeTooShort {
        a: String,
        b: String,
        weight: f64,
        min: f64,
    },

    #[error("unknown metric {0}")]
    UnknownMetric(String),

    #[error("every window of the scan was skipped")]
    NoValidWindows,

    #[error("no static center was configured, mol_static is absent")]
    MissingStaticCenter,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid synthetic market: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
