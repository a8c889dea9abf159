use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numeric,
    Io,
}

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate economy: r + delta = {0} must be positive")]
    DegenerateEconomy(f64),

    #[error("infeasible savings rate {savings:.4}: implied by k_infty = {k_infty:.4}, r = {growth_rate:.4}, delta = {depreciation:.4} (consumption would be non-positive)")]
    InfeasibleSavings {
        savings: f64,
        k_infty: f64,
        growth_rate: f64,
        depreciation: f64,
    },

    #[error("rate table covers [{covered_from}, {covered_to}] but [{requested_from}, {requested_to}] was requested")]
    UncoveredSpan {
        covered_from: f64,
        covered_to: f64,
        requested_from: f64,
        requested_to: f64,
    },

    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as a number")]
    MalformedCell {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },

    #[error("{path}: missing value for sector {sector:?} in year {year}")]
    MissingCell {
        path: PathBuf,
        sector: String,
        year: i32,
    },

    #[error("{path}: malformed header: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("duplicate sector {0:?}")]
    DuplicateSector(String),

    #[error("years are not contiguous: {0} follows {1}")]
    NonContiguousYears(i32, i32),

    #[error("negative value {value} for {what} in year {year}")]
    NegativeValue { what: String, year: i32, value: f64 },

    #[error("unmapped sectors: {}", .0.join(", "))]
    UnmappedSectors(Vec<String>),

    #[error("sector {0:?} is listed under more than one component")]
    AmbiguousMapping(String),

    #[error("series spans do not overlap")]
    EmptySpan,

    #[error("year {0} is outside the series span")]
    YearOutOfSpan(i32),

    #[error("non-positive value {value} in year {year}; log-linear fit undefined")]
    NonPositiveValue { year: i32, value: f64 },

    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),

    #[error("scenario definition: {0}")]
    ScenarioDefinition(String),

    #[error("fit report: {0}")]
    FitReport(String),

    #[error("calibration did not converge after {evaluations} evaluations (residual {residual})")]
    NotConverged { evaluations: usize, residual: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidInput(_)
            | Error::UnknownScenario(_)
            | Error::ScenarioDefinition(_)
            | Error::Toml(_) => ErrorClass::Config,
            Error::DegenerateEconomy(_)
            | Error::InfeasibleSavings { .. }
            | Error::NotConverged { .. } => ErrorClass::Numeric,
            Error::Io { .. } => ErrorClass::Io,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
