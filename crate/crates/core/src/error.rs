use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column {column:?}: missing value")]
    MissingValue { row: usize, column: String },

    #[error("row {row}, column {column:?}: cannot parse {value:?} as a number")]
    BadNumber {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}, column {column:?}: price {value} is not strictly positive")]
    NonPositivePrice {
        row: usize,
        column: String,
        value: f64,
    },

    #[error("row {row}: cannot parse date {value:?} (expected YYYY-MM-DD)")]
    BadDate { row: usize, value: String },

    #[error("row {row}: date {date} is not after the previous date")]
    UnsortedDates { row: usize, date: String },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("header must name a date column and at least two asset columns")]
    BadHeader,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid portfolio: {0}")]
    InvalidPortfolio(String),

    #[error("not enough data: {0}")]
    NotEnoughData(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("zero volatility: the realised Sharpe ratio is undefined")]
    ZeroVolatility,

    #[error("no market vector for day {day} (window {window}) in the cluster model")]
    UnknownVector { day: usize, window: usize },
}
