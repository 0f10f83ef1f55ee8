//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by ingestion, estimation, and projection.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed CSV input, with the 1-based line of the offending record.
    #[error("csv error at line {line}: {message}")]
    Csv { line: u64, message: String },

    /// The input file header does not match the expected long format.
    #[error("expected header `group,person,occasion,item,response`, found `{found}`")]
    Header { found: String },

    /// Coding config could not be parsed.
    #[error("coding config line {line}: {message}")]
    Config { line: usize, message: String },

    /// Two records share the same (group, person, occasion, item) key.
    #[error("duplicate record: group `{group}`, person `{person}`, occasion {occasion}, item {item}")]
    DuplicateRecord {
        group: String,
        person: String,
        occasion: u32,
        item: u32,
    },

    /// The record stream contained nothing.
    #[error("input contains no records")]
    EmptyInput,

    /// A record carries a non-finite response.
    #[error("non-finite response for group `{group}`, person `{person}`, occasion {occasion}, item {item}")]
    NonFiniteResponse {
        group: String,
        person: String,
        occasion: u32,
        item: u32,
    },

    /// A group has no usable complete-case cube.
    #[error("group `{group}` is unusable: {reason}")]
    UnusableGroup { group: String, reason: String },

    /// A facet of the design is too small for the requested analysis.
    #[error("design error: {facet} count is {got}, analysis needs at least {needed}")]
    Design {
        facet: &'static str,
        needed: usize,
        got: usize,
    },

    /// The requested occasion is not present in the cube.
    #[error("occasion {occasion} not present in cube")]
    OccasionNotFound { occasion: u32 },

    /// The requested item is not present in the cube.
    #[error("item {item} not present in cube")]
    ItemNotFound { item: u32 },

    /// A statistic is undefined because a required variance is zero.
    #[error("zero variance in {what}")]
    ZeroVariance { what: String },

    /// Person variance and all person-crossed error variances are zero, so
    /// no reliability ratio is defined.
    #[error("degenerate measurement: person variance and error variances are all zero")]
    DegenerateMeasurement,

    /// An argument is outside the domain of the operation.
    #[error("{0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
