//! Reliability analysis for fully crossed survey panels.
//!
//! This crate estimates the seven variance components of a two-facet fully
//! crossed random design (persons x items x occasions), projects reliability
//! under hypothetical numbers of items and occasions, and computes classical
//! multi-item reliability statistics. A seeded simulation module generates
//! synthetic panels with known components for estimator validation and runs
//! the item-resampling bootstrap.
//!
//! The main pipeline:
//!
//! 1. [`data::ingest`] builds complete-case [`data::ResponseCube`]s from
//!    long-format records.
//! 2. [`gstudy::mean_squares`] and [`gstudy::estimate_components`] produce
//!    [`gstudy::VarianceComponents`] via expected-mean-square inversion.
//! 3. [`dstudy::dstudy_grid`] projects the generalizability coefficient over
//!    a grid of (occasions, items) scenarios.
//! 4. [`classical`] provides coefficient alpha, Spearman-Brown projection,
//!    cross-wave correlations, and correlation-matrix scree eigenvalues.
//! 5. [`simulate`] generates seeded synthetic cubes and bootstrap summaries.

pub mod classical;
pub mod data;
pub mod dstudy;
pub mod error;
pub mod gstudy;
pub mod report;
pub mod simulate;

mod jacobi;

pub use data::{CellSummary, CodingConfig, IngestReport, LongRecord, ResponseCube};
pub use dstudy::DStudyCell;
pub use error::{Error, Result};
pub use gstudy::{Components, Effect, MeanSquaresTable, VarianceComponents};
pub use simulate::{BootstrapSpec, BootstrapSummary, GeneratorSpec, RecoveryReport};
