//! Command-line tool and file formats for `costforest-core`.
//!
//! The binary exposes `build-costs`, `resample`, `train`, `predict`,
//! `evaluate`, `benchmark` and `verify-theory`. This library holds the
//! pieces it is built from: the flat config format ([`config`]), CSV
//! ingestion ([`csv_io`]), model files ([`model_file`]), benchmark specs
//! and reports ([`bench`]) and thread-pool runners ([`parallel`]).
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or
//! validation error, 3 internal error (including failed writes).

pub mod bench;
pub mod builders;
pub mod cli;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod model_file;
pub mod parallel;
pub mod settings;
pub mod theory_report;

pub use error::{CliError, CliResult};
