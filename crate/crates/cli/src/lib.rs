//! Command-line front end: CSV ingestion, canonical JSON reports, bundled
//! fixtures and the `reproduce` pipeline.

pub mod app;
pub mod audit;
pub mod error;
pub mod fixtures;
pub mod ingest;
pub mod json;
pub mod reproduce;

pub use app::run;
pub use error::{CliError, Result};
