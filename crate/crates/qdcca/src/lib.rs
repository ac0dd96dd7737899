//! Rolling-window q-dependent detrended correlation analysis of minute
//! price data: ingestion, the windowed sweep, synthetic data and CSV output.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod quotes;
pub mod synth;

pub use config::AnalysisConfig;
pub use error::{Error, Result};
pub use pipeline::{prepare_dataset, run_analysis, Dataset, RunResult, Stages};
