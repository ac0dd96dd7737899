//! Detrended cross-correlation analysis of parallel return series.
//!
//! The crate is `no_std` and only needs `alloc`. It covers the numerical
//! side of the analysis:
//!
//! - [`dfa`]: box-wise detrending and the q-dependent detrended
//!   cross-correlation coefficient `rho_q(s)`, plus its lagged variant.
//! - [`spectra`]: the `N x N` matrix of `rho_q` values, its symmetric
//!   eigen-decomposition, eigenvector localization entropy and the
//!   market-factor residual filter.
//! - [`netgraph`]: metric distances, minimum spanning trees, tree topology
//!   statistics and Louvain communities.
//! - [`series`] and [`window`]: return construction, standardization,
//!   rolling-window arithmetic and threshold runs.
//!
//! IO, configuration, parallel orchestration and the command line live in
//! the `qdcca` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dfa;
pub mod error;
mod math;
pub mod netgraph;
pub mod returns;
pub mod series;
pub mod spectra;
pub mod window;

pub use dfa::{
    compute_box_residuals, fluctuation_functions, local_moments, rho_q, rho_q_lagged,
    BoxResiduals, DetrendConfig, Detrender, FluctuationSet, LocalMoments, PreparedSeries,
};
pub use error::{Error, Result};
pub use returns::ReturnMatrix;
pub use spectra::{DetrendedCorrelationMatrix, SpectralSummary};
