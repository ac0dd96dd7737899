//! The `N x N` matrix of detrended coefficients and its spectrum.

mod eigen;
mod residual;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dfa::{exceeds_unit_range, DetrendConfig, Detrender, PreparedSeries};
use crate::error::{Error, Result};
use crate::math;
use crate::returns::ReturnMatrix;

pub use eigen::{eigendecompose, symmetric_eigen, SymmetricEigen};
pub use residual::{correlation, eigensignal, residual_returns, ResidualReturns};

/// Eigenvalue gaps below this mark the spectrum as degenerate; eigenvectors
/// inside a degenerate eigenspace are not unique.
pub const DEGENERACY_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixMeta {
    pub q: f64,
    pub scale: usize,
    pub window: Option<usize>,
}

/// Symmetric matrix of `rho_q` values with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DetrendedCorrelationMatrix {
    labels: Vec<String>,
    data: Vec<f64>,
    meta: MatrixMeta,
}

/// Unordered pairs `(i, j)`, `i < j`, in row-major order.
pub fn pair_indices(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

impl DetrendedCorrelationMatrix {
    /// Assembles the matrix from the upper-triangle values listed in
    /// [`pair_indices`] order.
    pub fn from_upper(labels: Vec<String>, upper: &[f64], meta: MatrixMeta) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return Err(Error::TooFewSeries { need: 2, got: n });
        }
        let expected = n * (n - 1) / 2;
        if upper.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: upper.len(),
            });
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        for ((i, j), &v) in pair_indices(n).zip(upper) {
            if !v.is_finite() {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
        Ok(Self { labels, data, meta })
    }

    /// Wraps a dense row-major matrix, checking symmetry and the unit
    /// diagonal.
    pub fn from_dense(labels: Vec<String>, data: Vec<f64>, meta: MatrixMeta) -> Result<Self> {
        let n = labels.len();
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        for i in 0..n {
            if data[i * n + i] != 1.0 {
                return Err(Error::NotSymmetric { row: i, col: i });
            }
            for j in i + 1..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if !a.is_finite() || a != b {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { labels, data, meta })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn meta(&self) -> MatrixMeta {
        self.meta
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim() + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Number of off-diagonal pairs with `|rho| > 1` (possible for `q != 2`).
    pub fn out_of_range_pairs(&self) -> usize {
        pair_indices(self.dim())
            .filter(|&(i, j)| exceeds_unit_range(self.get(i, j)))
            .count()
    }
}

/// Prepares every row of `returns` for pairing. A row without any
/// detrended variance fails with its ticker attached.
pub fn prepare_rows(returns: &ReturnMatrix, detrender: &Detrender) -> Result<Vec<PreparedSeries>> {
    returns
        .rows()
        .zip(returns.tickers())
        .map(|(row, ticker)| {
            let p = PreparedSeries::new(row, detrender)?;
            if p.variances().iter().all(|&v| v == 0.0) {
                return Err(Error::ZeroVariance {
                    label: Some(ticker.clone()),
                });
            }
            Ok(p)
        })
        .collect()
}

/// `rho_q` for all `N (N - 1) / 2` pairs, evaluated sequentially.
pub fn correlation_matrix(returns: &ReturnMatrix, cfg: &DetrendConfig) -> Result<DetrendedCorrelationMatrix> {
    let n = returns.n_series();
    if n < 2 {
        return Err(Error::TooFewSeries { need: 2, got: n });
    }
    cfg.validate_for_len(returns.len())?;
    let detrender = Detrender::for_config(cfg)?;
    let prepared = prepare_rows(returns, &detrender)?;
    let upper = pair_indices(n)
        .map(|(i, j)| prepared[i].rho(&prepared[j], cfg.q))
        .collect::<Result<Vec<_>>>()?;
    DetrendedCorrelationMatrix::from_upper(
        returns.tickers().to_vec(),
        &upper,
        MatrixMeta {
            q: cfg.q,
            scale: cfg.scale,
            window: None,
        },
    )
}

/// Eigen-structure of one correlation matrix, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[i]` belongs to `eigenvalues[i]`, oriented so its
    /// largest-magnitude component is positive.
    pub eigenvectors: Vec<Vec<f64>>,
    pub entropies: Vec<f64>,
    /// Largest squared component of each eigenvector.
    pub max_components: Vec<f64>,
    /// Smallest gap between consecutive eigenvalues.
    pub min_gap: f64,
}

impl SpectralSummary {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Some eigenvalues coincide within [`DEGENERACY_GAP`]; entropies of
    /// eigenvectors in that eigenspace depend on the solver.
    pub fn is_degenerate(&self) -> bool {
        self.min_gap < DEGENERACY_GAP
    }

    /// Whether eigenvalue `i` sits in a degenerate eigenspace.
    pub fn is_degenerate_at(&self, i: usize) -> bool {
        let ev = &self.eigenvalues;
        (i > 0 && ev[i - 1] - ev[i] < DEGENERACY_GAP)
            || (i + 1 < ev.len() && ev[i] - ev[i + 1] < DEGENERACY_GAP)
    }
}

/// Shannon entropy of the squared components of a unit vector, `0 ln 0 = 0`.
pub fn shannon_entropy(v: &[f64]) -> Result<f64> {
    let norm2 = math::dot(v, v);
    if !((norm2 - 1.0).abs() <= 1e-9) {
        return Err(Error::NotNormalized(norm2));
    }
    let mut h = 0.0;
    for &c in v {
        let p = c * c;
        if p > 0.0 {
            h -= p * math::ln(p);
        }
    }
    Ok(h.max(0.0))
}

/// Largest squared component.
pub fn max_component(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, c| f64::max(m, c * c))
}
