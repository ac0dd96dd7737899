//! Cyclic Jacobi eigensolver for dense real symmetric matrices.
//!
//! Correlation matrices here are at most a few hundred rows, where Jacobi is
//! fast enough and gives eigenvectors orthonormal to working precision.

use alloc::vec;
use alloc::vec::Vec;

use super::{max_component, shannon_entropy, DetrendedCorrelationMatrix, SpectralSummary};
use crate::error::{Error, Result};
use crate::math;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (descending) and matching unit eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            acc += a[i * n + j] * a[i * n + j];
        }
    }
    math::sqrt(2.0 * acc)
}

/// Full eigen-decomposition of the row-major symmetric `n x n` matrix `a`.
pub fn symmetric_eigen(a: &[f64], n: usize) -> Result<SymmetricEigen> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: a.len(),
        });
    }
    for i in 0..n {
        for j in i..n {
            let (x, y) = (a[i * n + j], a[j * n + i]);
            if !x.is_finite() || x != y {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    let frobenius = math::sqrt(math::dot(a, a));
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let mut converged = n < 2;
    for sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off = off_diagonal_norm(&a, n);
        if off == 0.0 || off <= 1e-15 * frobenius {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // after a few sweeps, drop elements below the diagonal's resolution
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = {
                    let t = 1.0 / (theta.abs() + math::sqrt(theta * theta + 1.0));
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        let off = off_diagonal_norm(&a, n);
        if !(off == 0.0 || off <= 1e-15 * frobenius) {
            return Err(Error::NoConvergence {
                sweeps: MAX_SWEEPS,
                off_norm: off,
                frobenius,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps index order among exactly equal eigenvalues
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&col| {
            let mut vec: Vec<f64> = (0..n).map(|k| v[k * n + col]).collect();
            orient(&mut vec);
            vec
        })
        .collect();
    Ok(SymmetricEigen { values, vectors })
}

/// Flips `v` so that its largest-magnitude component (first one on ties) is
/// positive.
fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (i, c) in v.iter().enumerate() {
        if c.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&c| c < 0.0) {
        for c in v.iter_mut() {
            *c = -*c;
        }
    }
}

pub fn eigendecompose(c: &DetrendedCorrelationMatrix) -> Result<SpectralSummary> {
    let n = c.dim();
    let eig = symmetric_eigen(c.as_slice(), n)?;
    let entropies = eig
        .vectors
        .iter()
        .map(|v| shannon_entropy(v))
        .collect::<Result<Vec<_>>>()?;
    let max_components = eig.vectors.iter().map(|v| max_component(v)).collect();
    let min_gap = eig
        .values
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min);
    Ok(SpectralSummary {
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
        entropies,
        max_components,
        min_gap,
    })
}
