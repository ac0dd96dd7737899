use alloc::string::String;
use alloc::vec::Vec;

use crate::math;
use crate::spectra::DetrendedCorrelationMatrix;

/// `d(i, j) = sqrt(2 (1 - rho(i, j)))`, row-major, with the coefficients it
/// was derived from kept alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    data: Vec<f64>,
    rho: Vec<f64>,
    clamped: usize,
}

impl DistanceMatrix {
    /// Wraps raw distances; the companion coefficient is `1 - d^2 / 2`.
    pub fn from_distances(labels: Vec<String>, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), labels.len() * labels.len(), "distance matrix must be square");
        let rho = data.iter().map(|d| 1.0 - d * d / 2.0).collect();
        Self {
            labels,
            data,
            rho,
            clamped: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim() + j]
    }

    pub fn rho(&self, i: usize, j: usize) -> f64 {
        self.rho[i * self.dim() + j]
    }

    /// Off-diagonal pairs whose coefficient exceeded 1 and had the radicand
    /// clamped to zero.
    pub fn clamped_pairs(&self) -> usize {
        self.clamped
    }

    /// Same matrix with every distance passed through `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            labels: self.labels.clone(),
            data: self.data.iter().map(|&d| f(d)).collect(),
            rho: self.rho.clone(),
            clamped: self.clamped,
        }
    }
}

pub fn distance_matrix(c: &DetrendedCorrelationMatrix) -> DistanceMatrix {
    let n = c.dim();
    let mut clamped = 0;
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                data.push(0.0);
                continue;
            }
            let radicand = 2.0 * (1.0 - c.get(i, j));
            if radicand < 0.0 {
                if i < j {
                    clamped += 1;
                }
                data.push(0.0);
            } else {
                data.push(math::sqrt(radicand));
            }
        }
    }
    DistanceMatrix {
        labels: c.labels().to_vec(),
        data,
        rho: c.as_slice().to_vec(),
        clamped,
    }
}
