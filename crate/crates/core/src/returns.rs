use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::series;

/// `N` aligned return series over a shared timestamp grid, stored row-major
/// (one row per asset).
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMatrix {
    tickers: Vec<String>,
    timestamps: Vec<i64>,
    values: Vec<f64>,
    normalized: bool,
}

impl ReturnMatrix {
    pub fn new(tickers: Vec<String>, timestamps: Vec<i64>, values: Vec<f64>) -> Result<Self> {
        let expected = tickers.len() * timestamps.len();
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            tickers,
            timestamps,
            values,
            normalized: false,
        })
    }

    /// Builds the matrix from one vector per asset.
    pub fn from_rows(tickers: Vec<String>, timestamps: Vec<i64>, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != tickers.len() {
            return Err(Error::DimensionMismatch {
                expected: tickers.len(),
                got: rows.len(),
            });
        }
        let mut values = Vec::with_capacity(rows.len() * timestamps.len());
        for row in rows {
            if row.len() != timestamps.len() {
                return Err(Error::LengthMismatch {
                    left: timestamps.len(),
                    right: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(tickers, timestamps, values)
    }

    pub fn n_series(&self) -> usize {
        self.tickers.len()
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let t = self.len();
        &self.values[i * t..(i + 1) * t]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_series()).map(move |i| self.row(i))
    }

    pub fn index_of(&self, ticker: &str) -> Option<usize> {
        self.tickers.iter().position(|t| t == ticker)
    }

    /// Columns `start..end` as a new matrix.
    pub fn slice(&self, start: usize, end: usize) -> ReturnMatrix {
        let mut values = Vec::with_capacity(self.n_series() * (end - start));
        for row in self.rows() {
            values.extend_from_slice(&row[start..end]);
        }
        ReturnMatrix {
            tickers: self.tickers.clone(),
            timestamps: self.timestamps[start..end].to_vec(),
            values,
            normalized: false,
        }
    }

    /// Every row standardized to zero mean and unit variance. On failure the
    /// error carries the offending ticker.
    pub fn normalized(&self) -> core::result::Result<ReturnMatrix, (String, Error)> {
        let mut values = Vec::with_capacity(self.values.len());
        for (i, row) in self.rows().enumerate() {
            let z = series::normalize(row).map_err(|e| (self.tickers[i].clone(), e))?;
            values.extend_from_slice(&z);
        }
        Ok(ReturnMatrix {
            tickers: self.tickers.clone(),
            timestamps: self.timestamps.clone(),
            values,
            normalized: true,
        })
    }

    /// Same grid and labels with new values (used for residual returns).
    pub fn with_values(&self, values: Vec<f64>) -> Result<ReturnMatrix> {
        let mut m = Self::new(self.tickers.clone(), self.timestamps.clone(), values)?;
        m.normalized = false;
        Ok(m)
    }
}
