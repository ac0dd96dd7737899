//! Seeded synthetic minute data for tests and demos.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use qdcca_core::ReturnMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quotes::QuoteSeries;

/// First timestamp written by [`write_wide_csv`]: 2020-01-01T00:00:00Z.
pub const EPOCH_START: i64 = 1_577_836_800;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    Iid,
    /// Gaussian returns with the given `n x n` row-major correlation matrix.
    Correlated { target: Vec<f64> },
    Ar1 { phi: f64 },
    /// `r_i = beta_i f + e_i` with loadings drawn from `[0.5, 1.5]`.
    Factor,
    /// Common factor observed through asynchronous trading: each asset
    /// updates its quoted price with probability `trade_prob` per minute and
    /// carries idiosyncratic noise of relative size `noise`.
    AsyncFactor { trade_prob: f64, noise: f64 },
    /// Equicorrelated blocks of the given sizes.
    Blocks { sizes: Vec<usize>, within: f64, across: f64 },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Iid => "iid",
            Generator::Correlated { .. } => "correlated",
            Generator::Ar1 { .. } => "ar1",
            Generator::Factor => "factor",
            Generator::AsyncFactor { .. } => "async-factor",
            Generator::Blocks { .. } => "blocks",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub generator: Generator,
    /// Number of assets.
    pub n: usize,
    /// Number of minute prices; returns have one sample fewer.
    pub t: usize,
    pub seed: u64,
    /// Standard deviation scale of one-minute log returns.
    pub vol: f64,
}

impl SynthSpec {
    pub fn new(generator: Generator, n: usize, t: usize, seed: u64) -> Self {
        Self {
            generator,
            n,
            t,
            seed,
            vol: 1e-3,
        }
    }
}

/// `BTC`, `ETH`, then `X002`, `X003`, ...
pub fn ticker_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| match i {
            0 => "BTC".to_string(),
            1 => "ETH".to_string(),
            _ => format!("X{i:03}"),
        })
        .collect()
}

fn normals(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Lower Cholesky factor of a correlation matrix.
pub fn cholesky(target: &[f64], n: usize) -> Result<DMatrix<f64>> {
    if target.len() != n * n {
        return Err(Error::Data(format!("target matrix has {} entries, expected {}", target.len(), n * n)));
    }
    let m = DMatrix::from_row_slice(n, n, target);
    if (0..n).any(|i| (0..i).any(|j| m[(i, j)] != m[(j, i)])) {
        return Err(Error::Data("target matrix is not symmetric".into()));
    }
    m.cholesky().map(|c| c.l()).ok_or(Error::NotPositiveDefinite)
}

pub fn block_matrix(sizes: &[usize], within: f64, across: f64) -> Vec<f64> {
    let block: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &k)| std::iter::repeat_n(b, k)).collect();
    let n = block.len();
    let mut m = vec![across; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                m[i * n + j] = 1.0;
            } else if block[i] == block[j] {
                m[i * n + j] = within;
            }
        }
    }
    m
}

fn correlated_rows(rng: &mut ChaCha8Rng, l: &DMatrix<f64>, len: usize) -> Vec<Vec<f64>> {
    let n = l.nrows();
    let z: Vec<Vec<f64>> = (0..n).map(|_| normals(rng, len)).collect();
    (0..n)
        .map(|i| {
            (0..len)
                .map(|t| (0..=i).map(|k| l[(i, k)] * z[k][t]).sum())
                .collect()
        })
        .collect()
}

/// Unit-scale return rows (before `vol` scaling).
fn raw_returns(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let len = spec.t - 1;
    let n = spec.n;
    Ok(match &spec.generator {
        Generator::Iid => (0..n).map(|_| normals(rng, len)).collect(),
        Generator::Correlated { target } => correlated_rows(rng, &cholesky(target, n)?, len),
        Generator::Blocks { sizes, within, across } => {
            if sizes.iter().sum::<usize>() != n {
                return Err(Error::Data(format!("block sizes {sizes:?} do not sum to n = {n}")));
            }
            correlated_rows(rng, &cholesky(&block_matrix(sizes, *within, *across), n)?, len)
        }
        Generator::Ar1 { phi } => {
            if !(phi.abs() < 1.0) {
                return Err(Error::Data(format!("AR(1) coefficient {phi} is not stationary")));
            }
            (0..n)
                .map(|_| {
                    let mut prev: f64 = rng.sample::<f64, _>(StandardNormal) / (1.0 - phi * phi).sqrt();
                    (0..len)
                        .map(|_| {
                            prev = phi * prev + rng.sample::<f64, _>(StandardNormal);
                            prev
                        })
                        .collect()
                })
                .collect()
        }
        Generator::Factor => {
            let f = normals(rng, len);
            (0..n)
                .map(|_| {
                    let beta: f64 = rng.random_range(0.5..1.5);
                    f.iter().map(|v| beta * v + rng.sample::<f64, _>(StandardNormal)).collect()
                })
                .collect()
        }
        Generator::AsyncFactor { trade_prob, noise } => {
            if !(*trade_prob > 0.0 && *trade_prob <= 1.0) {
                return Err(Error::Data(format!("trade probability {trade_prob} outside (0, 1]")));
            }
            let f = normals(rng, len);
            (0..n)
                .map(|_| {
                    let mut latent = 0.0;
                    let mut quoted = 0.0;
                    let mut out = Vec::with_capacity(len);
                    for &fv in &f {
                        latent += fv + noise * rng.sample::<f64, _>(StandardNormal);
                        let prev = quoted;
                        if rng.random::<f64>() < *trade_prob {
                            quoted = latent;
                        }
                        out.push(quoted - prev);
                    }
                    out
                })
                .collect()
        }
    })
}

/// Log returns on a one-minute grid starting at epoch minute `EPOCH_START / 60 + 1`.
pub fn generate_returns(spec: &SynthSpec) -> Result<ReturnMatrix> {
    if spec.n == 0 || spec.t < 2 {
        return Err(Error::Data("synthetic data needs n >= 1 and t >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rows: Vec<Vec<f64>> = raw_returns(spec, &mut rng)?
        .into_iter()
        .map(|r| r.into_iter().map(|v| v * spec.vol).collect())
        .collect();
    let start = EPOCH_START / 60;
    let timestamps = (1..spec.t as i64).map(|k| start + k).collect();
    Ok(ReturnMatrix::from_rows(ticker_names(spec.n), timestamps, &rows)?)
}

/// Prices starting at 100 whose log returns are the rows of `returns`.
pub fn prices_from_returns(returns: &ReturnMatrix) -> Vec<QuoteSeries> {
    let first = returns.timestamps().first().copied().unwrap_or(0) - 1;
    let mut timestamps = vec![first];
    timestamps.extend_from_slice(returns.timestamps());
    returns
        .rows()
        .zip(returns.tickers())
        .map(|(row, ticker)| {
            let mut log_p = 100f64.ln();
            let mut prices = vec![100.0];
            for r in row {
                log_p += r;
                prices.push(log_p.exp());
            }
            QuoteSeries {
                ticker: ticker.clone(),
                timestamps: timestamps.clone(),
                prices,
            }
        })
        .collect()
}

pub fn generate_prices(spec: &SynthSpec) -> Result<Vec<QuoteSeries>> {
    Ok(prices_from_returns(&generate_returns(spec)?))
}

/// Writes `timestamp,<ticker>,...` with epoch-second timestamps. Series must
/// share one grid.
pub fn write_wide_csv(path: &Path, series: &[QuoteSeries]) -> Result<()> {
    let Some(first) = series.first() else {
        return Err(Error::Data("nothing to write".into()));
    };
    if series.iter().any(|s| s.timestamps != first.timestamps) {
        return Err(Error::Data("series do not share a timestamp grid".into()));
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    write!(w, "timestamp").map_err(io)?;
    for s in series {
        write!(w, ",{}", s.ticker).map_err(io)?;
    }
    writeln!(w).map_err(io)?;
    for (k, t) in first.timestamps.iter().enumerate() {
        write!(w, "{}", t * 60).map_err(io)?;
        for s in series {
            write!(w, ",{}", s.prices[k]).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}
