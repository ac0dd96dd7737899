//! Dataset preparation and the rolling-window sweep.

use std::path::Path;

use log::{info, warn};
use qdcca_core::dfa::{lag_overlap, rho_from_parts, Detrender, PreparedSeries};
use qdcca_core::netgraph::{
    degree_distribution, distance_matrix, louvain, mean_path_length, mean_weighted_path_length, minimum_spanning_tree,
    powerlaw_fit, Edge, Partition, PowerLawFit,
};
use qdcca_core::series::{log_returns, mean_variance};
use qdcca_core::spectra::{
    correlation, eigendecompose, eigensignal, pair_indices, prepare_rows, residual_returns, MatrixMeta, SpectralSummary,
};
use qdcca_core::window::{rolling_windows, Window};
use qdcca_core::{DetrendedCorrelationMatrix, ReturnMatrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AnalysisConfig, Calendar};
use crate::error::{Error, Result};
use crate::quotes::{align_series, load_quotes, rebase_prices, QuoteSeries, Retention};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub ticker: String,
    pub reason: String,
}

/// Aligned log returns ready for windowing.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub returns: ReturnMatrix,
    /// Per return sample: some asset had no quote and was forward-filled.
    pub filled: Vec<bool>,
    pub excluded: Vec<Exclusion>,
    pub retention: Vec<Retention>,
    /// Prices were re-expressed in units of `base`.
    pub rebased: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub assets: Vec<String>,
    pub samples: usize,
    pub first_timestamp: Option<i64>,
    pub last_timestamp: Option<i64>,
    pub filled_samples: usize,
    pub rebased: bool,
    pub excluded: Vec<Exclusion>,
    pub retention: Vec<Retention>,
}

impl Dataset {
    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            assets: self.returns.tickers().to_vec(),
            samples: self.returns.len(),
            first_timestamp: self.returns.timestamps().first().copied(),
            last_timestamp: self.returns.timestamps().last().copied(),
            filled_samples: self.filled.iter().filter(|&&f| f).count(),
            rebased: self.rebased,
            excluded: self.excluded.clone(),
            retention: self.retention.clone(),
        }
    }
}

/// Forward-fills every series onto the full minute range.
fn continuous_grid(timestamps: &[i64], prices: &[Vec<f64>]) -> (Vec<i64>, Vec<Vec<f64>>, Vec<bool>) {
    let (first, last) = (timestamps[0], timestamps[timestamps.len() - 1]);
    let grid: Vec<i64> = (first..=last).collect();
    let mut present = vec![false; grid.len()];
    for &t in timestamps {
        present[(t - first) as usize] = true;
    }
    let filled: Vec<Vec<f64>> = prices
        .iter()
        .map(|p| {
            let mut out = Vec::with_capacity(grid.len());
            let mut k = 0;
            for (g, &here) in present.iter().enumerate() {
                if here {
                    debug_assert_eq!(timestamps[k], first + g as i64);
                    out.push(p[k]);
                    k += 1;
                } else {
                    let last = *out.last().expect("grid starts on a quote");
                    out.push(last);
                }
            }
            out
        })
        .collect();
    let missing = present.iter().map(|p| !p).collect();
    (grid, filled, missing)
}

/// Re-bases, aligns, converts to log returns and drops pegged assets.
pub fn prepare_dataset(series: Vec<QuoteSeries>, cfg: &AnalysisConfig) -> Result<Dataset> {
    let mut excluded = Vec::new();
    let base = series.iter().position(|s| s.ticker == cfg.base);
    let rebased = base.is_some();
    let series: Vec<QuoteSeries> = match base {
        Some(b) => {
            info!("re-pricing in {}", cfg.base);
            excluded.push(Exclusion {
                ticker: cfg.base.clone(),
                reason: "base asset".into(),
            });
            series
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != b)
                .map(|(_, s)| rebase_prices(s, &series[b]))
                .collect::<Result<_>>()?
        }
        None => series,
    };
    let aligned = align_series(&series)?;
    if aligned.timestamps.len() < 2 {
        return Err(Error::Data("fewer than two common timestamps".into()));
    }
    let (timestamps, prices, missing) = match cfg.data.calendar {
        Calendar::Continuous => continuous_grid(&aligned.timestamps, &aligned.prices),
        Calendar::Sessions => {
            let n = aligned.timestamps.len();
            (aligned.timestamps.clone(), aligned.prices.clone(), vec![false; n])
        }
    };
    let returns: Vec<Vec<f64>> = prices.iter().map(|p| log_returns(p)).collect::<qdcca_core::Result<_>>()?;
    let sd: Vec<f64> = returns.iter().map(|r| mean_variance(r).1.sqrt()).collect();
    let mut sorted = sd.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    let mut tickers = Vec::new();
    let mut rows = Vec::new();
    for ((ticker, row), &s) in aligned.tickers.iter().zip(returns).zip(&sd) {
        let reason = if s == 0.0 {
            Some("constant price".to_string())
        } else if s < cfg.data.peg_ratio * median {
            Some(format!("pegged: return volatility {s:.3e} below {} x median {median:.3e}", cfg.data.peg_ratio))
        } else {
            None
        };
        match reason {
            Some(reason) => {
                info!("excluding {ticker}: {reason}");
                excluded.push(Exclusion {
                    ticker: ticker.clone(),
                    reason,
                });
            }
            None => {
                tickers.push(ticker.clone());
                rows.push(row);
            }
        }
    }
    if tickers.len() < 2 {
        return Err(Error::Data(format!("{} usable assets after exclusions, need 2", tickers.len())));
    }
    let mut returns = ReturnMatrix::from_rows(tickers, timestamps[1..].to_vec(), &rows)?;
    if cfg.data.global_normalization {
        returns = returns
            .normalized()
            .map_err(|(t, e)| Error::Data(format!("{t}: {e}")))?;
    }
    Ok(Dataset {
        returns,
        filled: missing[1..].to_vec(),
        excluded,
        retention: aligned.retention,
        rebased,
    })
}

pub fn load_dataset(path: &Path, cfg: &AnalysisConfig) -> Result<Dataset> {
    prepare_dataset(load_quotes(path)?, cfg)
}

/// Which parts of the sweep to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stages {
    pub spectra: bool,
    pub network: bool,
    pub communities: bool,
    pub lagged: bool,
    pub periods: bool,
}

impl Stages {
    pub const ALL: Stages = Stages {
        spectra: true,
        network: true,
        communities: true,
        lagged: true,
        periods: true,
    };
    pub const NONE: Stages = Stages {
        spectra: false,
        network: false,
        communities: false,
        lagged: false,
        periods: false,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeStats {
    pub edges: Vec<Edge>,
    pub mean_path_length: f64,
    pub weighted_path_length: f64,
    pub fit: std::result::Result<PowerLawFit, String>,
    pub hub: usize,
    pub max_degree: usize,
    pub total_weight: f64,
    pub clamped_pairs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualStats {
    pub lambda1: f64,
    pub entropy1: f64,
    pub max_component1: f64,
    pub mean_path_length: Option<f64>,
    /// Largest `|corr(residual_i, eigensignal)|` over assets.
    pub orthogonality: f64,
}

/// Spectrum without eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumStats {
    pub eigenvalues: Vec<f64>,
    pub entropies: Vec<f64>,
    pub max_components: Vec<f64>,
    pub degenerate: bool,
}

impl From<&SpectralSummary> for SpectrumStats {
    fn from(s: &SpectralSummary) -> Self {
        Self {
            eigenvalues: s.eigenvalues.clone(),
            entropies: s.entropies.clone(),
            max_components: s.max_components.clone(),
            degenerate: s.is_degenerate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagMean {
    pub anchor: String,
    pub tau: i64,
    pub mean_rho: f64,
}

/// Results of one `(q, s)` cell of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub q: f64,
    pub s: usize,
    pub mean_rho: f64,
    pub out_of_range: usize,
    pub spectrum: Option<SpectrumStats>,
    pub residual: Option<ResidualStats>,
    pub tree: Option<TreeStats>,
    pub partition: Option<Partition>,
    /// Anchor rows of the correlation matrix, one per present anchor.
    pub anchor_rows: Vec<(String, Vec<f64>)>,
    pub lagged: Vec<LagMean>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowRecord {
    pub window: Window,
    pub start_time: i64,
    /// Timestamp of the last sample, used as the window label.
    pub end_time: i64,
    pub filled_fraction: f64,
    pub outcome: std::result::Result<Vec<CellRecord>, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skip {
    pub window: usize,
    pub end_time: i64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub tickers: Vec<String>,
    pub anchors: Vec<String>,
    pub records: Vec<WindowRecord>,
}

impl RunResult {
    pub fn skips(&self) -> Vec<Skip> {
        self.records
            .iter()
            .filter_map(|r| {
                r.outcome.as_ref().err().map(|reason| Skip {
                    window: r.window.index,
                    end_time: r.end_time,
                    reason: reason.clone(),
                })
            })
            .collect()
    }

    /// Successful windows with the cell at grid position `cell`.
    pub fn cells(&self, cell: usize) -> impl Iterator<Item = (&WindowRecord, &CellRecord)> {
        self.records
            .iter()
            .filter_map(move |r| r.outcome.as_ref().ok().map(|cells| (r, &cells[cell])))
    }
}

/// Upper triangles of the correlation matrices for every `q`, sharing the
/// per-box covariances between orders.
fn upper_triangles(prepared: &[PreparedSeries], qs: &[f64]) -> qdcca_core::Result<Vec<Vec<f64>>> {
    let n = prepared.len();
    let fl: Vec<Vec<f64>> = qs
        .iter()
        .map(|&q| prepared.iter().map(|p| p.fluctuation(q)).collect())
        .collect();
    let mut out = vec![Vec::with_capacity(n * (n - 1) / 2); qs.len()];
    let mut cov = Vec::new();
    for (i, j) in pair_indices(n) {
        prepared[i].cross_moments_into(&prepared[j], &mut cov)?;
        for (k, &q) in qs.iter().enumerate() {
            let fxy = PreparedSeries::cross_fluctuation(&cov, q);
            out[k].push(rho_from_parts(fxy, fl[k][i], fl[k][j])?);
        }
    }
    Ok(out)
}

fn tree_stats(c: &DetrendedCorrelationMatrix) -> qdcca_core::Result<TreeStats> {
    let d = distance_matrix(c);
    let tree = minimum_spanning_tree(&d)?;
    let (hub, max_degree) = tree.hub();
    Ok(TreeStats {
        mean_path_length: mean_path_length(&tree),
        weighted_path_length: mean_weighted_path_length(&tree),
        fit: powerlaw_fit(&degree_distribution(&tree)).map_err(|e| match e {
            qdcca_core::Error::InsufficientSupport(_) => "insufficient-support".to_string(),
            other => other.to_string(),
        }),
        hub,
        max_degree,
        total_weight: tree.total_weight(),
        clamped_pairs: d.clamped_pairs(),
        edges: tree.edges().to_vec(),
    })
}

fn mean_offdiagonal(upper: &[f64]) -> f64 {
    upper.iter().sum::<f64>() / upper.len() as f64
}

struct WindowJob<'a> {
    cfg: &'a AnalysisConfig,
    stages: Stages,
    anchors: &'a [usize],
}

impl WindowJob<'_> {
    fn run(&self, returns: &ReturnMatrix, window: &Window) -> Result<Vec<CellRecord>> {
        let cfg = self.cfg;
        let labels = returns.tickers().to_vec();
        let n = labels.len();
        let mut cells = Vec::with_capacity(cfg.s.len() * cfg.q.len());
        for &s in &cfg.s {
            let detrender = Detrender::new(s, cfg.poly_order)?;
            let prepared = prepare_rows(returns, &detrender)?;
            let uppers = upper_triangles(&prepared, &cfg.q)?;
            let lagged = if self.stages.lagged {
                self.lag_pass(returns, &detrender, &uppers)?
            } else {
                vec![Vec::new(); cfg.q.len()]
            };
            for ((&q, upper), lagged) in cfg.q.iter().zip(uppers).zip(lagged) {
                let meta = MatrixMeta {
                    q,
                    scale: s,
                    window: Some(window.index),
                };
                let c = DetrendedCorrelationMatrix::from_upper(labels.clone(), &upper, meta)?;
                let summary = if self.stages.spectra { Some(eigendecompose(&c)?) } else { None };
                let residual = match (&summary, cfg.residual) {
                    (Some(summary), true) => Some(self.residual_pass(returns, summary, &detrender, q)?),
                    _ => None,
                };
                let tree = if self.stages.network { Some(tree_stats(&c)?) } else { None };
                let partition = self.stages.communities.then(|| {
                    louvain(&c, cfg.network.resolution, cfg.seed.wrapping_add(window.index as u64)).partition
                });
                let anchor_rows = self
                    .anchors
                    .iter()
                    .map(|&a| (labels[a].clone(), (0..n).map(|j| c.get(a, j)).collect()))
                    .collect();
                cells.push(CellRecord {
                    q,
                    s,
                    mean_rho: mean_offdiagonal(&upper),
                    out_of_range: c.out_of_range_pairs(),
                    spectrum: summary.as_ref().map(SpectrumStats::from),
                    residual,
                    tree,
                    partition,
                    anchor_rows,
                    lagged,
                });
            }
        }
        Ok(cells)
    }

    fn residual_pass(
        &self,
        returns: &ReturnMatrix,
        summary: &SpectralSummary,
        detrender: &Detrender,
        q: f64,
    ) -> Result<ResidualStats> {
        let z = eigensignal(returns, &summary.eigenvectors[0])?;
        let res = residual_returns(returns, &z)?;
        let orthogonality = res.residuals.rows().map(|r| correlation(r, &z).abs()).fold(0.0, f64::max);
        let prepared = prepare_rows(&res.residuals, detrender)?;
        let upper = upper_triangles(&prepared, &[q])?.remove(0);
        let meta = MatrixMeta {
            q,
            scale: detrender.scale(),
            window: None,
        };
        let c = DetrendedCorrelationMatrix::from_upper(returns.tickers().to_vec(), &upper, meta)?;
        let s = eigendecompose(&c)?;
        let mean_path_length = if self.stages.network {
            Some(tree_stats(&c)?.mean_path_length)
        } else {
            None
        };
        Ok(ResidualStats {
            lambda1: s.eigenvalues[0],
            entropy1: s.entropies[0],
            max_component1: s.max_components[0],
            mean_path_length,
            orthogonality,
        })
    }

    /// Mean `rho_q(s, tau)` of each anchor against every other asset, per
    /// `q`. The `tau = 0` values come from the matrix itself.
    fn lag_pass(&self, returns: &ReturnMatrix, detrender: &Detrender, uppers: &[Vec<f64>]) -> Result<Vec<Vec<LagMean>>> {
        let cfg = self.cfg;
        let n = returns.n_series();
        let labels = returns.tickers();
        let mut out = vec![Vec::new(); cfg.q.len()];
        let pair = |i: usize, j: usize| {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            a * (2 * n - a - 1) / 2 + (b - a - 1)
        };
        for &tau in &cfg.lags {
            let sums: Vec<Vec<f64>> = if tau == 0 {
                self.anchors
                    .iter()
                    .map(|&a| {
                        uppers
                            .iter()
                            .map(|u| (0..n).filter(|&j| j != a).map(|j| u[pair(a, j)]).sum())
                            .collect()
                    })
                    .collect()
            } else {
                let followers: Vec<PreparedSeries> = returns
                    .rows()
                    .map(|row| PreparedSeries::new(lag_overlap(row, row, tau).1, detrender))
                    .collect::<qdcca_core::Result<_>>()?;
                let mut cov = Vec::new();
                let mut sums = Vec::with_capacity(self.anchors.len());
                for &a in self.anchors {
                    let row = returns.row(a);
                    let leader = PreparedSeries::new(lag_overlap(row, row, tau).0, detrender)?;
                    let mut acc = vec![0.0; cfg.q.len()];
                    for (j, follower) in followers.iter().enumerate() {
                        if j == a {
                            continue;
                        }
                        leader.cross_moments_into(follower, &mut cov)?;
                        for (k, &q) in cfg.q.iter().enumerate() {
                            let fxy = PreparedSeries::cross_fluctuation(&cov, q);
                            acc[k] += rho_from_parts(fxy, leader.fluctuation(q), follower.fluctuation(q))?;
                        }
                    }
                    sums.push(acc);
                }
                sums
            };
            for (ai, &a) in self.anchors.iter().enumerate() {
                for (k, o) in out.iter_mut().enumerate() {
                    o.push(LagMean {
                        anchor: labels[a].clone(),
                        tau,
                        mean_rho: sums[ai][k] / (n - 1) as f64,
                    });
                }
            }
        }
        Ok(out)
    }
}

/// Runs the sweep over every window of `data`. Windows run in parallel on
/// `cfg.threads` workers; records come back in window order.
pub fn run_analysis(cfg: &AnalysisConfig, data: &Dataset, stages: Stages) -> Result<RunResult> {
    cfg.validate()?;
    let returns = &data.returns;
    let windows = rolling_windows(returns.len(), cfg.plan())?;
    let tickers = returns.tickers().to_vec();
    let mut anchors = Vec::new();
    let mut anchor_names = Vec::new();
    for a in &cfg.anchors {
        match returns.index_of(a) {
            Some(i) => {
                anchors.push(i);
                anchor_names.push(a.clone());
            }
            None => warn!("anchor {a} is not among the analyzed assets"),
        }
    }
    let job = WindowJob {
        cfg,
        stages,
        anchors: &anchors,
    };
    let process = |w: &Window| -> WindowRecord {
        let ts = returns.timestamps();
        let filled = data.filled[w.start..w.end].iter().filter(|&&f| f).count();
        let filled_fraction = filled as f64 / (w.end - w.start) as f64;
        let outcome = if filled_fraction > cfg.data.max_missing {
            Err(format!("{filled} filled samples ({:.2}%) exceed the limit", 100.0 * filled_fraction))
        } else {
            let slice = returns.slice(w.start, w.end);
            let prepared = if cfg.data.global_normalization {
                Ok(slice)
            } else {
                slice.normalized().map_err(|(t, e)| format!("{t}: {e}"))
            };
            prepared.and_then(|win| job.run(&win, w).map_err(|e| e.to_string()))
        };
        if let Err(reason) = &outcome {
            warn!("window {} skipped: {reason}", w.index);
        }
        WindowRecord {
            window: *w,
            start_time: ts[w.start],
            end_time: ts[w.end - 1],
            filled_fraction,
            outcome,
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let records: Vec<WindowRecord> = pool.install(|| windows.par_iter().map(process).collect());
    let skipped = records.iter().filter(|r| r.outcome.is_err()).count();
    if skipped > 0 {
        warn!("{skipped} of {} windows skipped", records.len());
    }
    Ok(RunResult {
        tickers,
        anchors: anchor_names,
        records,
    })
}
