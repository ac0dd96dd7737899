//! CSV result tables and the JSON run manifest.

use std::fmt::Write as _;
use std::path::Path;

use qdcca_core::netgraph::cluster_track;
use qdcca_core::window::threshold_periods;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{q_label, AnalysisConfig};
use crate::error::{Error, Result};
use crate::pipeline::{DatasetSummary, RunResult, Skip, Stages};
use crate::quotes::format_minute;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowCounts {
    pub total: usize,
    pub completed: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub input: Option<String>,
    /// Configuration with paths and thread count removed; `config_hash` is
    /// its SHA-256.
    pub config: AnalysisConfig,
    pub config_hash: String,
    pub seed: u64,
    pub data: DatasetSummary,
    pub windows: WindowCounts,
    pub skips: Vec<Skip>,
    pub notes: Vec<String>,
    pub outputs: Vec<OutputFile>,
}

/// One CSV table being assembled in memory.
struct Table {
    name: String,
    text: String,
    rows: usize,
}

impl Table {
    fn new(name: String, header: &[String]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { name, text, rows: 0 }
    }

    fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
        self.rows += 1;
    }
}

fn f(v: f64) -> String {
    format!("{v}")
}

fn strs(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn spectra_table(cfg: &AnalysisConfig, run: &RunResult, cell: usize, q: f64, s: usize) -> Table {
    let n = run.tickers.len();
    let mut header = strs(&["window", "start", "end", "mean_rho", "out_of_range", "degenerate"]);
    for prefix in ["lambda", "entropy", "vmax"] {
        header.extend((1..=n).map(|i| format!("{prefix}_{i}")));
    }
    if cfg.residual {
        header.extend(strs(&["lambda1_res", "entropy1_res", "vmax1_res"]));
        if cfg.verbose {
            header.push("orthogonality_res".into());
        }
    }
    let mut t = Table::new(format!("spectra_{}_{s}.csv", q_label(q)), &header);
    for (rec, c) in run.cells(cell) {
        let Some(sp) = &c.spectrum else { continue };
        let mut row = vec![
            rec.window.index.to_string(),
            format_minute(rec.start_time),
            format_minute(rec.end_time),
            f(c.mean_rho),
            c.out_of_range.to_string(),
            u8::from(sp.degenerate).to_string(),
        ];
        row.extend(sp.eigenvalues.iter().map(|&v| f(v)));
        row.extend(sp.entropies.iter().map(|&v| f(v)));
        row.extend(sp.max_components.iter().map(|&v| f(v)));
        if cfg.residual {
            match &c.residual {
                Some(r) => row.extend([f(r.lambda1), f(r.entropy1), f(r.max_component1)]),
                None => row.extend([String::new(), String::new(), String::new()]),
            }
            if cfg.verbose {
                row.push(c.residual.as_ref().map(|r| f(r.orthogonality)).unwrap_or_default());
            }
        }
        t.row(&row);
    }
    t
}

fn topology_table(cfg: &AnalysisConfig, stages: Stages, run: &RunResult, cell: usize, q: f64, s: usize) -> Table {
    let mut header = strs(&[
        "window",
        "start",
        "end",
        "mean_path_length",
        "gamma",
        "gamma_se",
        "fit_status",
        "hub",
        "max_degree",
        "tree_weight",
        "clamped_pairs",
    ]);
    let residual = cfg.residual && stages.spectra;
    let weighted = cfg.network.weighted_path || cfg.verbose;
    if residual {
        header.push("mean_path_length_res".into());
    }
    if cfg.verbose {
        header.push("mean_path_length_ordered".into());
    }
    if weighted {
        header.push("weighted_path_length".into());
    }
    if stages.communities {
        header.extend(strs(&["communities", "modularity"]));
    }
    let mut t = Table::new(format!("topology_{}_{s}.csv", q_label(q)), &header);
    for (rec, c) in run.cells(cell) {
        let Some(tree) = &c.tree else { continue };
        let (gamma, se, status) = match &tree.fit {
            Ok(fit) => (f(fit.gamma), f(fit.std_error), "ok".to_string()),
            Err(e) => (String::new(), String::new(), e.clone()),
        };
        let mut row = vec![
            rec.window.index.to_string(),
            format_minute(rec.start_time),
            format_minute(rec.end_time),
            f(tree.mean_path_length),
            gamma,
            se,
            status,
            run.tickers[tree.hub].clone(),
            tree.max_degree.to_string(),
            f(tree.total_weight),
            tree.clamped_pairs.to_string(),
        ];
        if residual {
            row.push(c.residual.as_ref().and_then(|r| r.mean_path_length).map(f).unwrap_or_default());
        }
        if cfg.verbose {
            // average over ordered pairs, i.e. half the unordered-pair mean
            row.push(f(tree.mean_path_length / 2.0));
        }
        if weighted {
            row.push(f(tree.weighted_path_length));
        }
        if stages.communities {
            match &c.partition {
                Some(p) => row.extend([p.community_count().to_string(), f(p.modularity)]),
                None => row.extend([String::new(), String::new()]),
            }
        }
        t.row(&row);
    }
    t
}

fn edge_tables(run: &RunResult, cell: usize, q: f64, s: usize) -> Vec<Table> {
    let header = strs(&["source", "target", "distance", "rho"]);
    run.cells(cell)
        .filter_map(|(rec, c)| {
            let tree = c.tree.as_ref()?;
            let mut t = Table::new(format!("edges_{}_{s}_{}.csv", q_label(q), rec.window.index), &header);
            for e in &tree.edges {
                t.row(&[run.tickers[e.a].clone(), run.tickers[e.b].clone(), f(e.weight), f(e.rho)]);
            }
            Some(t)
        })
        .collect()
}

fn cluster_table(cfg: &AnalysisConfig, run: &RunResult, anchor: &str, s: usize) -> Result<Table> {
    let mut header = strs(&["window", "end", "q"]);
    header.extend(run.tickers.iter().cloned());
    let mut t = Table::new(format!("clusters_{anchor}_{s}.csv"), &header);
    for (qi, &q) in cfg.q.iter().enumerate() {
        let cell = cell_index(cfg, s, qi);
        let (recs, parts): (Vec<_>, Vec<_>) = run
            .cells(cell)
            .filter_map(|(r, c)| c.partition.clone().map(|p| (r, p)))
            .unzip();
        let track = cluster_track(&parts, anchor)?;
        for (rec, members) in recs.iter().zip(&track.rows) {
            let mut row = vec![rec.window.index.to_string(), format_minute(rec.end_time), q_label(q)];
            row.extend(members.iter().map(|&m| u8::from(m).to_string()));
            t.row(&row);
        }
    }
    Ok(t)
}

fn lagged_table(run: &RunResult, anchor: &str, cell: usize, q: f64, s: usize) -> Table {
    let header = strs(&["window", "end", "tau", "mean_rho"]);
    let mut t = Table::new(format!("lagged_{anchor}_{}_{s}.csv", q_label(q)), &header);
    for (rec, c) in run.cells(cell) {
        for lm in c.lagged.iter().filter(|l| l.anchor == anchor) {
            t.row(&[
                rec.window.index.to_string(),
                format_minute(rec.end_time),
                lm.tau.to_string(),
                f(lm.mean_rho),
            ]);
        }
    }
    t
}

fn periods_table(cfg: &AnalysisConfig, run: &RunResult, cell: usize, q: f64, s: usize) -> Table {
    let header = strs(&["anchor", "ticker", "start", "end", "windows"]);
    let mut t = Table::new(format!("periods_{}_{s}.csv", q_label(q)), &header);
    for (ai, anchor) in run.anchors.iter().enumerate() {
        for (j, ticker) in run.tickers.iter().enumerate() {
            if ticker == anchor {
                continue;
            }
            let points: Vec<(i64, f64)> = run.cells(cell).map(|(r, c)| (r.end_time, c.anchor_rows[ai].1[j])).collect();
            for (start, end) in threshold_periods(&points, cfg.threshold) {
                let count = points.iter().filter(|(t, _)| (start..=end).contains(t)).count();
                t.row(&[
                    anchor.clone(),
                    ticker.clone(),
                    format_minute(start),
                    format_minute(end),
                    count.to_string(),
                ]);
            }
        }
    }
    t
}

/// Position of `(s, q_index)` in the grid order used by the pipeline.
fn cell_index(cfg: &AnalysisConfig, s: usize, qi: usize) -> usize {
    let si = cfg.s.iter().position(|&x| x == s).expect("scale from config");
    si * cfg.q.len() + qi
}

/// Builds every table requested by `stages`.
fn tables(cfg: &AnalysisConfig, stages: Stages, run: &RunResult) -> Result<Vec<Table>> {
    let mut out = Vec::new();
    for &s in &cfg.s {
        for (qi, &q) in cfg.q.iter().enumerate() {
            let cell = cell_index(cfg, s, qi);
            if stages.spectra {
                out.push(spectra_table(cfg, run, cell, q, s));
            }
            if stages.network {
                out.push(topology_table(cfg, stages, run, cell, q, s));
                if cfg.network.edges {
                    out.extend(edge_tables(run, cell, q, s));
                }
            }
            if stages.lagged {
                for anchor in &run.anchors {
                    out.push(lagged_table(run, anchor, cell, q, s));
                }
            }
            if stages.periods {
                out.push(periods_table(cfg, run, cell, q, s));
            }
        }
        if stages.communities {
            for anchor in &run.anchors {
                out.push(cluster_table(cfg, run, anchor, s)?);
            }
        }
    }
    Ok(out)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes all tables and `manifest.json` into `dir`.
pub fn write_outputs(
    dir: &Path,
    command: &str,
    cfg: &AnalysisConfig,
    stages: Stages,
    data: DatasetSummary,
    run: &RunResult,
) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut outputs = Vec::new();
    for table in tables(cfg, stages, run)? {
        let path = dir.join(&table.name);
        std::fs::write(&path, table.text.as_bytes()).map_err(|e| Error::io(&path, e))?;
        outputs.push(OutputFile {
            file: table.name,
            rows: table.rows,
            sha256: sha256_hex(table.text.as_bytes()),
        });
    }
    outputs.sort_by(|a, b| a.file.cmp(&b.file));
    let skips = run.skips();
    let mut canonical = cfg.clone();
    canonical.input = None;
    canonical.out = None;
    canonical.threads = 0;
    let mut notes = vec![
        "rows are labelled by the timestamp of the last sample in each window (UTC)".to_string(),
        "path lengths count tree edges between node pairs".to_string(),
    ];
    let degenerate = run
        .records
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .flatten()
        .filter(|c| c.spectrum.as_ref().is_some_and(|s| s.degenerate))
        .count();
    if degenerate > 0 {
        notes.push(format!(
            "{degenerate} window/grid cells have nearly coincident eigenvalues; their eigenvector entropies depend on the solver"
        ));
    }
    let out_of_range: usize = run
        .records
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .flatten()
        .map(|c| c.out_of_range)
        .sum();
    if out_of_range > 0 {
        notes.push(format!("{out_of_range} coefficients fall outside [-1, 1] (possible for q != 2, reported unclamped)"));
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        input: cfg.input.as_ref().map(|p| p.display().to_string()),
        config_hash: cfg.hash(),
        config: canonical,
        seed: cfg.seed,
        data,
        windows: WindowCounts {
            total: run.records.len(),
            completed: run.records.len() - skips.len(),
            skipped: skips.len(),
        },
        skips,
        notes,
        outputs,
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    let _ = writeln!(json);
    let path = dir.join("manifest.json");
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
