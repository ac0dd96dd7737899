//! Analysis configuration: a TOML file whose keys double as CLI flags.

use std::path::{Path, PathBuf};

use qdcca_core::window::WindowPlan;
use qdcca_core::DetrendConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Calendar {
    /// 24/7 minute grid; missing minutes are filled with zero returns.
    #[default]
    Continuous,
    /// Only the timestamps all series share; session gaps are dropped.
    Sessions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// Louvain resolution.
    pub resolution: f64,
    /// Also report tree path lengths summed over edge distances.
    pub weighted_path: bool,
    /// Write one edge list per window.
    pub edges: bool,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            resolution: 1.0,
            weighted_path: false,
            edges: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub calendar: Calendar,
    /// Largest fraction of filled minutes a window may contain.
    pub max_missing: f64,
    /// Assets whose return standard deviation is below this fraction of the
    /// median across assets are treated as pegged and excluded.
    pub peg_ratio: f64,
    /// Normalize each full series once instead of per window.
    pub global_normalization: bool,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            calendar: Calendar::Continuous,
            max_missing: 0.01,
            peg_ratio: 0.1,
            global_normalization: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub q: Vec<f64>,
    pub s: Vec<usize>,
    pub poly_order: usize,
    pub window: usize,
    pub step: usize,
    /// Quote currency of the input, or a ticker to re-price everything in.
    pub base: String,
    pub residual: bool,
    pub lags: Vec<i64>,
    pub threshold: f64,
    pub anchors: Vec<String>,
    /// Worker threads, 0 for one per core.
    pub threads: usize,
    pub seed: u64,
    pub verbose: bool,
    pub network: NetworkConfig,
    pub data: DataConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let plan = WindowPlan::default();
        Self {
            input: None,
            out: None,
            q: vec![1.0, 4.0],
            s: vec![10, 60, 180, 360],
            poly_order: DetrendConfig::DEFAULT_POLY_ORDER,
            window: plan.width,
            step: plan.step,
            base: "USDT".into(),
            residual: false,
            lags: vec![-1, 0, 1],
            threshold: 0.25,
            anchors: vec!["BTC".into(), "ETH".into()],
            threads: 0,
            seed: 0,
            verbose: false,
            network: NetworkConfig::default(),
            data: DataConfig::default(),
        }
    }
}

/// Every key accepted in the config file, in file order.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("input", "CSV file or directory of CSV files"),
    ("out", "output directory"),
    ("q", "list of q exponents (default [1, 4])"),
    ("s", "list of detrending scales in samples (default [10, 60, 180, 360])"),
    ("poly_order", "detrending polynomial order (default 2)"),
    ("window", "window width in samples (default 10080)"),
    ("step", "window step in samples (default 1440)"),
    ("base", "quote currency of the input, or a ticker to re-price in (default USDT)"),
    ("residual", "also analyze residuals after removing the market mode"),
    ("lags", "lags in samples for the anchor pass (default [-1, 0, 1])"),
    ("threshold", "correlation threshold for period detection (default 0.25)"),
    ("anchors", "anchor tickers for lags, clusters and periods (default [BTC, ETH])"),
    ("threads", "worker threads, 0 = all cores"),
    ("seed", "seed for community detection tie-breaking"),
    ("verbose", "extra diagnostic columns and logging"),
    ("network.resolution", "Louvain resolution (default 1.0)"),
    ("network.weighted_path", "report distance-weighted tree path length"),
    ("network.edges", "write per-window MST edge lists (default true)"),
    ("data.calendar", "continuous | sessions"),
    ("data.max_missing", "max filled fraction per window (default 0.01)"),
    ("data.peg_ratio", "relative volatility below which an asset counts as pegged (default 0.1)"),
    ("data.global_normalization", "normalize whole series once instead of per window"),
];

impl AnalysisConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn plan(&self) -> WindowPlan {
        WindowPlan {
            width: self.window,
            step: self.step,
        }
    }

    /// Detrending configurations of the `(q, s)` grid, `s` outermost.
    pub fn grid(&self) -> Result<Vec<DetrendConfig>> {
        let mut out = Vec::with_capacity(self.q.len() * self.s.len());
        for &s in &self.s {
            for &q in &self.q {
                out.push(DetrendConfig::new(s, self.poly_order, q)?);
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.q.is_empty() || self.s.is_empty() {
            return bad("q and s must be non-empty".into());
        }
        if let Some(q) = self.q.iter().find(|q| !(q.is_finite() && **q > 0.0)) {
            return bad(format!("q must be positive, got {q}"));
        }
        if self.window == 0 || self.step == 0 {
            return bad("window and step must be positive".into());
        }
        for cfg in self.grid()? {
            cfg.validate_for_len(self.window)
                .map_err(|e| Error::Config(format!("s = {} against window {}: {e}", cfg.scale, self.window)))?;
            for &tau in &self.lags {
                let overlap = self.window.saturating_sub(tau.unsigned_abs() as usize);
                if cfg.validate_for_len(overlap).is_err() {
                    return bad(format!("lag {tau} leaves {overlap} samples, too few for s = {}", cfg.scale));
                }
            }
        }
        if has_duplicates(&self.q.iter().map(|q| q.to_bits()).collect::<Vec<_>>())
            || has_duplicates(&self.s)
            || has_duplicates(&self.lags)
            || has_duplicates(&self.anchors)
        {
            return bad("q, s, lags and anchors must not repeat".into());
        }
        if !self.threshold.is_finite() {
            return bad("threshold must be finite".into());
        }
        if !(self.network.resolution.is_finite() && self.network.resolution > 0.0) {
            return bad("network.resolution must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.data.max_missing) {
            return bad("data.max_missing must lie in [0, 1]".into());
        }
        if !(0.0..1.0).contains(&self.data.peg_ratio) {
            return bad("data.peg_ratio must lie in [0, 1)".into());
        }
        if self.base.is_empty() {
            return bad("base must not be empty".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, excluding the paths and thread
    /// count that do not affect results.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.input = None;
        canonical.out = None;
        canonical.threads = 0;
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

fn has_duplicates<T: PartialEq>(v: &[T]) -> bool {
    v.iter().enumerate().any(|(i, a)| v[..i].contains(a))
}

/// Formats `q` for file names: `1`, `4`, `0.5`.
pub fn q_label(q: f64) -> String {
    format!("{q}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = AnalysisConfig::default();
        c.validate().unwrap();
        assert_eq!(c.grid().unwrap().len(), 8);
        assert_eq!(c.plan(), WindowPlan::WEEK_BY_DAY);
    }

    #[test]
    fn parses_nested_sections() {
        let c = AnalysisConfig::from_toml_str(
            "q = [2.0]\ns = [50]\nwindow = 1000\nstep = 500\n[network]\nresolution = 0.5\n[data]\ncalendar = \"sessions\"\n",
        )
        .unwrap();
        assert_eq!(c.q, [2.0]);
        assert_eq!(c.network.resolution, 0.5);
        assert_eq!(c.data.calendar, Calendar::Sessions);
        assert_eq!(c.anchors, ["BTC", "ETH"]);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(AnalysisConfig::from_toml_str("qq = [1]").is_err());
        assert!(AnalysisConfig::from_toml_str("[network]\nfoo = 1").is_err());
        let c = AnalysisConfig {
            q: vec![0.0],
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = AnalysisConfig {
            s: vec![6000],
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = AnalysisConfig {
            s: vec![10, 10],
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_ignores_paths_and_threads() {
        let a = AnalysisConfig::default();
        let b = AnalysisConfig {
            threads: 4,
            out: Some("x".into()),
            ..Default::default()
        };
        assert_eq!(a.hash(), b.hash());
        let c = AnalysisConfig {
            seed: 1,
            ..Default::default()
        };
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn every_field_is_documented() {
        let json = serde_json::to_value(AnalysisConfig::default()).unwrap();
        let mut keys = Vec::new();
        for (k, v) in json.as_object().unwrap() {
            match v.as_object() {
                Some(inner) => keys.extend(inner.keys().map(|ik| format!("{k}.{ik}"))),
                None => keys.push(k.clone()),
            }
        }
        for k in &keys {
            assert!(CONFIG_KEYS.iter().any(|(c, _)| c == k), "undocumented key {k}");
        }
        assert_eq!(keys.len(), CONFIG_KEYS.len());
    }
}
