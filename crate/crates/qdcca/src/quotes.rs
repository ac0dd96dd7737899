//! Minute price quotes: CSV ingestion, base-currency re-pricing and
//! cross-series alignment.

use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDateTime};
use serde::Serialize;

use crate::error::{Error, Result};

/// Prices of one asset on strictly increasing timestamps (epoch minutes).
#[derive(Debug, Clone, PartialEq)]
pub struct QuoteSeries {
    pub ticker: String,
    pub timestamps: Vec<i64>,
    pub prices: Vec<f64>,
}

impl QuoteSeries {
    pub fn new(ticker: impl Into<String>, timestamps: Vec<i64>, prices: Vec<f64>) -> Result<Self> {
        let ticker = ticker.into();
        if timestamps.len() != prices.len() {
            return Err(Error::Data(format!("{ticker}: {} timestamps but {} prices", timestamps.len(), prices.len())));
        }
        if let Some(i) = prices.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::Data(format!("{ticker}: nonpositive price {} at row {}", prices[i], i + 1)));
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Data(format!("{ticker}: timestamps not strictly increasing at row {}", i + 2)));
        }
        Ok(Self {
            ticker,
            timestamps,
            prices,
        })
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

/// Parses an epoch (seconds, or milliseconds when the magnitude says so) or
/// ISO-8601 timestamp into epoch minutes.
pub fn parse_timestamp(raw: &str) -> Option<i64> {
    let raw = raw.trim();
    if let Ok(v) = raw.parse::<i64>() {
        let seconds = if v.abs() >= 100_000_000_000 { v.div_euclid(1000) } else { v };
        return Some(seconds.div_euclid(60));
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.timestamp().div_euclid(60));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(dt.and_utc().timestamp().div_euclid(60));
        }
    }
    None
}

/// Epoch minutes as `YYYY-MM-DDTHH:MM:SSZ`.
pub fn format_minute(minute: i64) -> String {
    DateTime::from_timestamp(minute * 60, 0)
        .map(|d| d.format("%Y-%m-%dT%H:%M:%SZ").to_string())
        .unwrap_or_else(|| minute.to_string())
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads one CSV file: either `timestamp,price` (ticker taken from the file
/// stem) or a wide `timestamp,<ticker>,...` table where empty cells mean
/// no quote.
pub fn load_file(path: &Path) -> Result<Vec<QuoteSeries>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    let headers = reader
        .headers()
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    if headers.len() < 2 || !headers[0].eq_ignore_ascii_case("timestamp") {
        return Err(parse_error(path, 1, "header must start with `timestamp` followed by price columns"));
    }
    let tickers: Vec<String> = if headers.len() == 2 && headers[1].eq_ignore_ascii_case("price") {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("asset");
        vec![stem.to_string()]
    } else {
        headers.iter().skip(1).map(str::to_string).collect()
    };
    let mut columns: Vec<(Vec<i64>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); tickers.len()];
    for record in reader.records() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(parse_error(path, line, format!("expected {} fields, found {}", headers.len(), record.len())));
        }
        let t = parse_timestamp(&record[0]).ok_or_else(|| parse_error(path, line, format!("bad timestamp `{}`", &record[0])))?;
        for (k, (ts, ps)) in columns.iter_mut().enumerate() {
            let cell = &record[k + 1];
            if cell.is_empty() {
                continue;
            }
            let p: f64 = cell
                .parse()
                .map_err(|_| parse_error(path, line, format!("bad price `{cell}` for {}", tickers[k])))?;
            if !(p.is_finite() && p > 0.0) {
                return Err(parse_error(path, line, format!("nonpositive price {p} for {}", tickers[k])));
            }
            if let Some(&last) = ts.last() {
                if t == last {
                    return Err(parse_error(path, line, format!("duplicate timestamp for {}", tickers[k])));
                }
                if t < last {
                    return Err(parse_error(path, line, format!("unsorted timestamps for {}", tickers[k])));
                }
            }
            ts.push(t);
            ps.push(p);
        }
    }
    tickers
        .into_iter()
        .zip(columns)
        .map(|(ticker, (ts, ps))| QuoteSeries::new(ticker, ts, ps))
        .collect()
}

/// Loads a CSV file, or every `*.csv` file of a directory in name order.
pub fn load_quotes(path: &Path) -> Result<Vec<QuoteSeries>> {
    if !path.exists() {
        return Err(Error::io(path, std::io::Error::from(std::io::ErrorKind::NotFound)));
    }
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")))
            .collect();
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };
    if files.is_empty() {
        return Err(Error::Data(format!("{}: no CSV files found", path.display())));
    }
    let mut out: Vec<QuoteSeries> = Vec::new();
    for file in files {
        for series in load_file(&file)? {
            if out.iter().any(|s| s.ticker == series.ticker) {
                return Err(Error::Data(format!("ticker {} appears in more than one input", series.ticker)));
            }
            out.push(series);
        }
    }
    Ok(out)
}

/// Sorted intersection of two strictly increasing timestamp lists, as index
/// pairs into each.
fn intersect(a: &[i64], b: &[i64]) -> Vec<(usize, usize)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push((i, j));
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// `alt / base` on the common timestamps, i.e. `alt` priced in units of the
/// base asset.
pub fn rebase_prices(alt: &QuoteSeries, base: &QuoteSeries) -> Result<QuoteSeries> {
    let common = intersect(&alt.timestamps, &base.timestamps);
    if common.is_empty() {
        return Err(Error::EmptyIntersection(format!("{} and {}", alt.ticker, base.ticker)));
    }
    let timestamps = common.iter().map(|&(i, _)| alt.timestamps[i]).collect();
    let prices = common.iter().map(|&(i, j)| alt.prices[i] / base.prices[j]).collect();
    QuoteSeries::new(alt.ticker.clone(), timestamps, prices)
}

/// Series restricted to the timestamps they all share.
#[derive(Debug, Clone, PartialEq)]
pub struct Aligned {
    pub tickers: Vec<String>,
    pub timestamps: Vec<i64>,
    /// One price vector per ticker on `timestamps`.
    pub prices: Vec<Vec<f64>>,
    pub retention: Vec<Retention>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Retention {
    pub ticker: String,
    pub original: usize,
    pub retained: usize,
    pub fraction: f64,
}

pub fn align_series(series: &[QuoteSeries]) -> Result<Aligned> {
    if series.len() < 2 {
        return Err(Error::Data(format!("alignment needs at least two series, got {}", series.len())));
    }
    let mut common: Vec<i64> = series[0].timestamps.clone();
    for s in &series[1..] {
        common = intersect(&common, &s.timestamps)
            .into_iter()
            .map(|(i, _)| common[i])
            .collect();
    }
    if common.is_empty() {
        let names: Vec<&str> = series.iter().map(|s| s.ticker.as_str()).collect();
        return Err(Error::EmptyIntersection(names.join(", ")));
    }
    let mut prices = Vec::with_capacity(series.len());
    let mut retention = Vec::with_capacity(series.len());
    for s in series {
        let idx = intersect(&s.timestamps, &common);
        prices.push(idx.iter().map(|&(i, _)| s.prices[i]).collect());
        retention.push(Retention {
            ticker: s.ticker.clone(),
            original: s.len(),
            retained: common.len(),
            fraction: common.len() as f64 / s.len() as f64,
        });
    }
    Ok(Aligned {
        tickers: series.iter().map(|s| s.ticker.clone()).collect(),
        timestamps: common,
        prices,
        retention,
    })
}
