use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::SpanningTree;
use crate::error::{Error, Result};
use crate::math;

/// Empirical survival function `P(X >= k)` of node degrees, one point per
/// distinct degree, `k` ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    pub points: Vec<(f64, f64)>,
}

impl DegreeDistribution {
    pub fn from_points(points: Vec<(f64, f64)>) -> Self {
        Self { points }
    }

    /// `P(X >= k)`, stepping down between observed degrees.
    pub fn survival(&self, k: f64) -> f64 {
        self.points
            .iter()
            .find(|&&(d, _)| d >= k)
            .map_or(0.0, |&(_, p)| p)
    }
}

pub fn degree_distribution(t: &SpanningTree) -> DegreeDistribution {
    let mut degrees = t.degrees();
    degrees.sort_unstable();
    let n = degrees.len() as f64;
    let mut points = Vec::new();
    for (i, &k) in degrees.iter().enumerate() {
        if i == 0 || degrees[i - 1] != k {
            points.push((k as f64, (degrees.len() - i) as f64 / n));
        }
    }
    DegreeDistribution { points }
}

/// Slope magnitude of `ln P(X >= k)` against `ln k` and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub gamma: f64,
    pub std_error: f64,
    pub points: usize,
}

/// Ordinary least squares of `ln y` on `ln x` over points with `x >= 1` and
/// `y > 0`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(k, p)| k >= 1.0 && p > 0.0)
        .map(|&(k, p)| (math::ln(k), math::ln(p)))
        .collect();
    if used.len() < 3 {
        return Err(Error::InsufficientSupport(used.len()));
    }
    let n = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
    let my = used.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in &used {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = used
        .iter()
        .map(|&(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    Ok(PowerLawFit {
        gamma: -slope,
        std_error: math::sqrt(ssr / (n - 2.0) / sxx),
        points: used.len(),
    })
}

pub fn powerlaw_fit(dd: &DegreeDistribution) -> Result<PowerLawFit> {
    fit_power_law(&dd.points)
}

/// Hop distances from `source` to every node.
fn hops_from(t: &SpanningTree, source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; t.node_count()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &v in t.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Mean hop count of the tree path over all unordered node pairs.
pub fn mean_path_length(t: &SpanningTree) -> f64 {
    let n = t.node_count();
    if n < 2 {
        return 0.0;
    }
    let mut total: u64 = 0;
    for i in 0..n {
        let d = hops_from(t, i);
        total += d[i + 1..].iter().map(|&h| h as u64).sum::<u64>();
    }
    total as f64 / (n * (n - 1) / 2) as f64
}

/// Mean summed edge weight of the tree path over all unordered node pairs.
pub fn mean_weighted_path_length(t: &SpanningTree) -> f64 {
    let n = t.node_count();
    if n < 2 {
        return 0.0;
    }
    let mut weight = vec![0.0; n * n];
    for e in t.edges() {
        weight[e.a * n + e.b] = e.weight;
        weight[e.b * n + e.a] = e.weight;
    }
    let mut total = 0.0;
    let mut dist = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for i in 0..n {
        seen.fill(false);
        dist[i] = 0.0;
        seen[i] = true;
        queue.push_back(i);
        while let Some(u) = queue.pop_front() {
            for &v in t.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    dist[v] = dist[u] + weight[u * n + v];
                    queue.push_back(v);
                }
            }
        }
        total += dist[i + 1..].iter().sum::<f64>();
    }
    total / (n * (n - 1) / 2) as f64
}
