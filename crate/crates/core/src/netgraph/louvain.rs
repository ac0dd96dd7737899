//! Louvain modularity maximization on dense weighted graphs.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectra::DetrendedCorrelationMatrix;

/// Community assignment of labelled nodes. Community ids are numbered by
/// first appearance in node order.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub labels: Vec<String>,
    pub membership: Vec<usize>,
    pub modularity: f64,
}

impl Partition {
    pub fn community_count(&self) -> usize {
        self.membership.iter().max().map_or(0, |m| m + 1)
    }

    pub fn community_of(&self, label: &str) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.membership[i])
    }

    /// Members of every community, in node order.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.community_count()];
        for (node, &c) in self.membership.iter().enumerate() {
            out[c].push(node);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LouvainOutcome {
    pub partition: Partition,
    /// Modularity of the singleton start and after every aggregation level.
    pub level_modularity: Vec<f64>,
    /// Every edge weight was zero, so each node was left on its own.
    pub all_zero_weights: bool,
}

/// Modularity of `membership` on the dense symmetric weight matrix `w`
/// (self-loops on the diagonal count once per ordered pair).
pub fn modularity(w: &[f64], n: usize, membership: &[usize], resolution: f64) -> f64 {
    let two_m: f64 = w.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let k: Vec<f64> = (0..n).map(|i| w[i * n..(i + 1) * n].iter().sum()).collect();
    let communities = membership.iter().max().map_or(0, |m| m + 1);
    let mut inner = vec![0.0; communities];
    let mut total = vec![0.0; communities];
    for i in 0..n {
        total[membership[i]] += k[i];
        for j in 0..n {
            if membership[i] == membership[j] {
                inner[membership[i]] += w[i * n + j];
            }
        }
    }
    let mut q = 0.0;
    for (a, t) in inner.iter().zip(&total) {
        q += a / two_m - resolution * (t / two_m) * (t / two_m);
    }
    q
}

fn renumber(membership: &mut [usize]) -> usize {
    let mut map = vec![usize::MAX; membership.len()];
    let mut next = 0;
    for c in membership.iter_mut() {
        if map[*c] == usize::MAX {
            map[*c] = next;
            next += 1;
        }
        *c = map[*c];
    }
    next
}

/// One local-moving phase. Returns whether any node changed community.
fn local_moves(
    w: &[f64],
    n: usize,
    two_m: f64,
    resolution: f64,
    comm: &mut [usize],
    rng: &mut ChaCha8Rng,
) -> bool {
    let k: Vec<f64> = (0..n).map(|i| w[i * n..(i + 1) * n].iter().sum()).collect();
    let mut total = vec![0.0; n];
    for i in 0..n {
        total[comm[i]] += k[i];
    }
    let mut links = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::with_capacity(n);
    let mut moved_any = false;
    loop {
        let mut moved = false;
        for i in 0..n {
            let own = comm[i];
            for j in 0..n {
                let wij = w[i * n + j];
                if j == i || wij == 0.0 {
                    continue;
                }
                let c = comm[j];
                if links[c] == 0.0 {
                    touched.push(c);
                }
                links[c] += wij;
            }
            total[own] -= k[i];
            let gain = |c: usize, links: &[f64]| links[c] - resolution * k[i] * total[c] / two_m;
            let stay = gain(own, &links);
            let eps = 1e-12 * k[i].max(stay.abs());
            let mut best = own;
            let mut best_gain = stay;
            let mut ties = 0u64;
            touched.sort_unstable();
            for &c in &touched {
                if c == own {
                    continue;
                }
                let g = gain(c, &links);
                if g > best_gain + eps {
                    best = c;
                    best_gain = g;
                    ties = 1;
                } else if best != own && (g - best_gain).abs() <= eps {
                    // equal-gain candidates: seeded uniform choice
                    ties += 1;
                    if rng.next_u64().is_multiple_of(ties) {
                        best = c;
                    }
                }
            }
            total[best] += k[i];
            comm[i] = best;
            if best != own {
                moved = true;
            }
            for &c in &touched {
                links[c] = 0.0;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
        moved_any = true;
    }
    moved_any
}

/// Louvain on a dense symmetric non-negative weight matrix.
pub fn louvain_weights(
    w: &[f64],
    labels: Vec<String>,
    resolution: f64,
    seed: u64,
) -> LouvainOutcome {
    let n = labels.len();
    assert_eq!(w.len(), n * n, "weight matrix must be square");
    let two_m: f64 = w.iter().sum();
    let mut membership: Vec<usize> = (0..n).collect();
    if two_m == 0.0 {
        return LouvainOutcome {
            partition: Partition {
                labels,
                membership,
                modularity: 0.0,
            },
            level_modularity: vec![0.0],
            all_zero_weights: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level_modularity = vec![modularity(w, n, &membership, resolution)];
    let mut graph = w.to_vec();
    let mut size = n;
    loop {
        let mut comm: Vec<usize> = (0..size).collect();
        if !local_moves(&graph, size, two_m, resolution, &mut comm, &mut rng) {
            break;
        }
        let next = renumber(&mut comm);
        for m in membership.iter_mut() {
            *m = comm[*m];
        }
        level_modularity.push(modularity(w, n, &membership, resolution));
        let mut agg = vec![0.0; next * next];
        for i in 0..size {
            for j in 0..size {
                agg[comm[i] * next + comm[j]] += graph[i * size + j];
            }
        }
        graph = agg;
        if next == size {
            break;
        }
        size = next;
    }
    renumber(&mut membership);
    let modularity = *level_modularity.last().expect("at least the start level");
    LouvainOutcome {
        partition: Partition {
            labels,
            membership,
            modularity,
        },
        level_modularity,
        all_zero_weights: false,
    }
}

/// Communities of the complete graph with weights `max(rho, 0)` and no
/// self-loops.
pub fn louvain(c: &DetrendedCorrelationMatrix, resolution: f64, seed: u64) -> LouvainOutcome {
    let n = c.dim();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i * n + j] = c.get(i, j).max(0.0);
            }
        }
    }
    louvain_weights(&w, c.labels().to_vec(), resolution, seed)
}
