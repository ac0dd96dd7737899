//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use qdcca::output::write_outputs;
use qdcca::pipeline::{run_analysis, Dataset, Stages};
use qdcca::synth::{block_matrix, generate_returns, Generator, SynthSpec};
use qdcca::AnalysisConfig;
use qdcca_core::netgraph::{
    fit_power_law, louvain, mean_path_length, minimum_spanning_tree, DistanceMatrix, Edge, SpanningTree,
};
use qdcca_core::spectra::{correlation_matrix, shannon_entropy, MatrixMeta};
use qdcca_core::window::{rolling_windows, WindowPlan};
use qdcca_core::{rho_q, rho_q_lagged, DetrendConfig, DetrendedCorrelationMatrix, ReturnMatrix};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("N{i}")).collect()
}

fn gaussian(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn dataset(returns: ReturnMatrix) -> Dataset {
    Dataset {
        filled: vec![false; returns.len()],
        returns,
        excluded: Vec::new(),
        retention: Vec::new(),
        rebased: false,
    }
}

/// Literal estimator: 1-based sums, per-box least squares via SVD.
fn literal_rho(x: &[f64], y: &[f64], s: usize, m: usize, q: f64) -> f64 {
    let residuals = |series: &[f64], start: usize| -> Vec<f64> {
        let mut profile = vec![0.0; s];
        for i in 1..=s {
            profile[i - 1] = (1..=i).map(|j| series[start + j - 1]).sum();
        }
        let c = (s as f64 + 1.0) / 2.0;
        let a = DMatrix::from_fn(s, m + 1, |r, k| ((r + 1) as f64 - c).powi(k as i32));
        let coef = a.clone().svd(true, true).solve(&DVector::from_vec(profile.clone()), 1e-300).unwrap();
        let fit = a * coef;
        (0..s).map(|i| profile[i] - fit[i]).collect()
    };
    let t = x.len();
    let boxes = t / s;
    let starts: Vec<usize> = (0..boxes).map(|v| v * s).chain((0..boxes).map(|v| t - (v + 1) * s)).collect();
    let (mut fxx, mut fyy, mut fxy) = (0.0, 0.0, 0.0);
    for &st in &starts {
        let rx = residuals(x, st);
        let ry = residuals(y, st);
        let mx = rx.iter().sum::<f64>() / s as f64;
        let my = ry.iter().sum::<f64>() / s as f64;
        let vxx: f64 = rx.iter().map(|v| (v - mx).powi(2)).sum();
        let vyy: f64 = ry.iter().map(|v| (v - my).powi(2)).sum();
        let vxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
        fxx += vxx.powf(q / 2.0);
        fyy += vyy.powf(q / 2.0);
        fxy += vxy.signum() * vxy.abs().powf(q / 2.0);
    }
    let nb = starts.len() as f64;
    (fxy / nb) / ((fxx / nb) * (fyy / nb)).sqrt()
}

fn c1_oracle() -> Check {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let s = rng.random_range(16..=128usize);
        let t = rng.random_range(2 * s..=4096usize);
        let m = rng.random_range(1..=3usize);
        let q = [1.0, 2.0, 4.0][case % 3];
        let common = gaussian(&mut rng, t);
        let w: f64 = rng.random_range(-1.0..1.0);
        let x: Vec<f64> = common.iter().map(|c| c + rng.sample::<f64, _>(StandardNormal)).collect();
        let y: Vec<f64> = common.iter().map(|c| w * c + rng.sample::<f64, _>(StandardNormal)).collect();
        let got = rho_q(&x, &y, &DetrendConfig::new(s, m, q).unwrap()).unwrap();
        worst = worst.max((got - literal_rho(&x, &y, s, m, q)).abs());
    }
    let secs = started.elapsed().as_secs_f64();
    ensure(worst < 1e-10 && secs < 60.0, format!("100 instances, max |diff| = {worst:.2e}, {secs:.1} s"))
}

fn c2_self_anti() -> Check {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let q = [0.5, 1.0, 2.0, 3.0, 4.0][case % 5];
        let m = case % 4;
        let s = rng.random_range(m + 4..=64);
        let t = rng.random_range(2 * s..=2000);
        let x = gaussian(&mut rng, t);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let cfg = DetrendConfig::new(s, m, q).unwrap();
        worst = worst.max((rho_q(&x, &x, &cfg).unwrap() - 1.0).abs());
        worst = worst.max((rho_q(&x, &neg, &cfg).unwrap() + 1.0).abs());
    }
    ensure(worst <= 1e-12, format!("50 series, max deviation {worst:.2e}"))
}

fn c3_recovery() -> Check {
    let cfg = DetrendConfig::new(200, 2, 2.0).unwrap();
    let r: f64 = 0.7;
    let mut total = 0.0;
    for seed in 0..20 {
        let mut rng = StdRng::seed_from_u64(100 + seed);
        let a = gaussian(&mut rng, 50_000);
        let b = gaussian(&mut rng, 50_000);
        let y: Vec<f64> = a.iter().zip(&b).map(|(u, v)| r * u + (1.0 - r * r).sqrt() * v).collect();
        total += rho_q(&a, &y, &cfg).unwrap();
    }
    let mean = total / 20.0;
    ensure((mean - 0.7).abs() <= 0.05, format!("mean rho_2(200) over 20 seeds = {mean:.4}"))
}

fn c4_bound() -> Check {
    let mut runner = TestRunner::new(PropConfig {
        cases: 10_000,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let strategy = (20usize..300, 0usize..=3, 4usize..40, any::<u64>()).prop_map(|(t, m, s, seed)| {
        let s = s.max(m + 3).min(t / 2);
        (t, m, s, seed)
    });
    let result = runner.run(&strategy, |(t, m, s, seed)| {
        let mut rng = StdRng::seed_from_u64(seed);
        let x = gaussian(&mut rng, t);
        let mix: f64 = rng.random_range(-1.0..1.0);
        let y: Vec<f64> = x.iter().map(|v| mix * v + rng.sample::<f64, _>(StandardNormal)).collect();
        let rho = rho_q(&x, &y, &DetrendConfig::new(s, m, 2.0).unwrap()).unwrap();
        prop_assert!(rho.abs() <= 1.0 + 1e-12, "rho = {}", rho);
        Ok(())
    });
    match result {
        Ok(()) => Ok("10000 property cases, |rho_2| <= 1 + 1e-12".into()),
        Err(e) => Err(format!("{e}")),
    }
}

/// The default sweep geometry on an `n`-asset factor model.
fn long_factor_returns(n: usize, seed: u64) -> ReturnMatrix {
    generate_returns(&SynthSpec::new(Generator::Factor, n, 921_601, seed)).unwrap()
}

fn c5_c7_sweep() -> (Check, Check) {
    let data = dataset(long_factor_returns(20, 5));
    let cfg = AnalysisConfig {
        q: vec![2.0],
        s: vec![10],
        residual: true,
        ..Default::default()
    };
    let stages = Stages {
        spectra: true,
        ..Stages::NONE
    };
    let run = run_analysis(&cfg, &data, stages).unwrap();
    let cells: Vec<_> = run.cells(0).map(|(_, c)| c).collect();
    let traces = cells
        .iter()
        .map(|c| (c.spectrum.as_ref().unwrap().eigenvalues.iter().sum::<f64>() - 20.0).abs())
        .fold(0.0, f64::max);
    let ortho = cells
        .iter()
        .map(|c| c.residual.as_ref().unwrap().orthogonality)
        .fold(0.0, f64::max);
    let complete = run.records.len() == 634 && cells.len() == 634;
    (
        ensure(complete && traces < 1e-9, format!("{} windows, max |sum lambda - N| = {traces:.2e}", cells.len())),
        ensure(complete && ortho < 1e-10, format!("{} windows x 20 assets, max |corr| = {ortho:.2e}", cells.len())),
    )
}

fn c6_entropy() -> Check {
    let v = vec![1.0 / 80f64.sqrt(); 80];
    let h = shannon_entropy(&v).unwrap();
    ensure(
        (h - 80f64.ln()).abs() < 1e-12 && (h - 4.3820).abs() < 5e-5,
        format!("H = {h:.12} vs ln 80 = {:.12}", 80f64.ln()),
    )
}

fn pruefer_edges(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

fn c8_mst() -> Check {
    let n = 7;
    let mut rng = StdRng::seed_from_u64(8);
    let mut exact = 0;
    let mut invariant = 0;
    for _ in 0..100 {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let w = rng.random_range(0.0..2.0);
                d[i * n + j] = w;
                d[j * n + i] = w;
            }
        }
        let dm = DistanceMatrix::from_distances(labels(n), d.clone());
        let tree = minimum_spanning_tree(&dm).unwrap();
        let mut best = f64::INFINITY;
        let mut seq = vec![0usize; n - 2];
        'outer: loop {
            let mut edges = pruefer_edges(&seq, n);
            edges.sort();
            let w: f64 = edges.iter().map(|&(a, b)| d[a * n + b]).sum();
            best = best.min(w);
            for digit in seq.iter_mut() {
                *digit += 1;
                if *digit < n {
                    continue 'outer;
                }
                *digit = 0;
            }
            break;
        }
        if tree.total_weight() == best {
            exact += 1;
        }
        let squared = minimum_spanning_tree(&dm.map(|x| x * x)).unwrap();
        let pairs = |t: &SpanningTree| t.edges().iter().map(|e| (e.a, e.b)).collect::<Vec<_>>();
        if pairs(&tree) == pairs(&squared) {
            invariant += 1;
        }
    }
    ensure(
        exact == 100 && invariant == 100,
        format!("exact minimum {exact}/100, d -> d^2 edge sets equal {invariant}/100"),
    )
}

fn c9_topology() -> Check {
    let star_edges = (1..80)
        .map(|i| Edge {
            a: 0,
            b: i,
            weight: 1.0,
            rho: 0.5,
        })
        .collect();
    let star = SpanningTree::from_edges(labels(80), star_edges).unwrap();
    let path_edges = (0..3)
        .map(|i| Edge {
            a: i,
            b: i + 1,
            weight: 1.0,
            rho: 0.5,
        })
        .collect();
    let path = SpanningTree::from_edges(labels(4), path_edges).unwrap();
    let l_star = mean_path_length(&star);
    let l_path = mean_path_length(&path);
    let points: Vec<(f64, f64)> = (1..=20).map(|k| (k as f64, (k as f64).powf(-1.5))).collect();
    let fit = fit_power_law(&points).unwrap();
    ensure(
        l_star == 1.975 && l_path == 5.0 / 3.0 && (fit.gamma - 1.5).abs() < 1e-12
            && fit.std_error < 1e-12,
        format!(
            "star <L> = {l_star}, path <L> = {l_path}, gamma = {:.15}, SE = {:.1e}",
            fit.gamma, fit.std_error
        ),
    )
}

/// Modularity of a dense weight matrix, written out term by term.
fn oracle_modularity(w: &[f64], n: usize, membership: &[usize]) -> f64 {
    let two_m: f64 = w.iter().sum();
    let k: Vec<f64> = (0..n).map(|i| (0..n).map(|j| w[i * n + j]).sum()).collect();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if membership[i] == membership[j] {
                q += w[i * n + j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// All set partitions of `n` nodes as restricted growth strings.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; n];
    fn rec(i: usize, max: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == current.len() {
            out.push(current.clone());
            return;
        }
        for c in 0..=max + 1 {
            current[i] = c;
            rec(i + 1, max.max(c), current, out);
        }
    }
    rec(1, 0, &mut current, &mut out);
    out
}

fn planted_matrix(sizes: &[usize], within: f64, across: f64) -> DetrendedCorrelationMatrix {
    let n: usize = sizes.iter().sum();
    let meta = MatrixMeta {
        q: 2.0,
        scale: 10,
        window: None,
    };
    DetrendedCorrelationMatrix::from_dense(labels(n), block_matrix(sizes, within, across), meta).unwrap()
}

fn c10_louvain() -> Check {
    let c = planted_matrix(&[4, 4], 0.8, 0.0);
    let n = 8;
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i * n + j] = c.get(i, j).max(0.0);
            }
        }
    }
    let partitions = set_partitions(n);
    let best = partitions
        .iter()
        .map(|p| oracle_modularity(&w, n, p))
        .fold(f64::NEG_INFINITY, f64::max);
    let found = louvain(&c, 1.0, 1).partition;
    let planted = vec![0, 0, 0, 0, 1, 1, 1, 1];
    let q_found = oracle_modularity(&w, n, &found.membership);
    let exact = partitions.len() == 4140 && found.membership == planted && q_found == best;

    let mut recovered = 0;
    let cfg = DetrendConfig::new(20, 2, 2.0).unwrap();
    let truth = vec![0, 0, 0, 1, 1, 1, 1, 1];
    for seed in 0..100 {
        let spec = SynthSpec::new(
            Generator::Blocks {
                sizes: vec![3, 5],
                within: 0.8,
                across: 0.0,
            },
            8,
            2_001,
            seed,
        );
        let r = generate_returns(&spec).unwrap().normalized().unwrap();
        let cm = correlation_matrix(&r, &cfg).unwrap();
        if louvain(&cm, 1.0, seed).partition.membership == truth {
            recovered += 1;
        }
    }
    ensure(
        exact && recovered >= 95,
        format!(
            "{} partitions, optimum Q = {best:.12}, Louvain Q = {q_found:.12}; 3+5 recovered {recovered}/100",
            partitions.len()
        ),
    )
}

fn c11_epps() -> Check {
    let cfg = AnalysisConfig {
        q: vec![2.0],
        s: vec![10, 60, 180, 360],
        ..Default::default()
    };
    let mut monotone = 0;
    for seed in 0..50 {
        let spec = SynthSpec::new(
            Generator::AsyncFactor {
                trade_prob: 0.05,
                noise: 0.5,
            },
            4,
            10_080 + 2 * 1_440 + 1,
            seed,
        );
        let data = dataset(generate_returns(&spec).unwrap());
        let run = run_analysis(&cfg, &data, Stages::NONE).unwrap();
        let means: Vec<f64> = (0..4)
            .map(|cell| {
                let v: Vec<f64> = run.cells(cell).map(|(_, c)| c.mean_rho).collect();
                v.iter().sum::<f64>() / v.len() as f64
            })
            .collect();
        if means.windows(2).all(|w| w[1] >= w[0]) {
            monotone += 1;
        }
    }
    ensure(monotone >= 45, format!("nondecreasing in {monotone}/50 seeds"))
}

fn c12_lags() -> Check {
    let mut rng = StdRng::seed_from_u64(12);
    let mut bit_exact = true;
    for _ in 0..50 {
        let s = rng.random_range(4..60usize);
        let t = rng.random_range(2 * s..2000);
        let x = gaussian(&mut rng, t);
        let y = gaussian(&mut rng, t);
        let cfg = DetrendConfig::new(s, rng.random_range(0..=3usize.min(s - 3)), [1.0, 2.0, 4.0][t % 3]).unwrap();
        bit_exact &= rho_q_lagged(&x, &y, &cfg, 0).unwrap().to_bits() == rho_q(&x, &y, &cfg).unwrap().to_bits();
    }
    let cfg = AnalysisConfig {
        q: vec![2.0],
        s: vec![10],
        window: 3_000,
        step: 3_000,
        anchors: vec!["BTC".into()],
        ..Default::default()
    };
    let stages = Stages {
        lagged: true,
        ..Stages::NONE
    };
    let seeds = 40;
    let mut dominant = 0;
    for seed in 0..seeds {
        let data = dataset(generate_returns(&SynthSpec::new(Generator::Factor, 5, 6_001, seed)).unwrap());
        let run = run_analysis(&cfg, &data, stages).unwrap();
        let mean = |tau: i64| {
            let v: Vec<f64> = run
                .cells(0)
                .flat_map(|(_, c)| c.lagged.iter().filter(move |l| l.tau == tau).map(|l| l.mean_rho))
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        if mean(0) > mean(-1) && mean(0) > mean(1) {
            dominant += 1;
        }
    }
    ensure(
        bit_exact && dominant * 100 >= 95 * seeds,
        format!("tau = 0 bit-exact: {bit_exact}; contemporaneous dominates in {dominant}/{seeds} seeds"),
    )
}

fn c13_windows() -> Check {
    let count = rolling_windows(921_600, WindowPlan::default()).unwrap().len();
    let days = 640 * 1_440;
    ensure(count == 634 && days == 921_600, format!("{days} samples -> {count} windows"))
}

fn c14_performance() -> Check {
    let one = dataset(generate_returns(&SynthSpec::new(Generator::Factor, 80, 10_081, 14)).unwrap());
    let cfg = AnalysisConfig {
        q: vec![1.0, 4.0],
        s: vec![10],
        poly_order: 2,
        ..Default::default()
    };
    let started = Instant::now();
    let run = run_analysis(&cfg, &one, Stages::ALL).unwrap();
    let single = started.elapsed().as_secs_f64();
    let single_ok = run.records.len() == 1 && run.skips().is_empty();
    drop(one);

    let data = dataset(long_factor_returns(80, 15));
    let cfg = AnalysisConfig {
        q: vec![1.0],
        s: vec![10],
        ..Default::default()
    };
    let started = Instant::now();
    let run = run_analysis(&cfg, &data, Stages::ALL).unwrap();
    let sweep = started.elapsed().as_secs_f64();
    let sweep_ok = run.records.len() == 634 && run.skips().is_empty();
    ensure(
        single_ok && sweep_ok && single <= 5.0 && sweep <= 1800.0,
        format!(
            "N = 80 window: {single:.2} s; 634-window sweep: {sweep:.0} s on {} thread(s)",
            rayon::current_num_threads()
        ),
    )
}

fn c15_determinism() -> Check {
    let spec = SynthSpec::new(Generator::Factor, 6, 5_001, 15);
    let data = dataset(generate_returns(&spec).unwrap());
    let base = AnalysisConfig {
        window: 2_000,
        step: 1_000,
        residual: true,
        verbose: true,
        seed: 3,
        ..Default::default()
    };
    let root = tempfile::tempdir().unwrap();
    let mut snapshots = Vec::new();
    for (k, threads) in [1usize, 4, 1, 2].into_iter().enumerate() {
        let cfg = AnalysisConfig {
            threads,
            ..base.clone()
        };
        let dir = root.path().join(format!("run{k}"));
        let run = run_analysis(&cfg, &data, Stages::ALL).unwrap();
        write_outputs(&dir, "analyze", &cfg, Stages::ALL, data.summary(), &run).unwrap();
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&dir)
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
            })
            .collect();
        files.sort();
        snapshots.push(files);
    }
    let identical = snapshots.windows(2).all(|w| w[0] == w[1]);
    ensure(
        identical,
        format!("{} files byte-identical across thread counts 1, 4, 1, 2", snapshots[0].len()),
    )
}

fn main() {
    let mut results: Vec<(&str, &str, Check)> = Vec::new();
    let guard = |f: &dyn Fn() -> Check| -> Check {
        catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        })
    };
    results.push(("C1", "oracle equivalence", guard(&c1_oracle)));
    results.push(("C2", "self/anti-correlation", guard(&c2_self_anti)));
    results.push(("C3", "known-correlation recovery", guard(&c3_recovery)));
    results.push(("C4", "q = 2 bound", guard(&c4_bound)));
    let (c5, c7) = catch_unwind(c5_c7_sweep).unwrap_or_else(|_| (Err("panicked".into()), Err("panicked".into())));
    results.push(("C5", "trace conservation", c5));
    results.push(("C6", "entropy ceiling", guard(&c6_entropy)));
    results.push(("C7", "residual orthogonality", c7));
    results.push(("C8", "MST exactness", guard(&c8_mst)));
    results.push(("C9", "closed-form topology", guard(&c9_topology)));
    results.push(("C10", "Louvain recovery", guard(&c10_louvain)));
    results.push(("C11", "Epps effect", guard(&c11_epps)));
    results.push(("C12", "lag sanity", guard(&c12_lags)));
    results.push(("C13", "window arithmetic", guard(&c13_windows)));
    results.push(("C14", "performance", guard(&c14_performance)));
    results.push(("C15", "determinism", guard(&c15_determinism)));

    let mut failed = 0;
    for (id, name, r) in &results {
        match r {
            Ok(detail) => println!("[PASS] {id} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {id} {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
