use proptest::prelude::*;
use qdcca_core::{rho_q, rho_q_lagged, DetrendConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

fn gaussian(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn series_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (40usize..400).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(-5.0f64..5.0, n),
        )
    })
}

fn cfg_strategy() -> impl Strategy<Value = DetrendConfig> {
    (0usize..=3, 0usize..=12, prop::sample::select(vec![0.5, 1.0, 2.0, 3.0, 4.0])).prop_map(
        |(m, extra, q)| DetrendConfig::new(m + 2 + extra + 3, m, q).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn symmetric((x, y) in series_strategy(), cfg in cfg_strategy()) {
        let a = rho_q(&x, &y, &cfg).unwrap();
        let b = rho_q(&y, &x, &cfg).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn affine_invariant((x, y) in series_strategy(), cfg in cfg_strategy(),
                        a in 0.01f64..100.0, b in -10.0f64..10.0) {
        prop_assume!(cfg.poly_order >= 1);
        let base = rho_q(&x, &y, &cfg).unwrap();
        let up: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let down: Vec<f64> = x.iter().map(|v| -a * v + b).collect();
        prop_assert!((rho_q(&up, &y, &cfg).unwrap() - base).abs() < 1e-10);
        prop_assert!((rho_q(&down, &y, &cfg).unwrap() + base).abs() < 1e-10);
    }

    #[test]
    fn bounded_for_q_two((x, y) in series_strategy(), m in 0usize..=3, s in 5usize..20) {
        let cfg = DetrendConfig::new(s, m, 2.0).unwrap();
        prop_assert!(rho_q(&x, &y, &cfg).unwrap().abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn self_correlation_is_one((x, _y) in series_strategy(), cfg in cfg_strategy()) {
        prop_assert_eq!(rho_q(&x, &x, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn deterministic((x, y) in series_strategy(), cfg in cfg_strategy()) {
        let a = rho_q(&x, &y, &cfg).unwrap();
        let b = rho_q(&x, &y, &cfg).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn independent_series_are_uncorrelated() {
    let cfg = DetrendConfig::new(50, 2, 2.0).unwrap();
    let mut total = 0.0;
    for seed in 0..50 {
        let mut rng = StdRng::seed_from_u64(seed);
        let x = gaussian(&mut rng, 10_000);
        let y = gaussian(&mut rng, 10_000);
        total += rho_q(&x, &y, &cfg).unwrap().abs();
    }
    assert!(total / 50.0 < 0.05, "mean |rho| = {}", total / 50.0);
}

#[test]
fn correlated_gaussian_recovers_level() {
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
    assert!((mean - 0.7).abs() < 0.05, "mean rho = {mean}");
}

fn ar1(rng: &mut StdRng, n: usize, phi: f64) -> Vec<f64> {
    let mut x = Vec::with_capacity(n);
    let mut prev = 0.0;
    for _ in 0..n {
        prev = phi * prev + rng.sample::<f64, _>(StandardNormal);
        x.push(prev);
    }
    x
}

#[test]
fn lagged_autocorrelated_series_stays_correlated() {
    let cfg = DetrendConfig::new(50, 2, 2.0).unwrap();
    let mut rng = StdRng::seed_from_u64(9);
    let x = ar1(&mut rng, 20_000, 0.9);
    let r = rho_q_lagged(&x, &x, &cfg, 1).unwrap();
    // literal oracle on the shifted pair
    let direct = rho_q(&x[..x.len() - 1], &x[1..], &cfg).unwrap();
    assert_eq!(r.to_bits(), direct.to_bits());
    assert!(r > 0.5, "lag-1 rho = {r}");
}

#[test]
fn lagged_white_noise_is_uncorrelated() {
    let cfg = DetrendConfig::new(50, 2, 2.0).unwrap();
    for tau in [-1, 1] {
        let mut total = 0.0;
        for seed in 0..50 {
            let mut rng = StdRng::seed_from_u64(500 + seed);
            let x = gaussian(&mut rng, 10_000);
            let y = gaussian(&mut rng, 10_000);
            total += rho_q_lagged(&x, &y, &cfg, tau).unwrap().abs();
        }
        assert!(total / 50.0 < 0.05, "tau {tau}: mean |rho| = {}", total / 50.0);
    }
}
