//! Price-to-return transforms.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Logarithmic returns `ln p(t+1) - ln p(t)`, one shorter than `prices`.
pub fn log_returns(prices: &[f64]) -> Result<Vec<f64>> {
    if prices.len() < 2 {
        return Err(Error::TooShort);
    }
    let logs: Vec<f64> = prices.iter().map(|&p| math::ln(p)).collect();
    Ok(logs.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Sample mean and population (divisor `T`) variance, two-pass.
pub fn mean_variance(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = math::sum(x) / n;
    let mut ss = 0.0;
    for v in x {
        let d = v - mean;
        ss += d * d;
    }
    (mean, ss / n)
}

/// Standardizes to zero mean and unit population variance.
pub fn normalize(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::ConstantSeries);
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let (mean, var) = mean_variance(x);
    let sd = math::sqrt(var);
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    // deviations at round-off level of the values mean the input is constant
    if !(sd > 1e-13 * scale) {
        return Err(Error::ConstantSeries);
    }
    let mut z: Vec<f64> = x.iter().map(|v| (v - mean) / sd).collect();
    // second centring pass removes the residual round-off in the mean
    let drift = math::sum(&z) / z.len() as f64;
    for v in &mut z {
        *v -= drift;
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_returns_exact_logs() {
        let e = core::f64::consts::E;
        let r = log_returns(&[1.0, e, e * e]).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|v| (v - 1.0).abs() < 1e-15));
        assert_eq!(log_returns(&[7.0; 5]).unwrap(), [0.0; 4]);
        let r = log_returns(&[100.0, 101.0]).unwrap();
        assert!((r[0] - 0.009950330853168083).abs() < 1e-15);
        assert_eq!(log_returns(&[1.0]), Err(Error::TooShort));
    }

    #[test]
    fn normalize_cases() {
        assert_eq!(normalize(&[1.0, -1.0]).unwrap(), [1.0, -1.0]);
        assert_eq!(normalize(&[5.0, 5.0, 5.0]), Err(Error::ConstantSeries));
        assert_eq!(normalize(&[0.1, 0.1, 0.1]), Err(Error::ConstantSeries));
        let z = normalize(&[3.0, 1.5, -2.0, 8.25, 0.0]).unwrap();
        let (m, v) = mean_variance(&z);
        assert!(m.abs() < 1e-12);
        assert!((v - 1.0).abs() < 1e-9);
    }
}
