//! Market-factor eigensignal and residual returns.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::returns::ReturnMatrix;

/// `z(t) = sum_j v[j] * r_j(t)`.
pub fn eigensignal(returns: &ReturnMatrix, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != returns.n_series() {
        return Err(Error::DimensionMismatch {
            expected: returns.n_series(),
            got: v.len(),
        });
    }
    let mut z = vec![0.0; returns.len()];
    for (row, &w) in returns.rows().zip(v) {
        for (acc, r) in z.iter_mut().zip(row) {
            *acc += w * r;
        }
    }
    Ok(z)
}

/// Returns with the fitted eigensignal removed: `r_i - alpha_i z - beta_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReturns {
    pub residuals: ReturnMatrix,
    /// Slope of each asset on the eigensignal.
    pub alpha: Vec<f64>,
    /// Intercept of each fit.
    pub beta: Vec<f64>,
    pub eigensignal: Vec<f64>,
}

/// Pearson correlation; zero when either input has no variance.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = math::sum(a) / n;
    let mb = math::sum(b) / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / math::sqrt(saa * sbb)
    }
}

/// Least-squares fit of `z` to every row of `returns` and subtraction of the
/// fitted line.
///
/// One refinement pass re-fits the residual itself, so the residuals are
/// orthogonal to `z` and zero-mean to working precision even when the fit
/// explains most of the variance.
pub fn residual_returns(returns: &ReturnMatrix, z: &[f64]) -> Result<ResidualReturns> {
    let t = returns.len();
    if z.len() != t {
        return Err(Error::DimensionMismatch { expected: t, got: z.len() });
    }
    let z_mean = math::sum(z) / t as f64;
    let zc: Vec<f64> = z.iter().map(|v| v - z_mean).collect();
    let szz = math::dot(&zc, &zc);
    let z_scale = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(math::sqrt(szz / t as f64) > 1e-13 * z_scale) {
        return Err(Error::ConstantEigensignal);
    }

    let mut values = Vec::with_capacity(returns.n_series() * t);
    let mut alpha = Vec::with_capacity(returns.n_series());
    let mut beta = Vec::with_capacity(returns.n_series());
    let mut res = vec![0.0; t];
    for row in returns.rows() {
        let r_mean = math::sum(row) / t as f64;
        let mut a = 0.0;
        for (r, c) in row.iter().zip(&zc) {
            a += (r - r_mean) * c;
        }
        a /= szz;
        let mut b = r_mean - a * z_mean;
        for ((o, r), zv) in res.iter_mut().zip(row).zip(z) {
            *o = r - a * zv - b;
        }
        let da = math::dot(&res, &zc) / szz;
        let db = math::sum(&res) / t as f64;
        for (o, c) in res.iter_mut().zip(&zc) {
            *o -= da * c + db;
        }
        a += da;
        b += db - da * z_mean;
        alpha.push(a);
        beta.push(b);
        values.extend_from_slice(&res);
    }
    Ok(ResidualReturns {
        residuals: returns.with_values(values)?,
        alpha,
        beta,
        eigensignal: z.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::{String, ToString};

    fn matrix(rows: &[Vec<f64>]) -> ReturnMatrix {
        let labels: Vec<String> = (0..rows.len()).map(|i| i.to_string()).collect();
        ReturnMatrix::from_rows(labels, (0..rows[0].len() as i64).collect(), rows).unwrap()
    }

    fn wave(n: usize, k: f64) -> Vec<f64> {
        (0..n).map(|i| (i as f64 * k).sin() + 0.1 * (i as f64 * 3.7 * k).cos()).collect()
    }

    #[test]
    fn projection_on_basis_vector() {
        let r = matrix(&[wave(50, 0.3), wave(50, 0.7), wave(50, 1.1)]);
        assert_eq!(eigensignal(&r, &[0.0, 1.0, 0.0]).unwrap(), r.row(1));
        assert!(eigensignal(&r, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn opposite_pair_cancels() {
        let a = wave(40, 0.4);
        let b: Vec<f64> = a.iter().map(|v| -v).collect();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let z = eigensignal(&matrix(&[a, b]), &[h, h]).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn self_fit_leaves_nothing() {
        let z = wave(100, 0.2);
        let out = residual_returns(&matrix(std::slice::from_ref(&z)), &z).unwrap();
        assert!((out.alpha[0] - 1.0).abs() < 1e-14);
        assert!(out.beta[0].abs() < 1e-14);
        assert!(out.residuals.row(0).iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn orthogonal_regressor_only_demeans() {
        // cos and sin over whole periods have zero sample covariance
        let n = 64;
        let w = 2.0 * core::f64::consts::PI / n as f64;
        let z: Vec<f64> = (0..n).map(|i| (w * i as f64).cos()).collect();
        let r: Vec<f64> = (0..n).map(|i| (w * i as f64).sin() + 2.0).collect();
        let out = residual_returns(&matrix(std::slice::from_ref(&r)), &z).unwrap();
        assert!(out.alpha[0].abs() < 1e-14);
        for (res, orig) in out.residuals.row(0).iter().zip(&r) {
            assert!((res - (orig - 2.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_eigensignal_rejected() {
        let r = matrix(&[wave(30, 0.5)]);
        assert_eq!(residual_returns(&r, &[0.25; 30]), Err(Error::ConstantEigensignal));
    }
}
