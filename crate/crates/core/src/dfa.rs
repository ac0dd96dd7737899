//! Box-wise detrending and the q-dependent detrended cross-correlation
//! coefficient.
//!
//! A series of length `T` is cut into `M = floor(T / s)` boxes of length `s`
//! counted from the start and another `M` boxes counted from the end. Inside
//! every box the samples are integrated (running sum from the box start) and a
//! least-squares polynomial of order `m` is subtracted. For two series the
//! per-box residual variances and covariance are raised to the power `q / 2`
//! (keeping the sign of the covariance), averaged over the `2M` boxes, and
//! combined into
//!
//! ```text
//! rho_q = F_xy / sqrt(F_xx * F_yy)
//! ```
//!
//! Two entry points exist. [`rho_q`] and the step functions
//! ([`compute_box_residuals`], [`local_moments`], [`fluctuation_functions`])
//! work on a single pair. [`PreparedSeries`] caches the per-series work so a
//! correlation matrix only pays one dot product per box and pair. Both routes
//! share the same arithmetic and return bit-identical values.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Relative residual energy below which a box counts as exactly flat.
///
/// A box whose profile is fully explained by the polynomial (constant
/// returns, for example) leaves round-off of order `1e-16 * |profile|`.
/// Those residuals are set to zero so the box contributes `0^(q/2) = 0`.
const FLAT_BOX_REL_ENERGY: f64 = 1e-24;

/// Box length, polynomial order and fluctuation order for one `rho_q`
/// evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetrendConfig {
    pub scale: usize,
    pub poly_order: usize,
    pub q: f64,
}

impl DetrendConfig {
    pub const DEFAULT_POLY_ORDER: usize = 2;

    pub fn new(scale: usize, poly_order: usize, q: f64) -> Result<Self> {
        let cfg = Self {
            scale,
            poly_order,
            q,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        validate_q(self.q)?;
        if self.scale < self.poly_order + 2 {
            return Err(Error::DegenerateFit {
                scale: self.scale,
                order: self.poly_order,
            });
        }
        Ok(())
    }

    /// Checks the config against a series length.
    pub fn validate_for_len(&self, len: usize) -> Result<()> {
        self.validate()?;
        check_len(len, self.scale)
    }
}

pub(crate) fn validate_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidQ(q))
    }
}

fn check_len(len: usize, scale: usize) -> Result<()> {
    if scale == 0 || len < 2 * scale {
        Err(Error::ScaleTooLarge { scale, len })
    } else {
        Ok(())
    }
}

fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Start offsets (0-based) of the `2 * floor(len / scale)` boxes: forward
/// boxes first, then the boxes counted back from the end of the series.
pub fn box_starts(len: usize, scale: usize) -> impl Iterator<Item = usize> {
    let per_side = len.checked_div(scale).unwrap_or(0);
    let forward = (0..per_side).map(move |nu| nu * scale);
    let backward = (0..per_side).map(move |nu| len - (nu + 1) * scale);
    forward.chain(backward)
}

/// Polynomial detrending for a fixed box length and order.
///
/// The abscissa `i = 1..s` is shared by every box, so the least-squares
/// projector is built once as an orthonormal basis of the polynomial space
/// (modified Gram-Schmidt with one re-orthogonalization pass) and each box is
/// detrended by subtracting its projection onto that basis.
#[derive(Debug, Clone)]
pub struct Detrender {
    scale: usize,
    poly_order: usize,
    // (poly_order + 1) rows of length `scale`
    basis: Vec<f64>,
}

impl Detrender {
    pub fn new(scale: usize, poly_order: usize) -> Result<Self> {
        if scale < poly_order + 2 {
            return Err(Error::DegenerateFit {
                scale,
                order: poly_order,
            });
        }
        let rows = poly_order + 1;
        let mut basis = vec![0.0; rows * scale];
        // abscissa mapped to [-1, 1] keeps the monomials well scaled
        let half_span = (scale - 1) as f64 / 2.0;
        let centre = (scale + 1) as f64 / 2.0;
        for i in 0..scale {
            let u = ((i + 1) as f64 - centre) / half_span;
            let mut p = 1.0;
            for k in 0..rows {
                basis[k * scale + i] = p;
                p *= u;
            }
        }
        for k in 0..rows {
            for _pass in 0..2 {
                for j in 0..k {
                    let (done, rest) = basis.split_at_mut(k * scale);
                    let qj = &done[j * scale..(j + 1) * scale];
                    let vk = &mut rest[..scale];
                    let c = math::dot(qj, vk);
                    for (v, q) in vk.iter_mut().zip(qj) {
                        *v -= c * q;
                    }
                }
            }
            let vk = &mut basis[k * scale..(k + 1) * scale];
            let norm = math::sqrt(math::dot(vk, vk));
            for v in vk.iter_mut() {
                *v /= norm;
            }
        }
        Ok(Self {
            scale,
            poly_order,
            basis,
        })
    }

    pub fn for_config(cfg: &DetrendConfig) -> Result<Self> {
        cfg.validate()?;
        Self::new(cfg.scale, cfg.poly_order)
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn poly_order(&self) -> usize {
        self.poly_order
    }

    /// Integrates `samples` from the box start and removes the polynomial
    /// trend, writing the residuals into `out`.
    pub fn detrend_box(&self, samples: &[f64], out: &mut [f64]) {
        debug_assert_eq!(samples.len(), self.scale);
        debug_assert_eq!(out.len(), self.scale);
        let mut running = 0.0;
        for (o, &x) in out.iter_mut().zip(samples) {
            running += x;
            *o = running;
        }
        let profile_energy = math::dot(out, out);
        for q in self.basis.chunks_exact(self.scale) {
            let c = math::dot(q, out);
            for (o, b) in out.iter_mut().zip(q) {
                *o -= c * b;
            }
        }
        if math::dot(out, out) <= FLAT_BOX_REL_ENERGY * profile_energy {
            out.fill(0.0);
        }
    }

    /// Residuals of every box of `x`, forward boxes first.
    pub fn residuals(&self, x: &[f64]) -> Result<BoxResiduals> {
        check_len(x.len(), self.scale)?;
        check_finite(x)?;
        let starts: Vec<usize> = box_starts(x.len(), self.scale).collect();
        let mut residuals = vec![0.0; starts.len() * self.scale];
        for (start, out) in starts.iter().zip(residuals.chunks_exact_mut(self.scale)) {
            self.detrend_box(&x[*start..*start + self.scale], out);
        }
        Ok(BoxResiduals {
            scale: self.scale,
            box_count: starts.len(),
            residuals,
        })
    }
}

/// Detrended profile residuals of one series, `box_count` boxes of `scale`
/// values each, stored box after box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxResiduals {
    scale: usize,
    box_count: usize,
    residuals: Vec<f64>,
}

impl BoxResiduals {
    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn box_count(&self) -> usize {
        self.box_count
    }

    pub fn boxes(&self) -> core::slice::ChunksExact<'_, f64> {
        self.residuals.chunks_exact(self.scale)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.residuals
    }

    fn same_layout(&self, other: &Self) -> Result<()> {
        if self.box_count != other.box_count || self.scale != other.scale {
            return Err(Error::BoxMismatch {
                left_boxes: self.box_count,
                left_scale: self.scale,
                right_boxes: other.box_count,
                right_scale: other.scale,
            });
        }
        Ok(())
    }
}

pub fn compute_box_residuals(x: &[f64], cfg: &DetrendConfig) -> Result<BoxResiduals> {
    Detrender::for_config(cfg)?.residuals(x)
}

/// Per-box residual variance of X and Y and their covariance (sums, not
/// averages, over the `s` points of the box).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMoments {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

fn center_into(values: &[f64], out: &mut [f64]) {
    let mean = math::sum(values) / values.len() as f64;
    for (o, v) in out.iter_mut().zip(values) {
        *o = v - mean;
    }
}

pub fn local_moments(bx: &BoxResiduals, by: &BoxResiduals) -> Result<Vec<LocalMoments>> {
    bx.same_layout(by)?;
    let mut cx = vec![0.0; bx.scale];
    let mut cy = vec![0.0; bx.scale];
    Ok(bx
        .boxes()
        .zip(by.boxes())
        .map(|(x, y)| {
            center_into(x, &mut cx);
            center_into(y, &mut cy);
            LocalMoments {
                xx: math::dot(&cx, &cx),
                yy: math::dot(&cy, &cy),
                xy: math::dot(&cx, &cy),
            }
        })
        .collect())
}

/// Order-q fluctuation functions of a pair at one scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationSet {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
    pub q: f64,
    pub scale: usize,
}

impl FluctuationSet {
    /// `F_xy / sqrt(F_xx * F_yy)`; errors when either variance vanishes.
    pub fn rho(&self) -> Result<f64> {
        rho_from_parts(self.xy, self.xx, self.yy)
    }
}

fn mean_power(moments: impl Iterator<Item = f64>, q: f64, count: usize) -> f64 {
    let mut acc = 0.0;
    for v in moments {
        acc += math::pow_half(v, q);
    }
    acc / count as f64
}

fn mean_signed_power(moments: impl Iterator<Item = f64>, q: f64, count: usize) -> f64 {
    let mut acc = 0.0;
    for v in moments {
        if v > 0.0 {
            acc += math::pow_half(v, q);
        } else if v < 0.0 {
            acc -= math::pow_half(-v, q);
        }
    }
    acc / count as f64
}

pub fn fluctuation_functions(moments: &[LocalMoments], q: f64, scale: usize) -> Result<FluctuationSet> {
    validate_q(q)?;
    if moments.is_empty() {
        return Err(Error::ScaleTooLarge { scale, len: 0 });
    }
    let n = moments.len();
    Ok(FluctuationSet {
        xx: mean_power(moments.iter().map(|m| m.xx), q, n),
        yy: mean_power(moments.iter().map(|m| m.yy), q, n),
        xy: mean_signed_power(moments.iter().map(|m| m.xy), q, n),
        q,
        scale,
    })
}

pub fn rho_from_parts(fxy: f64, fxx: f64, fyy: f64) -> Result<f64> {
    if !(fxx > 0.0 && fyy > 0.0) {
        return Err(Error::ZeroVariance { label: None });
    }
    Ok(fxy / math::sqrt(fxx * fyy))
}

/// `rho_q(s)` of two equally long series.
///
/// For `q = 2` the value lies in `[-1, 1]`. For other orders the raw ratio
/// is returned; see [`exceeds_unit_range`].
pub fn rho_q(x: &[f64], y: &[f64], cfg: &DetrendConfig) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let detrender = Detrender::for_config(cfg)?;
    let bx = detrender.residuals(x)?;
    let by = detrender.residuals(y)?;
    let moments = local_moments(&bx, &by)?;
    fluctuation_functions(&moments, cfg.q, cfg.scale)?.rho()
}

/// True when a coefficient falls outside `[-1, 1]`, which can only happen
/// for `q != 2`.
pub fn exceeds_unit_range(rho: f64) -> bool {
    rho.abs() > 1.0 + 1e-12
}

/// The overlapping parts of `x` shifted by `tau` samples against `y`.
///
/// `tau > 0` lags `x` (pairs `x[t - tau]` with `y[t]`), `tau < 0` advances it.
pub fn lag_overlap<'a>(x: &'a [f64], y: &'a [f64], tau: i64) -> (&'a [f64], &'a [f64]) {
    let shift = tau.unsigned_abs() as usize;
    let n = x.len().min(y.len());
    if shift >= n {
        return (&x[..0], &y[..0]);
    }
    if tau >= 0 {
        (&x[..n - shift], &y[shift..n])
    } else {
        (&x[shift..n], &y[..n - shift])
    }
}

/// `rho_q` of `x` shifted by `tau` samples against `y`, on the overlap.
pub fn rho_q_lagged(x: &[f64], y: &[f64], cfg: &DetrendConfig, tau: i64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    cfg.validate()?;
    let (xs, ys) = lag_overlap(x, y, tau);
    if xs.len() < 2 * cfg.scale {
        return Err(Error::OverlapTooShort {
            tau,
            overlap: xs.len(),
            scale: cfg.scale,
        });
    }
    rho_q(xs, ys, cfg)
}

/// One series with its box residuals centred and its per-box variances
/// cached, ready to be paired with many others.
#[derive(Debug, Clone)]
pub struct PreparedSeries {
    scale: usize,
    box_count: usize,
    centred: Vec<f64>,
    variances: Vec<f64>,
}

impl PreparedSeries {
    pub fn new(x: &[f64], detrender: &Detrender) -> Result<Self> {
        let residuals = detrender.residuals(x)?;
        let scale = residuals.scale;
        let mut centred = vec![0.0; residuals.residuals.len()];
        for (r, c) in residuals.boxes().zip(centred.chunks_exact_mut(scale)) {
            center_into(r, c);
        }
        let variances = centred.chunks_exact(scale).map(|c| math::dot(c, c)).collect();
        Ok(Self {
            scale,
            box_count: residuals.box_count,
            centred,
            variances,
        })
    }

    pub fn box_count(&self) -> usize {
        self.box_count
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    /// Per-box residual variances `f^2_xx(s, nu)`.
    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// `F^(q)_xx(s)`.
    pub fn fluctuation(&self, q: f64) -> f64 {
        mean_power(self.variances.iter().copied(), q, self.box_count)
    }

    /// Per-box covariances `f^2_xy(s, nu)` with `other`, written into `out`.
    pub fn cross_moments_into(&self, other: &Self, out: &mut Vec<f64>) -> Result<()> {
        if self.box_count != other.box_count || self.scale != other.scale {
            return Err(Error::BoxMismatch {
                left_boxes: self.box_count,
                left_scale: self.scale,
                right_boxes: other.box_count,
                right_scale: other.scale,
            });
        }
        out.clear();
        out.extend(
            self.centred
                .chunks_exact(self.scale)
                .zip(other.centred.chunks_exact(self.scale))
                .map(|(a, b)| math::dot(a, b)),
        );
        Ok(())
    }

    /// `F^(q)_xy(s)` from covariances produced by [`Self::cross_moments_into`].
    pub fn cross_fluctuation(covariances: &[f64], q: f64) -> f64 {
        mean_signed_power(covariances.iter().copied(), q, covariances.len())
    }

    /// `rho_q` against `other`, identical to [`rho_q`] on the raw series.
    pub fn rho(&self, other: &Self, q: f64) -> Result<f64> {
        validate_q(q)?;
        let mut cov = Vec::with_capacity(self.box_count);
        self.cross_moments_into(other, &mut cov)?;
        rho_from_parts(
            Self::cross_fluctuation(&cov, q),
            self.fluctuation(q),
            other.fluctuation(q),
        )
    }
}
