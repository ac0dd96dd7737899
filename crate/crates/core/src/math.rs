//! Thin wrappers over `libm` so the numeric code reads like `std` float code.

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// `v^(q/2)` for `v >= 0`, with exact shortcuts for the common orders.
#[inline]
pub(crate) fn pow_half(v: f64, q: f64) -> f64 {
    if q == 2.0 {
        v
    } else if q == 4.0 {
        v * v
    } else if q == 1.0 {
        sqrt(v)
    } else {
        powf(v, 0.5 * q)
    }
}

/// Sum in index order. All reductions that feed published numbers go
/// through here so the summation order is fixed.
#[inline]
pub(crate) fn sum(xs: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &x in xs {
        acc += x;
    }
    acc
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}
