//! Float helpers that work without `std`, and the entropy functions shared by
//! every bound.

pub const LN_2: f64 = core::f64::consts::LN_2;

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `x ln x` with `0 ln 0 = 0`.
#[inline]
pub fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * ln(x)
    }
}

/// Entropy of a Bernoulli(p) variable in nats. Assumes `p ∈ [0, 1]`.
#[inline]
pub fn h_bernoulli(p: f64) -> f64 {
    -xlnx(p) - xlnx(1.0 - p)
}

/// d/dp of [`h_bernoulli`], `ln((1-p)/p)`. Infinite at the endpoints.
#[inline]
pub fn h_bernoulli_derivative(p: f64) -> f64 {
    ln(1.0 - p) - ln(p)
}

/// Kahan-compensated sum; the block objectives add many small terms.
pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut total = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = total + y;
        carry = (t - total) - y;
        total = t;
    }
    total
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
