//! Coefficient rings.
//!
//! Everything downstream is generic over [`Ring`]: plain complex numbers for
//! the fixed-lattice pipeline, and truncated q-series for the modular one.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt::Debug;

pub type Scalar = Complex64;

/// Default relative tolerance, overridable through `BCMOD_TOL`.
pub const DEFAULT_REL_TOL: f64 = 1e-10;
/// Absolute floor used whenever a relative comparison has a vanishing scale.
pub const ABS_FLOOR: f64 = 1e-14;

/// Relative tolerance in effect: `BCMOD_TOL` if set and parseable, otherwise
/// [`DEFAULT_REL_TOL`].
pub fn default_tolerance() -> f64 {
    std::env::var("BCMOD_TOL")
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|t| t.is_finite() && *t > 0.0)
        .unwrap_or(DEFAULT_REL_TOL)
}

/// A commutative ring with a complex scalar action and a size measure.
///
/// Method names avoid `add`/`mul` so they never clash with `std::ops`.
pub trait Ring: Clone + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_scalar(c: Scalar) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    fn scaled(&self, c: Scalar) -> Self;
    /// Max-abs size, used for relative tolerance tests.
    fn magnitude(&self) -> f64;
    /// Multiplicative inverse when the element is a unit.
    fn try_inv(&self) -> Option<Self>;
    /// Componentwise absolute value; used to bound rounding error by running
    /// a computation without cancellation.
    fn abs_value(&self) -> Self;

    fn is_negligible(&self, scale: f64, rel_tol: f64) -> bool {
        self.magnitude() <= rel_tol * scale.max(ABS_FLOOR)
    }
}

impl Ring for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_scalar(c: Scalar) -> Self {
        c
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn scaled(&self, c: Scalar) -> Self {
        self * c
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn abs_value(&self) -> Self {
        Complex64::new(self.norm(), 0.0)
    }
    fn try_inv(&self) -> Option<Self> {
        if self.norm() == 0.0 || !self.is_finite() {
            None
        } else {
            Some(self.inv())
        }
    }
}

/// Binomial coefficient as f64 (exact for the small arguments used here).
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// The N N-th roots of `x` in the fixed order
/// `|x|^(1/N) exp(i (arg x + 2 pi j) / N)`, `j = 0..N`.
pub fn nth_roots(x: Scalar, n: usize) -> Vec<Scalar> {
    assert!(n > 0, "nth_roots needs n >= 1");
    let r = x.norm().powf(1.0 / n as f64);
    let a = x.arg();
    (0..n)
        .map(|j| Complex64::from_polar(r, (a + 2.0 * PI * j as f64) / n as f64))
        .collect()
}

/// Relative distance with an absolute floor: `|a-b| / max(|a|,|b|,floor)`.
pub fn rel_diff(a: Scalar, b: Scalar) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(ABS_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_order_and_values() {
        let x = Complex64::new(-8.0, 0.0);
        let r = nth_roots(x, 3);
        for y in &r {
            assert!((y.powu(3) - x).norm() < 1e-12);
        }
        assert!((r[0] - Complex64::from_polar(2.0, PI / 3.0)).norm() < 1e-12);
        assert!((r[1] + 2.0).norm() < 1e-12);
    }

    #[test]
    fn binomials() {
        assert_eq!(binom(5, 2), 10.0);
        assert_eq!(binom(10, 0), 1.0);
        assert_eq!(binom(3, 4), 0.0);
        assert_eq!(factorial(5), 120.0);
    }
}
