//! Truncated Laurent series with exact precision bookkeeping.
//!
//! A series stores the coefficients of `(v - center)^k` for
//! `order_min <= k <= order_max`. Coefficients below `order_min` are known to
//! vanish; coefficients above `order_max` are unknown, and asking for one is an
//! error rather than a silent zero.

use crate::error::{Error, Result};
use crate::scalar::{Ring, Scalar};
use serde::{Deserialize, Serialize};

/// Which formal variable a series is expanded in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    /// Position variable `z`, expanded around a center.
    Z,
    /// Spectral variable, expanded in powers of `lambda^-1`.
    LambdaInv,
    /// Nome `q` (or a root of it).
    Q,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries<R: Ring = Scalar> {
    pub variable: Variable,
    pub center: Scalar,
    pub order_min: i64,
    pub coeffs: Vec<R>,
}

impl<R: Ring> TruncatedSeries<R> {
    pub fn new(variable: Variable, center: Scalar, order_min: i64, coeffs: Vec<R>) -> Self {
        Self {
            variable,
            center,
            order_min,
            coeffs,
        }
    }

    /// Series in `z` around `center`.
    pub fn z(center: Scalar, order_min: i64, coeffs: Vec<R>) -> Self {
        Self::new(Variable::Z, center, order_min, coeffs)
    }

    /// Constant `c` known through `order_max`.
    pub fn constant(variable: Variable, center: Scalar, c: R, order_max: i64) -> Self {
        let len = (order_max + 1).max(0) as usize;
        let mut coeffs = vec![R::zero(); len];
        if len > 0 {
            coeffs[0] = c;
        }
        Self::new(variable, center, 0, coeffs)
    }

    pub fn zero_like(&self) -> Self {
        Self::constant(self.variable, self.center, R::zero(), self.order_max())
    }

    /// Builds coefficients from a closure over the exponent.
    pub fn from_fn(
        variable: Variable,
        center: Scalar,
        order_min: i64,
        order_max: i64,
        f: impl Fn(i64) -> R,
    ) -> Self {
        let coeffs = (order_min..=order_max).map(f).collect();
        Self::new(variable, center, order_min, coeffs)
    }

    /// Highest exponent with a known coefficient. May be `order_min - 1` for a
    /// series with no known terms.
    pub fn order_max(&self) -> i64 {
        self.order_min + self.coeffs.len() as i64 - 1
    }

    /// Coefficient of `(v - center)^k`. Zero below the window, an error above.
    pub fn coeff(&self, k: i64) -> Result<R> {
        if k < self.order_min {
            Ok(R::zero())
        } else if k > self.order_max() {
            Err(Error::window("series coefficient", k, self.order_max()))
        } else {
            Ok(self.coeffs[(k - self.order_min) as usize].clone())
        }
    }

    /// Coefficient without the window check; unknown terms read as zero.
    pub fn coeff_or_zero(&self, k: i64) -> R {
        self.coeff(k).unwrap_or_else(|_| R::zero())
    }

    /// Largest coefficient magnitude.
    pub fn magnitude(&self) -> f64 {
        self.coeffs.iter().map(Ring::magnitude).fold(0.0, f64::max)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.variable != other.variable {
            return Err(Error::Usage(format!(
                "variable mismatch: {:?} vs {:?}",
                self.variable, other.variable
            )));
        }
        if (self.center - other.center).norm() > 1e-12 * (1.0 + self.center.norm()) {
            return Err(Error::Usage(format!(
                "center mismatch: {} vs {}",
                self.center, other.center
            )));
        }
        Ok(())
    }

    /// Drops everything above `order_max`.
    pub fn truncate(&self, order_max: i64) -> Self {
        let mut out = self.clone();
        let keep = (order_max - self.order_min + 1).clamp(0, self.coeffs.len() as i64) as usize;
        out.coeffs.truncate(keep);
        out
    }

    /// Rewrites the series so that `order_min` equals `new_min` (which must not
    /// exceed the true valuation), padding with zeros.
    pub fn with_order_min(&self, new_min: i64) -> Self {
        if new_min >= self.order_min {
            let drop = (new_min - self.order_min) as usize;
            let mut out = self.clone();
            out.order_min = new_min;
            out.coeffs = self.coeffs.iter().skip(drop).cloned().collect();
            return out;
        }
        let pad = (self.order_min - new_min) as usize;
        let mut coeffs = vec![R::zero(); pad];
        coeffs.extend(self.coeffs.iter().cloned());
        Self::new(self.variable, self.center, new_min, coeffs)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let lo = self.order_min.min(other.order_min);
        let hi = self.order_max().min(other.order_max());
        Ok(Self::from_fn(self.variable, self.center, lo, hi, |k| {
            self.coeff_or_zero(k).plus(&other.coeff_or_zero(k))
        }))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let lo = self.order_min + other.order_min;
        // Known terms of a*b stop where the first unknown term of either
        // factor starts to contribute.
        let hi = (self.order_max() + other.order_min).min(other.order_max() + self.order_min);
        let len = (hi - lo + 1).max(0) as usize;
        let mut coeffs = vec![R::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.magnitude() == 0.0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let k = i + j;
                if k >= len {
                    break;
                }
                coeffs[k] = coeffs[k].plus(&a.times(b));
            }
        }
        Ok(Self::new(self.variable, self.center, lo, coeffs))
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(Ring::negated).collect();
        out
    }

    pub fn scale(&self, c: Scalar) -> Self {
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(|a| a.scaled(c)).collect();
        out
    }

    /// Multiplies every coefficient by a ring element.
    pub fn scale_ring(&self, c: &R) -> Self {
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(|a| a.times(c)).collect();
        out
    }

    /// Multiplies by `(v - center)^shift`.
    pub fn shift(&self, shift: i64) -> Self {
        let mut out = self.clone();
        out.order_min += shift;
        out
    }

    /// Derivative with respect to the variable. Loses one order of precision.
    pub fn derivative(&self) -> Self {
        let lo = if self.order_min == 0 { 0 } else { self.order_min - 1 };
        let hi = self.order_max() - 1;
        Self::from_fn(self.variable, self.center, lo, hi, |e| {
            self.coeff_or_zero(e + 1).scaled(Scalar::new((e + 1) as f64, 0.0))
        })
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |acc, _| acc.derivative())
    }

    /// Antiderivative vanishing at the center. Needs a vanishing `1/(v-c)` term.
    pub fn integrate_from_center(&self) -> Result<Self> {
        if self.coeff_or_zero(-1).magnitude() > 0.0 {
            return Err(Error::Usage("cannot integrate a series with a residue".into()));
        }
        Ok(Self::from_fn(
            self.variable,
            self.center,
            self.order_min + 1,
            self.order_max() + 1,
            |e| {
                if e == 0 {
                    R::zero()
                } else {
                    self.coeff_or_zero(e - 1).scaled(Scalar::new(1.0 / e as f64, 0.0))
                }
            },
        ))
    }

    /// Multiplicative inverse. The lowest nonzero coefficient must be a unit.
    pub fn invert(&self) -> Result<Self> {
        let lead = self
            .coeffs
            .iter()
            .position(|c| c.magnitude() != 0.0)
            .ok_or_else(|| Error::NotInvertible("zero series".into()))?;
        let v = self.order_min + lead as i64;
        let a: Vec<R> = self.coeffs[lead..].to_vec();
        let inv0 = a[0]
            .try_inv()
            .ok_or_else(|| Error::NotInvertible("leading coefficient is not a unit".into()))?;
        let n = a.len();
        let mut b: Vec<R> = Vec::with_capacity(n);
        b.push(inv0.clone());
        for k in 1..n {
            let mut s = R::zero();
            for i in 1..=k {
                s = s.plus(&a[i].times(&b[k - i]));
            }
            b.push(s.times(&inv0).negated());
        }
        Ok(Self::new(self.variable, self.center, -v, b))
    }

    /// `f(c * v)`: coefficient `k` picks up `c^k`, the center becomes `center / c`.
    pub fn rescale(&self, c: Scalar) -> Self {
        let mut out = self.clone();
        out.center = self.center / c;
        for (i, a) in out.coeffs.iter_mut().enumerate() {
            let k = self.order_min + i as i64;
            *a = a.scaled(c.powi(k as i32));
        }
        out
    }

    /// `exp` of a series with vanishing negative part.
    pub fn exp_series(&self) -> Result<Self>
    where
        R: ExpRing,
    {
        if self.order_min < 0 {
            return Err(Error::Usage("exp of a series with a pole".into()));
        }
        let f0 = self.coeff_or_zero(0);
        let tail = {
            let mut t = self.with_order_min(0);
            t.coeffs[0] = R::zero();
            t
        };
        // y' = tail' y, y(0) = 1, then multiply by exp(f0).
        let d = tail.derivative();
        let n = self.order_max().max(0) as usize + 1;
        let mut y: Vec<R> = vec![R::one()];
        for k in 1..n {
            let mut s = R::zero();
            for i in 0..k {
                s = s.plus(&d.coeff_or_zero(i as i64).times(&y[k - 1 - i]));
            }
            y.push(s.scaled(Scalar::new(1.0 / k as f64, 0.0)));
        }
        let e0 = f0.exp_ring();
        let coeffs = y.iter().map(|c| c.times(&e0)).collect();
        Ok(Self::new(self.variable, self.center, 0, coeffs))
    }

    /// Integer power (repeated multiplication).
    pub fn powi(&self, n: u32) -> Result<Self> {
        if n == 0 {
            let rel = self.order_max() - self.order_min;
            return Ok(Self::constant(self.variable, self.center, R::one(), rel));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.try_mul(self)?;
        }
        Ok(acc)
    }

    /// Coefficientwise absolute values.
    pub fn abs_series(&self) -> Self {
        self.map(Ring::abs_value)
    }

    /// Maps every coefficient through `f` (e.g. to change the ring).
    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S) -> TruncatedSeries<S> {
        TruncatedSeries::new(
            self.variable,
            self.center,
            self.order_min,
            self.coeffs.iter().map(f).collect(),
        )
    }
}

/// Rings where `exp` of a scalar-like element makes sense.
pub trait ExpRing: Ring {
    fn exp_ring(&self) -> Self;
}

impl ExpRing for Scalar {
    fn exp_ring(&self) -> Self {
        self.exp()
    }
}

impl TruncatedSeries<Scalar> {
    /// Sums the known terms at `v`.
    pub fn evaluate(&self, v: Scalar) -> Scalar {
        let t = v - self.center;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * t.powi((self.order_min + i as i64) as i32))
            .sum()
    }

    /// Componentwise closeness with a relative tolerance on the shared window.
    pub fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool {
        let lo = self.order_min.min(other.order_min);
        let hi = self.order_max().min(other.order_max());
        let scale = self.magnitude().max(other.magnitude()).max(crate::scalar::ABS_FLOOR);
        (lo..=hi).all(|k| (self.coeff_or_zero(k) - other.coeff_or_zero(k)).norm() <= rel_tol * scale)
    }
}

impl<R: Ring> std::ops::Add for &TruncatedSeries<R> {
    type Output = TruncatedSeries<R>;
    fn add(self, rhs: Self) -> TruncatedSeries<R> {
        self.try_add(rhs).expect("incompatible series")
    }
}

impl<R: Ring> std::ops::Sub for &TruncatedSeries<R> {
    type Output = TruncatedSeries<R>;
    fn sub(self, rhs: Self) -> TruncatedSeries<R> {
        self.try_sub(rhs).expect("incompatible series")
    }
}

impl<R: Ring> std::ops::Mul for &TruncatedSeries<R> {
    type Output = TruncatedSeries<R>;
    fn mul(self, rhs: Self) -> TruncatedSeries<R> {
        self.try_mul(rhs).expect("incompatible series")
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    variable: Variable,
    center: [f64; 2],
    order_min: i64,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for TruncatedSeries<Scalar> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson {
            variable: self.variable,
            center: [self.center.re, self.center.im],
            order_min: self.order_min,
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TruncatedSeries<Scalar> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SeriesJson::deserialize(d)?;
        Ok(Self::new(
            j.variable,
            Scalar::new(j.center[0], j.center[1]),
            j.order_min,
            j.coeffs.into_iter().map(|[re, im]| Scalar::new(re, im)).collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Scalar {
        Scalar::new(re, 0.0)
    }

    fn zs(order_min: i64, coeffs: &[f64]) -> TruncatedSeries {
        TruncatedSeries::z(c(0.0), order_min, coeffs.iter().map(|&x| c(x)).collect())
    }

    #[test]
    fn product_window() {
        let a = zs(-2, &[1.0, 0.0, 0.0, 0.0, 0.5]);
        let b = zs(0, &[1.0, 2.0, 3.0]);
        let p = a.try_mul(&b).unwrap();
        assert_eq!(p.order_min, -2);
        assert_eq!(p.order_max(), 0);
        assert!(p.coeff(1).is_err());
        assert_eq!(p.coeff(-3).unwrap(), c(0.0));
    }

    #[test]
    fn derivative_of_laurent() {
        let a = zs(-2, &[1.0, 0.0, 0.0, 0.0, 0.25]);
        let d = a.derivative();
        assert_eq!(d.order_min, -3);
        assert_eq!(d.coeff(-3).unwrap(), c(-2.0));
        assert_eq!(d.coeff(1).unwrap(), c(0.5));
        assert_eq!(d.order_max(), 1);
    }

    #[test]
    fn integrate_then_differentiate() {
        let a = zs(0, &[1.0, 2.0, 3.0]);
        let i = a.integrate_from_center().unwrap();
        assert_eq!(i.coeff(0).unwrap(), c(0.0));
        assert_eq!(i.order_max(), 3);
        assert!(i.derivative().approx_eq(&a, 1e-15));
        assert!(zs(-1, &[1.0, 0.0]).integrate_from_center().is_err());
    }

    #[test]
    fn invert_zero_fails() {
        assert!(zs(0, &[0.0, 0.0]).invert().is_err());
        let a = zs(2, &[2.0, 1.0]);
        let inv = a.invert().unwrap();
        assert_eq!(inv.order_min, -2);
        assert_eq!(inv.coeff(-2).unwrap(), c(0.5));
        assert_eq!(inv.coeff(-1).unwrap(), c(-0.25));
    }

    #[test]
    fn exp_matches_taylor() {
        let a = zs(0, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let e = a.exp_series().unwrap();
        for k in 0..6 {
            assert!((e.coeff(k).unwrap() - c(1.0 / crate::scalar::factorial(k as usize))).norm() < 1e-15);
        }
    }

    #[test]
    fn json_roundtrip() {
        let a = TruncatedSeries::z(Scalar::new(0.5, 0.0), -1, vec![Scalar::new(1.0, 2.0), c(3.0)]);
        let s = serde_json::to_string(&a).unwrap();
        assert!(s.contains("\"variable\":\"z\""));
        let b: TruncatedSeries = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }

    fn arb_series() -> impl Strategy<Value = TruncatedSeries> {
        (
            -3i64..3,
            prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 2..10),
        )
            .prop_map(|(lo, v)| {
                TruncatedSeries::z(c(0.0), lo, v.into_iter().map(|(a, b)| Scalar::new(a, b)).collect())
            })
    }

    proptest! {
        #[test]
        fn inverse_is_identity(mut a in arb_series()) {
            a.coeffs[0] += c(3.0);
            let inv = a.invert().unwrap();
            let p = a.try_mul(&inv).unwrap();
            prop_assert_eq!(p.order_min, 0);
            prop_assert!((p.coeff(0).unwrap() - c(1.0)).norm() < 1e-12);
            for k in 1..=p.order_max() {
                prop_assert!(p.coeff(k).unwrap().norm() < 1e-10);
            }
        }

        #[test]
        fn leibniz(a in arb_series(), b in arb_series()) {
            let lhs = a.try_mul(&b).unwrap().derivative();
            let rhs = a.derivative().try_mul(&b).unwrap().try_add(&a.try_mul(&b.derivative()).unwrap()).unwrap();
            prop_assert!(lhs.approx_eq(&rhs, 1e-12));
            prop_assert!(rhs.order_max() <= lhs.order_max());
        }

        #[test]
        fn rescale_is_substitution(a in arb_series(), re in 0.5f64..2.0, im in -1.0f64..1.0, t in -0.3f64..0.3) {
            let k = Scalar::new(re, im);
            let v = Scalar::new(0.1 + t, 0.2);
            let r = a.rescale(k);
            prop_assert!((r.evaluate(v) - a.evaluate(k * v)).norm() < 1e-9 * (1.0 + a.evaluate(k * v).norm()));
        }
    }
}
