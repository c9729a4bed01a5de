//! Truncated q-expansions as a coefficient ring.
//!
//! A [`QSeries`] holds `sum_k c_k q^((offset + k) / level)` with a precision
//! bound: every exponent (in units of `1/level`) below `prec` is known.
//! Exact elements (constants, polynomials) carry no bound.

use crate::error::{Error, Result};
use crate::scalar::{Ring, Scalar, ABS_FLOOR};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Terms kept when an exact multi-term polynomial has to be inverted.
pub const DEFAULT_Q_TERMS: i64 = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct QSeries {
    pub level: u32,
    pub offset: i64,
    pub coeffs: Vec<Scalar>,
    /// Exclusive bound on known exponents; `None` means exact.
    pub prec: Option<i64>,
}

fn min_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl QSeries {
    pub fn constant(c: Scalar) -> Self {
        Self {
            level: 1,
            offset: 0,
            coeffs: vec![c],
            prec: None,
        }
    }

    /// Series with coefficients `coeffs[k]` at `q^k`, known for `k < prec`.
    pub fn from_coeffs(coeffs: Vec<Scalar>, prec: i64) -> Self {
        Self {
            level: 1,
            offset: 0,
            coeffs,
            prec: Some(prec),
        }
        .normalized()
    }

    /// Exponent (in units of `1/level`) of the last stored coefficient plus one.
    fn end(&self) -> i64 {
        self.offset + self.coeffs.len() as i64
    }

    fn normalized(mut self) -> Self {
        if let Some(p) = self.prec {
            let keep = (p - self.offset).clamp(0, self.coeffs.len() as i64) as usize;
            self.coeffs.truncate(keep);
        }
        while self.coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().position(|c| c.norm() != 0.0);
        match lead {
            Some(l) if l > 0 => {
                self.coeffs.drain(..l);
                self.offset += l as i64;
            }
            None => {
                self.coeffs.clear();
                self.offset = 0;
            }
            _ => {}
        }
        self
    }

    fn is_exact_constant(&self) -> bool {
        self.prec.is_none() && self.coeffs.len() <= 1 && self.offset == 0
    }

    fn common_level(&self, other: &Self) -> u32 {
        if self.level == other.level || other.is_exact_constant() {
            self.level
        } else if self.is_exact_constant() {
            other.level
        } else {
            panic!("q-series level mismatch: {} vs {}", self.level, other.level)
        }
    }

    /// Coefficient of `q^(e/level)`; an error past the precision bound.
    pub fn coeff(&self, e: i64) -> Result<Scalar> {
        if let Some(p) = self.prec {
            if e >= p {
                return Err(Error::window("q-series coefficient", e, p - 1));
            }
        }
        let i = e - self.offset;
        Ok(if i < 0 || i >= self.coeffs.len() as i64 {
            Scalar::new(0.0, 0.0)
        } else {
            self.coeffs[i as usize]
        })
    }

    /// Lowest exponent with a nonzero coefficient (`None` for zero).
    pub fn valuation(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.offset)
        }
    }

    /// Holomorphic at the cusp: no negative powers of q.
    pub fn is_cusp_holomorphic(&self) -> bool {
        self.valuation().is_none_or(|v| v >= 0)
    }

    /// Sums the series at `omega`, using `q^(1/level) = exp(2 pi i omega / level)`.
    pub fn eval(&self, omega: Scalar) -> Scalar {
        let ql = (Complex64::i() * 2.0 * PI * omega / self.level as f64).exp();
        let mut acc = Scalar::new(0.0, 0.0);
        let mut pw = ql.powi(self.offset as i32);
        for c in &self.coeffs {
            acc += c * pw;
            pw *= ql;
        }
        acc
    }

    /// Truncates to precision `prec`.
    pub fn with_prec(&self, prec: i64) -> Self {
        let mut out = self.clone();
        out.prec = min_prec(self.prec, Some(prec));
        out.normalized()
    }
}

impl Ring for QSeries {
    fn zero() -> Self {
        Self {
            level: 1,
            offset: 0,
            coeffs: vec![],
            prec: None,
        }
    }
    fn one() -> Self {
        Self::constant(Scalar::new(1.0, 0.0))
    }
    fn from_scalar(c: Scalar) -> Self {
        Self::constant(c).normalized()
    }
    fn plus(&self, other: &Self) -> Self {
        let level = self.common_level(other);
        let prec = min_prec(self.prec, other.prec);
        let lo = self.offset.min(other.offset);
        let hi = self.end().max(other.end());
        let coeffs = (lo..hi)
            .map(|e| {
                let a = if e >= self.offset && e < self.end() {
                    self.coeffs[(e - self.offset) as usize]
                } else {
                    Scalar::new(0.0, 0.0)
                };
                let b = if e >= other.offset && e < other.end() {
                    other.coeffs[(e - other.offset) as usize]
                } else {
                    Scalar::new(0.0, 0.0)
                };
                a + b
            })
            .collect();
        Self {
            level,
            offset: lo,
            coeffs,
            prec,
        }
        .normalized()
    }
    fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negated())
    }
    fn times(&self, other: &Self) -> Self {
        let level = self.common_level(other);
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            // An exactly-zero factor still only knows the other factor's terms
            // up to its precision shifted by the zero's (absent) valuation.
            let prec = match (self.coeffs.is_empty(), other.coeffs.is_empty()) {
                (true, true) => min_prec(self.prec, other.prec),
                (true, false) => self.prec.map(|p| p + other.offset),
                _ => other.prec.map(|p| p + self.offset),
            };
            return Self {
                level,
                offset: 0,
                coeffs: vec![],
                prec,
            };
        }
        let prec = min_prec(
            self.prec.map(|p| p + other.offset),
            other.prec.map(|p| p + self.offset),
        );
        let offset = self.offset + other.offset;
        let full = self.coeffs.len() + other.coeffs.len() - 1;
        let len = match prec {
            Some(p) => ((p - offset).max(0) as usize).min(full),
            None => full,
        };
        let mut coeffs = vec![Scalar::new(0.0, 0.0); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] += a * b;
            }
        }
        Self {
            level,
            offset,
            coeffs,
            prec,
        }
        .normalized()
    }
    fn negated(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c = -*c);
        out
    }
    fn scaled(&self, c: Scalar) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|x| *x *= c);
        out.normalized()
    }
    fn magnitude(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
    fn try_inv(&self) -> Option<Self> {
        let lead = *self.coeffs.first()?;
        if lead.norm() == 0.0 {
            return None;
        }
        let v = self.offset;
        let rel_prec = match self.prec {
            Some(p) => p - v,
            None if self.coeffs.len() == 1 => {
                return Some(Self {
                    level: self.level,
                    offset: -v,
                    coeffs: vec![lead.inv()],
                    prec: None,
                })
            }
            None => DEFAULT_Q_TERMS,
        };
        let n = rel_prec.max(0) as usize;
        let a = &self.coeffs;
        let inv0 = lead.inv();
        let mut b = Vec::with_capacity(n);
        for k in 0..n {
            if k == 0 {
                b.push(inv0);
                continue;
            }
            let mut s = Scalar::new(0.0, 0.0);
            for i in 1..=k.min(a.len() - 1) {
                s += a[i] * b[k - i];
            }
            b.push(-s * inv0);
        }
        Some(
            Self {
                level: self.level,
                offset: -v,
                coeffs: b,
                prec: Some(-v + rel_prec),
            }
            .normalized(),
        )
    }
    fn abs_value(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c = Scalar::new(c.norm(), 0.0));
        out
    }
    fn is_negligible(&self, scale: f64, rel_tol: f64) -> bool {
        self.magnitude() <= rel_tol * scale.max(ABS_FLOOR)
    }
}

impl crate::series::ExpRing for QSeries {
    /// Only defined for constants; used by gauge transforms with scalar data.
    fn exp_ring(&self) -> Self {
        assert!(
            self.coeffs.len() <= 1 && self.offset == 0,
            "exp of a non-constant q-series"
        );
        Self::constant(self.coeffs.first().copied().unwrap_or_default().exp())
    }
}

/// A q-expansion tagged with its modular weight.
#[derive(Debug, Clone, PartialEq)]
pub struct QExpansion {
    pub weight: i32,
    pub series: QSeries,
}

#[derive(Serialize, Deserialize)]
struct QExpansionJson {
    level_divisor: u32,
    weight: i32,
    #[serde(default)]
    offset: i64,
    #[serde(default)]
    prec: Option<i64>,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for QExpansion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QExpansionJson {
            level_divisor: self.series.level,
            weight: self.weight,
            offset: self.series.offset,
            prec: self.series.prec,
            coeffs: self.series.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QExpansion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = QExpansionJson::deserialize(d)?;
        Ok(Self {
            weight: j.weight,
            series: QSeries {
                level: j.level_divisor.max(1),
                offset: j.offset,
                coeffs: j.coeffs.into_iter().map(|[a, b]| Scalar::new(a, b)).collect(),
                prec: j.prec,
            }
            .normalized(),
        })
    }
}

/// Divisor power sum `sigma_k(n)`.
pub fn sigma(k: u32, n: u64) -> f64 {
    (1..=n)
        .filter(|d| n.is_multiple_of(*d))
        .map(|d| (d as f64).powi(k as i32))
        .sum()
}

/// `E_2 = 1 - 24 sum sigma_1(n) q^n` with `terms` coefficients.
pub fn e2_q(terms: usize) -> QSeries {
    eisenstein_q(-24.0, 1, terms)
}

/// `E_4 = 1 + 240 sum sigma_3(n) q^n`.
pub fn e4_q(terms: usize) -> QSeries {
    eisenstein_q(240.0, 3, terms)
}

/// `E_6 = 1 - 504 sum sigma_5(n) q^n`.
pub fn e6_q(terms: usize) -> QSeries {
    eisenstein_q(-504.0, 5, terms)
}

fn eisenstein_q(c: f64, k: u32, terms: usize) -> QSeries {
    let coeffs = (0..terms)
        .map(|n| {
            if n == 0 {
                Scalar::new(1.0, 0.0)
            } else {
                Scalar::new(c * sigma(k, n as u64), 0.0)
            }
        })
        .collect();
    QSeries::from_coeffs(coeffs, terms as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(x: f64) -> Scalar {
        Scalar::new(x, 0.0)
    }

    #[test]
    fn precision_tracks_products() {
        let a = QSeries::from_coeffs(vec![c(1.0), c(2.0), c(3.0)], 3);
        let mut b = QSeries::from_coeffs(vec![c(0.0), c(1.0), c(1.0), c(5.0)], 4);
        b = b.with_prec(4);
        let p = a.times(&b);
        assert_eq!(p.offset, 1);
        assert_eq!(p.prec, Some(4));
        assert!(p.coeff(4).is_err());
        assert_eq!(p.coeff(3).unwrap(), c(10.0));
    }

    #[test]
    fn e4_e6_known_terms() {
        let e4 = e4_q(4);
        assert_eq!(e4.coeffs, vec![c(1.0), c(240.0), c(2160.0), c(6720.0)]);
        let e6 = e6_q(3);
        assert_eq!(e6.coeffs, vec![c(1.0), c(-504.0), c(-16632.0)]);
    }

    #[test]
    fn discriminant_starts_at_q() {
        // E4^3 - E6^2 = 1728 q - 41472 q^2 + ...
        let n = 6;
        let e4 = e4_q(n);
        let e6 = e6_q(n);
        let d = e4.times(&e4).times(&e4).minus(&e6.times(&e6));
        assert_eq!(d.valuation(), Some(1));
        assert!((d.coeff(1).unwrap() - c(1728.0)).norm() < 1e-9);
        assert!((d.coeff(2).unwrap() - c(-41472.0)).norm() < 1e-6);
        assert!(d.is_cusp_holomorphic());
    }

    #[test]
    fn inverse_of_q_has_negative_power() {
        let q = QSeries::from_coeffs(vec![c(0.0), c(1.0), c(1.0)], 8);
        let inv = q.try_inv().unwrap();
        assert_eq!(inv.valuation(), Some(-1));
        assert!(!inv.is_cusp_holomorphic());
        let one = inv.times(&q);
        assert!((one.coeff(0).unwrap() - c(1.0)).norm() < 1e-14);
        for e in 1..one.prec.unwrap() {
            assert!(one.coeff(e).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn json_roundtrip() {
        let e = QExpansion {
            weight: 4,
            series: e4_q(5),
        };
        let s = serde_json::to_string(&e).unwrap();
        assert!(s.contains("level_divisor"));
        let back: QExpansion = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
    }

    proptest! {
        #[test]
        fn evaluation_is_a_ring_map(
            a in prop::collection::vec(-3.0f64..3.0, 1..8),
            b in prop::collection::vec(-3.0f64..3.0, 1..8),
        ) {
            let pa = QSeries::from_coeffs(a.iter().map(|&x| c(x)).collect(), 30);
            let pb = QSeries::from_coeffs(b.iter().map(|&x| c(x)).collect(), 30);
            let omega = Scalar::new(0.1, 1.3);
            let lhs = pa.times(&pb).eval(omega);
            let rhs = pa.eval(omega) * pb.eval(omega);
            prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
            let lhs = pa.plus(&pb).eval(omega);
            prop_assert!((lhs - pa.eval(omega) - pb.eval(omega)).norm() < 1e-12 * (1.0 + lhs.norm()));
        }
    }
}
