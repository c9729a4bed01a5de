//! Ordinary differential operators with truncated-series coefficients.
//!
//! `coeffs[i]` multiplies `d^(order - i)`, so `coeffs[0]` is the leading
//! coefficient. All coefficients are expanded in `z` around a common center.

use crate::elliptic::LatticeParam;
use crate::error::{Error, Result};
use crate::scalar::{binom, Ring, Scalar};
use crate::series::{ExpRing, TruncatedSeries, Variable};
use std::fmt;
use std::sync::Arc;

/// Where the coefficients of an operator are singular.
#[derive(Debug, Clone, PartialEq)]
pub enum PoleSet {
    None,
    /// All points of `Z + Z*omega`.
    Lattice(LatticeParam),
    Points(Vec<Scalar>),
}

impl PoleSet {
    /// Distance from `z` to the nearest singular point.
    pub fn distance(&self, z: Scalar) -> f64 {
        match self {
            PoleSet::None => f64::INFINITY,
            PoleSet::Lattice(l) => l.distance_to_lattice(z),
            PoleSet::Points(p) => p.iter().map(|x| (x - z).norm()).fold(f64::INFINITY, f64::min),
        }
    }
}

/// Pointwise values of operator coefficients, used for analytic continuation
/// far from the expansion center.
pub trait PointwiseCoefficients: Send + Sync {
    /// Coefficients at `z`, leading first.
    fn eval(&self, z: Scalar) -> Result<Vec<Scalar>>;
}

impl<F> PointwiseCoefficients for F
where
    F: Fn(Scalar) -> Result<Vec<Scalar>> + Send + Sync,
{
    fn eval(&self, z: Scalar) -> Result<Vec<Scalar>> {
        self(z)
    }
}

#[derive(Clone)]
pub struct DifferentialOperator<R: Ring = Scalar> {
    pub order: usize,
    pub coeffs: Vec<TruncatedSeries<R>>,
    pub weight: Option<i32>,
    pub pole_set: PoleSet,
    pub pointwise: Option<Arc<dyn PointwiseCoefficients>>,
}

impl<R: Ring> fmt::Debug for DifferentialOperator<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DifferentialOperator")
            .field("order", &self.order)
            .field("coeffs", &self.coeffs)
            .field("weight", &self.weight)
            .field("pole_set", &self.pole_set)
            .field("pointwise", &self.pointwise.is_some())
            .finish()
    }
}

/// A formal series `sum_s eta_s lambda^-s` whose coefficients are z-series;
/// index `s` runs over `order_min ..= order_max`.
#[derive(Debug, Clone)]
pub struct LambdaFamily<R: Ring = Scalar> {
    pub order_min: i64,
    pub terms: Vec<TruncatedSeries<R>>,
}

impl<R: Ring> LambdaFamily<R> {
    pub fn order_max(&self) -> i64 {
        self.order_min + self.terms.len() as i64 - 1
    }

    /// Term at `lambda^-s`; `None` above the window, zero below it.
    pub fn term(&self, s: i64) -> Option<TruncatedSeries<R>> {
        if s > self.order_max() {
            return None;
        }
        if s < self.order_min {
            return Some(self.terms[0].zero_like());
        }
        Some(self.terms[(s - self.order_min) as usize].clone())
    }
}

impl<R: Ring> DifferentialOperator<R> {
    pub fn new(coeffs: Vec<TruncatedSeries<R>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Usage("operator needs at least one coefficient".into()));
        }
        let center = coeffs[0].center;
        for c in &coeffs {
            if c.variable != Variable::Z {
                return Err(Error::Usage("operator coefficients must be z-series".into()));
            }
            if (c.center - center).norm() > 1e-12 * (1.0 + center.norm()) {
                return Err(Error::Usage("operator coefficients have different centers".into()));
            }
        }
        Ok(Self {
            order: coeffs.len() - 1,
            coeffs,
            weight: None,
            pole_set: PoleSet::None,
            pointwise: None,
        })
    }

    pub fn with_weight(mut self, w: i32) -> Self {
        self.weight = Some(w);
        self
    }

    pub fn with_poles(mut self, p: PoleSet) -> Self {
        self.pole_set = p;
        self
    }

    pub fn with_pointwise(mut self, p: Arc<dyn PointwiseCoefficients>) -> Self {
        self.pointwise = Some(p);
        self
    }

    /// Multiplication by a series, as an order-0 operator.
    pub fn multiplication(f: TruncatedSeries<R>) -> Self {
        Self::new(vec![f]).expect("one coefficient")
    }

    /// `d^k` with exact coefficients known through `order_max`.
    pub fn derivation_power(k: usize, center: Scalar, order_max: i64) -> Self {
        let one = TruncatedSeries::constant(Variable::Z, center, R::one(), order_max);
        let mut coeffs = vec![one.zero_like(); k + 1];
        coeffs[0] = one;
        Self::new(coeffs).expect("nonempty")
    }

    pub fn center(&self) -> Scalar {
        self.coeffs[0].center
    }

    /// Coefficient of `d^k`.
    pub fn coeff_of(&self, k: usize) -> &TruncatedSeries<R> {
        &self.coeffs[self.order - k]
    }

    /// Smallest `order_max` among the coefficients.
    pub fn window(&self) -> i64 {
        self.coeffs.iter().map(|c| c.order_max()).min().unwrap_or(0)
    }

    /// Largest coefficient magnitude.
    pub fn magnitude(&self) -> f64 {
        self.coeffs.iter().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    /// True if every coefficient is below `rel_tol * scale`.
    pub fn is_zero(&self, rel_tol: f64, scale: f64) -> bool {
        self.coeffs.iter().all(|c| c.coeffs.iter().all(|x| x.is_negligible(scale, rel_tol)))
    }

    /// Leading coefficient is the constant 1 and the next one vanishes.
    pub fn is_normal_form(&self, rel_tol: f64) -> bool {
        let lead = &self.coeffs[0];
        let scale = self.magnitude().max(1.0);
        let lead_ok = lead.coeffs.iter().enumerate().all(|(i, c)| {
            let k = lead.order_min + i as i64;
            let target = if k == 0 { R::one() } else { R::zero() };
            c.minus(&target).is_negligible(1.0, rel_tol)
        }) && lead.order_min <= 0;
        let sub_ok = self.order == 0
            || self.coeffs[1].coeffs.iter().all(|c| c.is_negligible(scale, rel_tol));
        lead_ok && sub_ok
    }

    fn zero_series(&self, order_max: i64) -> TruncatedSeries<R> {
        TruncatedSeries::constant(Variable::Z, self.center(), R::zero(), order_max)
    }

    fn from_by_derivative(
        center: Scalar,
        by_k: Vec<Option<TruncatedSeries<R>>>,
        fallback_window: i64,
    ) -> Result<Self> {
        let n = by_k.len().max(1) - 1;
        let coeffs: Vec<TruncatedSeries<R>> = (0..=n)
            .rev()
            .map(|k| {
                by_k[k].clone().unwrap_or_else(|| {
                    TruncatedSeries::constant(Variable::Z, center, R::zero(), fallback_window)
                })
            })
            .collect();
        for (i, c) in coeffs.iter().enumerate() {
            if c.order_max() < c.order_min.min(0) {
                return Err(Error::window(
                    format!("coefficient of d^{}", n - i),
                    c.order_min.min(0),
                    c.order_max(),
                ));
            }
        }
        Self::new(coeffs)
    }

    /// `self o other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let n = self.order + other.order;
        let mut by_k: Vec<Option<TruncatedSeries<R>>> = vec![None; n + 1];
        // derivatives of other's coefficients, other_d[m][r] = (b_m)^(r)
        let other_d: Vec<Vec<TruncatedSeries<R>>> = (0..=other.order)
            .map(|m| {
                let mut v = vec![other.coeff_of(m).clone()];
                for r in 1..=self.order {
                    let next = v[r - 1].derivative();
                    v.push(next);
                }
                v
            })
            .collect();
        for k in 0..=self.order {
            let a = self.coeff_of(k);
            for m in 0..=other.order {
                for r in 0..=k {
                    let b = &other_d[m][r];
                    let term = a.try_mul(b)?.scale(Scalar::new(binom(k, r), 0.0));
                    let slot = k - r + m;
                    by_k[slot] = Some(match by_k[slot].take() {
                        None => term,
                        Some(acc) => acc.try_add(&term)?,
                    });
                }
            }
        }
        let fallback = self.window().min(other.window());
        let mut out = Self::from_by_derivative(self.center(), by_k, fallback)?;
        out.weight = match (self.weight, other.weight) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        out.pole_set = self.pole_set.clone();
        Ok(out)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let n = self.order.max(other.order);
        let mut by_k: Vec<Option<TruncatedSeries<R>>> = vec![None; n + 1];
        for k in 0..=n {
            let a = (k <= self.order).then(|| self.coeff_of(k).clone());
            let b = (k <= other.order).then(|| other.coeff_of(k).clone());
            by_k[k] = match (a, b) {
                (Some(a), Some(b)) => Some(a.try_add(&b)?),
                (a, b) => a.or(b),
            };
        }
        let mut out = Self::from_by_derivative(self.center(), by_k, self.window().min(other.window()))?;
        out.weight = if self.weight == other.weight { self.weight } else { None };
        out.pole_set = self.pole_set.clone();
        Ok(out)
    }

    pub fn scale(&self, c: &R) -> Self {
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(|s| s.scale_ring(c)).collect();
        out.pointwise = None;
        out
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(&R::one().negated()))
    }

    /// `[self, other] = self o other - other o self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.compose(other)?.try_sub(&other.compose(self)?)
    }

    /// Integer power by repeated composition.
    pub fn power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Ok(Self::derivation_power(0, self.center(), self.window()));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.compose(self)?;
        }
        Ok(acc)
    }

    /// `e^(-lambda (z-w)) P (family * e^(lambda (z-w)))`, as a family in
    /// `lambda^-1`. Output index `t` is kept only when every term feeding it
    /// is known, so the result covers `order_min - order ..= order_max - order`.
    pub fn apply_symbol(&self, fam: &LambdaFamily<R>) -> Result<LambdaFamily<R>> {
        let lo = fam.order_min - self.order as i64;
        let hi = fam.order_max() - self.order as i64;
        let mut terms = Vec::new();
        for t in lo..=hi {
            let mut acc: Option<TruncatedSeries<R>> = None;
            for k in 0..=self.order {
                let c = self.coeff_of(k);
                for alpha in 0..=k {
                    let s = t + alpha as i64;
                    if s < fam.order_min {
                        continue;
                    }
                    let eta = fam
                        .term(s)
                        .ok_or_else(|| Error::window("lambda family", s, fam.order_max()))?;
                    let term = c
                        .try_mul(&eta.nth_derivative(k - alpha))?
                        .scale(Scalar::new(binom(k, alpha), 0.0));
                    acc = Some(match acc {
                        None => term,
                        Some(a) => a.try_add(&term)?,
                    });
                }
            }
            terms.push(acc.unwrap_or_else(|| self.zero_series(self.window())));
        }
        Ok(LambdaFamily { order_min: lo, terms })
    }

    /// Operator with coefficientwise absolute values.
    pub fn abs_operator(&self) -> Self {
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(|c| c.abs_series()).collect();
        out.pointwise = None;
        out
    }

    /// Re-centers a coefficient list on a different variable label (no-op for z).
    pub fn map_ring<S: Ring>(&self, f: impl Fn(&R) -> S + Copy) -> DifferentialOperator<S> {
        DifferentialOperator {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c.map(f)).collect(),
            weight: self.weight,
            pole_set: self.pole_set.clone(),
            pointwise: None,
        }
    }
}

impl<R: ExpRing> DifferentialOperator<R> {
    /// Removes the subleading coefficient by conjugation: returns `(P, v)`
    /// with `P = v o P0 o v^-1`, `v = exp(int a_1 / N)` and `v(center) = 1`.
    pub fn gauge_normalize(&self) -> Result<(Self, TruncatedSeries<R>)> {
        if self.order == 0 {
            return Err(Error::Usage("cannot normalize an order-0 operator".into()));
        }
        let lead = &self.coeffs[0];
        let unit = lead.coeffs.iter().enumerate().all(|(i, c)| {
            let k = lead.order_min + i as i64;
            let target = if k == 0 { R::one() } else { R::zero() };
            c.minus(&target).is_negligible(1.0, 1e-14)
        });
        if !unit {
            return Err(Error::NotNormalForm("leading coefficient must be 1".into()));
        }
        let a1 = &self.coeffs[1];
        let phase = a1
            .scale(Scalar::new(1.0 / self.order as f64, 0.0))
            .integrate_from_center()?;
        let v = phase.exp_series()?;
        let vinv = phase.neg().exp_series()?;
        let p = Self::multiplication(v.clone())
            .compose(self)?
            .compose(&Self::multiplication(vinv))?;
        let mut p = p;
        p.weight = self.weight;
        p.pole_set = self.pole_set.clone();
        Ok((p, v))
    }
}

impl DifferentialOperator<Scalar> {
    /// Coefficients at `z`: the pointwise evaluator if one is attached,
    /// otherwise the series.
    pub fn eval_coeffs(&self, z: Scalar) -> Result<Vec<Scalar>> {
        match &self.pointwise {
            Some(p) => p.eval(z),
            None => Ok(self.coeffs.iter().map(|c| c.evaluate(z)).collect()),
        }
    }
}

/// `sum f_jk P^j Q^k` for commuting `P`, `Q`.
pub fn eval_poly<R: Ring>(
    terms: &[(usize, usize, R)],
    p: &DifferentialOperator<R>,
    q: &DifferentialOperator<R>,
) -> Result<DifferentialOperator<R>> {
    let jmax = terms.iter().map(|t| t.0).max().unwrap_or(0);
    let kmax = terms.iter().map(|t| t.1).max().unwrap_or(0);
    let window = p.window().min(q.window());
    let mut ppow = vec![DifferentialOperator::derivation_power(0, p.center(), window)];
    for j in 1..=jmax {
        ppow.push(ppow[j - 1].compose(p)?);
    }
    let mut qpow = vec![DifferentialOperator::derivation_power(0, p.center(), window)];
    for k in 1..=kmax {
        qpow.push(qpow[k - 1].compose(q)?);
    }
    let mut acc: Option<DifferentialOperator<R>> = None;
    for (j, k, f) in terms {
        if f.magnitude() == 0.0 {
            continue;
        }
        let term = ppow[*j].compose(&qpow[*k])?.scale(f);
        acc = Some(match acc {
            None => term,
            Some(a) => a.try_add(&term)?,
        });
    }
    acc.ok_or_else(|| Error::Usage("empty polynomial".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(x: f64) -> Scalar {
        Scalar::new(x, 0.0)
    }

    fn poly(center: f64, coeffs: &[f64], order_max: i64) -> TruncatedSeries {
        let mut v: Vec<Scalar> = coeffs.iter().map(|&x| c(x)).collect();
        v.resize((order_max + 1) as usize, c(0.0));
        TruncatedSeries::z(c(center), 0, v)
    }

    #[test]
    fn gauge_constant_drift() {
        // d^2 + 2c d  ->  d^2 - c^2
        let cc = 0.7;
        let p0 = DifferentialOperator::new(vec![poly(0.0, &[1.0], 12), poly(0.0, &[2.0 * cc], 12), poly(0.0, &[0.0], 12)])
            .unwrap();
        let (p, v) = p0.gauge_normalize().unwrap();
        assert!((v.coeff(1).unwrap() - c(cc)).norm() < 1e-14);
        assert!(p.coeffs[1].magnitude() < 1e-13);
        let a2 = &p.coeffs[2];
        assert!((a2.coeff(0).unwrap() - c(-cc * cc)).norm() < 1e-13);
        for k in 1..=a2.order_max() {
            assert!(a2.coeff(k).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn gauge_linear_drift() {
        // d^2 + 2z d  ->  d^2 - (z^2 + 1)
        let p0 = DifferentialOperator::new(vec![poly(0.0, &[1.0], 14), poly(0.0, &[0.0, 2.0], 14), poly(0.0, &[0.0], 14)])
            .unwrap();
        let (p, _) = p0.gauge_normalize().unwrap();
        let expect = poly(0.0, &[-1.0, 0.0, -1.0], 14);
        assert!(p.coeffs[2].approx_eq(&expect, 1e-12));
        assert!(p.is_normal_form(1e-12));
        let bad = DifferentialOperator::new(vec![poly(0.0, &[2.0], 5), poly(0.0, &[0.0], 5)]).unwrap();
        assert!(matches!(bad.gauge_normalize(), Err(Error::NotNormalForm(_))));
    }

    #[test]
    fn derivation_commutes_with_constants() {
        let d = DifferentialOperator::<Scalar>::derivation_power(1, c(0.0), 10);
        let m = DifferentialOperator::multiplication(poly(0.0, &[3.0], 10));
        assert!(d.commutator(&m).unwrap().is_zero(1e-14, 1.0));
        let x = DifferentialOperator::multiplication(poly(0.0, &[0.0, 1.0], 10));
        // [d, z] = 1
        let br = d.commutator(&x).unwrap();
        assert_eq!(br.order, 1);
        assert!(br.coeffs[0].magnitude() < 1e-15);
        assert!((br.coeffs[1].coeff(0).unwrap() - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn window_exhaustion_is_reported() {
        let p = DifferentialOperator::new(vec![poly(0.0, &[1.0], 1), poly(0.0, &[0.0], 1), poly(0.0, &[1.0, 1.0], 1)])
            .unwrap();
        let r = p.power(3);
        assert!(matches!(r, Err(Error::WindowExhausted { .. })));
    }

    fn arb_op() -> impl Strategy<Value = DifferentialOperator> {
        (1usize..3, prop::collection::vec(-1.0f64..1.0, 12)).prop_map(|(n, v)| {
            let mut coeffs = vec![poly(0.0, &[1.0], 10)];
            for i in 0..n {
                coeffs.push(poly(0.0, &v[i * 4..i * 4 + 4], 10));
            }
            DifferentialOperator::new(coeffs).unwrap()
        })
    }

    proptest! {
        #[test]
        fn composition_is_associative(a in arb_op(), b in arb_op(), c2 in arb_op()) {
            let l = a.compose(&b).unwrap().compose(&c2).unwrap();
            let r = a.compose(&b.compose(&c2).unwrap()).unwrap();
            let d = l.try_sub(&r).unwrap();
            prop_assert!(d.is_zero(1e-11, l.magnitude().max(1.0)));
        }

        #[test]
        fn symbol_matches_composition(a in arb_op(), b in arb_op()) {
            // applying a o b to the family {1} equals applying a to (b applied to {1})
            let one = LambdaFamily { order_min: 0, terms: vec![poly(0.0, &[1.0], 10), poly(0.0, &[0.0], 10), poly(0.0, &[0.0], 10), poly(0.0, &[0.0], 10), poly(0.0, &[0.0], 10), poly(0.0, &[0.0], 10)] };
            let ab = a.compose(&b).unwrap().apply_symbol(&one).unwrap();
            let step = a.apply_symbol(&b.apply_symbol(&one).unwrap()).unwrap();
            for t in ab.order_min..=ab.order_max().min(step.order_max()) {
                let x = ab.term(t).unwrap();
                let y = step.term(t).unwrap();
                let m = x.magnitude().max(1.0);
                let lo = x.order_min.min(y.order_min);
                let hi = x.order_max().min(y.order_max());
                for k in lo..=hi {
                    prop_assert!((x.coeff_or_zero(k) - y.coeff_or_zero(k)).norm() < 1e-11 * m);
                }
            }
        }
    }
}
