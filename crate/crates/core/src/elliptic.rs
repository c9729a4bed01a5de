//! Weierstrass functions and Eisenstein invariants of the lattice `Z + Z*omega`.
//!
//! Pointwise values come from q-series after reducing the argument into the
//! fundamental cell; series expansions come from the differential equation
//! `wp'' = 6 wp^2 - g2/2`, so they work over any coefficient ring.

use crate::error::{Error, Result};
use crate::qseries::{e2_q, e4_q, e6_q, QExpansion, QSeries};
use crate::scalar::{Ring, Scalar};
use crate::series::TruncatedSeries;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Upper half-plane parameter of the lattice `Z + Z*omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParam {
    pub omega: Scalar,
}

impl LatticeParam {
    pub fn new(omega: Scalar) -> Result<Self> {
        if !omega.is_finite() || omega.im <= 0.0 {
            return Err(Error::Usage(format!(
                "lattice parameter {omega} is not in the upper half-plane"
            )));
        }
        Ok(Self { omega })
    }

    /// `exp(2 pi i omega)`.
    pub fn nome(&self) -> Scalar {
        (2.0 * PI * I * self.omega).exp()
    }

    /// Reduces `z` into the cell around 0: returns `(z', n1, n2)` with
    /// `z = z' + n1 + n2*omega`.
    pub fn reduce(&self, z: Scalar) -> (Scalar, i64, i64) {
        let n2 = (z.im / self.omega.im).round();
        let z1 = z - n2 * self.omega;
        let n1 = z1.re.round();
        (z1 - n1, n1 as i64, n2 as i64)
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn distance_to_lattice(&self, z: Scalar) -> f64 {
        let (zr, _, _) = self.reduce(z);
        let mut best = f64::INFINITY;
        for a in -1..=1 {
            for b in -1..=1 {
                let d = (zr - Scalar::new(a as f64, 0.0) - (b as f64) * self.omega).norm();
                best = best.min(d);
            }
        }
        best
    }

    /// Length of the shortest nonzero lattice vector.
    pub fn shortest_vector(&self) -> f64 {
        let mut best = f64::INFINITY;
        for a in -4i32..=4 {
            for b in -4i32..=4 {
                if a != 0 || b != 0 {
                    best = best.min((Scalar::new(a as f64, 0.0) + (b as f64) * self.omega).norm());
                }
            }
        }
        best
    }
}

/// An element of SL(2, Z) acting on the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModularElement {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl ModularElement {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a * d - b * c != 1 {
            return Err(Error::Usage(format!(
                "[[{a},{b}],[{c},{d}]] does not have determinant 1"
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// `omega -> -1/omega`.
    pub const S: Self = Self {
        a: 0,
        b: -1,
        c: 1,
        d: 0,
    };
    /// `omega -> omega + 1`.
    pub const T: Self = Self {
        a: 1,
        b: 1,
        c: 0,
        d: 1,
    };

    pub fn act(&self, omega: Scalar) -> Scalar {
        (self.a as f64 * omega + self.b as f64) / (self.c as f64 * omega + self.d as f64)
    }

    /// Automorphy factor `c*omega + d`.
    pub fn jay(&self, omega: Scalar) -> Scalar {
        self.c as f64 * omega + self.d as f64
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "S" | "s" => Ok(Self::S),
            "T" | "t" => Ok(Self::T),
            other => {
                let v: Vec<i64> = other
                    .trim_matches(|c| c == '[' || c == ']')
                    .split(',')
                    .map(|x| x.trim().parse::<i64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Usage(format!("cannot parse modular element {name:?}")))?;
                if v.len() != 4 {
                    return Err(Error::Usage(format!("modular element needs 4 entries: {name:?}")));
                }
                Self::new(v[0], v[1], v[2], v[3])
            }
        }
    }
}

/// Invariants of one lattice, computed once and reused. `g2` and `g3` are
/// summed from their q-expansions; [`eisenstein`] gives the lattice sums.
#[derive(Debug, Clone, Copy)]
pub struct EllipticConstants {
    pub lattice: LatticeParam,
    pub g2: Scalar,
    pub g3: Scalar,
    /// `zeta(1/2)`.
    pub eta1: Scalar,
}

impl EllipticConstants {
    pub fn new(omega: Scalar) -> Result<Self> {
        let lattice = LatticeParam::new(omega)?;
        let terms = q_terms_for(omega, 7);
        let g2 = g2_q(terms).eval(omega);
        let g3 = g3_q(terms).eval(omega);
        let mut out = Self {
            lattice,
            g2,
            g3,
            eta1: Scalar::new(0.0, 0.0),
        };
        out.eta1 = eta1(&out)?;
        Ok(out)
    }

    pub fn omega(&self) -> Scalar {
        self.lattice.omega
    }

    /// `wp(z)`.
    pub fn wp(&self, z: Scalar) -> Result<Scalar> {
        wp_eval(&self.lattice, z)
    }

    pub fn wp_prime(&self, z: Scalar) -> Result<Scalar> {
        wp_prime_eval(&self.lattice, z)
    }

    pub fn zeta(&self, z: Scalar) -> Result<Scalar> {
        zeta_eval(&self.lattice, z)
    }

    /// Taylor expansion of `wp` around an ordinary point, or the Laurent
    /// expansion when `center` is a lattice point.
    pub fn wp_series(&self, center: Scalar, order_max: i64) -> Result<TruncatedSeries> {
        if self.lattice.distance_to_lattice(center) < 1e-12 {
            let mut s = wp_laurent(&self.g2, &self.g3, order_max);
            s.center = center;
            return Ok(s);
        }
        let p0 = self.wp(center)?;
        let p1 = self.wp_prime(center)?;
        Ok(wp_taylor(&self.g2, &p0, &p1, center, order_max))
    }

    /// Taylor (or Laurent) expansion of `zeta` around `center`.
    pub fn zeta_series(&self, center: Scalar, order_max: i64) -> Result<TruncatedSeries> {
        if self.lattice.distance_to_lattice(center) < 1e-12 {
            let mut s = zeta_laurent(&self.g2, &self.g3, order_max);
            s.center = center;
            return Ok(s);
        }
        let wp = self.wp_series(center, order_max - 1)?;
        let mut z = wp.neg().integrate_from_center()?.with_order_min(0);
        z.coeffs[0] = self.zeta(center)?;
        Ok(z)
    }
}

/// An Eisenstein invariant as a number and as a q-expansion.
#[derive(Debug, Clone)]
pub struct EisensteinValue {
    pub value: Scalar,
    pub expansion: QExpansion,
    /// Relative disagreement between the lattice sum and the q-expansion.
    pub agreement: f64,
}

fn lattice_power_sum(omega: Scalar, k: i32, r: i64) -> (Scalar, f64) {
    let mut s = Scalar::new(0.0, 0.0);
    let mut abs = 0.0;
    for n1 in -r..=r {
        for n2 in -r..=r {
            if n1 == 0 && n2 == 0 {
                continue;
            }
            let w = (n1 as f64 + n2 as f64 * omega).inv();
            let t = w.powi(k);
            s += t;
            abs += t.norm();
        }
    }
    (s, abs)
}

/// Number of q-terms needed so that the dropped tail of a weight-`k`
/// Eisenstein series is below double precision at `omega`.
pub fn q_terms_for(omega: Scalar, weight: i32) -> usize {
    let decay = 2.0 * PI * omega.im;
    let mut n = 1usize;
    while n < 4000 {
        let tail = (n as f64).powi(weight) * (-decay * n as f64).exp();
        if tail < 1e-20 {
            break;
        }
        n += 1;
    }
    n + 1
}

/// `g2 = 60 sum' (n1 + n2 omega)^-4` (weight 4) or `g3 = 140 sum' (...)^-6`
/// (weight 6), by Richardson-accelerated lattice summation, cross-checked
/// against the q-expansion.
pub fn eisenstein(omega: Scalar, weight: i32) -> Result<EisensteinValue> {
    let lattice = LatticeParam::new(omega)?;
    let (factor, pref, qs) = match weight {
        4 => (60.0, 4.0 * PI.powi(4) / 3.0, e4_q as fn(usize) -> QSeries),
        6 => (140.0, 8.0 * PI.powi(6) / 27.0, e6_q as fn(usize) -> QSeries),
        _ => return Err(Error::Usage(format!("Eisenstein weight must be 4 or 6, got {weight}"))),
    };
    let r = 100;
    let (s1, _) = lattice_power_sum(lattice.omega, weight, r);
    let (s2, _) = lattice_power_sum(lattice.omega, weight, 2 * r);
    let (s4, abs) = lattice_power_sum(lattice.omega, weight, 4 * r);
    let p1 = 2f64.powi(weight - 2);
    let p2 = 2f64.powi(weight - 1);
    let r1 = (p1 * s2 - s1) / (p1 - 1.0);
    let r2 = (p1 * s4 - s2) / (p1 - 1.0);
    let value = factor * (p2 * r2 - r1) / (p2 - 1.0);

    let terms = q_terms_for(lattice.omega, weight + 1);
    let series = qs(terms).scaled(Scalar::new(pref, 0.0));
    let from_q = series.eval(lattice.omega);
    let scale = factor * abs;
    let agreement = (value - from_q).norm() / scale;
    if agreement > 1e-8 {
        return Err(Error::NonConvergent(format!(
            "lattice sum and q-expansion of weight {weight} disagree by {agreement:e}"
        )));
    }
    Ok(EisensteinValue {
        value,
        expansion: QExpansion { weight, series },
        agreement,
    })
}

/// Laurent expansion `z^-2 + (g2/20) z^2 + (g3/28) z^4 + ...` of `wp` at 0,
/// through `z^order_max`.
pub fn wp_laurent<R: Ring>(g2: &R, g3: &R, order_max: i64) -> TruncatedSeries<R> {
    let c = laurent_c(g2, g3, order_max);
    TruncatedSeries::from_fn(
        crate::series::Variable::Z,
        Scalar::new(0.0, 0.0),
        -2,
        order_max,
        |e| {
            if e == -2 {
                R::one()
            } else if e >= 2 && e % 2 == 0 {
                c[((e + 2) / 2) as usize].clone()
            } else {
                R::zero()
            }
        },
    )
}

/// `c[k]` is the coefficient of `z^(2k-2)` in `wp`, for `2 <= k`.
fn laurent_c<R: Ring>(g2: &R, g3: &R, order_max: i64) -> Vec<R> {
    let kmax = ((order_max + 2) / 2 + 1).max(3) as usize;
    let mut c = vec![R::zero(); kmax + 1];
    c[2] = g2.scaled(Scalar::new(1.0 / 20.0, 0.0));
    c[3] = g3.scaled(Scalar::new(1.0 / 28.0, 0.0));
    for k in 4..=kmax {
        let mut s = R::zero();
        for m in 2..=k - 2 {
            s = s.plus(&c[m].times(&c[k - m]));
        }
        c[k] = s.scaled(Scalar::new(3.0 / ((2 * k + 1) as f64 * (k - 3) as f64), 0.0));
    }
    c
}

/// Laurent expansion `1/z - (g2/60) z^3 - ...` of `zeta` at 0.
pub fn zeta_laurent<R: Ring>(g2: &R, g3: &R, order_max: i64) -> TruncatedSeries<R> {
    let c = laurent_c(g2, g3, order_max + 1);
    TruncatedSeries::from_fn(
        crate::series::Variable::Z,
        Scalar::new(0.0, 0.0),
        -1,
        order_max,
        |e| {
            if e == -1 {
                R::one()
            } else if e >= 3 && e % 2 == 1 {
                let k = ((e + 1) / 2) as usize;
                c[k].scaled(Scalar::new(-1.0 / e as f64, 0.0))
            } else {
                R::zero()
            }
        },
    )
}

/// Taylor expansion of `wp` around an ordinary point `center` from its value
/// and derivative there.
pub fn wp_taylor<R: Ring>(
    g2: &R,
    wp_center: &R,
    wp_prime_center: &R,
    center: Scalar,
    order_max: i64,
) -> TruncatedSeries<R> {
    let n = (order_max + 1).max(2) as usize;
    let mut p: Vec<R> = vec![wp_center.clone(), wp_prime_center.clone()];
    for k in 0..n.saturating_sub(2) {
        let mut sq = R::zero();
        for i in 0..=k {
            sq = sq.plus(&p[i].times(&p[k - i]));
        }
        let mut rhs = sq.scaled(Scalar::new(6.0, 0.0));
        if k == 0 {
            rhs = rhs.minus(&g2.scaled(Scalar::new(0.5, 0.0)));
        }
        p.push(rhs.scaled(Scalar::new(1.0 / ((k + 1) * (k + 2)) as f64, 0.0)));
    }
    p.truncate((order_max + 1).max(0) as usize);
    TruncatedSeries::z(center, 0, p)
}

fn check_pole(lattice: &LatticeParam, z: Scalar) -> Result<Scalar> {
    let (zr, _, _) = lattice.reduce(z);
    if zr.norm() < 1e-8 {
        return Err(Error::Pole {
            z: z.to_string(),
            clearance: 1e-8,
        });
    }
    Ok(zr)
}

/// Runs `sum_n term(n)` until the terms are negligible.
fn q_sum(mut term: impl FnMut(usize) -> Scalar) -> Result<Scalar> {
    let mut acc = Scalar::new(0.0, 0.0);
    let mut small = 0;
    for n in 1..20000 {
        let t = term(n);
        acc += t;
        if t.norm() <= 1e-18 * acc.norm().max(1e-300) || t.norm() == 0.0 {
            small += 1;
            if small >= 3 {
                return Ok(acc);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergent("q-series of a Weierstrass function".into()))
}

fn nome_power_ratio(q: Scalar, n: usize) -> Scalar {
    let qn = q.powi(n as i32);
    qn / (1.0 - qn)
}

/// `wp(omega; z)` for `z` off the lattice.
pub fn wp_eval(lattice: &LatticeParam, z: Scalar) -> Result<Scalar> {
    let zr = check_pole(lattice, z)?;
    let q = lattice.nome();
    let s = (PI * zr).sin();
    let tail = q_sum(|n| {
        n as f64 * nome_power_ratio(q, n) * (1.0 - (2.0 * PI * n as f64 * zr).cos())
    })?;
    Ok(PI * PI * (1.0 / (s * s) - 1.0 / 3.0) + 8.0 * PI * PI * tail)
}

/// `wp'(omega; z)` for `z` off the lattice.
pub fn wp_prime_eval(lattice: &LatticeParam, z: Scalar) -> Result<Scalar> {
    let zr = check_pole(lattice, z)?;
    let q = lattice.nome();
    let s = (PI * zr).sin();
    let c = (PI * zr).cos();
    let tail = q_sum(|n| {
        (n * n) as f64 * nome_power_ratio(q, n) * (2.0 * PI * n as f64 * zr).sin()
    })?;
    Ok(-2.0 * PI.powi(3) * c / (s * s * s) + 16.0 * PI.powi(3) * tail)
}

/// `G2 = (pi^2/3) E2(q)`, the quasi-period of `zeta` along 1.
pub fn g2_quasi(lattice: &LatticeParam) -> Result<Scalar> {
    let q = lattice.nome();
    let e2 = 1.0 - 24.0 * q_sum(|n| n as f64 * nome_power_ratio(q, n))?;
    Ok(PI * PI / 3.0 * e2)
}

fn zeta_unreduced(lattice: &LatticeParam, z: Scalar, g2q: Scalar) -> Result<Scalar> {
    let q = lattice.nome();
    let tail = q_sum(|n| nome_power_ratio(q, n) * (2.0 * PI * n as f64 * z).sin())?;
    Ok(g2q * z + PI * (PI * z).cos() / (PI * z).sin() + 4.0 * PI * tail)
}

/// `zeta(omega; z)`, quasi-periodic: `zeta(z+1) = zeta(z) + G2` and
/// `zeta(z+omega) = zeta(z) + G2*omega - 2 pi i`.
pub fn zeta_eval(lattice: &LatticeParam, z: Scalar) -> Result<Scalar> {
    check_pole(lattice, z)?;
    let (zr, n1, n2) = lattice.reduce(z);
    let g2q = g2_quasi(lattice)?;
    let base = zeta_unreduced(lattice, zr, g2q)?;
    Ok(base + n1 as f64 * g2q + n2 as f64 * (g2q * lattice.omega - 2.0 * PI * I))
}

/// `eta1 = zeta(1/2)`: summed from the Laurent expansion at 0 when 1/2 is
/// comfortably inside its disc of convergence, otherwise from the q-series
/// `pi^2 E2 / 6`.
pub fn eta1(consts: &EllipticConstants) -> Result<Scalar> {
    let radius = consts.lattice.shortest_vector();
    let half = Scalar::new(0.5, 0.0);
    if radius > 0.75 {
        let ratio = 0.5 / radius;
        let order = ((-18.0 / ratio.log10()).ceil() as i64).clamp(8, 400) | 1;
        let s = zeta_laurent(&consts.g2, &consts.g3, order);
        return Ok(s.evaluate(half));
    }
    Ok(g2_quasi(&consts.lattice)? / 2.0)
}

/// q-expansion of `pi^2 E2 / 6`, i.e. `zeta(1/2)` as a function of the nome.
pub fn eta1_q(terms: usize) -> QSeries {
    e2_q(terms).scaled(Scalar::new(PI * PI / 6.0, 0.0))
}

/// q-expansion of `wp(1/2) = pi^2 (2/3 + 16 sum_{n odd} n q^n / (1 - q^n))`.
pub fn wp_half_q(terms: usize) -> QSeries {
    let mut c = vec![Scalar::new(0.0, 0.0); terms];
    if terms > 0 {
        c[0] = Scalar::new(2.0 / 3.0, 0.0);
    }
    // n q^n/(1-q^n) = n sum_{m>=1} q^(nm)
    for n in (1..terms).step_by(2) {
        let mut e = n;
        while e < terms {
            c[e] += Scalar::new(16.0 * n as f64, 0.0);
            e += n;
        }
    }
    QSeries::from_coeffs(c, terms as i64).scaled(Scalar::new(PI * PI, 0.0))
}

/// `g2` as a q-expansion: `(4 pi^4 / 3) E4`.
pub fn g2_q(terms: usize) -> QSeries {
    e4_q(terms).scaled(Scalar::new(4.0 * PI.powi(4) / 3.0, 0.0))
}

/// `g3` as a q-expansion: `(8 pi^6 / 27) E6`.
pub fn g3_q(terms: usize) -> QSeries {
    e6_q(terms).scaled(Scalar::new(8.0 * PI.powi(6) / 27.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Scalar {
        Scalar::new(re, im)
    }

    #[test]
    fn g2_at_i_matches_lemniscatic_value() {
        // g2(i) = Gamma(1/4)^8 / (16 pi^2)
        let gamma_quarter: f64 = 3.625_609_908_221_908;
        let expect = gamma_quarter.powi(8) / (16.0 * PI * PI);
        let v = eisenstein(c(0.0, 1.0), 4).unwrap();
        assert!((v.value.re - expect).abs() / expect < 1e-9, "{} vs {}", v.value, expect);
        let g3 = eisenstein(c(0.0, 1.0), 6).unwrap();
        assert!(g3.value.norm() < 1e-9);
    }

    #[test]
    fn laurent_coefficients() {
        let g2 = c(3.0, 0.5);
        let g3 = c(-1.0, 2.0);
        let s = wp_laurent(&g2, &g3, 8);
        assert_eq!(s.coeff(-2).unwrap(), c(1.0, 0.0));
        assert!((s.coeff(2).unwrap() - g2 / 20.0).norm() < 1e-15);
        assert!((s.coeff(4).unwrap() - g3 / 28.0).norm() < 1e-15);
        assert!((s.coeff(6).unwrap() - g2 * g2 / 1200.0).norm() < 1e-15);
        assert!((s.coeff(8).unwrap() - 3.0 * g2 * g3 / 6160.0).norm() < 1e-15);
        let z = zeta_laurent(&g2, &g3, 5);
        assert!((z.coeff(3).unwrap() + g2 / 60.0).norm() < 1e-15);
        assert!(z.derivative().approx_eq(&s.neg().truncate(4), 1e-15));
    }

    #[test]
    fn wp_satisfies_its_differential_equation_pointwise() {
        let k = EllipticConstants::new(c(0.2, 1.1)).unwrap();
        for z in [c(0.3, 0.1), c(0.5, 0.0), c(-0.2, 0.45), c(1.7, 2.0)] {
            let p = k.wp(z).unwrap();
            let dp = k.wp_prime(z).unwrap();
            let lhs = dp * dp;
            let rhs = 4.0 * p * p * p - k.g2 * p - k.g3;
            assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0), "{z}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn wp_value_matches_laurent_near_zero() {
        let k = EllipticConstants::new(c(0.0, 1.0)).unwrap();
        let s = wp_laurent(&k.g2, &k.g3, 40);
        let z = c(0.13, 0.07);
        assert!((s.evaluate(z) - k.wp(z).unwrap()).norm() < 1e-11 * k.wp(z).unwrap().norm());
    }

    #[test]
    fn pole_is_rejected() {
        let l = LatticeParam::new(c(0.0, 1.0)).unwrap();
        assert!(matches!(wp_eval(&l, c(1.0, 1.0)), Err(Error::Pole { .. })));
        assert!(LatticeParam::new(c(0.0, -1.0)).is_err());
    }

    #[test]
    fn zeta_quasi_periods() {
        let l = LatticeParam::new(c(0.3, 0.9)).unwrap();
        let g2q = g2_quasi(&l).unwrap();
        // inside the strip both representations are valid
        let z = 0.6 * l.omega + 0.1;
        let direct = zeta_unreduced(&l, z, g2q).unwrap();
        let reduced = zeta_eval(&l, z).unwrap();
        assert!((direct - reduced).norm() < 1e-11 * direct.norm());
        let k = EllipticConstants::new(l.omega).unwrap();
        let a = k.zeta(c(0.21, 0.1)).unwrap();
        let b = k.zeta(c(1.21, 0.1)).unwrap();
        assert!((b - a - 2.0 * k.eta1).norm() < 1e-11 * k.eta1.norm());
    }

    #[test]
    fn eta1_routes_agree() {
        let k = EllipticConstants::new(c(0.0, 1.0)).unwrap();
        let via_q = g2_quasi(&k.lattice).unwrap() / 2.0;
        assert!((k.eta1 - via_q).norm() < 1e-11 * via_q.norm());
        // eta1(i) = pi/2 by the Legendre relation and symmetry
        assert!((k.eta1 - c(PI / 2.0, 0.0)).norm() < 1e-11);
    }

    #[test]
    fn half_period_q_expansion() {
        for om in [c(0.0, 1.0), c(0.5, 1.0), c(0.1, 2.0)] {
            let l = LatticeParam::new(om).unwrap();
            let terms = q_terms_for(om, 3);
            let direct = wp_eval(&l, c(0.5, 0.0)).unwrap();
            let series = wp_half_q(terms).eval(om);
            assert!((direct - series).norm() < 1e-12 * direct.norm());
        }
    }

    #[test]
    fn taylor_matches_pointwise() {
        let k = EllipticConstants::new(c(0.5, 1.0)).unwrap();
        let w = c(0.31, 0.17);
        let s = k.wp_series(w, 30).unwrap();
        let z = w + c(0.05, -0.03);
        assert!((s.evaluate(z) - k.wp(z).unwrap()).norm() < 1e-11 * k.wp(z).unwrap().norm());
    }

    proptest! {
        #[test]
        fn wp_weight_two(re in -0.5f64..0.5, im in 0.8f64..1.6, zr in 0.05f64..0.45, zi in 0.05f64..0.3) {
            let om = c(re, im);
            let z = c(zr, zi);
            for alpha in [ModularElement::S, ModularElement::T] {
                let j = alpha.jay(om);
                let l0 = LatticeParam::new(om).unwrap();
                let l1 = LatticeParam::new(alpha.act(om)).unwrap();
                let lhs = wp_eval(&l1, z / j).unwrap();
                let rhs = j * j * wp_eval(&l0, z).unwrap();
                prop_assert!((lhs - rhs).norm() < 1e-9 * rhs.norm());
            }
        }

        #[test]
        fn modular_action_composes(a in -3i64..3, b in -3i64..3, re in -1.0f64..1.0, im in 0.5f64..2.0) {
            let g = ModularElement::S.compose(&ModularElement::new(1, a, 0, 1).unwrap());
            let h = ModularElement::new(1, b, 0, 1).unwrap().compose(&ModularElement::S);
            let om = c(re, im);
            let gh = g.compose(&h);
            prop_assert!((gh.act(om) - g.act(h.act(om))).norm() < 1e-10 * (1.0 + gh.act(om).norm()));
            prop_assert!((gh.jay(om) - g.jay(h.act(om)) * h.jay(om)).norm() < 1e-10 * (1.0 + gh.jay(om).norm()));
        }
    }
}
