//! Formal Baker-Akhiezer expansion
//! `Psi = (sum_s xi_s lambda^-s) exp(lambda (z - w))` with `P Psi = lambda^N Psi`,
//! and the eigen-series `A(lambda)` of an operator commuting with `P`.

use crate::error::{Error, Result};
use crate::operator::{DifferentialOperator, LambdaFamily};
use crate::scalar::{binom, Ring, Scalar, ABS_FLOOR};
use crate::series::{TruncatedSeries, Variable};

/// Normalized formal solution at a basepoint: `xi_0 = 1`, `xi_s(w) = 0`.
#[derive(Debug, Clone)]
pub struct BAExpansion<R: Ring = Scalar> {
    pub basepoint: Scalar,
    /// Order `N` of the operator it was computed from.
    pub order: usize,
    pub xi: Vec<TruncatedSeries<R>>,
    /// The same recursion run on absolute values with every subtraction turned
    /// into an addition: a coefficientwise bound on the size of the terms
    /// that were summed, used to judge rounding error.
    pub xi_scale: Vec<TruncatedSeries<R>>,
}

impl<R: Ring> BAExpansion<R> {
    pub fn s_max(&self) -> usize {
        self.xi.len() - 1
    }

    pub fn family(&self) -> LambdaFamily<R> {
        LambdaFamily {
            order_min: 0,
            terms: self.xi.clone(),
        }
    }

    fn scale_family(&self) -> LambdaFamily<R> {
        LambdaFamily {
            order_min: 0,
            terms: self.xi_scale.clone(),
        }
    }
}

/// Runs the recursion `N xi_t' = -(lower terms)` for `t = 1..=s_max` and
/// integrates from the basepoint. `P` must be expanded around `w`.
pub fn compute_xi<R: Ring>(p: &DifferentialOperator<R>, s_max: usize) -> Result<BAExpansion<R>> {
    check_xi_input(p)?;
    let xi = xi_recursion(p, s_max, -1.0)?;
    let xi_scale = xi_recursion(&p.abs_operator(), s_max, 1.0)?;
    Ok(BAExpansion {
        basepoint: p.center(),
        order: p.order,
        xi,
        xi_scale,
    })
}

fn check_xi_input<R: Ring>(p: &DifferentialOperator<R>) -> Result<()> {
    let n = p.order;
    if n < 2 {
        return Err(Error::Usage("Baker-Akhiezer expansion needs order >= 2".into()));
    }
    if !p.is_normal_form(1e-12) {
        return Err(Error::NotNormalForm(
            "need leading coefficient 1 and vanishing subleading coefficient".into(),
        ));
    }
    let w = p.center();
    for (i, c) in p.coeffs.iter().enumerate() {
        if c.order_min < 0 && c.coeffs.iter().any(|x| x.magnitude() != 0.0) {
            return Err(Error::Pole {
                z: format!("{w} (coefficient of d^{})", n - i),
                clearance: 0.0,
            });
        }
    }
    Ok(())
}

fn xi_recursion<R: Ring>(
    p: &DifferentialOperator<R>,
    s_max: usize,
    sign: f64,
) -> Result<Vec<TruncatedSeries<R>>> {
    let n = p.order;
    let w = p.center();
    let one = TruncatedSeries::constant(Variable::Z, w, R::one(), p.window());
    // derivs[s][d] = d-th derivative of xi_s
    let mut derivs: Vec<Vec<TruncatedSeries<R>>> = vec![derivative_table(&one, n)];
    for t in 1..=s_max as i64 {
        let s0 = t + 1 - n as i64;
        let mut rhs: Option<TruncatedSeries<R>> = None;
        for k in 0..=n {
            if k == n - 1 {
                continue;
            }
            let c = p.coeff_of(k);
            for alpha in 0..=k {
                if k == n && alpha + 2 > n {
                    continue;
                }
                let s = s0 + alpha as i64;
                if s < 0 {
                    continue;
                }
                let eta = &derivs[s as usize][k - alpha];
                let term = c.try_mul(eta)?.scale(Scalar::new(binom(k, alpha), 0.0));
                rhs = Some(match rhs {
                    None => term,
                    Some(acc) => acc.try_add(&term)?,
                });
            }
        }
        let rhs = rhs.unwrap_or_else(|| one.zero_like());
        let xi = rhs
            .scale(Scalar::new(sign / n as f64, 0.0))
            .with_order_min(0)
            .integrate_from_center()?;
        if xi.order_max() < 0 {
            return Err(Error::window(format!("xi_{t}"), 0, xi.order_max()));
        }
        derivs.push(derivative_table(&xi, n));
    }
    Ok(derivs.into_iter().map(|mut d| d.swap_remove(0)).collect())
}

fn derivative_table<R: Ring>(s: &TruncatedSeries<R>, n: usize) -> Vec<TruncatedSeries<R>> {
    let mut v = vec![s.clone()];
    for d in 1..=n {
        let next = v[d - 1].derivative();
        v.push(next);
    }
    v
}

/// `A(lambda) = sum_{s >= -m} A_s lambda^-s`.
#[derive(Debug, Clone)]
pub struct SpectralSeries<R: Ring = Scalar> {
    pub m: usize,
    pub weight: Option<i32>,
    /// Indexed by `s`: `coeffs.coeff(s)` is `A_s`.
    pub coeffs: TruncatedSeries<R>,
    /// Largest relative z-dependence seen while extracting the `A_s`.
    pub z_dependence: f64,
}

impl<R: Ring> SpectralSeries<R> {
    pub fn a(&self, s: i64) -> Result<R> {
        self.coeffs.coeff(s)
    }

    pub fn s_max(&self) -> i64 {
        self.coeffs.order_max()
    }

    /// `A_{-m} .. A_0`.
    pub fn principal(&self) -> Vec<R> {
        (-(self.m as i64)..=0).map(|s| self.coeffs.coeff_or_zero(s)).collect()
    }

    /// `(s, A_s)` for `s >= 1`.
    pub fn tail(&self) -> Vec<(i64, R)> {
        (1..=self.s_max()).map(|s| (s, self.coeffs.coeff_or_zero(s))).collect()
    }

    /// True when some `A_s != 0` has `s` coprime to `n`.
    pub fn has_coprime_term(&self, n: usize, rel_tol: f64) -> bool {
        let scale = self.coeffs.magnitude();
        (-(self.m as i64)..=self.s_max()).any(|s| {
            gcd(n as u64, s.unsigned_abs()) == 1
                && !self.coeffs.coeff_or_zero(s).is_negligible(scale, rel_tol)
        })
    }

    /// Series product, kept within the shorter of the two windows.
    pub fn product(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            m: self.m + other.m,
            weight: match (self.weight, other.weight) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
            coeffs: self.coeffs.try_mul(&other.coeffs)?,
            z_dependence: self.z_dependence.max(other.z_dependence),
        })
    }
}

impl SpectralSeries<Scalar> {
    /// Sums the truncated series at a finite `lambda` (only meaningful for
    /// large `|lambda|`).
    pub fn evaluate(&self, lambda: Scalar) -> Scalar {
        let inv = lambda.inv();
        self.coeffs
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * inv.powi((self.coeffs.order_min + i as i64) as i32))
            .sum()
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Divides `Q Psi` by `Psi` order by order in `lambda^-1`, checking that every
/// quotient is constant in `z`.
pub fn eigen_series<R: Ring>(
    q: &DifferentialOperator<R>,
    ba: &BAExpansion<R>,
    rel_tol: f64,
) -> Result<SpectralSeries<R>> {
    let lhs = q.apply_symbol(&ba.family())?;
    let lhs_scale = q.abs_operator().apply_symbol(&ba.scale_family())?;
    let m = q.order as i64;
    let mut values: Vec<R> = Vec::new();
    let mut z_dependence: f64 = 0.0;
    for t in -m..=lhs.order_max() {
        let mut rem = lhs.term(t).expect("inside window");
        if rem.order_max() < 0 {
            break;
        }
        let mut bound = lhs_scale.term(t).expect("inside window");
        for (i, a) in values.iter().enumerate() {
            let u = i as i64 - m;
            rem = rem.try_sub(&ba.xi[(t - u) as usize].scale_ring(a))?;
            bound = bound.try_add(&ba.xi_scale[(t - u) as usize].scale_ring(&a.abs_value()))?;
        }
        let value = rem.coeff_or_zero(0);
        for k in rem.order_min..=rem.order_max() {
            if k == 0 {
                continue;
            }
            let s = bound.coeff_or_zero(k).magnitude().max(ABS_FLOOR);
            z_dependence = z_dependence.max(rem.coeff_or_zero(k).magnitude() / s);
        }
        values.push(value);
    }
    if z_dependence > rel_tol {
        return Err(Error::NotCommuting {
            residual: z_dependence,
            tolerance: rel_tol,
        });
    }
    Ok(SpectralSeries {
        m: q.order,
        weight: q.weight,
        coeffs: TruncatedSeries::new(Variable::LambdaInv, Scalar::new(0.0, 0.0), -m, values),
        z_dependence,
    })
}

/// Relative size of `[a, b]` against the size of `a o b`.
pub fn commutator_residual<R: Ring>(
    a: &DifferentialOperator<R>,
    b: &DifferentialOperator<R>,
) -> Result<f64> {
    let ab = a.compose(b)?;
    let ba = b.compose(a)?;
    let scale = ab.magnitude().max(ba.magnitude()).max(ABS_FLOOR);
    Ok(ab.try_sub(&ba)?.magnitude() / scale)
}

/// Whether two operators that both commute with `P` commute with each other.
pub fn check_pairwise_commute<R: Ring>(
    q1: &DifferentialOperator<R>,
    q2: &DifferentialOperator<R>,
    rel_tol: f64,
) -> Result<bool> {
    Ok(commutator_residual(q1, q2)? < rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Scalar {
        Scalar::new(x, 0.0)
    }

    fn constant_op(coeffs: &[f64], window: i64) -> DifferentialOperator {
        DifferentialOperator::new(
            coeffs
                .iter()
                .map(|&x| TruncatedSeries::constant(Variable::Z, c(0.0), c(x), window))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn free_operator_has_trivial_xi() {
        let p = constant_op(&[1.0, 0.0, 0.0], 12);
        let ba = compute_xi(&p, 5).unwrap();
        assert_eq!(ba.xi.len(), 6);
        assert_eq!(ba.xi[0].coeff(0).unwrap(), c(1.0));
        for s in 1..=5 {
            assert!(ba.xi[s].magnitude() < 1e-15);
        }
    }

    #[test]
    fn constant_potential() {
        // d^2 + c: xi solves 2 xi_t' = -c xi_{t-1} - xi_{t-1}''
        let k = 0.3;
        let p = constant_op(&[1.0, 0.0, k], 12);
        let ba = compute_xi(&p, 3).unwrap();
        assert!((ba.xi[1].coeff(1).unwrap() - c(-k / 2.0)).norm() < 1e-15);
        // P Psi = lambda^2 Psi through the window
        let out = p.apply_symbol(&ba.family()).unwrap();
        for t in out.order_min..=out.order_max() {
            let lhs = out.term(t).unwrap();
            let rhs = ba.family().term(t + 2).unwrap();
            let d = lhs.try_sub(&rhs).unwrap();
            assert!(d.magnitude() < 1e-13, "t = {t}");
        }
    }

    #[test]
    fn self_eigen_series_is_lambda_power() {
        let p = constant_op(&[1.0, 0.0, 0.25], 12);
        let ba = compute_xi(&p, 6).unwrap();
        let a = eigen_series(&p, &ba, 1e-9).unwrap();
        assert_eq!(a.m, 2);
        assert!((a.a(-2).unwrap() - c(1.0)).norm() < 1e-14);
        for s in -1..=a.s_max() {
            assert!(a.a(s).unwrap().norm() < 1e-12);
        }
        let id = constant_op(&[2.5], 12);
        let a = eigen_series(&id, &ba, 1e-9).unwrap();
        assert!((a.a(0).unwrap() - c(2.5)).norm() < 1e-14);
    }

    #[test]
    fn non_normal_form_is_rejected() {
        let p = constant_op(&[1.0, 1.0, 0.0], 8);
        assert!(matches!(compute_xi(&p, 2), Err(Error::NotNormalForm(_))));
    }

    #[test]
    fn gcd_values() {
        assert_eq!(gcd(2, 3), 1);
        assert_eq!(gcd(4, 6), 2);
        assert_eq!(gcd(3, 0), 3);
    }
}
