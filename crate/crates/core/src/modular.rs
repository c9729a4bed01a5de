//! Weight laws and cusp behaviour of modular quantities.

use crate::elliptic::ModularElement;
use crate::error::{Error, Result};
use crate::qseries::QExpansion;
use crate::scalar::{Scalar, ABS_FLOOR};
use serde::Serialize;

/// A point `(omega, z)` at which a weight law is checked. Functions of
/// `omega` alone ignore `z`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Sample {
    pub omega: Scalar,
    pub z: Scalar,
}

impl Sample {
    pub fn omega(omega: Scalar) -> Self {
        Self {
            omega,
            z: Scalar::new(0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightReport {
    pub weight: i32,
    pub max_rel_error: f64,
    pub checked: usize,
    /// Samples where either side could not be evaluated, with the reason.
    pub skipped: Vec<(Sample, String)>,
}

impl WeightReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.checked > 0 && self.max_rel_error < tol
    }
}

/// Checks `f(alpha(omega), z/j) = j^weight f(omega, z)` with `j = c*omega + d`.
pub fn verify_weight(
    f: &dyn Fn(Scalar, Scalar) -> Result<Scalar>,
    weight: i32,
    alpha: &ModularElement,
    samples: &[Sample],
) -> WeightReport {
    let mut max_rel_error: f64 = 0.0;
    let mut checked = 0;
    let mut skipped = Vec::new();
    for s in samples {
        let j = alpha.jay(s.omega);
        let lhs = f(alpha.act(s.omega), s.z / j);
        let rhs = f(s.omega, s.z).map(|v| j.powi(weight) * v);
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => {
                let err = (l - r).norm() / r.norm().max(l.norm()).max(ABS_FLOOR);
                max_rel_error = max_rel_error.max(err);
                checked += 1;
            }
            (Err(e), _) | (_, Err(e)) => skipped.push((*s, e.to_string())),
        }
    }
    WeightReport {
        weight,
        max_rel_error,
        checked,
        skipped,
    }
}

/// A sample for quantities that also depend on a basepoint `w`, which moves
/// with `z` under the modular action.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BasedSample {
    pub omega: Scalar,
    pub z: Scalar,
    pub w: Scalar,
}

/// Checks `f(alpha(omega), z/j, w/j) = j^weight f(omega, z, w)`.
pub fn verify_weight_based(
    f: &dyn Fn(Scalar, Scalar, Scalar) -> Result<Scalar>,
    weight: i32,
    alpha: &ModularElement,
    samples: &[BasedSample],
) -> WeightReport {
    let mut max_rel_error: f64 = 0.0;
    let mut checked = 0;
    let mut skipped = Vec::new();
    for s in samples {
        let j = alpha.jay(s.omega);
        let lhs = f(alpha.act(s.omega), s.z / j, s.w / j);
        let rhs = f(s.omega, s.z, s.w).map(|v| j.powi(weight) * v);
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => {
                let err = (l - r).norm() / r.norm().max(l.norm()).max(ABS_FLOOR);
                max_rel_error = max_rel_error.max(err);
                checked += 1;
            }
            (Err(e), _) | (_, Err(e)) => skipped.push((
                Sample {
                    omega: s.omega,
                    z: s.z,
                },
                e.to_string(),
            )),
        }
    }
    WeightReport {
        weight,
        max_rel_error,
        checked,
        skipped,
    }
}

/// Weight carried by the coefficient of `X^j Y^k` in a curve
/// `Y^N - X^K + ...` with `X` of weight `N` and `Y` of weight `K`.
pub fn curve_coeff_weight(n: i64, k: i64, j: i64, kk: i64) -> i64 {
    n * k - n * j - k * kk
}

/// True when no coefficient of a negative power of q is above `tol` relative
/// to the largest coefficient.
pub fn cusp_holomorphic(e: &QExpansion, tol: f64) -> bool {
    let s = &e.series;
    let scale = s.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(ABS_FLOOR);
    s.coeffs
        .iter()
        .enumerate()
        .all(|(i, c)| s.offset + (i as i64) >= 0 || c.norm() <= tol * scale)
}

/// Relative spread `max |r_i - mean| / |mean|` of a list of values; used to
/// test that a ratio is independent of `omega`.
pub fn relative_variation(values: &[Scalar]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Usage("no values".into()));
    }
    let mean: Scalar = values.iter().sum::<Scalar>() / values.len() as f64;
    let spread = values.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max);
    Ok(spread / mean.norm().max(ABS_FLOOR))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{eisenstein, wp_eval, EllipticConstants, LatticeParam};
    use crate::qseries::QSeries;

    fn c(re: f64, im: f64) -> Scalar {
        Scalar::new(re, im)
    }

    fn wp(om: Scalar, z: Scalar) -> Result<Scalar> {
        wp_eval(&LatticeParam::new(om)?, z)
    }

    #[test]
    fn wp_weight_two_under_s() {
        let mut samples = vec![];
        for om in [c(0.3, 1.0), c(0.0, 2.0)] {
            for z in [c(0.21, 0.0), c(0.37, 0.11)] {
                samples.push(Sample { omega: om, z });
            }
        }
        let r = verify_weight(&wp, 2, &ModularElement::S, &samples);
        assert_eq!(r.checked, 4);
        assert!(r.max_rel_error < 1e-8, "{}", r.max_rel_error);
        let id = ModularElement::new(1, 0, 0, 1).unwrap();
        assert_eq!(verify_weight(&wp, 2, &id, &samples).max_rel_error, 0.0);
    }

    #[test]
    fn pole_samples_are_skipped() {
        let samples = [Sample { omega: c(0.0, 1.0), z: c(1.0, 0.0) }, Sample { omega: c(0.0, 1.0), z: c(0.2, 0.1) }];
        let r = verify_weight(&wp, 2, &ModularElement::T, &samples);
        assert_eq!(r.checked, 1);
        assert_eq!(r.skipped.len(), 1);
    }

    #[test]
    fn eisenstein_weights() {
        let g3 = |om: Scalar, _z: Scalar| Ok(EllipticConstants::new(om)?.g3);
        let g2 = |om: Scalar, _z: Scalar| Ok(EllipticConstants::new(om)?.g2);
        let samples: Vec<Sample> = [c(0.1, 1.2), c(-0.4, 0.9), c(0.25, 1.5)].map(Sample::omega).to_vec();
        assert!(verify_weight(&g3, 6, &ModularElement::T, &samples).max_rel_error < 1e-10);
        for alpha in [ModularElement::S, ModularElement::T] {
            assert!(verify_weight(&g2, 4, &alpha, &samples).max_rel_error < 1e-9);
            assert!(verify_weight(&g3, 6, &alpha, &samples).max_rel_error < 1e-9);
        }
    }

    #[test]
    fn words_in_generators() {
        let samples: Vec<Sample> = [c(0.1, 1.2), c(-0.3, 0.8)]
            .iter()
            .map(|&om| Sample { omega: om, z: c(0.17, 0.05) })
            .collect();
        let (s, t) = (ModularElement::S, ModularElement::T);
        for word in [s.compose(&t), t.compose(&s), s.compose(&t).compose(&s), t.compose(&t).compose(&s)] {
            assert!(verify_weight(&wp, 2, &word, &samples).max_rel_error < 1e-8);
        }
    }

    #[test]
    fn lattice_and_q_values_agree_on_grid() {
        for om in [c(0.0, 1.0), c(0.5, 1.0), c(0.0, 2.0), c(-0.3, 0.8), c(0.2, 1.3)] {
            for w in [4, 6] {
                assert!(eisenstein(om, w).unwrap().agreement < 1e-8);
            }
        }
    }

    #[test]
    fn curve_weights() {
        assert_eq!(curve_coeff_weight(2, 3, 1, 0), 4);
        assert_eq!(curve_coeff_weight(2, 3, 0, 0), 6);
        assert_eq!(curve_coeff_weight(2, 3, 3, 0), 0);
    }

    #[test]
    fn cusp_checks() {
        let one = QExpansion { weight: 0, series: QSeries::constant(c(1.0, 0.0)) };
        assert!(cusp_holomorphic(&one, 1e-12));
        let mut pole = one.clone();
        pole.series.offset = -1;
        pole.series.coeffs = vec![c(1.0, 0.0), c(2.0, 0.0)];
        assert!(!cusp_holomorphic(&pole, 1e-12));
    }
}
