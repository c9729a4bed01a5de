//! End-to-end checks on the Lamé family, shared by the CLI reports.
//!
//! Every check records its residual and threshold so a report can be diffed
//! across runs.

use crate::baker_akhiezer::{compute_xi, BAExpansion};
use crate::commutant::{
    build_commutant, complete_principal_part, dim_dk, modular_free_slots, Commutant, PrincipalPart,
};
use crate::elliptic::{eisenstein, EllipticConstants, ModularElement};
use crate::error::{Error, Result};
use crate::lame::{circle_loop, lame_operator, lame_operator_q, lame_q_closed_form};
use crate::modular::{relative_variation, verify_weight, verify_weight_based, BasedSample, Sample};
use crate::monodromy::{monodromy_matrix, sigma_permutation, ContinuationOptions, PathSpec};
use crate::operator::DifferentialOperator;
use crate::qseries::QSeries;
use crate::scalar::{Ring, Scalar, ABS_FLOOR};
use crate::series::TruncatedSeries;
use crate::spectral_curve::{
    bc_residual, char_poly, char_poly_cross_check, genus, rep_matrix, single_valued_criterion, GenusReport,
    JetBasisMatrix, PlaneCurve,
};
use serde::Serialize;

pub const Z_ORDER: i64 = 24;
pub const S_MAX: usize = 16;

fn c(re: f64) -> Scalar {
    Scalar::new(re, 0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Reported but not part of the verdict.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub informational: bool,
}

impl Check {
    /// Passes when `residual < threshold`.
    pub fn below(name: impl Into<String>, residual: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: residual < threshold,
            residual,
            threshold,
            note: None,
            informational: false,
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            residual: if passed { 0.0 } else { 1.0 },
            threshold: 0.5,
            note: Some(note.into()),
            informational: false,
        }
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    pub fn new(checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed || c.informational);
        Self { checks, passed }
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed && !c.informational).collect()
    }
}

/// Lamé operator `d^2 - B wp` at a basepoint, with its Baker-Akhiezer data.
pub struct LameRun {
    pub consts: EllipticConstants,
    pub b: Scalar,
    pub w: Scalar,
    pub p: DifferentialOperator,
    pub ba: BAExpansion,
}

impl LameRun {
    pub fn new(omega: Scalar, b: Scalar, w: Scalar) -> Result<Self> {
        Self::with_window(omega, b, w, Z_ORDER, S_MAX)
    }

    pub fn with_window(omega: Scalar, b: Scalar, w: Scalar, z_order: i64, s_max: usize) -> Result<Self> {
        let consts = EllipticConstants::new(omega)?;
        let p = lame_operator(&consts, b, w, z_order)?;
        let ba = compute_xi(&p, s_max)?;
        Ok(Self { consts, b, w, p, ba })
    }

    pub fn commutant(&self, prin: &PrincipalPart, rel_tol: f64) -> Result<Commutant> {
        build_commutant(&self.p, prin, &self.ba, rel_tol)
    }

    /// `lambda^m` with every lower entry allowed by weight `m` solved for.
    pub fn completed_commutant(&self, m: usize, rel_tol: f64) -> Result<Commutant> {
        let prin = PrincipalPart::new(m as i32, monic(m))?;
        let free = modular_free_slots(m as i64, m);
        let done = complete_principal_part(&self.p, &prin, &free, &self.ba)?;
        build_commutant(&self.p, &done, &self.ba, rel_tol)
    }

    pub fn curve(&self, q: &Commutant) -> Result<(JetBasisMatrix, PlaneCurve)> {
        let jm = rep_matrix(&self.p, &q.q)?;
        let f = char_poly(&jm, q.q.order, q.spectral.weight);
        Ok((jm, f))
    }
}

/// `[1, 0, ..., 0]` of length `m + 1`.
pub fn monic(m: usize) -> Vec<Scalar> {
    let mut e = vec![c(0.0); m + 1];
    e[0] = c(1.0);
    e
}

/// Largest coefficient difference over orders `0..=order`, relative to the
/// largest reference coefficient there.
pub fn series_gap(a: &TruncatedSeries, reference: &TruncatedSeries, order: i64) -> f64 {
    let scale = (0..=order)
        .map(|k| reference.coeff_or_zero(k).norm())
        .fold(1.0, f64::max);
    (0..=order)
        .map(|k| (a.coeff_or_zero(k) - reference.coeff_or_zero(k)).norm())
        .fold(0.0, f64::max)
        / scale
}

/// The first two Baker-Akhiezer coefficients of the Lamé operator from `zeta`
/// and `wp`: `xi_1 = zeta(w) - zeta(z)`, `xi_2 = xi_1^2/2 - (wp(z) - wp(w))/2`.
pub fn lame_xi_closed_form(k: &EllipticConstants, w: Scalar, order: i64) -> Result<(TruncatedSeries, TruncatedSeries)> {
    let zeta = k.zeta_series(w, order)?;
    let wp = k.wp_series(w, order)?;
    let xi1 = zeta.scale(c(-1.0)).try_add(&TruncatedSeries::constant(zeta.variable, w, k.zeta(w)?, order))?;
    let half = c(0.5);
    let xi2 = xi1
        .try_mul(&xi1)?
        .scale(half)
        .try_sub(&wp.scale(half))?
        .try_add(&TruncatedSeries::constant(wp.variable, w, half * k.wp(w)?, order))?;
    Ok((xi1, xi2))
}

pub fn xi_checks(omega: Scalar) -> Result<Vec<Check>> {
    let run = LameRun::new(omega, c(2.0), c(0.5))?;
    let (xi1, xi2) = lame_xi_closed_form(&run.consts, run.w, 10)?;
    Ok(vec![
        Check::below("xi.1", series_gap(&run.ba.xi[1], &xi1, 10), 1e-9),
        Check::below("xi.2", series_gap(&run.ba.xi[2], &xi2, 10), 1e-9),
    ])
}

pub fn commutant_checks(omega: Scalar) -> Result<Vec<Check>> {
    let run = LameRun::new(omega, c(2.0), c(0.5))?;
    let q = run.commutant(&PrincipalPart::new(3, monic(3))?, 1e-9)?;
    let closed = lame_q_closed_form(&run.consts, run.w, Z_ORDER)?;
    let order = q.q.window().min(closed.window());
    let mut out: Vec<Check> = (0..=3)
        .map(|j| Check::below(format!("commutant.b{j}"), series_gap(&q.q.coeffs[j], &closed.coeffs[j], order), 1e-9))
        .collect();
    out.push(Check::below("commutant.commutator", q.commutator_residual, 1e-9));
    Ok(out)
}

/// `|a - b|` relative to `max(|b|, scale)`.
fn rel(a: Scalar, b: Scalar, scale: f64) -> f64 {
    (a - b).norm() / b.norm().max(scale).max(ABS_FLOOR)
}

pub fn curve_checks(omegas: &[Scalar]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &om in omegas {
        let run = LameRun::new(om, c(2.0), c(0.5))?;
        let q = run.commutant(&PrincipalPart::new(3, monic(3))?, 1e-9)?;
        let (jm, f) = run.curve(&q)?;
        let g2 = eisenstein(om, 4)?.value;
        let g3 = eisenstein(om, 6)?.value;
        // g3 can vanish; compare it at the size of a weight-6 quantity
        let s6 = (g2 / 4.0).norm().powf(1.5);
        out.push(Check::below(format!("curve.f10@{om}"), rel(f.f(1, 0), g2 / 4.0, 0.0), 1e-7));
        out.push(Check::below(format!("curve.f00@{om}"), rel(f.f(0, 0), g3 / 4.0, s6), 1e-7));
        let structural = [(0, 2, c(1.0)), (3, 0, c(-1.0)), (0, 1, c(0.0)), (1, 1, c(0.0)), (2, 0, c(0.0))]
            .iter()
            .map(|&(j, k, v)| (f.f(j, k) - v).norm())
            .fold(0.0, f64::max);
        out.push(Check::below(format!("curve.shape@{om}"), structural / f.magnitude(), 1e-9));
        out.push(Check::below(format!("curve.det_cross_check@{om}"), char_poly_cross_check(&jm, &f), 1e-9));
        let other = LameRun::new(om, c(2.0), Scalar::new(0.31, 0.17))?;
        let q2 = other.commutant(&PrincipalPart::new(3, monic(3))?, 1e-9)?;
        let (_, f2) = other.curve(&q2)?;
        out.push(Check::below(format!("curve.basepoint@{om}"), f.distance(&f2), 1e-9));
    }
    Ok(out)
}

/// The stated Lamé curve against the pair `(P, Q)` at the Laurent window
/// around the lattice point 0, and the pipeline pair at `w = 1/2`.
pub fn bc_checks(omega: Scalar) -> Result<Vec<Check>> {
    let run = LameRun::new(omega, c(2.0), c(0.5))?;
    let q = run.commutant(&PrincipalPart::new(3, monic(3))?, 1e-9)?;
    let (_, f) = run.curve(&q)?;
    let z0 = c(0.0);
    let p0 = lame_operator(&run.consts, c(2.0), z0, Z_ORDER)?;
    let q0 = lame_q_closed_form(&run.consts, z0, Z_ORDER)?;
    let mut display = f.clone();
    display.coeffs[1][0] = -run.consts.g2 / 4.0;
    display.coeffs[0][0] = -run.consts.g3 / 4.0;
    let display_res = bc_residual(&display, &p0, &q0, 1e-12)?;
    Ok(vec![
        Check::below("bc.laurent", bc_residual(&f, &p0, &q0, 1e-12)?, 1e-8),
        Check::below("bc.negated_linear_and_constant", display_res, 1e-8)
            .with_note("Y^2 - X^3 - (g2/4) X - g3/4")
            .informational(),
        Check::below("bc.basepoint", bc_residual(&f, &run.p, &q.q, 1e-12)?, 1e-8),
    ])
}

pub fn weight_samples() -> Vec<Scalar> {
    vec![
        Scalar::new(0.2, 1.1),
        Scalar::new(-0.35, 0.95),
        Scalar::new(0.1, 1.6),
    ]
}

pub fn weight_checks(omegas: &[Scalar]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let z = Scalar::new(0.31, 0.17);
    let wp = |om: Scalar, z: Scalar| EllipticConstants::new(om)?.wp(z);
    let curve_coeff = |j: usize| {
        move |om: Scalar, _z: Scalar| -> Result<Scalar> {
            let run = LameRun::with_window(om, c(2.0), c(0.5), Z_ORDER, 8)?;
            let q = run.commutant(&PrincipalPart::new(3, monic(3))?, 1e-9)?;
            Ok(run.curve(&q)?.1.f(j, 0))
        }
    };
    let f10 = curve_coeff(1);
    let f00 = curve_coeff(0);
    let samples: Vec<Sample> = omegas.iter().map(|&om| Sample { omega: om, z }).collect();
    let based: Vec<BasedSample> = omegas
        .iter()
        .map(|&om| BasedSample {
            omega: om,
            z: Scalar::new(0.58, 0.07),
            w: c(0.5),
        })
        .collect();
    for (name, alpha) in [("S", ModularElement::S), ("T", ModularElement::T)] {
        let r = verify_weight(&wp, 2, &alpha, &samples);
        out.push(weight_check(format!("weight.wp.{name}"), &r));
        let r = verify_weight(&f10, 4, &alpha, &samples);
        out.push(weight_check(format!("weight.f10.{name}"), &r));
        let r = verify_weight(&f00, 6, &alpha, &samples);
        out.push(weight_check(format!("weight.f00.{name}"), &r));
        for s in 1..=4usize {
            let xi = move |om: Scalar, z: Scalar, w: Scalar| -> Result<Scalar> {
                let run = LameRun::with_window(om, c(2.0), w, Z_ORDER, s)?;
                Ok(run.ba.xi[s].evaluate(z))
            };
            let r = verify_weight_based(&xi, s as i32, &alpha, &based);
            out.push(weight_check(format!("weight.xi{s}.{name}"), &r));
        }
    }
    Ok(out)
}

fn weight_check(name: String, r: &crate::modular::WeightReport) -> Check {
    let mut ch = Check::below(name, r.max_rel_error, 1e-7);
    if r.checked == 0 {
        ch.passed = false;
        ch.note = Some(format!("no usable samples ({} skipped)", r.skipped.len()));
    }
    ch
}

pub fn grading_grid() -> Vec<Scalar> {
    vec![
        Scalar::new(0.0, 1.0),
        Scalar::new(0.0, 2.0),
        Scalar::new(0.5, 1.0),
        Scalar::new(0.3, 1.1),
    ]
}

/// `A_1 / g2` at every grid point.
pub fn a1_ratios(grid: &[Scalar]) -> Result<Vec<Scalar>> {
    grid.iter()
        .map(|&om| {
            let run = LameRun::new(om, c(2.0), c(0.5))?;
            let q = run.commutant(&PrincipalPart::new(3, monic(3))?, 1e-9)?;
            Ok(q.spectral.a(1)? / eisenstein(om, 4)?.value)
        })
        .collect()
}

pub fn grading_checks(grid: &[Scalar]) -> Result<Vec<Check>> {
    let d = dim_dk(3, 3);
    let ratios = a1_ratios(grid)?;
    let var = relative_variation(&ratios)?;
    Ok(vec![
        Check::flag("grading.dim_d3", d == 1, format!("dim D_3 = {d}")),
        Check::below("grading.a1_over_g2", var, 1e-6).with_note(format!("A_1 / g2 = {}", ratios[0])),
    ])
}

pub fn lame_genus(omega: Scalar) -> Result<(GenusReport, bool)> {
    let run = LameRun::new(omega, c(2.0), c(0.5))?;
    let q = run.commutant(&PrincipalPart::new(3, monic(3))?, 1e-9)?;
    let (_, f) = run.curve(&q)?;
    let g = genus(&f)?;
    let coprime = q.spectral.has_coprime_term(2, 1e-9);
    let crit = single_valued_criterion(2, &g, coprime)?;
    Ok((g, crit))
}

pub fn genus_checks(omega: Scalar) -> Result<Vec<Check>> {
    let (g, crit) = lame_genus(omega)?;
    Ok(vec![
        Check::flag("genus.varpi", g.varpi == Some(1), format!("varpi = {:?}", g.varpi)),
        Check::flag("genus.criterion", crit, format!("single-valued criterion = {crit}")),
    ])
}

pub fn lame_loops(omega: Scalar) -> Vec<(String, PathSpec)> {
    [("0", c(0.0)), ("omega", omega), ("1+omega", c(1.0) + omega)]
        .into_iter()
        .map(|(name, ctr)| {
            (
                name.to_string(),
                PathSpec::new(circle_loop(ctr, 0.25, 64)).expect("nonempty"),
            )
        })
        .collect()
}

pub fn spectral_samples() -> Vec<Scalar> {
    vec![c(2.0), Scalar::new(5.0, 1.0), c(10.0)]
}

pub fn monodromy_checks(omega: Scalar) -> Result<Vec<Check>> {
    let opts = ContinuationOptions::default();
    let k = EllipticConstants::new(omega)?;
    let mut worst_id: f64 = 0.0;
    let mut all_identity = true;
    let mut worst_half: f64 = 0.0;
    for (name, lp) in lame_loops(omega) {
        let w = lp.basepoint();
        let run = LameRun::new(omega, c(2.0), w)?;
        let q = run.commutant(&PrincipalPart::new(3, monic(3))?, 1e-9)?;
        for x in spectral_samples() {
            if name == "0" {
                let m = monodromy_matrix(&run.p, x, &lp, &opts)?;
                worst_id = worst_id.max(m.distance_to_identity());
            }
            let s = sigma_permutation(&run.p, &q.q, x, &lp, &opts)?;
            all_identity &= s.is_identity() && !s.degenerate;
        }
        if name == "0" {
            let p34 = lame_operator(&k, c(0.75), w, Z_ORDER)?;
            let m = monodromy_matrix(&p34, c(2.0), &lp, &opts)?;
            for e in m.eigenvalues()? {
                worst_half = worst_half.max((e + c(1.0)).norm());
            }
        }
    }
    Ok(vec![
        Check::below("monodromy.b2_identity", worst_id, 1e-6),
        Check::flag("monodromy.sigma_identity", all_identity, "every fixture loop"),
        Check::below("monodromy.b3_4_eigenvalues", worst_half, 1e-5),
    ])
}

/// Outcome of the `B = 6`, `lambda^5` stress run.
#[derive(Debug, Clone, Serialize)]
pub struct HigherRank {
    /// Error from the bare `lambda^5` principal part, if it was rejected.
    pub bare_error: Option<String>,
    /// `A_{-1} / g2` of the completed principal part.
    pub completion_ratio: Scalar,
    pub order: usize,
    pub commutator: f64,
    pub deg_x: usize,
    pub varpi: Option<u32>,
    pub bc: f64,
}

pub fn higher_rank(omega: Scalar) -> Result<HigherRank> {
    let run = LameRun::new(omega, c(6.0), c(0.5))?;
    let bare_error = run
        .commutant(&PrincipalPart::new(5, monic(5))?, 1e-9)
        .err()
        .map(|e| e.to_string());
    let q = run.completed_commutant(5, 1e-9)?;
    let (_, f) = run.curve(&q)?;
    let g = genus(&f)?;
    Ok(HigherRank {
        bare_error,
        completion_ratio: q.spectral.a(-1)? / run.consts.g2,
        order: q.q.order,
        commutator: q.commutator_residual,
        deg_x: f.deg_x(1e-9),
        varpi: g.varpi,
        bc: bc_residual(&f, &run.p, &q.q, 1e-12)?,
    })
}

pub fn higher_rank_checks(omega: Scalar) -> Result<Vec<Check>> {
    let h = higher_rank(omega)?;
    let bare = Check::flag(
        "rank5.bare_lambda5",
        h.bare_error.is_none(),
        h.bare_error.clone().unwrap_or_else(|| "realizable".into()),
    )
    .informational();
    Ok(vec![
        bare,
        Check::flag("rank5.order", h.order == 5, format!("order {}", h.order))
            .with_note(format!("completed with A_-1 = {} g2", h.completion_ratio)),
        Check::below("rank5.commutator", h.commutator, 1e-8),
        Check::flag("rank5.deg_x", h.deg_x == 5, format!("deg_X = {}", h.deg_x)),
        Check::flag("rank5.varpi", h.varpi == Some(2), format!("varpi = {:?}", h.varpi)),
        Check::below("rank5.bc", h.bc, 1e-7),
    ])
}

/// q-ring run of the `lambda^3` pipeline at `w = 1/2`.
pub struct QRun {
    pub xi: Vec<TruncatedSeries<QSeries>>,
    pub q: DifferentialOperator<QSeries>,
    pub a1: QSeries,
}

pub fn q_run(q_terms: usize, z_order: i64) -> Result<QRun> {
    let pq = lame_operator_q(c(2.0), q_terms, z_order)?;
    let ba = compute_xi(&pq, 6)?;
    let mut e = vec![QSeries::zero(); 4];
    e[0] = QSeries::one();
    let prin = PrincipalPart::new(3, e)?;
    let cm = build_commutant(&pq, &prin, &ba, 1e-9)?;
    Ok(QRun {
        xi: ba.xi,
        q: cm.q,
        a1: cm.spectral.a(1)?,
    })
}

pub fn cusp_checks(omega: Scalar) -> Result<Vec<Check>> {
    if omega.im < 1.0 {
        return Err(Error::Usage("the q-ring comparison needs Im omega >= 1".into()));
    }
    let z_order = 16;
    let qr = q_run(12, z_order)?;
    let run = LameRun::with_window(omega, c(2.0), c(0.5), z_order, 6)?;
    let fixed = run.commutant(&PrincipalPart::new(3, monic(3))?, 1e-9)?;
    let mut out = Vec::new();
    let series_pairs: [(&str, &TruncatedSeries<QSeries>, &TruncatedSeries); 4] = [
        ("xi1", &qr.xi[1], &run.ba.xi[1]),
        ("xi2", &qr.xi[2], &run.ba.xi[2]),
        ("b2", &qr.q.coeffs[2], &fixed.q.coeffs[2]),
        ("b3", &qr.q.coeffs[3], &fixed.q.coeffs[3]),
    ];
    for (name, qs, fs) in series_pairs {
        let holo = qs.coeffs.iter().all(QSeries::is_cusp_holomorphic);
        out.push(Check::flag(format!("cusp.{name}.holomorphic"), holo, "no negative q-powers"));
        let top = qs.order_max().min(fs.order_max()).min(10);
        let scale = (0..=top).map(|k| fs.coeff_or_zero(k).norm()).fold(ABS_FLOOR, f64::max);
        let gap = (0..=top)
            .map(|k| (qs.coeff_or_zero(k).eval(omega) - fs.coeff_or_zero(k)).norm())
            .fold(0.0, f64::max);
        out.push(Check::below(format!("cusp.{name}.value"), gap / scale, 1e-6));
    }
    out.push(Check::flag("cusp.a1.holomorphic", qr.a1.is_cusp_holomorphic(), "no negative q-powers"));
    let a1 = fixed.spectral.a(1)?;
    out.push(Check::below("cusp.a1.value", rel(qr.a1.eval(omega), a1, 0.0), 1e-6));
    Ok(out)
}

/// The whole Lamé suite at one lattice parameter.
pub fn run_all(omega: Scalar) -> Result<Report> {
    let mut checks = Vec::new();
    checks.extend(xi_checks(omega)?);
    checks.extend(commutant_checks(omega)?);
    let mut omegas = vec![omega];
    for extra in [Scalar::new(0.0, 2.0), Scalar::new(0.5, 1.0)] {
        if (extra - omega).norm() > 1e-12 {
            omegas.push(extra);
        }
    }
    checks.extend(curve_checks(&omegas)?);
    checks.extend(bc_checks(omega)?);
    checks.extend(weight_checks(&weight_samples())?);
    checks.extend(grading_checks(&grading_grid())?);
    checks.extend(genus_checks(omega)?);
    checks.extend(monodromy_checks(omega)?);
    checks.extend(higher_rank_checks(omega)?);
    if omega.im >= 1.0 {
        checks.extend(cusp_checks(omega)?);
    }
    Ok(Report::new(checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_aggregation() {
        let r = Report::new(vec![Check::below("a", 1.0, 2.0), Check::below("b", 3.0, 2.0)]);
        assert!(!r.passed);
        assert_eq!(r.failures().len(), 1);
        assert_eq!(r.failures()[0].name, "b");
        let r = Report::new(vec![Check::below("c", 3.0, 2.0).informational()]);
        assert!(r.passed && r.failures().is_empty());
    }

    #[test]
    fn monic_shape() {
        assert_eq!(monic(2), vec![c(1.0), c(0.0), c(0.0)]);
    }
}
