//! Construction of the operator commuting with `P` that has a prescribed
//! principal part, and the graded-ring bookkeeping around it.

use crate::baker_akhiezer::{commutator_residual, eigen_series, BAExpansion, SpectralSeries};
use crate::elliptic::ModularElement;
use crate::error::{Error, Result};
use crate::modular::{relative_variation, verify_weight, Sample};
use crate::operator::DifferentialOperator;
use crate::qseries::QSeries;
use crate::scalar::{binom, Ring, Scalar, ABS_FLOOR};
use crate::series::TruncatedSeries;
use serde::Serialize;
use std::cell::RefCell;
use std::collections::HashMap;

/// `A_{-m} lambda^m + ... + A_0`.
#[derive(Debug, Clone)]
pub struct PrincipalPart<R: Ring = Scalar> {
    pub m: usize,
    pub weight: i32,
    /// `A_{-m}, ..., A_0`.
    pub entries: Vec<R>,
}

impl<R: Ring> PrincipalPart<R> {
    pub fn new(weight: i32, entries: Vec<R>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Usage("principal part needs at least one entry".into()));
        }
        if entries[0].magnitude() == 0.0 {
            return Err(Error::Usage("leading entry of the principal part must be nonzero".into()));
        }
        Ok(Self {
            m: entries.len() - 1,
            weight,
            entries,
        })
    }

    /// `A_s` for `-m <= s <= 0`.
    pub fn a(&self, s: i64) -> R {
        self.entries[(s + self.m as i64) as usize].clone()
    }
}

#[derive(Debug, Clone)]
pub struct Commutant<R: Ring = Scalar> {
    pub q: DifferentialOperator<R>,
    pub spectral: SpectralSeries<R>,
    /// `|[P, Q]| / |PQ|`.
    pub commutator_residual: f64,
}

/// Builds `Q` from its principal part, then reads off the tail `A_s`, `s >= 1`.
pub fn build_commutant<R: Ring>(
    p: &DifferentialOperator<R>,
    prin: &PrincipalPart<R>,
    ba: &BAExpansion<R>,
    rel_tol: f64,
) -> Result<Commutant<R>> {
    let m = prin.m;
    let b = solve_coefficients(&prin.entries, ba)?;
    let mut q = DifferentialOperator::new(b)?.with_poles(p.pole_set.clone());
    q.weight = Some(prin.weight);
    let spectral = eigen_series(&q, ba, rel_tol.max(1e-9)).map_err(|e| match e {
        Error::NotCommuting { residual, .. } => Error::NotRealizable(format!(
            "quotient Q Psi / Psi depends on z (relative {residual:e})"
        )),
        other => other,
    })?;
    let scale = prin.entries.iter().map(Ring::magnitude).fold(0.0, f64::max);
    for s in -(m as i64)..=0 {
        let d = spectral.a(s)?.minus(&prin.a(s));
        if !d.is_negligible(scale, rel_tol.max(1e-9)) {
            return Err(Error::NotRealizable(format!(
                "principal part not reproduced at lambda^{}",
                -s
            )));
        }
    }
    let commutator_residual = commutator_residual(p, &q)?;
    Ok(Commutant {
        q,
        spectral,
        commutator_residual,
    })
}

/// `b_0, ..., b_m` of the operator whose eigen-series starts with `entries`
/// (`A_{-m}, ..., A_0`); linear in `entries`. Each equation is unitriangular
/// because `xi_0 = 1`.
fn solve_coefficients<R: Ring>(entries: &[R], ba: &BAExpansion<R>) -> Result<Vec<TruncatedSeries<R>>> {
    let m = entries.len() - 1;
    if ba.s_max() < m {
        return Err(Error::window("Baker-Akhiezer order for the commutant", m as i64, ba.s_max() as i64));
    }
    let a = |t: i64| &entries[(t + m as i64) as usize];
    // dxi[s][d] = d-th derivative of xi_s
    let dxi: Vec<Vec<TruncatedSeries<R>>> = ba.xi[..=m]
        .iter()
        .map(|x| {
            let mut v = vec![x.clone()];
            for d in 1..=m {
                let next = v[d - 1].derivative();
                v.push(next);
            }
            v
        })
        .collect();
    let mut b: Vec<TruncatedSeries<R>> = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let mut acc = dxi[0][0].zero_like();
        for t in -(m as i64)..=(j as i64 - m as i64) {
            let u = (j as i64 - m as i64 - t) as usize;
            acc = acc.try_add(&dxi[u][0].scale_ring(a(t)))?;
        }
        for (i, bi) in b.iter().enumerate() {
            for d in 0..=(j - i).min(m - i) {
                let s = j - i - d;
                let term = bi.try_mul(&dxi[s][d])?.scale(Scalar::new(binom(m - i, d), 0.0));
                acc = acc.try_sub(&term)?;
            }
        }
        if acc.order_max() < 0 {
            return Err(Error::window(format!("coefficient b_{j}"), 0, acc.order_max()));
        }
        b.push(acc);
    }
    Ok(b)
}

/// Indices `s` in `(-m, 0]` where a weight-`k` principal part may carry a
/// nonzero entry: `dim M_{k+s} > 0`.
pub fn modular_free_slots(k: i64, m: usize) -> Vec<i64> {
    (-(m as i64) + 1..=0).filter(|&s| dim_modular_forms(k + s) > 0).collect()
}

/// Fills the entries at `free` (indices `s` of `A_s`) so that the resulting
/// operator commutes with `P`, keeping all other entries of `prin` fixed.
///
/// `[P, Q]` is linear in the principal part, so this is a least-squares
/// problem on the coefficients of the commutator, each row normalized by its
/// largest entry. The result is not checked here; pass it to
/// [`build_commutant`].
pub fn complete_principal_part(
    p: &DifferentialOperator,
    prin: &PrincipalPart,
    free: &[i64],
    ba: &BAExpansion,
) -> Result<PrincipalPart> {
    let m = prin.m;
    for &s in free {
        if s <= -(m as i64) || s > 0 {
            return Err(Error::Usage(format!("free slot {s} outside (-{m}, 0]")));
        }
    }
    if free.is_empty() {
        return Ok(prin.clone());
    }
    let zero = Scalar::new(0.0, 0.0);
    let residual_of = |entries: &[Scalar]| -> Result<Vec<Scalar>> {
        let mut q = DifferentialOperator::new(solve_coefficients(entries, ba)?)?;
        q.pole_set = p.pole_set.clone();
        let c = p.commutator(&q)?;
        Ok(c.coeffs.iter().flat_map(|s| s.coeffs.iter().copied()).collect())
    };
    let mut base = prin.entries.clone();
    for &s in free {
        base[(s + m as i64) as usize] = zero;
    }
    let r0 = residual_of(&base)?;
    let mut cols = Vec::with_capacity(free.len());
    for &s in free {
        let mut e = vec![zero; m + 1];
        e[(s + m as i64) as usize] = Scalar::new(1.0, 0.0);
        let c = residual_of(&e)?;
        if c.len() != r0.len() {
            return Err(Error::Degenerate("commutator windows differ between columns".into()));
        }
        cols.push(c);
    }
    let rows: Vec<usize> = (0..r0.len())
        .filter(|&i| cols.iter().any(|c| c[i].norm() > 0.0) || r0[i].norm() > 0.0)
        .collect();
    let a = nalgebra::DMatrix::from_fn(rows.len(), free.len(), |r, c| {
        let i = rows[r];
        let w = cols.iter().map(|col| col[i].norm()).fold(r0[i].norm(), f64::max);
        cols[c][i] / w
    });
    let rhs = nalgebra::DVector::from_fn(rows.len(), |r, _| {
        let i = rows[r];
        let w = cols.iter().map(|col| col[i].norm()).fold(r0[i].norm(), f64::max);
        -r0[i] / w
    });
    let x = a
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Degenerate(format!("least squares for the principal part: {e}")))?;
    let mut entries = prin.entries.clone();
    for (k, &s) in free.iter().enumerate() {
        entries[(s + m as i64) as usize] = x[k];
    }
    PrincipalPart::new(prin.weight, entries)
}

/// `dim M_k(SL(2,Z))` counted as `#{(a, b) >= 0 : 4a + 6b = k}`.
pub fn dim_modular_forms(k: i64) -> usize {
    if k < 0 {
        return 0;
    }
    (0..=k / 6).filter(|b| (k - 6 * b) % 4 == 0).count()
}

/// `sum_{s=0}^{min(m_cap, K)} dim M_{K-s}`.
pub fn dim_dk(k: i64, m_cap: i64) -> usize {
    (0..=m_cap.min(k).max(-1)).map(|s| dim_modular_forms(k - s)).sum()
}

/// Monomial bases `E4^a E6^b` of the pieces `M_{K-s}` for `s = 0..=min(M, K)`.
#[derive(Debug, Clone, Serialize)]
pub struct GradedRingView {
    pub weight: i64,
    pub pieces: Vec<GradedPiece>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradedPiece {
    pub s: i64,
    pub weight: i64,
    pub basis: Vec<String>,
}

impl GradedRingView {
    pub fn new(k: i64, m_cap: i64) -> Self {
        let pieces = (0..=m_cap.min(k).max(-1))
            .map(|s| {
                let w = k - s;
                let basis = (0..=w / 6)
                    .filter(|b| (w - 6 * b) % 4 == 0)
                    .map(|b| format!("E4^{} E6^{}", (w - 6 * b) / 4, b))
                    .collect();
                GradedPiece { s, weight: w, basis }
            })
            .collect();
        Self { weight: k, pieces }
    }

    pub fn dim(&self) -> usize {
        self.pieces.iter().map(|p| p.basis.len()).sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TailWeightEntry {
    pub s: i64,
    pub weight: i64,
    pub vanishing: bool,
    pub max_rel_error: f64,
    pub holomorphic_at_cusp: Option<bool>,
    pub passes: bool,
}

/// Checks `A_s(alpha(omega)) = j^(K+s) A_s(omega)` for `alpha` in `{S, T}`.
///
/// `run` produces the spectral series of the pipeline at a given `omega`;
/// results are memoized. When a q-ring run is supplied, the cusp behaviour of
/// each `A_s` is read off its expansion.
pub fn tail_weights(
    run: &dyn Fn(Scalar) -> Result<SpectralSeries>,
    k: i32,
    samples: &[Scalar],
    s_cap: i64,
    q_run: Option<&SpectralSeries<QSeries>>,
    rel_tol: f64,
) -> Result<Vec<TailWeightEntry>> {
    let cache: RefCell<HashMap<(u64, u64), SpectralSeries>> = RefCell::new(HashMap::new());
    let get = |om: Scalar| -> Result<SpectralSeries> {
        let key = (om.re.to_bits(), om.im.to_bits());
        if let Some(v) = cache.borrow().get(&key) {
            return Ok(v.clone());
        }
        let v = run(om)?;
        cache.borrow_mut().insert(key, v.clone());
        Ok(v)
    };
    let mut out = Vec::new();
    for s in 1..=s_cap {
        let f = |om: Scalar, _z: Scalar| -> Result<Scalar> { get(om)?.a(s) };
        // vanishing if negligible against the principal part at every sample
        let mut vanishing = true;
        for &om in samples {
            let a = get(om)?;
            let scale = a.principal().iter().map(|x| x.norm()).fold(0.0, f64::max);
            let scale = (1..=s).filter_map(|t| a.a(t).ok()).map(|x| x.norm()).fold(scale, f64::max);
            if a.a(s)?.norm() > 1e-9 * scale.max(ABS_FLOOR) {
                vanishing = false;
            }
        }
        let sample_list: Vec<Sample> = samples.iter().map(|&om| Sample::omega(om)).collect();
        let mut max_rel_error: f64 = 0.0;
        if !vanishing {
            for alpha in [ModularElement::S, ModularElement::T] {
                let r = verify_weight(&f, k + s as i32, &alpha, &sample_list);
                if r.checked == 0 {
                    return Err(Error::Verification(format!("no usable samples for A_{s}")));
                }
                max_rel_error = max_rel_error.max(r.max_rel_error);
            }
        }
        let holomorphic_at_cusp = q_run.and_then(|qa| qa.a(s).ok()).map(|x| x.is_cusp_holomorphic());
        let weight = k as i64 + s;
        let mut passes = vanishing || max_rel_error < rel_tol;
        if weight == 0 && !vanishing {
            let vals: Vec<Scalar> = samples.iter().map(|&om| f(om, Scalar::default())).collect::<Result<_>>()?;
            passes &= relative_variation(&vals)? < rel_tol;
        }
        passes &= holomorphic_at_cusp.unwrap_or(true);
        out.push(TailWeightEntry {
            s,
            weight,
            vanishing,
            max_rel_error,
            holomorphic_at_cusp,
            passes,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(dim_dk(3, 3), 1);
        assert_eq!(dim_dk(0, 0), 1);
        assert_eq!(dim_dk(5, 5), 2);
        assert_eq!(dim_modular_forms(12), 2);
        assert_eq!(dim_modular_forms(2), 0);
        let v = GradedRingView::new(5, 5);
        assert_eq!(v.dim(), 2);
        assert_eq!(v.pieces[1].basis, vec!["E4^1 E6^0".to_string()]);
    }

    #[test]
    fn principal_part_validation() {
        assert!(PrincipalPart::<Scalar>::new(3, vec![]).is_err());
        assert!(PrincipalPart::new(3, vec![Scalar::new(0.0, 0.0)]).is_err());
        let p = PrincipalPart::new(3, vec![Scalar::new(1.0, 0.0); 4]).unwrap();
        assert_eq!(p.m, 3);
    }
}
