//! The spectral curve of a commuting pair: `Q` acting on the solution space of
//! `P u = X u`, written in the jet basis at a point `w`, and the plane curve
//! `det(Y - c(w, X)) = 0`.

use crate::error::{Error, Result};
use crate::operator::DifferentialOperator;
use crate::scalar::{binom, factorial, Ring, Scalar, ABS_FLOOR};
use crate::series::TruncatedSeries;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Polynomial in `X`, ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct XPoly<R: Ring = Scalar> {
    pub coeffs: Vec<R>,
}

impl<R: Ring> XPoly<R> {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: R) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `c X^d`.
    pub fn monomial(c: R, d: usize) -> Self {
        let mut coeffs = vec![R::zero(); d + 1];
        coeffs[d] = c;
        Self { coeffs }
    }

    pub fn coeff(&self, d: usize) -> R {
        self.coeffs.get(d).cloned().unwrap_or_else(R::zero)
    }

    pub fn plus(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self {
            coeffs: (0..n).map(|d| self.coeff(d).plus(&other.coeff(d))).collect(),
        }
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negated())
    }

    pub fn negated(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(Ring::negated).collect(),
        }
    }

    pub fn times(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero();
        }
        let mut coeffs = vec![R::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].plus(&a.times(b));
            }
        }
        Self { coeffs }
    }

    pub fn scale_ring(&self, c: &R) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|x| x.times(c)).collect(),
        }
    }

    pub fn magnitude(&self) -> f64 {
        self.coeffs.iter().map(Ring::magnitude).fold(0.0, f64::max)
    }

    /// Degree after dropping leading coefficients below `rel_tol * scale`.
    pub fn degree(&self, scale: f64, rel_tol: f64) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_negligible(scale, rel_tol))
    }
}

impl XPoly<Scalar> {
    pub fn eval(&self, x: Scalar) -> Scalar {
        self.coeffs.iter().rev().fold(Scalar::new(0.0, 0.0), |acc, c| acc * x + c)
    }
}

/// Rows `p_{r, 0..N}(w, X)` with `u^(r)(w) = sum_m p_{r,m} u^(m)(w)` for every
/// solution of `P u = X u`, for `r = 0..=r_max`. `P` must be monic and
/// expanded around `w`.
pub fn jet_transfer<R: Ring>(p: &DifferentialOperator<R>, r_max: usize) -> Result<Vec<Vec<XPoly<R>>>> {
    let n = p.order;
    if n == 0 {
        return Err(Error::Usage("operator of order 0 has no jets".into()));
    }
    check_monic(p)?;
    let window = p.window();
    let one = TruncatedSeries::constant(p.coeffs[0].variable, p.center(), R::one(), window);
    let zero = one.zero_like();
    // cur[m][d]: coefficient of X^d u^(m) in u^(r), as a z-series
    let mut cur: Vec<Vec<TruncatedSeries<R>>> = (0..n)
        .map(|m| vec![if m == 0 { one.clone() } else { zero.clone() }])
        .collect();
    let mut rows = Vec::with_capacity(r_max + 1);
    for r in 0..=r_max {
        let mut row = Vec::with_capacity(n);
        for entry in &cur {
            let coeffs = entry
                .iter()
                .map(|s| s.coeff(0).map_err(|_| Error::window(format!("jet row {r}"), 0, s.order_max())))
                .collect::<Result<Vec<R>>>()?;
            row.push(XPoly { coeffs });
        }
        rows.push(row);
        if r == r_max {
            break;
        }
        let deg = cur.iter().map(Vec::len).max().unwrap_or(1);
        let mut next: Vec<Vec<TruncatedSeries<R>>> = vec![Vec::with_capacity(deg + 1); n];
        for (m, slot) in next.iter_mut().enumerate() {
            for d in 0..=deg {
                let mut acc = cur[m].get(d).map(|s| s.derivative()).unwrap_or_else(|| zero.clone());
                if m >= 1 {
                    if let Some(s) = cur[m - 1].get(d) {
                        acc = acc.try_add(s)?;
                    }
                }
                slot.push(acc);
            }
        }
        // u^(N) = X u - sum_{k<N} a_k u^(k)
        for d in 0..cur[n - 1].len() {
            let top = cur[n - 1][d].clone();
            next[0][d + 1] = next[0][d + 1].try_add(&top)?;
            for (k, slot) in next.iter_mut().enumerate() {
                let a = p.coeff_of(k);
                if a.magnitude() > 0.0 {
                    slot[d] = slot[d].try_sub(&top.try_mul(a)?)?;
                }
            }
        }
        for slot in &mut next {
            while slot.len() > 1 && slot.last().is_some_and(|s| s.magnitude() == 0.0) {
                slot.pop();
            }
        }
        cur = next;
    }
    Ok(rows)
}

fn check_monic<R: Ring>(p: &DifferentialOperator<R>) -> Result<()> {
    let lead = &p.coeffs[0];
    let ok = lead.coeffs.iter().enumerate().all(|(i, c)| {
        let k = lead.order_min + i as i64;
        let target = if k == 0 { R::one() } else { R::zero() };
        c.minus(&target).is_negligible(1.0, 1e-12)
    });
    if ok {
        Ok(())
    } else {
        Err(Error::NotNormalForm("leading coefficient is not the constant 1".into()))
    }
}

/// `c_{l,m}(w, X)`: the `m`-th derivative at `w` of `Q C_l`, where `C_l` is
/// the solution of `P u = X u` with jet `e_l` at `w`. Then
/// `Q C_l = sum_m c_{l,m} C_m`.
#[derive(Debug, Clone)]
pub struct JetBasisMatrix<R: Ring = Scalar> {
    pub n: usize,
    pub basepoint: Scalar,
    /// `entries[l][m]`.
    pub entries: Vec<Vec<XPoly<R>>>,
}

impl JetBasisMatrix<Scalar> {
    /// Numeric matrix with rows indexed by `l`.
    pub fn eval(&self, x: Scalar) -> DMatrix<Scalar> {
        DMatrix::from_fn(self.n, self.n, |l, m| self.entries[l][m].eval(x))
    }
}

pub fn rep_matrix<R: Ring>(
    p: &DifferentialOperator<R>,
    q: &DifferentialOperator<R>,
) -> Result<JetBasisMatrix<R>> {
    let n = p.order;
    let mq = q.order;
    if (p.center() - q.center()).norm() > 1e-12 * (1.0 + p.center().norm()) {
        return Err(Error::Usage("P and Q must be expanded around the same point".into()));
    }
    let rows = jet_transfer(p, mq + n - 1)?;
    // bder[k][i] = i-th derivative at w of the coefficient of d^(M-k)
    let bder: Vec<Vec<R>> = q
        .coeffs
        .iter()
        .map(|b| {
            (0..n)
                .map(|i| {
                    b.coeff(i as i64)
                        .map(|c| c.scaled(Scalar::new(factorial(i), 0.0)))
                        .map_err(|_| Error::window("coefficient of Q at the basepoint", i as i64, b.order_max()))
                })
                .collect::<Result<Vec<R>>>()
        })
        .collect::<Result<_>>()?;
    let mut entries = vec![vec![XPoly::zero(); n]; n];
    for (l, row) in entries.iter_mut().enumerate() {
        for (m, slot) in row.iter_mut().enumerate() {
            let mut acc = XPoly::zero();
            for (k, bk) in bder.iter().enumerate() {
                for (i, bki) in bk.iter().enumerate().take(m + 1) {
                    let r = mq - k + m - i;
                    let term = rows[r][l].scale_ring(&bki.scaled(Scalar::new(binom(m, i), 0.0)));
                    acc = acc.plus(&term);
                }
            }
            *slot = acc;
        }
    }
    Ok(JetBasisMatrix {
        n,
        basepoint: p.center(),
        entries,
    })
}

/// `F(X, Y) = sum f_{j,k} X^j Y^k`.
#[derive(Debug, Clone)]
pub struct PlaneCurve<R: Ring = Scalar> {
    pub n: usize,
    pub m: usize,
    pub weight_k: Option<i32>,
    /// `coeffs[j][k] = f_{j,k}`.
    pub coeffs: Vec<Vec<R>>,
}

impl<R: Ring> PlaneCurve<R> {
    pub fn f(&self, j: usize, k: usize) -> R {
        self.coeffs.get(j).and_then(|r| r.get(k)).cloned().unwrap_or_else(R::zero)
    }

    pub fn magnitude(&self) -> f64 {
        self.coeffs.iter().flatten().map(Ring::magnitude).fold(0.0, f64::max)
    }

    /// Nonzero `(j, k, f_{j,k})` relative to the largest coefficient.
    pub fn terms(&self, rel_tol: f64) -> Vec<(usize, usize, R)> {
        let scale = self.magnitude();
        let mut out = Vec::new();
        for (j, row) in self.coeffs.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                if !c.is_negligible(scale, rel_tol) {
                    out.push((j, k, c.clone()));
                }
            }
        }
        out
    }

    pub fn deg_x(&self, rel_tol: f64) -> usize {
        self.terms(rel_tol).iter().map(|t| t.0).max().unwrap_or(0)
    }

    /// Weight `N K - N j - K k` carried by `f_{j,k}`.
    pub fn coeff_weight(&self, j: usize, k: usize) -> Option<i64> {
        let kk = self.weight_k? as i64;
        let n = self.n as i64;
        Some(n * kk - n * j as i64 - kk * k as i64)
    }
}

impl PlaneCurve<Scalar> {
    pub fn eval(&self, x: Scalar, y: Scalar) -> Scalar {
        let mut acc = Scalar::new(0.0, 0.0);
        for (j, row) in self.coeffs.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                acc += c * x.powi(j as i32) * y.powi(k as i32);
            }
        }
        acc
    }

    /// Largest coefficient difference relative to the larger curve.
    pub fn distance(&self, other: &Self) -> f64 {
        let jn = self.coeffs.len().max(other.coeffs.len());
        let kn = self.n.max(other.n) + 1;
        let scale = self.magnitude().max(other.magnitude()).max(ABS_FLOOR);
        let mut d: f64 = 0.0;
        for j in 0..jn {
            for k in 0..kn {
                d = d.max((self.f(j, k) - other.f(j, k)).norm());
            }
        }
        d / scale
    }

    /// The `Y`-roots over a given `X`.
    pub fn fibre(&self, x: Scalar) -> Result<Vec<Scalar>> {
        let ycoef: Vec<Scalar> = (0..=self.n)
            .map(|k| (0..self.coeffs.len()).map(|j| self.f(j, k) * x.powi(j as i32)).sum())
            .collect();
        poly_roots(&ycoef)
    }
}

/// Characteristic polynomial `det(Y - c)`, computed division-free
/// (Berkowitz) over the polynomial ring in `X`.
pub fn char_poly<R: Ring>(c: &JetBasisMatrix<R>, m: usize, weight_k: Option<i32>) -> PlaneCurve<R> {
    let n = c.n;
    let a = &c.entries;
    // vect: coefficients of the char poly of the leading block, highest Y power first
    let mut vect: Vec<XPoly<R>> = vec![XPoly::constant(R::one())];
    for r in 0..n {
        // Toeplitz column: 1, -a_rr, -R C, -R S C, ...
        let mut t = vec![XPoly::constant(R::one()), a[r][r].negated()];
        let mut sc: Vec<XPoly<R>> = (0..r).map(|i| a[i][r].clone()).collect();
        for _ in 0..r {
            let rc = (0..r).fold(XPoly::zero(), |acc, i| acc.plus(&a[r][i].times(&sc[i])));
            t.push(rc.negated());
            sc = (0..r)
                .map(|i| (0..r).fold(XPoly::zero(), |acc, k| acc.plus(&a[i][k].times(&sc[k]))))
                .collect();
        }
        let mut next = vec![XPoly::zero(); r + 2];
        for (row, slot) in next.iter_mut().enumerate() {
            for (col, v) in vect.iter().enumerate() {
                if row >= col {
                    *slot = slot.plus(&t[row - col].times(v));
                }
            }
        }
        vect = next;
    }
    let deg_x = vect.iter().map(|p| p.coeffs.len()).max().unwrap_or(1);
    let mut coeffs = vec![vec![R::zero(); n + 1]; deg_x];
    for (i, poly) in vect.iter().enumerate() {
        let k = n - i;
        for (j, f) in poly.coeffs.iter().enumerate() {
            coeffs[j][k] = f.clone();
        }
    }
    PlaneCurve {
        n,
        m,
        weight_k,
        coeffs,
    }
}

/// Largest relative mismatch between `F(X, Y)` and a direct LU determinant of
/// `Y - c(X)` at a few sample points.
pub fn char_poly_cross_check(c: &JetBasisMatrix, curve: &PlaneCurve) -> f64 {
    let samples = [
        (Scalar::new(0.7, 0.2), Scalar::new(-0.3, 1.1)),
        (Scalar::new(-1.3, 0.5), Scalar::new(2.0, -0.4)),
        (Scalar::new(2.1, -1.7), Scalar::new(0.9, 0.6)),
    ];
    let mut worst: f64 = 0.0;
    for (x, y) in samples {
        let cx = c.eval(x);
        let a = DMatrix::from_diagonal_element(c.n, c.n, y) - &cx;
        let det = a.determinant();
        let scale = (cx.norm() + y.norm()).powi(c.n as i32).max(ABS_FLOOR);
        worst = worst.max((det - curve.eval(x, y)).norm() / scale);
    }
    worst
}

/// Relative size of `F(P, Q)` against its largest term.
pub fn bc_residual<R: Ring>(
    curve: &PlaneCurve<R>,
    p: &DifferentialOperator<R>,
    q: &DifferentialOperator<R>,
    rel_tol: f64,
) -> Result<f64> {
    let terms = curve.terms(rel_tol);
    let jmax = terms.iter().map(|t| t.0).max().unwrap_or(0);
    let kmax = terms.iter().map(|t| t.1).max().unwrap_or(0);
    let window = p.window().min(q.window());
    let id = DifferentialOperator::derivation_power(0, p.center(), window);
    let mut ppow = vec![id.clone()];
    for j in 1..=jmax {
        ppow.push(ppow[j - 1].compose(p)?);
    }
    let mut qpow = vec![id];
    for k in 1..=kmax {
        qpow.push(qpow[k - 1].compose(q)?);
    }
    let mut acc: Option<DifferentialOperator<R>> = None;
    let mut scale: f64 = 0.0;
    for (j, k, f) in &terms {
        let term = ppow[*j].compose(&qpow[*k])?.scale(f);
        scale = scale.max(term.magnitude());
        acc = Some(match acc {
            None => term,
            Some(a) => a.try_add(&term)?,
        });
    }
    let acc = acc.ok_or_else(|| Error::Usage("zero curve".into()))?;
    Ok(acc.magnitude() / scale.max(ABS_FLOOR))
}

/// Gap below which two eigenvalues count as a ramification point.
pub const BRANCH_GAP: f64 = 1e-8;

/// The eigenvector `h` with `h_0 = 1` of `Q` on solutions over `(X, Y)`:
/// `psi = sum_l h_l C_l` and `Q psi = Y psi`, i.e. `c^T h = Y h` with `c`
/// indexed `[l][m]`.
pub fn eigenvector_h(c: &JetBasisMatrix, x: Scalar, y: Scalar, tol: f64) -> Result<Vec<Scalar>> {
    let n = c.n;
    let ct = c.eval(x).transpose();
    let eig = ct
        .clone()
        .eigenvalues()
        .ok_or_else(|| Error::NonConvergent("eigenvalues of c(w, X)".into()))?;
    let scale = eig.iter().map(|e| e.norm()).fold(y.norm(), f64::max).max(1.0);
    let (best, dist) = eig
        .iter()
        .enumerate()
        .map(|(i, e)| (i, (e - y).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("n >= 1");
    if dist > tol * scale {
        return Err(Error::OffCurve(dist / scale));
    }
    let gap = eig
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best)
        .map(|(_, e)| (e - eig[best]).norm())
        .fold(f64::INFINITY, f64::min);
    if gap < BRANCH_GAP * scale {
        return Err(Error::BranchPoint {
            gap: gap / scale,
            threshold: BRANCH_GAP,
        });
    }
    let a = ct - DMatrix::from_diagonal_element(n, n, eig[best]);
    if n == 1 {
        return Ok(vec![Scalar::new(1.0, 0.0)]);
    }
    let lhs = a.columns(1, n - 1).into_owned();
    let rhs: DVector<Scalar> = -a.column(0).into_owned();
    let sol = lhs
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Degenerate(format!("eigenvector solve: {e}")))?;
    let mut h = vec![Scalar::new(1.0, 0.0)];
    h.extend(sol.iter().copied());
    // h_0 = 1 is impossible when the eigenvector has vanishing first entry
    let res = (&a * DVector::from_vec(h.clone())).norm();
    let hn = h.iter().map(|v| v.norm()).fold(1.0, f64::max);
    if res > 1e-6 * scale * hn {
        return Err(Error::Degenerate(format!(
            "eigenvector has h_0 = 0 (normalized residual {:e})",
            res / (scale * hn)
        )));
    }
    Ok(h)
}

/// Roots of `sum c_i t^i` (ascending) via companion eigenvalues.
pub fn poly_roots(c: &[Scalar]) -> Result<Vec<Scalar>> {
    let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let deg = c
        .iter()
        .rposition(|x| x.norm() > 1e-13 * scale)
        .ok_or_else(|| Error::Degenerate("zero polynomial".into()))?;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = c[deg];
    let comp = DMatrix::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -c[deg - 1 - j] / lead
        } else if i == j + 1 {
            Scalar::new(1.0, 0.0)
        } else {
            Scalar::new(0.0, 0.0)
        }
    });
    comp.eigenvalues()
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::NonConvergent("polynomial roots".into()))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GenusReport {
    pub newton_interior: u64,
    pub hyperelliptic_genus: Option<u32>,
    pub smooth: Option<bool>,
    /// Adopted arithmetic genus; absent when the curve is non-reduced or
    /// reducible.
    pub varpi: Option<u32>,
    pub degenerate: bool,
    pub note: Option<String>,
}

/// Relative tolerance for deciding which coefficients of `F` are nonzero.
pub const SUPPORT_TOL: f64 = 1e-9;

pub fn genus(curve: &PlaneCurve) -> Result<GenusReport> {
    let support: Vec<(i64, i64)> = curve
        .terms(SUPPORT_TOL)
        .iter()
        .map(|t| (t.0 as i64, t.1 as i64))
        .collect();
    if support.is_empty() {
        return Err(Error::Degenerate("zero polynomial".into()));
    }
    let newton_interior = interior_points(&support);
    let mut report = GenusReport {
        newton_interior,
        hyperelliptic_genus: None,
        smooth: None,
        varpi: Some(newton_interior as u32),
        degenerate: false,
        note: None,
    };
    if curve.n != 2 {
        return Ok(report);
    }
    // (Y + f1/2)^2 = f1^2/4 - f0
    let deg = curve.coeffs.len();
    let f1 = XPoly {
        coeffs: (0..deg).map(|j| curve.f(j, 1)).collect(),
    };
    let f0 = XPoly {
        coeffs: (0..deg).map(|j| curve.f(j, 0)).collect(),
    };
    let rhs = f1.times(&f1).scale_ring(&Scalar::new(0.25, 0.0)).minus(&f0);
    let scale = curve.magnitude().powi(2).max(curve.magnitude());
    if rhs.degree(scale, SUPPORT_TOL).is_none() {
        report.degenerate = true;
        report.varpi = None;
        report.note = Some("non-reduced: F is a perfect square".into());
        return Ok(report);
    }
    let roots = poly_roots(&rhs.coeffs)?;
    let mults = cluster(&roots, 1e-5);
    let odd = mults.iter().filter(|&&m| m % 2 == 1).count();
    if odd == 0 {
        report.degenerate = true;
        report.varpi = None;
        report.note = Some("reducible: F splits into two factors linear in Y".into());
        return Ok(report);
    }
    let g = ((odd - 1) / 2) as u32;
    report.hyperelliptic_genus = Some(g);
    report.smooth = Some(mults.iter().all(|&m| m == 1));
    report.varpi = Some(g);
    if report.smooth == Some(false) {
        report.note = Some("repeated roots: genus of the normalization".into());
    }
    Ok(report)
}

/// Multiplicities of root clusters, grouping roots closer than
/// `rel_tol * (1 + |root|)`.
fn cluster(roots: &[Scalar], rel_tol: f64) -> Vec<usize> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut m = 1;
        for j in i + 1..roots.len() {
            if !used[j] && (roots[i] - roots[j]).norm() <= rel_tol * (1.0 + roots[i].norm()) {
                used[j] = true;
                m += 1;
            }
        }
        out.push(m);
    }
    out
}

/// Lattice points strictly inside the convex hull of `pts` (Pick's theorem).
pub fn interior_points(pts: &[(i64, i64)]) -> u64 {
    let hull = convex_hull(pts);
    if hull.len() < 3 {
        return 0;
    }
    let mut area2: i64 = 0;
    let mut boundary: i64 = 0;
    for i in 0..hull.len() {
        let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
        area2 += a.0 * b.1 - a.1 * b.0;
        boundary += gcd_i((b.0 - a.0).abs(), (b.1 - a.1).abs());
    }
    // 2I = 2A - B + 2
    ((area2.abs() - boundary + 2) / 2) as u64
}

fn gcd_i(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd_i(b, a % b)
    }
}

/// Andrew's monotone chain; collinear points dropped.
fn convex_hull(pts: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut p: Vec<(i64, i64)> = pts.to_vec();
    p.sort();
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Sufficient condition for every coefficient of the commutant to be
/// single-valued: `N` prime and `varpi < N`. `false` is inconclusive.
///
/// `coprime` must state whether some `A_s != 0` has `s` coprime to `N`; the
/// criterion refuses to run otherwise.
pub fn single_valued_criterion(n: usize, report: &GenusReport, coprime: bool) -> Result<bool> {
    if !coprime {
        return Err(Error::Usage(
            "no nonzero A_s with s coprime to N; the criterion does not apply".into(),
        ));
    }
    let prime = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
    Ok(prime && report.varpi.is_some_and(|v| (v as usize) < n))
}

#[derive(Serialize, Deserialize)]
struct CurveJson {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "K")]
    k: Option<i32>,
    coeffs: Vec<(usize, usize, [f64; 2])>,
}

impl Serialize for PlaneCurve<Scalar> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut coeffs = Vec::new();
        for (j, row) in self.coeffs.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                if c.norm() > 0.0 {
                    coeffs.push((j, k, [c.re, c.im]));
                }
            }
        }
        CurveJson {
            n: self.n,
            m: self.m,
            k: self.weight_k,
            coeffs,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PlaneCurve<Scalar> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = CurveJson::deserialize(d)?;
        let deg_x = raw.coeffs.iter().map(|c| c.0 + 1).max().unwrap_or(1);
        let deg_y = raw.coeffs.iter().map(|c| c.1).max().unwrap_or(0).max(raw.n);
        let mut coeffs = vec![vec![Scalar::new(0.0, 0.0); deg_y + 1]; deg_x];
        for (j, k, v) in raw.coeffs {
            coeffs[j][k] += Scalar::new(v[0], v[1]);
        }
        Ok(PlaneCurve {
            n: raw.n,
            m: raw.m,
            weight_k: raw.k,
            coeffs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Variable;

    fn c(re: f64) -> Scalar {
        Scalar::new(re, 0.0)
    }

    fn free(n: usize) -> DifferentialOperator {
        DifferentialOperator::derivation_power(n, c(0.0), 12)
    }

    fn curve(n: usize, terms: &[(usize, usize, f64)]) -> PlaneCurve {
        let dx = terms.iter().map(|t| t.0).max().unwrap() + 1;
        let mut coeffs = vec![vec![c(0.0); n + 1]; dx];
        for &(j, k, v) in terms {
            coeffs[j][k] = c(v);
        }
        PlaneCurve {
            n,
            m: 0,
            weight_k: None,
            coeffs,
        }
    }

    #[test]
    fn jets_of_free_operator() {
        let rows = jet_transfer(&free(2), 3).unwrap();
        assert_eq!(rows[0][0].coeffs, vec![c(1.0)]);
        assert_eq!(rows[1][1].coeffs, vec![c(1.0)]);
        assert_eq!(rows[2][0].eval(c(5.0)), c(5.0));
        assert_eq!(rows[2][1].eval(c(5.0)), c(0.0));
        assert_eq!(rows[3][0].eval(c(5.0)), c(0.0));
        assert_eq!(rows[3][1].eval(c(5.0)), c(5.0));
    }

    #[test]
    fn rep_matrix_trivial_cases() {
        let p = free(2);
        let x = Scalar::new(1.5, -0.5);
        let cp = rep_matrix(&p, &p).unwrap().eval(x);
        assert!((cp - DMatrix::from_diagonal_element(2, 2, x)).norm() < 1e-14);
        let id = DifferentialOperator::derivation_power(0, c(0.0), 12);
        let ci = rep_matrix(&p, &id).unwrap().eval(x);
        assert!((ci - DMatrix::identity(2, 2)).norm() < 1e-14);
        let f = char_poly(&rep_matrix(&p, &p).unwrap(), 2, None);
        // (Y - X)^2
        assert_eq!(f.f(0, 2), c(1.0));
        assert_eq!(f.f(1, 1), c(-2.0));
        assert_eq!(f.f(2, 0), c(1.0));
        let g = genus(&f).unwrap();
        assert!(g.degenerate && g.varpi.is_none());
    }

    #[test]
    fn berkowitz_matches_lu() {
        let entries = (0..3)
            .map(|l| {
                (0..3)
                    .map(|m| XPoly {
                        coeffs: vec![Scalar::new(l as f64 - m as f64, 0.3 * l as f64), Scalar::new(0.1 * m as f64, 1.0)],
                    })
                    .collect()
            })
            .collect();
        let jm = JetBasisMatrix {
            n: 3,
            basepoint: c(0.0),
            entries,
        };
        let f = char_poly(&jm, 3, None);
        assert!(char_poly_cross_check(&jm, &f) < 1e-13);
    }

    #[test]
    fn genus_examples() {
        let cubic = genus(&curve(2, &[(0, 2, 1.0), (3, 0, -1.0), (1, 0, -2.0), (0, 0, -1.0)])).unwrap();
        assert_eq!(cubic.newton_interior, 1);
        assert_eq!(cubic.varpi, Some(1));
        assert_eq!(cubic.smooth, Some(true));
        let quintic = genus(&curve(2, &[(0, 2, 1.0), (5, 0, -1.0), (1, 0, -3.0), (0, 0, -1.0)])).unwrap();
        assert_eq!(quintic.newton_interior, 2);
        assert_eq!(quintic.varpi, Some(2));
        // Y^2 = X^2 (X - 1): node at the origin
        let nodal = genus(&curve(2, &[(0, 2, 1.0), (3, 0, -1.0), (2, 0, 1.0)])).unwrap();
        assert_eq!(nodal.hyperelliptic_genus, Some(0));
        assert_eq!(nodal.smooth, Some(false));
        // (Y - X)(Y + X)
        let split = genus(&curve(2, &[(0, 2, 1.0), (2, 0, -1.0)])).unwrap();
        assert!(split.degenerate);
    }

    #[test]
    fn criterion_thresholds() {
        let g = |v| GenusReport {
            newton_interior: v as u64,
            hyperelliptic_genus: Some(v),
            smooth: Some(true),
            varpi: Some(v),
            degenerate: false,
            note: None,
        };
        assert!(single_valued_criterion(2, &g(1), true).unwrap());
        assert!(!single_valued_criterion(2, &g(2), true).unwrap());
        assert!(!single_valued_criterion(4, &g(1), true).unwrap());
        assert!(single_valued_criterion(3, &g(2), true).unwrap());
        assert!(single_valued_criterion(2, &g(1), false).is_err());
    }

    #[test]
    fn eigenvector_split_and_errors() {
        let jm = JetBasisMatrix {
            n: 2,
            basepoint: c(0.0),
            entries: vec![
                vec![XPoly::monomial(c(1.0), 1), XPoly::zero()],
                vec![XPoly::zero(), XPoly::monomial(c(-1.0), 1)],
            ],
        };
        let x = c(2.0);
        let h = eigenvector_h(&jm, x, c(2.0), 1e-10).unwrap();
        assert!((h[0] - c(1.0)).norm() < 1e-14 && h[1].norm() < 1e-14);
        assert!(matches!(eigenvector_h(&jm, x, c(3.0), 1e-10), Err(Error::OffCurve(_))));
        assert!(matches!(
            eigenvector_h(&jm, c(1e-12), c(0.0), 1e-6),
            Err(Error::BranchPoint { .. })
        ));
    }

    #[test]
    fn curve_json_roundtrip() {
        let f = curve(2, &[(0, 2, 1.0), (3, 0, -1.0), (1, 0, 0.5)]);
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"N\":2"));
        let g: PlaneCurve = serde_json::from_str(&s).unwrap();
        assert!(f.distance(&g) == 0.0);
    }

    #[test]
    fn interior_point_counts() {
        assert_eq!(interior_points(&[(0, 0), (3, 0), (0, 2)]), 1);
        assert_eq!(interior_points(&[(0, 0), (5, 0), (0, 2)]), 2);
        assert_eq!(interior_points(&[(0, 0), (1, 0), (2, 0)]), 0);
        assert_eq!(interior_points(&[(0, 0), (4, 0), (4, 4), (0, 4), (2, 2)]), 9);
    }

    #[test]
    fn constant_coefficient_jets_cross_checked() {
        // P = d^2 + a: u'' = (X - a) u
        let a = Scalar::new(0.3, 0.2);
        let k = TruncatedSeries::constant(Variable::Z, c(0.0), a, 12);
        let mut p = free(2);
        p.coeffs[2] = k;
        let rows = jet_transfer(&p, 4).unwrap();
        let x = Scalar::new(1.0, 1.0);
        let mu2 = x - a;
        assert!((rows[4][0].eval(x) - mu2 * mu2).norm() < 1e-13);
    }
}
