//! Analytic continuation of solutions of `P u = X u` along polygonal paths,
//! monodromy matrices, and the permutation a loop induces on the eigenlines
//! of a commuting `Q`.

use crate::error::{Error, Result};
use crate::operator::DifferentialOperator;
use crate::scalar::{Scalar, ABS_FLOOR};
use crate::spectral_curve::{rep_matrix, BRANCH_GAP};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub const DEFAULT_CLEARANCE: f64 = 0.05;

/// Polygonal path; the basepoint is the first vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    pub vertices: Vec<Scalar>,
}

impl PathSpec {
    pub fn new(vertices: Vec<Scalar>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Usage("path needs at least one vertex".into()));
        }
        Ok(Self { vertices })
    }

    pub fn basepoint(&self) -> Scalar {
        self.vertices[0]
    }

    pub fn end(&self) -> Scalar {
        *self.vertices.last().expect("nonempty")
    }

    pub fn is_closed(&self) -> bool {
        (self.end() - self.basepoint()).norm() <= 1e-12 * (1.0 + self.basepoint().norm())
    }

    pub fn reversed(&self) -> Self {
        Self {
            vertices: self.vertices.iter().rev().copied().collect(),
        }
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Self) -> Result<Self> {
        if (self.end() - other.basepoint()).norm() > 1e-12 * (1.0 + self.end().norm()) {
            return Err(Error::Usage("paths do not join".into()));
        }
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices[1..]);
        Ok(Self { vertices })
    }

    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

#[derive(Serialize, Deserialize)]
struct PathJson {
    vertices: Vec<[f64; 2]>,
}

impl Serialize for PathSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PathJson {
            vertices: self.vertices.iter().map(|v| [v.re, v.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PathSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PathJson::deserialize(d)?;
        PathSpec::new(raw.vertices.iter().map(|v| Scalar::new(v[0], v[1])).collect())
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ContinuationOptions {
    /// Local error allowed per unit path length, relative to the solution size.
    pub tol: f64,
    pub clearance: f64,
    pub max_steps: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            clearance: DEFAULT_CLEARANCE,
            max_steps: 200_000,
        }
    }
}

// Dormand-Prince 5(4)
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Companion matrix of `u^(N) = (X u - sum_{k<N} a_k u^(k)) / a_N` at `z`.
fn companion(p: &DifferentialOperator, x: Scalar, z: Scalar) -> Result<DMatrix<Scalar>> {
    let n = p.order;
    let c = p.eval_coeffs(z)?;
    let lead = c[0];
    if lead.norm() < ABS_FLOOR {
        return Err(Error::NotInvertible(format!("leading coefficient vanishes at {z}")));
    }
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n - 1 {
        m[(k, k + 1)] = Scalar::new(1.0, 0.0);
    }
    for k in 0..n {
        let a = c[n - k];
        m[(n - 1, k)] = -a / lead;
    }
    m[(n - 1, 0)] += x / lead;
    Ok(m)
}

/// Transfer matrix `T` sending the jet `(u, ..., u^(N-1))` at the start of
/// `path` to the jet of the continued solution at its end.
pub fn continue_solution(
    p: &DifferentialOperator,
    x: Scalar,
    path: &PathSpec,
    opts: &ContinuationOptions,
) -> Result<DMatrix<Scalar>> {
    let n = p.order;
    if n == 0 {
        return Err(Error::Usage("operator of order 0".into()));
    }
    let mut y = DMatrix::<Scalar>::identity(n, n);
    let max_len = opts.clearance.max(1e-3);
    let mut travelled = 0.0;
    let mut steps = 0usize;
    for seg in path.vertices.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        let guard = |z: Scalar| -> Result<()> {
            let dist = p.pole_set.distance(z);
            if dist < opts.clearance {
                Err(Error::Clearance {
                    distance: dist,
                    clearance: opts.clearance,
                })
            } else {
                Ok(())
            }
        };
        guard(a)?;
        guard(b)?;
        let mut t = 0.0;
        let mut dt = (max_len / len).min(1.0);
        while t < 1.0 {
            dt = dt.min(1.0 - t).min(max_len / len);
            if dt * len < 1e-13 * (1.0 + a.norm()) {
                return Err(Error::StepCollapse(travelled + t * len));
            }
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepCollapse(travelled + t * len));
            }
            let h = d * dt;
            let mut k: Vec<DMatrix<Scalar>> = Vec::with_capacity(7);
            for s in 0..7 {
                let z = a + d * (t + C[s] * dt);
                guard(z)?;
                let mut ys = y.clone();
                for (j, kj) in k.iter().enumerate() {
                    if A[s][j] != 0.0 {
                        ys += kj * (h * A[s][j]);
                    }
                }
                k.push(companion(p, x, z)? * ys);
            }
            let mut y5 = y.clone();
            let mut diff = DMatrix::<Scalar>::zeros(n, n);
            for s in 0..7 {
                y5 += &k[s] * (h * B5[s]);
                diff += &k[s] * (h * (B5[s] - B4[s]));
            }
            let size = y.iter().chain(y5.iter()).map(|v| v.norm()).fold(1.0, f64::max);
            let err = diff.iter().map(|v| v.norm()).fold(0.0, f64::max) / size;
            let allowed = opts.tol * dt * len;
            if err <= allowed {
                y = y5;
                t += dt;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * (allowed / err).powf(0.2)).clamp(0.2, 5.0)
            };
            dt *= factor;
        }
        travelled += len;
    }
    Ok(y)
}

#[derive(Debug, Clone)]
pub struct MonodromyMatrix {
    pub matrix: DMatrix<Scalar>,
    pub path: PathSpec,
    pub spectral_x: Scalar,
}

impl MonodromyMatrix {
    pub fn eigenvalues(&self) -> Result<Vec<Scalar>> {
        self.matrix
            .clone()
            .eigenvalues()
            .map(|v| v.iter().copied().collect())
            .ok_or_else(|| Error::NonConvergent("monodromy eigenvalues".into()))
    }

    pub fn det(&self) -> Scalar {
        self.matrix.determinant()
    }

    /// Max-entry distance from the identity.
    pub fn distance_to_identity(&self) -> f64 {
        let n = self.matrix.nrows();
        (&self.matrix - DMatrix::<Scalar>::identity(n, n)).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

pub fn monodromy_matrix(
    p: &DifferentialOperator,
    x: Scalar,
    path: &PathSpec,
    opts: &ContinuationOptions,
) -> Result<MonodromyMatrix> {
    if !path.is_closed() {
        return Err(Error::Usage("monodromy needs a closed loop".into()));
    }
    Ok(MonodromyMatrix {
        matrix: continue_solution(p, x, path, opts)?,
        path: path.clone(),
        spectral_x: x,
    })
}

/// `perm[j] = k` when the continuation of the `j`-th eigenline lands on the
/// `k`-th one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchPermutation {
    pub perm: Vec<usize>,
    /// All eigenvalues coincide; the identity was returned by convention.
    pub degenerate: bool,
}

impl BranchPermutation {
    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            degenerate: false,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            perm: other.perm.iter().map(|&i| self.perm[i]).collect(),
            degenerate: self.degenerate || other.degenerate,
        }
    }

    pub fn pow(&self, k: u64) -> Self {
        let mut out = Self::identity(self.perm.len());
        out.degenerate = self.degenerate;
        for _ in 0..k {
            out = self.compose(&out);
        }
        out
    }
}

/// Eigenvalues of `c^T` with unit null vectors of `c^T - mu`.
fn eigenlines(ct: &DMatrix<Scalar>) -> Result<(Vec<Scalar>, DMatrix<Scalar>)> {
    let n = ct.nrows();
    let eig: Vec<Scalar> = ct
        .clone()
        .eigenvalues()
        .ok_or_else(|| Error::NonConvergent("eigenvalues of c(w, X)".into()))?
        .iter()
        .copied()
        .collect();
    let mut h = DMatrix::zeros(n, n);
    for (j, mu) in eig.iter().enumerate() {
        let a = ct - DMatrix::from_diagonal_element(n, n, *mu);
        let svd = a.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .expect("n >= 1");
        for i in 0..n {
            h[(i, j)] = vt[(imin, i)].conj();
        }
    }
    Ok((eig, h))
}

/// Matches each eigenline of `c(w, X)` (in the convention `c^T h = Y h`) with
/// the eigenline containing its image under the monodromy `m`.
pub fn sigma_from_matrices(c: &DMatrix<Scalar>, m: &DMatrix<Scalar>) -> Result<BranchPermutation> {
    let n = c.nrows();
    let ct = c.transpose();
    let (eig, h) = eigenlines(&ct)?;
    let scale = eig.iter().map(|e| e.norm()).fold(1.0, f64::max);
    let mut min_gap = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            min_gap = min_gap.min((eig[i] - eig[j]).norm());
        }
    }
    if min_gap < BRANCH_GAP * scale {
        let mean = eig.iter().sum::<Scalar>() / n as f64;
        let spread = (&ct - DMatrix::from_diagonal_element(n, n, mean)).norm();
        if spread < BRANCH_GAP * scale {
            let mut id = BranchPermutation::identity(n);
            id.degenerate = true;
            return Ok(id);
        }
        return Err(Error::BranchPoint {
            gap: min_gap / scale,
            threshold: BRANCH_GAP,
        });
    }
    let hinv = h
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("eigenvectors are dependent".into()))?;
    let mut perm = Vec::with_capacity(n);
    for j in 0..n {
        let v: DVector<Scalar> = &hinv * (m * h.column(j));
        let (k, big) = v
            .iter()
            .enumerate()
            .map(|(i, x)| (i, x.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("n >= 1");
        let rest = v
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, x)| x.norm())
            .fold(0.0, f64::max);
        if rest > 1e-5 * big {
            return Err(Error::Verification(format!(
                "image of eigenline {j} is not an eigenline (relative leakage {:e})",
                rest / big
            )));
        }
        perm.push(k);
    }
    let mut seen = vec![false; n];
    for &k in &perm {
        if seen[k] {
            return Err(Error::Verification("eigenline matching is not a bijection".into()));
        }
        seen[k] = true;
    }
    Ok(BranchPermutation {
        perm,
        degenerate: false,
    })
}

/// `P` and `Q` must be expanded around the loop's basepoint.
pub fn sigma_permutation(
    p: &DifferentialOperator,
    q: &DifferentialOperator,
    x: Scalar,
    path: &PathSpec,
    opts: &ContinuationOptions,
) -> Result<BranchPermutation> {
    if (p.center() - path.basepoint()).norm() > 1e-12 * (1.0 + p.center().norm()) {
        return Err(Error::Usage("P must be expanded around the loop basepoint".into()));
    }
    let c = rep_matrix(p, q)?.eval(x);
    let m = monodromy_matrix(p, x, path, opts)?;
    sigma_from_matrices(&c, &m.matrix)
}

/// Largest mismatch between the spectra of `c` and `m c m^-1`, relative to
/// the spectral radius.
pub fn conjugation_spectrum_gap(c: &DMatrix<Scalar>, m: &DMatrix<Scalar>) -> Result<f64> {
    let minv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("monodromy is singular".into()))?;
    let conj = m * c * minv;
    let e1 = c.clone().eigenvalues().ok_or_else(|| Error::NonConvergent("eigenvalues".into()))?;
    let e2 = conj.eigenvalues().ok_or_else(|| Error::NonConvergent("eigenvalues".into()))?;
    let scale = e1.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let worst = e1
        .iter()
        .map(|a| e2.iter().map(|b| (a - b).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    Ok(worst / scale)
}

pub fn matrix_to_json(m: &DMatrix<Scalar>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::PoleSet;
    use crate::series::{TruncatedSeries, Variable};
    use std::sync::Arc;

    fn c(re: f64) -> Scalar {
        Scalar::new(re, 0.0)
    }

    fn free2() -> DifferentialOperator {
        DifferentialOperator::derivation_power(2, c(0.0), 8)
    }

    #[test]
    fn trivial_path_is_identity() {
        let t = continue_solution(&free2(), c(1.0), &PathSpec::new(vec![c(0.3)]).unwrap(), &Default::default()).unwrap();
        assert_eq!(t, DMatrix::identity(2, 2));
    }

    #[test]
    fn free_operator_segment() {
        let l = 1.7;
        let path = PathSpec::new(vec![c(0.0), c(l)]).unwrap();
        let t = continue_solution(&free2(), c(1.0), &path, &Default::default()).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[c(l.cosh()), c(l.sinh()), c(l.sinh()), c(l.cosh())]);
        assert!((t - expect).iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-9);
    }

    #[test]
    fn reversal_inverts() {
        let path = PathSpec::new(vec![c(0.0), Scalar::new(0.5, 0.7), Scalar::new(1.2, -0.3)]).unwrap();
        let x = Scalar::new(2.0, 1.0);
        let t = continue_solution(&free2(), x, &path, &Default::default()).unwrap();
        let r = continue_solution(&free2(), x, &path.reversed(), &Default::default()).unwrap();
        assert!((r * t - DMatrix::identity(2, 2)).norm() < 1e-7);
    }

    #[test]
    fn clearance_and_closure() {
        let mut p = free2();
        p.pole_set = PoleSet::Points(vec![c(0.5)]);
        let path = PathSpec::new(vec![c(0.0), c(1.0)]).unwrap();
        assert!(matches!(
            continue_solution(&p, c(1.0), &path, &Default::default()),
            Err(Error::Clearance { .. })
        ));
        assert!(monodromy_matrix(&p, c(1.0), &path, &Default::default()).is_err());
    }

    /// `P = d^2 + (3/16) z^-2` at `X = 0` has solutions `z^(3/4)`, `z^(1/4)`.
    fn euler_operator(w: Scalar) -> DifferentialOperator {
        let one = TruncatedSeries::constant(Variable::Z, w, c(1.0), 6);
        let zero = one.zero_like();
        let inv2 = TruncatedSeries::z(w, 0, (0..=6).map(|k| c((k + 1) as f64 * (-1f64).powi(k)) * w.powi(-k - 2)).collect());
        let eval = |z: Scalar| -> Result<Vec<Scalar>> { Ok(vec![c(1.0), c(0.0), c(3.0 / 16.0) / (z * z)]) };
        DifferentialOperator::new(vec![one, zero, inv2.scale(c(3.0 / 16.0))])
            .unwrap()
            .with_poles(PoleSet::Points(vec![c(0.0)]))
            .with_pointwise(Arc::new(eval))
    }

    #[test]
    fn square_root_monodromy_swaps_eigenlines() {
        let w = c(1.0);
        let p = euler_operator(w);
        let lp: Vec<Scalar> = (0..=48).map(|k| Scalar::from_polar(1.0, std::f64::consts::TAU * k as f64 / 48.0)).collect();
        let path = PathSpec::new(lp).unwrap();
        let m = monodromy_matrix(&p, c(0.0), &path, &Default::default()).unwrap();
        let mut eig = m.eigenvalues().unwrap();
        eig.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((eig[0] - Scalar::new(0.0, -1.0)).norm() < 1e-7);
        assert!((eig[1] - Scalar::new(0.0, 1.0)).norm() < 1e-7);
        // Q with eigenfunctions z^(1/4) (z^(1/2) +- 1) and eigenvalues +-1
        let jet = |s: f64| {
            [
                w.powf(0.75) + s * w.powf(0.25),
                0.75 * w.powf(-0.25) + s * 0.25 * w.powf(-0.75),
            ]
        };
        let (hp, hm) = (jet(1.0), jet(-1.0));
        let h = DMatrix::from_row_slice(2, 2, &[hp[0], hm[0], hp[1], hm[1]]);
        let ct = &h * DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(-1.0)])) * h.clone().try_inverse().unwrap();
        let sigma = sigma_from_matrices(&ct.transpose(), &m.matrix).unwrap();
        assert!(!sigma.is_identity());
        assert!(sigma.pow(2).is_identity());
    }

    #[test]
    fn scalar_matrix_is_degenerate_identity() {
        let x = Scalar::new(2.0, 0.5);
        let cm = DMatrix::from_diagonal_element(2, 2, x);
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let s = sigma_from_matrices(&cm, &m).unwrap();
        assert!(s.is_identity() && s.degenerate);
    }

    #[test]
    fn path_json_roundtrip() {
        let p = PathSpec::new(vec![c(0.25), Scalar::new(0.0, 0.25)]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<PathSpec>(&s).unwrap(), p);
    }
}
