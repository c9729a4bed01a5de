//! C interface. Objects are opaque heap handles released with the matching
//! `*_free`; every fallible call returns a [`BcmodStatus`] and leaves a
//! message retrievable with [`bcmod_last_error`].

use bcmod::commutant::{Commutant, PrincipalPart};
use bcmod::elliptic::EllipticConstants;
use bcmod::monodromy::{monodromy_matrix, ContinuationOptions, PathSpec};
use bcmod::scalar::Scalar;
use bcmod::spectral_curve::{genus, PlaneCurve};
use bcmod::verify::LameRun;
use bcmod::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes; the numeric values match the CLI exit codes where they overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcmodStatus {
    Ok = 0,
    VerificationFailed = 1,
    InvalidArgument = 2,
    NumericalBreakdown = 3,
    NullPointer = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcmodComplex {
    pub re: f64,
    pub im: f64,
}

impl From<BcmodComplex> for Scalar {
    fn from(c: BcmodComplex) -> Self {
        Scalar::new(c.re, c.im)
    }
}

impl From<Scalar> for BcmodComplex {
    fn from(c: Scalar) -> Self {
        BcmodComplex { re: c.re, im: c.im }
    }
}

/// A Lamé operator `d^2 - B wp` expanded at a basepoint, with its
/// Baker-Akhiezer coefficients.
pub struct BcmodLame {
    run: LameRun,
}

/// A commuting operator `Q` built over a [`BcmodLame`].
pub struct BcmodCommutant {
    inner: Commutant,
}

/// A spectral curve `F(X, Y) = 0`.
pub struct BcmodCurve {
    inner: PlaneCurve,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BcmodStatus {
    match e.exit_code() {
        1 => BcmodStatus::VerificationFailed,
        2 => BcmodStatus::InvalidArgument,
        _ => BcmodStatus::NumericalBreakdown,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (BcmodStatus, String)>) -> BcmodStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BcmodStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BcmodStatus::Panic
        }
    }
}

fn lift(e: Error) -> (BcmodStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (BcmodStatus, String) {
    (BcmodStatus::NullPointer, format!("{what} is null"))
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bcmod_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Invariants `g2`, `g3` of the lattice spanned by 1 and `omega`.
///
/// # Safety
/// `g2` and `g3` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bcmod_lattice_invariants(
    omega: BcmodComplex,
    g2: *mut BcmodComplex,
    g3: *mut BcmodComplex,
) -> BcmodStatus {
    guard(|| {
        if g2.is_null() || g3.is_null() {
            return Err(null("output"));
        }
        let k = EllipticConstants::new(omega.into()).map_err(lift)?;
        *g2 = k.g2.into();
        *g3 = k.g3.into();
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bcmod_lame_new(
    omega: BcmodComplex,
    b: BcmodComplex,
    basepoint: BcmodComplex,
    out: *mut *mut BcmodLame,
) -> BcmodStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let run = LameRun::new(omega.into(), b.into(), basepoint.into()).map_err(lift)?;
        *out = Box::into_raw(Box::new(BcmodLame { run }));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`bcmod_lame_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bcmod_lame_free(h: *mut BcmodLame) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Builds `Q` from `A_{-M}, ..., A_0` (`len = M + 1`) of weight `weight`.
/// With `complete` nonzero only the leading entry is used; the lower entries
/// allowed by the weight are solved for.
///
/// # Safety
/// `lame` must be a live handle, `principal` must point to `len` values and
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bcmod_commutant_build(
    lame: *const BcmodLame,
    principal: *const BcmodComplex,
    len: usize,
    weight: i32,
    complete: i32,
    out: *mut *mut BcmodCommutant,
) -> BcmodStatus {
    guard(|| {
        if lame.is_null() || principal.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        if len == 0 {
            return Err((BcmodStatus::InvalidArgument, "principal part is empty".into()));
        }
        let run = &(*lame).run;
        let entries: Vec<Scalar> = std::slice::from_raw_parts(principal, len).iter().map(|&c| c.into()).collect();
        let inner = if complete != 0 {
            if entries[0] != Scalar::new(1.0, 0.0) {
                return Err((BcmodStatus::InvalidArgument, "completion expects a monic principal part".into()));
            }
            run.completed_commutant(len - 1, 1e-9)
        } else {
            PrincipalPart::new(weight, entries).and_then(|p| run.commutant(&p, 1e-9))
        }
        .map_err(lift)?;
        *out = Box::into_raw(Box::new(BcmodCommutant { inner }));
        Ok(())
    })
}

/// Order of `Q` and the relative commutator residual `|[P, Q]| / |PQ|`.
///
/// # Safety
/// `q` must be a live handle; outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bcmod_commutant_info(
    q: *const BcmodCommutant,
    order: *mut usize,
    residual: *mut f64,
) -> BcmodStatus {
    guard(|| {
        if q.is_null() || order.is_null() || residual.is_null() {
            return Err(null("argument"));
        }
        *order = (*q).inner.q.order;
        *residual = (*q).inner.commutator_residual;
        Ok(())
    })
}

/// Coefficient `A_s` of the spectral series, `s >= -M`.
///
/// # Safety
/// `q` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bcmod_commutant_spectral_coeff(
    q: *const BcmodCommutant,
    s: i64,
    out: *mut BcmodComplex,
) -> BcmodStatus {
    guard(|| {
        if q.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        *out = (*q).inner.spectral.coeffs.coeff_or_zero(s).into();
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bcmod_commutant_free(h: *mut BcmodCommutant) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Spectral curve of the pair `(P, Q)`.
///
/// # Safety
/// Both handles must be live and built over each other; `out` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn bcmod_curve_compute(
    lame: *const BcmodLame,
    q: *const BcmodCommutant,
    out: *mut *mut BcmodCurve,
) -> BcmodStatus {
    guard(|| {
        if lame.is_null() || q.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let (_, curve) = (*lame).run.curve(&(*q).inner).map_err(lift)?;
        *out = Box::into_raw(Box::new(BcmodCurve { inner: curve }));
        Ok(())
    })
}

/// Coefficient of `X^j Y^k`.
///
/// # Safety
/// `c` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bcmod_curve_coeff(c: *const BcmodCurve, j: usize, k: usize, out: *mut BcmodComplex) -> BcmodStatus {
    guard(|| {
        if c.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        *out = (*c).inner.f(j, k).into();
        Ok(())
    })
}

/// `F(x, y)`.
///
/// # Safety
/// `c` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bcmod_curve_eval(
    c: *const BcmodCurve,
    x: BcmodComplex,
    y: BcmodComplex,
    out: *mut BcmodComplex,
) -> BcmodStatus {
    guard(|| {
        if c.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        *out = (*c).inner.eval(x.into(), y.into()).into();
        Ok(())
    })
}

/// Arithmetic genus. `*varpi` is -1 and `*degenerate` is 1 when the curve is
/// non-reduced or reducible.
///
/// # Safety
/// `c` must be a live handle; outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bcmod_curve_genus(c: *const BcmodCurve, varpi: *mut i64, degenerate: *mut i32) -> BcmodStatus {
    guard(|| {
        if c.is_null() || varpi.is_null() || degenerate.is_null() {
            return Err(null("argument"));
        }
        let g = genus(&(*c).inner).map_err(lift)?;
        *varpi = g.varpi.map_or(-1, i64::from);
        *degenerate = i32::from(g.degenerate);
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bcmod_curve_free(h: *mut BcmodCurve) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Monodromy of `P psi = x psi` along a closed polyline. `vertices` holds
/// `n_vertices` points starting and ending at the operator's basepoint;
/// `matrix` receives the `N x N` result in row-major order.
///
/// # Safety
/// `lame` must be a live handle, `vertices` must point to `n_vertices`
/// values and `matrix` must have room for `matrix_len` values.
#[no_mangle]
pub unsafe extern "C" fn bcmod_monodromy(
    lame: *const BcmodLame,
    x: BcmodComplex,
    vertices: *const BcmodComplex,
    n_vertices: usize,
    matrix: *mut BcmodComplex,
    matrix_len: usize,
) -> BcmodStatus {
    guard(|| {
        if lame.is_null() || vertices.is_null() || matrix.is_null() {
            return Err(null("argument"));
        }
        let run = &(*lame).run;
        let n = run.p.order;
        if matrix_len < n * n {
            return Err((BcmodStatus::InvalidArgument, format!("matrix buffer needs {} entries", n * n)));
        }
        let pts: Vec<Scalar> = std::slice::from_raw_parts(vertices, n_vertices).iter().map(|&v| v.into()).collect();
        let path = PathSpec::new(pts).map_err(lift)?;
        let m = monodromy_matrix(&run.p, x.into(), &path, &ContinuationOptions::default()).map_err(lift)?;
        let out = std::slice::from_raw_parts_mut(matrix, n * n);
        for r in 0..n {
            for c in 0..n {
                out[r * n + c] = m.matrix[(r, c)].into();
            }
        }
        Ok(())
    })
}
