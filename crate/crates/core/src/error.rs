use thiserror::Error;

/// Everything that can go wrong in the pipeline.
///
/// Variants are grouped by how a caller should react: usage errors are fixable
/// by changing the input, precision errors by raising a window, numerical
/// breakdowns need a different basepoint, path or sample.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Usage(String),

    #[error("precision window exhausted for {what}: need order {needed}, have {available}")]
    WindowExhausted {
        what: String,
        needed: i64,
        available: i64,
    },

    #[error("leading coefficient is not invertible: {0}")]
    NotInvertible(String),

    #[error("point {z} lies on (or within {clearance:e} of) the pole set")]
    Pole { z: String, clearance: f64 },

    #[error("operator is not in normal form: {0}")]
    NotNormalForm(String),

    #[error("operators do not commute: relative residual {residual:e} exceeds {tolerance:e}")]
    NotCommuting { residual: f64, tolerance: f64 },

    #[error("principal part is not realizable: {0}")]
    NotRealizable(String),

    #[error("(X, Y) is not on the curve: relative residual {0:e}")]
    OffCurve(f64),

    #[error("branch point: eigenvalue gap {gap:e} below threshold {threshold:e}")]
    BranchPoint { gap: f64, threshold: f64 },

    #[error("path comes within {distance:e} of a singular point (clearance {clearance:e})")]
    Clearance { distance: f64, clearance: f64 },

    #[error("integrator step size collapsed at t = {0}")]
    StepCollapse(f64),

    #[error("series did not converge: {0}")]
    NonConvergent(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for this error: 1 verification, 2 usage, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_)
            | Error::Json(_)
            | Error::Io(_)
            | Error::NotNormalForm(_)
            | Error::Pole { .. }
            | Error::Clearance { .. } => 2,
            Error::Verification(_)
            | Error::NotCommuting { .. }
            | Error::NotRealizable(_)
            | Error::OffCurve(_) => 1,
            Error::WindowExhausted { .. }
            | Error::NotInvertible(_)
            | Error::BranchPoint { .. }
            | Error::StepCollapse(_)
            | Error::NonConvergent(_)
            | Error::Degenerate(_) => 3,
        }
    }

    pub(crate) fn window(what: impl Into<String>, needed: i64, available: i64) -> Self {
        Error::WindowExhausted {
            what: what.into(),
            needed,
            available,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
