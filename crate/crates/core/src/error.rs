use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parameter outside its domain: {0}")]
    Domain(String),

    #[error("parameter outside the admissible range: {0}")]
    Range(String),

    #[error("Newton iteration failed to converge after {iterations} iterations (last residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("eigensolver failed to converge: {iterations} QR sweeps, {unconverged} eigenvalues left (subdiagonal {subdiagonal:.3e})")]
    Eigensolver {
        iterations: usize,
        unconverged: usize,
        subdiagonal: f64,
    },

    #[error("critical eigenvalue cluster is degenerate: {0}")]
    Degenerate(String),

    #[error("ill-conditioned eigenvector problem: {0}")]
    Conditioning(String),

    #[error("discretization too coarse: {0}")]
    Discretization(String),

    #[error("integrator step size underflow at x = {x} (h = {h:.3e})")]
    StepUnderflow { x: f64, h: f64 },

    #[error("no homoclinic orbit found (final mismatch {mismatch:.3e}): {reason}")]
    NoOrbit { mismatch: f64, reason: String },

    #[error("singular linear system: {0}")]
    Singular(String),
}

impl Error {
    /// Stable name of the variant, for structured error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Domain(_) => "domain",
            Error::Range(_) => "range",
            Error::Convergence { .. } => "convergence",
            Error::Eigensolver { .. } => "eigensolver",
            Error::Degenerate(_) => "degenerate",
            Error::Conditioning(_) => "conditioning",
            Error::Discretization(_) => "discretization",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::NoOrbit { .. } => "no_orbit",
            Error::Singular(_) => "singular",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
