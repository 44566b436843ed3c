use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the numerical routines.
///
/// Variants split into two families: malformed input (see
/// [`Error::is_numerical`] returning `false`) and violations of a numerical
/// contract such as coverage or completeness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state has zero norm (quadrature norm {norm:e})")]
    ZeroNorm { norm: f64 },

    #[error("operation requires a {expected} spectrum")]
    SpectrumKind { expected: &'static str },

    #[error("energy grid is not uniform (spacing varies by {deviation:e})")]
    NonUniformGrid { deviation: f64 },

    #[error("state occupies a single energy level; its time density is constant and not normalizable")]
    NarrowSpectrum,

    #[error("time density of a multi-level discrete state is almost periodic; use the finite-resolution POM")]
    UnsupportedSpectrum,

    #[error("state mass beyond the energy cutoff is {mass:e} (tolerance {tol:e})")]
    TailMass { mass: f64, tol: f64 },

    #[error("energy grid under-resolves the state: norm error {error:e}")]
    GridResolution { error: f64 },

    #[error("panel phase advance {phase:.3} exceeds the Filon limit {limit:.3} and refinement is disabled")]
    OscillatoryAccuracy { phase: f64, limit: f64 },

    #[error("time grid captures probability {captured:.12} < 1 - {tol:e}")]
    Coverage { captured: f64, tol: f64 },

    #[error("moment of order {order} diverges: density tail exponent {exponent:.3}")]
    MomentDivergence { order: u32, exponent: f64 },

    #[error("Lyapunov curve increases by {increase:e} between t = {from} and t = {to}")]
    MonotonicityViolation { from: f64, to: f64, increase: f64 },

    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    #[error("N_tau eigenvalues cluster near the null-space threshold (gap ratio {ratio:.3})")]
    IllConditioned { ratio: f64 },

    #[error("POM completeness residual {residual:e} exceeds {tol:e}")]
    Completeness { residual: f64, tol: f64 },

    #[error("no recurrence within horizon; closest approach {best_distance:e} at t = {best_time}")]
    NotFound { best_time: f64, best_distance: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the error signals a violated numerical contract rather than
    /// bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TailMass { .. }
                | Error::GridResolution { .. }
                | Error::OscillatoryAccuracy { .. }
                | Error::Coverage { .. }
                | Error::MomentDivergence { .. }
                | Error::MonotonicityViolation { .. }
                | Error::IllConditioned { .. }
                | Error::Completeness { .. }
                | Error::NotFound { .. }
        )
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpectrum(_) => "InvalidSpectrum",
            Error::InvalidState(_) => "InvalidState",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::ZeroNorm { .. } => "ZeroNorm",
            Error::SpectrumKind { .. } => "SpectrumKind",
            Error::NonUniformGrid { .. } => "NonUniformGrid",
            Error::NarrowSpectrum => "NarrowSpectrum",
            Error::UnsupportedSpectrum => "UnsupportedSpectrum",
            Error::TailMass { .. } => "TailMass",
            Error::GridResolution { .. } => "GridResolution",
            Error::OscillatoryAccuracy { .. } => "OscillatoryAccuracy",
            Error::Coverage { .. } => "Coverage",
            Error::MomentDivergence { .. } => "MomentDivergence",
            Error::MonotonicityViolation { .. } => "MonotonicityViolation",
            Error::DegenerateDistribution(_) => "DegenerateDistribution",
            Error::IllConditioned { .. } => "IllConditioned",
            Error::Completeness { .. } => "Completeness",
            Error::NotFound { .. } => "NotFound",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}
