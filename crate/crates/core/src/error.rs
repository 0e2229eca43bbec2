use thiserror::Error;

/// Errors raised by the numerical pipeline.
///
/// Every variant names the operation that produced it so a failure deep in a
/// sweep can be traced back without a backtrace.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no propagating modes: n1*k*d*theta = {0} <= pi/2")]
    NoPropagatingModes(f64),
    #[error("{op}: root bracket failed to converge for mode {mode}")]
    ConvergenceFailure { op: &'static str, mode: usize },
    #[error("{op}: index {index} outside 1..={max}")]
    IndexOutOfRange { op: &'static str, index: usize, max: usize },
    #[error("{op}: spectral parameter {gamma} outside ({lo}, {hi})")]
    SpectralParameterOutOfRange { op: &'static str, gamma: f64, lo: f64, hi: f64 },
    #[error("transport matrix is not irreducible ({components} connected components)")]
    NotIrreducible { components: usize },
    #[error("principal eigenvector changes sign (most negative entry {min_entry:e})")]
    PerronViolation { min_entry: f64 },
    #[error("power integration produced non-finite values at z = {z} (generator norm {norm:e})")]
    StiffnessFailure { z: f64, norm: f64 },
    #[error("intensity matrix is not a valid generator: {0}")]
    InvalidGenerator(String),
    #[error("diffusion coefficient singular: denominator {0} <= 0")]
    CoefficientSingular(f64),
    #[error("u-grid too coarse: Richardson error estimate {estimate:e} exceeds tolerance {tol:e}")]
    GridTooCoarse { estimate: f64, tol: f64 },
    #[error("mirror [{d1}, {d2}] is not inside the ocean layer [0, {depth}]")]
    MirrorOutsideOcean { d1: f64, d2: f64, depth: f64 },
    #[error("propagation distance {0} is not a checkpoint of the power evolution")]
    CheckpointMissing(f64),
    #[error("main lobe not resolved: {0}")]
    LobeNotResolved(String),
    #[error("integration step too large: unitarity drift {drift:e}")]
    StepTooLarge { drift: f64 },
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Whether the error comes from the inputs rather than the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::NoPropagatingModes(_)
                | Error::IndexOutOfRange { .. }
                | Error::SpectralParameterOutOfRange { .. }
                | Error::MirrorOutsideOcean { .. }
                | Error::CheckpointMissing(_)
                | Error::Io(_)
        )
    }
}
