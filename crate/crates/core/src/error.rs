use thiserror::Error;

/// Errors raised by the model, named after the failing condition.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("boost velocity {velocity} is not below c = {c}")]
    SuperluminalBoost { velocity: f64, c: f64 },
    #[error("wavevector has no spatial part; transverse pair undefined")]
    DegenerateWavevector,
    #[error("wavevector is not null (p.p = {0:e})")]
    NonNullWavevector(f64),
    #[error("velocity four-vector is null")]
    NullVelocity,
    #[error("wavevector four-vector is null")]
    NullWavevector,
    #[error("susceptibility is not positive ({chi} at x = {x})")]
    NonPositiveChi { chi: f64, x: f64 },
    #[error("perturbation tail does not decay (|R| = {0:e} at the cutoff)")]
    DivergentTail(f64),
    #[error("root bracketing failed: {0}")]
    NoConvergence(String),
    #[error("mode is off shell (residual {0:e})")]
    OffShell(f64),
    #[error("frequency {omega} sits on the oscillator resonance {omega0}")]
    ResonanceSingularity { omega: f64, omega0: f64 },
    #[error("field configurations live on different grids or layouts")]
    GridMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("constraint chain mismatch in {bracket}: residual {residual:e}")]
    ChainMismatch { bracket: String, residual: f64 },
    #[error("constraint matrix is singular (v.v = 0)")]
    SingularC,
    #[error("constraint {constraint} has nonzero Dirac bracket with {observable} ({value:e})")]
    InconsistentConstraint {
        constraint: String,
        observable: String,
        value: f64,
    },
    #[error("symplectic eigenvalue has imaginary part {0:e}")]
    DynamicalInstability(f64),
    #[error("unphysical sector leaks into physical states: {element} = {value:e}")]
    SectorLeak { element: String, value: f64 },
    #[error("stationary system assembly inconsistent (plane-wave residual {0:e})")]
    AssemblyInconsistent(f64),
    #[error("spatial variation of {0} is not supported by the stationary system")]
    UnsupportedVariation(&'static str),
    #[error("integrator step size underflow at x = {0}")]
    StiffnessFailure(f64),
    #[error("transfer matrix growth {0:e} exceeds 1e12")]
    EvanescentOverflow(f64),
    #[error("channels {0} and {1} have coincident k_x")]
    ChannelDegeneracy(usize, usize),
    #[error("invalid medium: {0}")]
    InvalidMedium(String),
}

pub type Result<T> = std::result::Result<T, Error>;
