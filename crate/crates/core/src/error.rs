use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A scalar argument left the set where the operation is defined.
    #[error("{what} = {value} is outside the admissible domain")]
    Domain { what: &'static str, value: f64 },

    /// A query point left the open phase strip x > 0, |y| < 1.
    #[error("point (x, y) = ({x}, {y}) is outside the phase strip")]
    OutsidePhaseSpace { x: f64, y: f64 },

    /// The requested branch carries no interior rest point.
    #[error("no equilibrium exists for this branch (eps * h(0) <= 0)")]
    NoEquilibrium,

    /// The adaptive stepper drove the step size below its floor.
    /// Carries the last accepted state.
    #[error("step size underflow at s = {s} (x = {x}, z = {z}, phi = {phi})")]
    StepUnderflow { s: f64, x: f64, z: f64, phi: f64 },

    /// An operation that needs samples received an empty trace.
    #[error("trace contains no samples")]
    EmptyTrace,

    /// An operation-specific precondition failed.
    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
