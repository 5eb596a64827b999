//! Error type shared by all solver and numerics modules.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the numerics and solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    InvalidArgument(String),
    /// A numeric evaluation left its valid domain (NaN/Inf, underflow of a
    /// density at a quadrature node, ...). Carries the offending context.
    NumericalDomain(String),
    /// A sensing constraint cannot be met at any finite power. `floor` is
    /// the infimum of the achievable BCRB for the given geometry.
    Infeasible {
        slot: usize,
        threshold: f64,
        floor: f64,
    },
    /// A Fisher information matrix required to be invertible is singular.
    SingularFim(String),
    /// An exhaustive enumeration would exceed the configured guard.
    GridCapacity { points: f64, limit: f64 },
    /// Bisection could not bracket a root after the allowed expansions.
    BracketFailure(String),
    /// The observation FIM of a slot is singular where the high-SNR path
    /// needs its inverse.
    DegenerateGeometry { slot: usize, detail: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NumericalDomain(msg) => write!(f, "numerical domain error: {msg}"),
            Error::Infeasible {
                slot,
                threshold,
                floor,
            } => write!(
                f,
                "slot {slot}: BCRB threshold {threshold:.6e} m^2 is unreachable; \
                 achievable floor is {floor:.6e} m^2"
            ),
            Error::SingularFim(msg) => write!(f, "singular Fisher information matrix: {msg}"),
            Error::GridCapacity { points, limit } => write!(
                f,
                "exhaustive grid would enumerate {points:.3e} layouts (limit {limit:.3e})"
            ),
            Error::BracketFailure(msg) => write!(f, "bisection bracket failure: {msg}"),
            Error::DegenerateGeometry { slot, detail } => {
                write!(f, "slot {slot}: degenerate geometry: {detail}")
            }
        }
    }
}

impl std::error::Error for Error {}
