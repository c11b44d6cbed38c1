//! Error type shared by all engines.

use alloc::boxed::Box;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong while configuring or running a valuation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A constructor was handed an invalid parameter.
    InvalidParameter {
        field: &'static str,
        reason: &'static str,
    },
    /// Payoff values contradict the declared monotonicity at adjacent nodes.
    MonotonicityViolated { index: usize },
    /// Payoff declared strictly positive but a node value is not.
    NonPositivePayoff { index: usize },
    /// Payoff evaluation produced a non-finite value.
    NonFinitePayoff { index: usize },
    /// The current-price-benchmark operator needs a strictly positive mean.
    NonPositiveMean,
    /// A distorted value left the domain or range of the distortion function.
    DistortionDomain { what: &'static str },
    /// Quadrinomial calibration has no real solution for the given level.
    CalibrationFailed { reason: &'static str },
    /// The requested principle cannot run on the requested tree.
    TreeKindUnsupported { principle: &'static str },
    /// A principle step failed at a specific lattice node.
    AtNode {
        time_index: usize,
        space_index: usize,
        source: Box<Error>,
    },
    /// Backward induction or a PDE step produced a non-finite value.
    NonFiniteValue {
        time_index: usize,
        space_index: usize,
    },
    /// A generator's domain requirement failed (e.g. price touched zero).
    GeneratorDomain {
        what: &'static str,
        time_index: usize,
    },
    /// Explicit nonlinearity violates the stability bound; refine the grid.
    CflViolation { suggested_n_time: usize },
    /// Requested time is not on the surface's time grid.
    OffGridTime { t: f64 },
    /// The expectation in a closed-form representation does not exist.
    Integrability { what: &'static str },
    /// The closed-form route does not cover this payoff; use lattice or PDE.
    UnsupportedRepresentation { what: &'static str },
    /// Adaptive quadrature hit its order cap before the tolerance.
    QuadratureNotConverged { achieved: f64 },
    /// Monotone root-finding failed to bracket or converge.
    RootFindFailed { what: &'static str },
    /// A study needs more resolution points than were supplied.
    InsufficientPoints { needed: usize, got: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { field, reason } => {
                write!(f, "invalid parameter `{field}`: {reason}")
            }
            Error::MonotonicityViolated { index } => write!(
                f,
                "payoff violates its declared monotonicity between nodes {} and {}",
                index,
                index + 1
            ),
            Error::NonPositivePayoff { index } => write!(
                f,
                "payoff declared positive but value at node {index} is not > 0"
            ),
            Error::NonFinitePayoff { index } => {
                write!(f, "payoff value at node {index} is not finite")
            }
            Error::NonPositiveMean => write!(
                f,
                "current-price benchmark requires a strictly positive expected value"
            ),
            Error::DistortionDomain { what } => write!(f, "distortion domain error: {what}"),
            Error::CalibrationFailed { reason } => {
                write!(f, "quadrinomial calibration failed: {reason}")
            }
            Error::TreeKindUnsupported { principle } => write!(
                f,
                "principle `{principle}` requires a quadrinomial tree"
            ),
            Error::AtNode {
                time_index,
                space_index,
                source,
            } => write!(
                f,
                "at node (t index {time_index}, y index {space_index}): {source}"
            ),
            Error::NonFiniteValue {
                time_index,
                space_index,
            } => write!(
                f,
                "non-finite value at (t index {time_index}, y index {space_index})"
            ),
            Error::GeneratorDomain { what, time_index } => {
                write!(f, "generator domain error at t index {time_index}: {what}")
            }
            Error::CflViolation { suggested_n_time } => write!(
                f,
                "explicit gradient term violates the stability bound; use n_time >= {suggested_n_time}"
            ),
            Error::OffGridTime { t } => write!(f, "time {t} is not on the surface grid"),
            Error::Integrability { what } => {
                write!(f, "expectation does not exist: {what}")
            }
            Error::UnsupportedRepresentation { what } => {
                write!(f, "no closed-form representation: {what}")
            }
            Error::QuadratureNotConverged { achieved } => write!(
                f,
                "adaptive quadrature stalled at relative difference {achieved:e}"
            ),
            Error::RootFindFailed { what } => write!(f, "root finding failed: {what}"),
            Error::InsufficientPoints { needed, got } => {
                write!(f, "study needs at least {needed} resolution points, got {got}")
            }
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::AtNode { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
