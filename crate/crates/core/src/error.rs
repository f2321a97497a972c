use alloc::string::String;
use core::fmt;

/// Errors reported by estimator and statistic construction.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A sample (or sample group) contained no observations.
    EmptySample,
    /// Observation data violated a precondition (non-finite, out of range, ...).
    InvalidObservation(String),
    /// A parameter was outside its admissible range.
    InvalidParameter(String),
    /// Cusum diagram abscissae were not strictly increasing.
    NonIncreasingAbscissa,
    /// A cusum diagram had fewer than two points.
    DegenerateDiagram,
    /// Slope query outside the minorant's domain.
    SlopeQueryOutOfRange,
    /// The bandwidth exceeds half the observation window, so opposite
    /// boundary corrections would overlap.
    BandwidthTooLarge { bandwidth: f64, domain: f64 },
    /// Boundary moment system is singular (no support left of the edge).
    SingularBoundarySystem { rho: f64 },
    /// Integration limits fall outside the tabulated grid.
    RangeOutsideGrid,
    /// Grid functions that must share a grid do not.
    GridMismatch,
    /// Smoothed observation mass fell below the usable floor on the
    /// evaluation window.
    DensityBelowFloor { at: f64 },
    /// Pooled estimate is identically zero or one: the variance estimate of
    /// the moment statistic degenerates.
    DegeneratePooledMle,
    /// A statistic's denominator vanished.
    ZeroDenominator,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptySample => write!(f, "sample contains no observations"),
            Error::InvalidObservation(msg) => write!(f, "invalid observation: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::NonIncreasingAbscissa => {
                write!(f, "cusum diagram x-coordinates must be strictly increasing")
            }
            Error::DegenerateDiagram => write!(f, "cusum diagram needs at least two points"),
            Error::SlopeQueryOutOfRange => {
                write!(f, "slope query outside the minorant's half-open domain")
            }
            Error::BandwidthTooLarge { bandwidth, domain } => write!(
                f,
                "bandwidth {bandwidth} too large for observation window [0, {domain}]"
            ),
            Error::SingularBoundarySystem { rho } => {
                write!(f, "boundary moment system singular at rho = {rho}")
            }
            Error::RangeOutsideGrid => write!(f, "integration range outside tabulated grid"),
            Error::GridMismatch => write!(f, "grid functions are tabulated on different grids"),
            Error::DensityBelowFloor { at } => write!(
                f,
                "smoothed observation density below floor at t = {at}; enlarge the bandwidth"
            ),
            Error::DegeneratePooledMle => {
                write!(f, "degenerate pooled MLE: all indicators equal")
            }
            Error::ZeroDenominator => write!(f, "statistic denominator is zero"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
