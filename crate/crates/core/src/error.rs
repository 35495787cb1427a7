//! Crate-wide error type.
//!
//! Numerical routines in this crate fail for a small number of well-defined
//! reasons (an exponent outside `(1, ∞)`, a quadrature that sees a NaN, a
//! lattice too coarse for its averaging radius, ...). Each gets its own
//! variant so callers can branch on the cause; `Display` renders a short
//! diagnostic suitable for CLI output.

use std::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the library.
#[derive(Debug)]
pub enum Error {
    /// Exponent `p` outside the admissible open range `(1, ∞)`.
    InvalidExponent(f64),
    /// Dimension not in the supported set `{1, 2, 3}`.
    UnsupportedDimension(usize),
    /// A constructor was handed arguments that make no sense together
    /// (e.g. a test function whose validity ball contains its own
    /// singularity).
    InvalidArgument(String),
    /// The p-Laplacian of a smooth function with `p < 2` divides by a power
    /// of the gradient norm; below the floor the value is not defined.
    SingularGradient { gradient_norm: f64 },
    /// An integrand produced a non-finite value, or an adaptive rule could
    /// not stabilize within its node budget.
    NonFiniteIntegrand(String),
    /// An adaptive integration exhausted its panel budget before reaching
    /// the requested absolute tolerance.
    AccuracyNotReached { requested: f64, achieved: f64 },
    /// Lattice spacing too large relative to the averaging radius; the ball
    /// averages would see too few cells to be meaningful.
    GridTooCoarse { h: f64, r: f64 },
    /// The lattice contains no interior nodes.
    EmptyDomain,
    /// A monotone root bracket did not actually straddle a sign change
    /// (beyond round-off slack). Indicates corrupted field values.
    BracketFailure { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },
    /// The fixed-point iteration hit its sweep budget before the update
    /// norm fell below tolerance. Carries the best iterate and its report
    /// so partial results can still be inspected or written out.
    MaxIterExceeded(Box<crate::solver::SolveOutcome>),
    /// Newton inversion of the plane-sector map left the basin or exceeded
    /// its step budget.
    NewtonDiverged { target: Vec<f64>, last: Vec<f64> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidExponent(p) => {
                write!(f, "exponent p = {p} is outside the admissible range (1, \u{221e})")
            }
            Error::UnsupportedDimension(d) => {
                write!(f, "dimension {d} not supported (expected 1, 2, or 3)")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::SingularGradient { gradient_norm } => write!(
                f,
                "gradient norm {gradient_norm:.3e} below floor; \
                 p-Laplacian undefined there for p < 2"
            ),
            Error::NonFiniteIntegrand(what) => {
                write!(f, "non-finite integrand: {what}")
            }
            Error::AccuracyNotReached { requested, achieved } => write!(
                f,
                "adaptive integration stalled at error {achieved:.3e} \
                 (requested {requested:.3e})"
            ),
            Error::GridTooCoarse { h, r } => write!(
                f,
                "lattice spacing h = {h} too coarse for radius r = {r} (need h \u{2264} r/3)"
            ),
            Error::EmptyDomain => write!(f, "domain contains no lattice nodes"),
            Error::BracketFailure { lo, hi, g_lo, g_hi } => write!(
                f,
                "root bracket [{lo}, {hi}] has no sign change: g(lo) = {g_lo:.3e}, \
                 g(hi) = {g_hi:.3e}"
            ),
            Error::MaxIterExceeded(outcome) => write!(
                f,
                "iteration budget exhausted after {} sweeps (projected gap {:.3e})",
                outcome.report.iterations, outcome.report.gap_estimate
            ),
            Error::NewtonDiverged { target, last } => write!(
                f,
                "Newton inversion diverged: target {target:?}, last iterate {last:?}"
            ),
        }
    }
}

impl std::error::Error for Error {}
