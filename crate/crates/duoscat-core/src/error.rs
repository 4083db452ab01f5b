//! Error type shared by the solver pipeline.

use core::fmt;

use num_complex::Complex64;

/// Everything that can go wrong between parameter validation and the solve.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter failed validation (non-positive mass, etc.).
    InvalidParameter(&'static str),
    /// Channel basis must extend past the last open channel.
    TruncationTooSmall { n_modes: usize, n_cutoff: usize },
    /// Channel basis beyond the supported hard cap.
    TruncationTooLarge { n_modes: usize, max: usize },
    /// Two successive quadrature orders still disagree at the largest order.
    QuadratureAccuracy {
        m: usize,
        n: usize,
        q: Complex64,
        disagreement: f64,
    },
    /// Assembly asked the moment table for an entry it does not hold.
    MissingMoment { m: usize, n: usize, q: Complex64 },
    /// The matching system lost numerical rank.
    SingularSystem { rank: usize, expected: usize },
    /// Observable evaluation asked for a closed (evanescent) channel.
    EvanescentChannel { n: usize },
    /// The first-order reference is derived for a ground-state incident wave.
    BornRequiresGroundState { l: usize },
    /// Mismatched truncations between a channel set and an amplitude set.
    SizeMismatch { left: usize, right: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::TruncationTooSmall { n_modes, n_cutoff } => write!(
                f,
                "basis truncation {n_modes} does not exceed the cutoff index {n_cutoff}; \
                 at least {} modes are required",
                n_cutoff + 1
            ),
            Error::TruncationTooLarge { n_modes, max } => {
                write!(
                    f,
                    "basis truncation {n_modes} exceeds the supported cap {max}"
                )
            }
            Error::QuadratureAccuracy {
                m,
                n,
                q,
                disagreement,
            } => write!(
                f,
                "quadrature for moment (m={m}, n={n}, q={}+{}i) did not settle: \
                 successive orders differ by {disagreement:.3e}",
                q.re, q.im
            ),
            Error::MissingMoment { m, n, q } => write!(
                f,
                "moment table holds no entry for (m={m}, n={n}, q={}+{}i)",
                q.re, q.im
            ),
            Error::SingularSystem { rank, expected } => write!(
                f,
                "matching system is rank deficient: rank {rank} of {expected}"
            ),
            Error::EvanescentChannel { n } => {
                write!(f, "channel {n} is evanescent and carries no flux")
            }
            Error::BornRequiresGroundState { l } => write!(
                f,
                "first-order coefficients are defined for l = 0, got l = {l}"
            ),
            Error::SizeMismatch { left, right } => {
                write!(f, "truncation mismatch: {left} vs {right}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
