use thiserror::Error;

use crate::fourier::FreqIndex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid is empty")]
    EmptyGrid,

    #[error("expected a {expected} grid, got a {found} grid")]
    WrongDomain {
        expected: &'static str,
        found: &'static str,
    },

    #[error("grid size mismatch: {left} vs {right}")]
    SizeMismatch { left: String, right: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("mode ({}, {}) is outside the frequency set for N = {n}", .mode.ip, .mode.jp)]
    ModeOutOfRange { mode: FreqIndex, n: usize },

    #[error("operation is undefined at the zero mode")]
    ZeroMode,

    #[error("incompatible load: net force ({fx:.3e}, {fy:.3e}) is not in the image of the zero-mode block")]
    IncompatibleLoad { fx: f64, fy: f64 },

    #[error("singular system: found kernel of dimension {kernel_dim}")]
    SingularSystem { kernel_dim: usize },

    #[error("rotation block c = {c:.6e} is not positive at mode ({}, {})", .mode.ip, .mode.jp)]
    NonPositiveRotationBlock { c: f64, mode: FreqIndex },

    #[error("matrix at mode ({}, {}) is numerically singular", .mode.ip, .mode.jp)]
    SingularSymbol { mode: FreqIndex },

    #[error("spatial field has imaginary residue {residue:.3e} above tolerance")]
    NotReal { residue: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("{0} is only defined for the triangular lattice")]
    UnsupportedLattice(&'static str),

    #[error("need at least {needed} usable points for a slope fit, got {got}")]
    TooFewPoints { needed: usize, got: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
