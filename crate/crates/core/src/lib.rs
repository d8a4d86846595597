//! Spectral homogenization workbench for periodic Euler-Bernoulli beam lattices.
//!
//! The crate compares the exact discrete stiffness of a periodic frame with
//! its continuum (micropolar) limit mode by mode in Fourier space, and
//! measures how the two solutions converge as the lattice is refined.

pub mod analysis;
pub mod beam;
pub mod error;
pub mod field;
pub mod fourier;
pub mod lattice;
pub mod linalg;
pub mod solver;
pub mod symbols;

pub use error::{Error, Result};
pub use field::FieldGrid;
pub use fourier::{Domain, FreqIndex, GridFunction, SeminormOrder};
pub use lattice::{LatticeFamily, LatticeSpec};
pub use symbols::{ModeSymbol, ModelKind};
pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
