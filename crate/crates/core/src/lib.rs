//! Coherence quantification for finite-dimensional density matrices.
//!
//! The crate evaluates the l1-norm, relative-entropy and trace-distance
//! coherence measures, solves the closest-incoherent-state problem
//! numerically, and checks monotonicity of the trace-distance measure under
//! strictly incoherent instruments for the constant-off-diagonal family of
//! qudit states.

pub mod channels;
pub mod error;
pub mod json;
pub mod matcore;
pub mod measures;
pub mod solver;
pub mod states;

pub use error::{Error, Result};
pub use matcore::{ComplexMatrix, HermitianMatrix};

pub use measures::{MeasureKind, MeasureReport};
pub use states::{DensityMatrix, DiagonalState, FamilyState, StateDocument};
