//! Numerical machinery for the tetrablock: membership geometry, joint
//! spectra of commuting matrices, fundamental operators, distinguished
//! varieties, truncated Hardy-space dilation models, and a von Neumann
//! inequality verifier over one-dimensional subvarieties.

pub mod fundops;
pub mod geometry;
pub mod io;
pub mod jointspec;
pub mod linalg;
pub mod model;
pub mod testgen;
pub mod variety;
pub mod vn;

pub use linalg::{ComplexMatrix, Tolerance};
