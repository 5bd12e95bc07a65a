//! Small numerical kernels: tridiagonal eigenproblems, Bessel functions and
//! dense complex algebra for the few-level scatterer matrices.

pub mod bessel;
pub mod dense;
pub mod tridiagonal;

pub use bessel::bessel_j_sequence;
pub use dense::CMatrix;
pub use tridiagonal::{symmetric_tridiagonal_eigen, TridiagonalEigen};
pub mod lanczos;

pub use lanczos::{lowest_eigenpair, Eigenpair, LanczosOptions};
