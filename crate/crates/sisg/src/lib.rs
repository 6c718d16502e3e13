//! Finite-element smoothing filters on 2D triangular meshes.
//!
//! The central operation is the global L2 projection of discontinuous
//! finite-element data (raw functions, or elementwise derivatives) onto a
//! continuous finite-element space, which smooths the data without giving
//! up the approximation order of the underlying discretization. The classic
//! 1D Savitzky-Golay filter is included as the special case on uniformly
//! spaced samples, where the same least-squares projection reduces to a
//! convolution with a fixed kernel.
//!
//! Supporting machinery: structured triangular meshes with newest-vertex
//! bisection and quality diagnostics, Lagrange spaces (continuous and
//! discontinuous), Gauss quadrature on triangles, CSR sparse matrices with
//! a Jacobi-preconditioned CG solver, L2/H1 error norms, and two driver
//! problems (a smooth Poisson demo and a singular-corner problem with
//! adaptive refinement).

pub mod basis;
pub mod error;
pub mod field;
pub mod galerkin;
pub mod mesh;
pub mod norms;
pub mod problems;
pub mod projection;
pub mod quadrature;
pub mod savgol;
pub mod space;
pub mod sparse;
pub mod util;
pub mod vtk;

pub use error::{Error, Result};
pub use field::ScalarField;
pub use mesh::{Diagonal, Mesh, QualityReport};
pub use projection::{broken_estimate_ratio, project, ProjectionProblem, Source};
pub use space::{Deriv, Family, FeFunction, FunctionSpace};
pub use sparse::SparseMatrix;
