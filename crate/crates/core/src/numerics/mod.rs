//! Linear algebra kernels shared by every solver.

pub mod dense_eig;
pub mod factor;
pub mod ortho;
pub mod sparse;
pub mod vector;

pub use dense_eig::{small_dense_eig, DensePair};
pub use factor::{
    factorize_shifted, inertia_below, inertia_with_structure, ShiftedFactorization, Structure,
    SymmetricOperator,
};
pub use ortho::orthonormalize;
pub use sparse::SymMatrix;
pub use vector::{weighted_inner, weighted_norm, ComplexVector};
