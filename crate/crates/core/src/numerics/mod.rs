//! Numerical substrate: dense/sparse matrices, a symmetric eigensolver,
//! Adam, deterministic RNG streams, and gradient checking.
//!
//! Everything in the training path computes in `f64`; 32-bit floats appear
//! only when embeddings are exported to disk.

pub mod adam;
pub mod eigen;
pub mod gradcheck;
pub mod matrix;
pub mod rng;
pub mod sparse;

pub use adam::AdamState;
pub use eigen::{sym_eig, EigenDecomposition, DEFAULT_EIG_TOL};
pub use gradcheck::{finite_diff_check, DEFAULT_FD_STEP};
pub use matrix::DenseMatrix;
pub use rng::Rng;
pub use sparse::CsrMatrix;
