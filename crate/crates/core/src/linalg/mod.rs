//! Dense kernels: matrices, products, thin SVD and the norm family.

mod matrix;
pub mod norms;
mod svd;

pub use matrix::{mat_transpose_vec, mat_vec, Matrix};
pub use svd::{singular_values, thin_svd, Svd};
