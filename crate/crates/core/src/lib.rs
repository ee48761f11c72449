//! Federated composite saddle-point optimization.
//!
//! FeDualEx (federated dual extrapolation) and the baselines FedMiP, FedMiD
//! and FedDualAvg, run on bilinear benchmark problems with ℓ1 and nuclear
//! regularization. Everything is generic over [`Scalar`] (`f32`, `f64`);
//! the aliases below fix `f64`.

pub mod bregman;
pub mod error;
pub mod fedsim;
pub mod linalg;
pub mod optimizers;
pub mod pair;
pub mod problems;
mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type DenseMatrix = linalg::Matrix<f64>;
pub type Point = pair::Pair<f64>;
