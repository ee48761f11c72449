use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pair::{DualPoint, PrimalPair};
use crate::problems::{NoiseKey, NoiseModel, SaddleProblem};
use crate::scalar::Scalar;

/// Stochastic gradient oracle shared by all clients of a run. Counts every
/// point it is queried at.
pub struct GradientOracle<'a, T: Scalar> {
    problem: &'a dyn SaddleProblem<T>,
    noise: NoiseModel<T>,
    calls: AtomicU64,
}

impl<'a, T: Scalar> GradientOracle<'a, T> {
    pub fn new(problem: &'a dyn SaddleProblem<T>, noise: NoiseModel<T>) -> Self {
        Self {
            problem,
            noise,
            calls: AtomicU64::new(0),
        }
    }

    pub fn problem(&self) -> &'a dyn SaddleProblem<T> {
        self.problem
    }

    pub fn noise(&self) -> &NoiseModel<T> {
        &self.noise
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    /// `g(z_i; ξ_i)` for every point, the noise for point `i` drawn at
    /// `keys[i]`.
    pub fn query(&self, points: &[&PrimalPair<T>], keys: &[NoiseKey]) -> Result<Vec<DualPoint<T>>> {
        if points.len() != keys.len() {
            return Err(Error::dims("GradientOracle::query", points.len(), keys.len()));
        }
        self.calls.fetch_add(points.len() as u64, Ordering::Relaxed);
        let mut grads = self.problem.gradient_batch(points)?;
        grads
            .par_iter_mut()
            .zip(keys.par_iter())
            .for_each(|(g, &key)| self.noise.perturb(g, key));
        Ok(grads)
    }
}
