use rand_distr::{Distribution, StandardNormal};

use super::SaddleProblem;
use crate::error::{Error, Result};
use crate::pair::{DualPoint, PrimalPair};
use crate::rng;
use crate::scalar::Scalar;

/// Which of the two gradient queries of a local step is being made.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HalfStep {
    /// Query at the current point `z_k`.
    First,
    /// Query at the extrapolated point `z_{k+1/2}`.
    Second,
}

/// Address of one gradient query. Rounds and local steps are flattened into
/// `step = round·K + k`, so a run with one client and `K` local steps draws
/// the same noise as the sequential method with `R·K` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoiseKey {
    pub client: u64,
    pub step: u64,
    pub half: HalfStep,
}

impl NoiseKey {
    pub fn new(client: usize, round: usize, local_steps: usize, k: usize, half: HalfStep) -> Self {
        Self {
            client: client as u64,
            step: (round * local_steps + k) as u64,
            half,
        }
    }

    pub fn sequential(t: usize, half: HalfStep) -> Self {
        Self {
            client: 0,
            step: t as u64,
            half,
        }
    }

    fn parts(&self) -> [u64; 4] {
        let half = match self.half {
            HalfStep::First => 0,
            HalfStep::Second => 1,
        };
        [rng::NOISE, self.client, self.step, half]
    }
}

/// Additive Gaussian gradient noise `N(0, σ²)` per coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel<T> {
    pub sigma: T,
    pub seed: u64,
}

impl<T: Scalar> NoiseModel<T> {
    pub fn new(sigma: T, seed: u64) -> Result<Self> {
        if !sigma.is_finite() || sigma < T::zero() {
            return Err(Error::invalid("NoiseModel", "sigma must be finite and >= 0"));
        }
        Ok(Self { sigma, seed })
    }

    pub fn noiseless() -> Self {
        Self {
            sigma: T::zero(),
            seed: 0,
        }
    }

    /// Adds the draw for `key` to `g` in place. No-op when `σ = 0`.
    pub fn perturb(&self, g: &mut DualPoint<T>, key: NoiseKey) {
        if self.sigma == T::zero() {
            return;
        }
        let mut rng = rng::stream(self.seed, &key.parts());
        for v in g.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v += self.sigma * T::lit(e);
        }
    }

    pub fn stochastic_gradient<P>(&self, problem: &P, z: &PrimalPair<T>, key: NoiseKey) -> Result<DualPoint<T>>
    where
        P: SaddleProblem<T> + ?Sized,
    {
        let mut g = problem.gradient(z)?;
        self.perturb(&mut g, key);
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::generate_l1_problem;

    fn key(step: usize, half: HalfStep) -> NoiseKey {
        NoiseKey::new(3, 0, 1, step, half)
    }

    #[test]
    fn zero_sigma_is_exact() {
        let p = generate_l1_problem::<f64>(5, 4, 1).unwrap();
        let z = p.init_point(2).unwrap();
        let g = NoiseModel::noiseless()
            .stochastic_gradient(&p, &z, key(0, HalfStep::First))
            .unwrap();
        assert_eq!(g, p.gradient(&z).unwrap());
    }

    #[test]
    fn keys_reproduce_and_halves_differ() {
        let p = generate_l1_problem::<f64>(5, 4, 1).unwrap();
        let z = p.init_point(2).unwrap();
        let nm = NoiseModel::new(0.1, 9).unwrap();
        let a = nm.stochastic_gradient(&p, &z, key(1, HalfStep::First)).unwrap();
        let b = nm.stochastic_gradient(&p, &z, key(1, HalfStep::First)).unwrap();
        let c = nm.stochastic_gradient(&p, &z, key(1, HalfStep::Second)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn flattened_step_matches_sequential() {
        assert_eq!(
            NoiseKey::new(0, 2, 10, 3, HalfStep::Second),
            NoiseKey::sequential(23, HalfStep::Second)
        );
    }

    #[test]
    fn rejects_negative_sigma() {
        assert!(NoiseModel::new(-0.1f64, 0).is_err());
        assert!(NoiseModel::new(f64::NAN, 0).is_err());
    }
}
