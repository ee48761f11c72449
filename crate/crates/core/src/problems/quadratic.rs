use rand::Rng;

use super::{feasibility_slack, infeasible, ProblemKind, SaddleProblem};
use crate::bregman::{soft_threshold_clip, Regularizer, RegularizerKind};
use crate::error::{Error, Result};
use crate::linalg::{norms, Matrix};
use crate::pair::{DualPoint, PairShape, PrimalPair};
use crate::rng;
use crate::scalar::Scalar;

/// Convex sanity target `min_{‖x‖∞≤D} ½‖x − c‖² + λ‖x‖₁`, posed as a saddle
/// problem with an empty `y` block.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticL1Problem<T> {
    pub c: Vec<T>,
    pub lambda: T,
    pub radius: T,
}

/// `c` with i.i.d. `U[−0.1, 0.1]` entries, `λ = 0.02`, `D = 0.05`, so the
/// minimizer mixes zero, interior and clipped coordinates.
pub fn generate_quadratic_problem<T: Scalar>(m: usize, seed: u64) -> Result<QuadraticL1Problem<T>> {
    if m == 0 {
        return Err(Error::invalid("generate_quadratic_problem", "m must be >= 1"));
    }
    let mut rng = rng::stream(seed, &[rng::PROBLEM_DATA, 3]);
    let c = (0..m).map(|_| T::lit(rng.random_range(-0.1..=0.1))).collect();
    QuadraticL1Problem::new(c, T::lit(0.02), T::lit(0.05))
}

impl<T: Scalar> QuadraticL1Problem<T> {
    pub fn new(c: Vec<T>, lambda: T, radius: T) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::invalid("QuadraticL1Problem", "c must be non-empty"));
        }
        if !c.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                op: "QuadraticL1Problem",
            });
        }
        Regularizer::l1_box(lambda, radius)?;
        Ok(Self { c, lambda, radius })
    }

    pub fn with_regularization(self, lambda: T, radius: T) -> Result<Self> {
        Self::new(self.c, lambda, radius)
    }

    /// Analytic minimizer, coordinate-wise soft-thresholding of `c`.
    pub fn minimizer(&self) -> Vec<T> {
        self.c
            .iter()
            .map(|&ci| soft_threshold_clip(ci, self.lambda, self.radius))
            .collect()
    }

    fn value(&self, x: &[T]) -> Result<T> {
        let quad: T = x.iter().zip(&self.c).map(|(&xi, &ci)| (xi - ci) * (xi - ci)).sum();
        Ok(T::lit(0.5) * quad + self.lambda * norms::l1(x)?)
    }
}

impl<T: Scalar> SaddleProblem<T> for QuadraticL1Problem<T> {
    fn kind(&self) -> ProblemKind {
        ProblemKind::Quadratic
    }

    fn shape(&self) -> PairShape {
        PairShape::vectors(self.c.len(), 0)
    }

    fn regularizer(&self) -> Regularizer<T> {
        Regularizer {
            kind: RegularizerKind::L1Box,
            lambda: self.lambda,
            radius: self.radius,
        }
    }

    fn gradient(&self, z: &PrimalPair<T>) -> Result<DualPoint<T>> {
        self.ensure_shape(z, "gradient")?;
        let gx = z.x.as_slice().iter().zip(&self.c).map(|(&x, &c)| x - c).collect();
        Ok(PrimalPair::new(Matrix::column(gx), Matrix::zeros(0, 1)))
    }

    fn objective(&self, z: &PrimalPair<T>) -> Result<T> {
        self.ensure_shape(z, "objective")?;
        self.value(z.x.as_slice())
    }

    /// Suboptimality `φ(x) − φ(x*)`; with no `y` block this is the gap.
    fn duality_gap(&self, z: &PrimalPair<T>) -> Result<T> {
        self.ensure_shape(z, "duality_gap")?;
        let norm = norms::linf(z.x.as_slice())?;
        if norm > self.radius * (T::one() + feasibility_slack::<T>()) {
            return Err(infeasible("duality_gap", norm, self.radius));
        }
        Ok(self.value(z.x.as_slice())? - self.value(&self.minimizer())?)
    }

    fn init_point(&self, seed: u64) -> Result<PrimalPair<T>> {
        let mut rng = rng::stream(seed, &[rng::INIT_POINT, 3]);
        let d = self.radius.to_f64().unwrap_or(0.0);
        let x = (0..self.c.len()).map(|_| T::lit(rng.random_range(-d..=d))).collect();
        Ok(PrimalPair::new(Matrix::column(x), Matrix::zeros(0, 1)))
    }

    fn lipschitz(&self) -> Result<T> {
        Ok(T::one())
    }
}
