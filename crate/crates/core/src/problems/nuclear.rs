use rand::Rng;

use super::{bilinear_gradient_batch, feasibility_slack, infeasible, ProblemKind, SaddleProblem};
use crate::bregman::{svt_clip, Regularizer, RegularizerKind};
use crate::error::{Error, Result};
use crate::linalg::{norms, singular_values, Matrix};
use crate::pair::{DualPoint, PairShape, PrimalPair};
use crate::rng;
use crate::scalar::Scalar;

/// `min_{‖X‖₂≤D} max_{‖Y‖₂≤D} Tr((AX − B)ᵀY) + λ‖X‖_* − λ‖Y‖_*` with
/// `A ∈ R^{n×m}`, `B ∈ R^{n×p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearNuclearProblem<T> {
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    pub lambda: T,
    pub radius: T,
}

/// `A` with i.i.d. `U[−1, 1]` entries; `B` has `p/2` independent `U[−1, 1]`
/// columns followed by `p/2` random combinations of them (coefficients
/// `U[−1, 1]`), so `rank(B) = p/2`. `λ = 0.1`, `D = 0.05`.
pub fn generate_nuclear_problem<T: Scalar>(
    m: usize,
    n: usize,
    p: usize,
    seed: u64,
) -> Result<BilinearNuclearProblem<T>> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("generate_nuclear_problem", "m and n must be >= 1"));
    }
    if p == 0 || p % 2 != 0 {
        return Err(Error::invalid(
            "generate_nuclear_problem",
            "p must be a positive even number",
        ));
    }
    let mut rng = rng::stream(seed, &[rng::PROBLEM_DATA, 2]);
    let a = Matrix::from_fn(n, m, |_, _| T::lit(rng.random_range(-1.0..=1.0)));
    let half = p / 2;
    let basis = Matrix::from_fn(n, half, |_, _| T::lit(rng.random_range(-1.0..=1.0)));
    let coeffs = Matrix::from_fn(half, half, |_, _| T::lit(rng.random_range(-1.0..=1.0)));
    let dependent = basis.matmul(&coeffs)?;
    let b = Matrix::hstack(&[&basis, &dependent])?;
    BilinearNuclearProblem::new(a, b, T::lit(0.1), T::lit(0.05))
}

impl<T: Scalar> BilinearNuclearProblem<T> {
    pub fn new(a: Matrix<T>, b: Matrix<T>, lambda: T, radius: T) -> Result<Self> {
        if a.rows() == 0 || a.cols() == 0 || b.cols() == 0 {
            return Err(Error::invalid("BilinearNuclearProblem", "A and B must be non-empty"));
        }
        if b.rows() != a.rows() {
            return Err(Error::dims("BilinearNuclearProblem", a.rows(), b.rows()));
        }
        a.ensure_finite("BilinearNuclearProblem")?;
        b.ensure_finite("BilinearNuclearProblem")?;
        Regularizer::nuclear_box(lambda, radius)?;
        Ok(Self { a, b, lambda, radius })
    }

    pub fn with_regularization(self, lambda: T, radius: T) -> Result<Self> {
        Self::new(self.a, self.b, lambda, radius)
    }

    pub fn m(&self) -> usize {
        self.a.cols()
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn p(&self) -> usize {
        self.b.cols()
    }
}

impl<T: Scalar> SaddleProblem<T> for BilinearNuclearProblem<T> {
    fn kind(&self) -> ProblemKind {
        ProblemKind::Nuclear
    }

    fn shape(&self) -> PairShape {
        PairShape {
            x: (self.m(), self.p()),
            y: (self.n(), self.p()),
        }
    }

    fn regularizer(&self) -> Regularizer<T> {
        Regularizer {
            kind: RegularizerKind::NuclearSpectralBox,
            lambda: self.lambda,
            radius: self.radius,
        }
    }

    fn gradient(&self, z: &PrimalPair<T>) -> Result<DualPoint<T>> {
        self.ensure_shape(z, "gradient")?;
        let gx = self.a.transpose_matmul(&z.y)?;
        let gy = self.b.sub(&self.a.matmul(&z.x)?);
        Ok(PrimalPair::new(gx, gy))
    }

    fn gradient_batch(&self, zs: &[&PrimalPair<T>]) -> Result<Vec<DualPoint<T>>> {
        for z in zs {
            self.ensure_shape(z, "gradient_batch")?;
        }
        bilinear_gradient_batch(&self.a, &self.b, zs)
    }

    fn objective(&self, z: &PrimalPair<T>) -> Result<T> {
        self.ensure_shape(z, "objective")?;
        let residual = self.a.matmul(&z.x)?.sub(&self.b);
        Ok(residual.dot(&z.y) + self.lambda * (norms::nuclear(&z.x)? - norms::nuclear(&z.y)?))
    }

    /// `D Σ(σᵢ(AX − B) − λ)₊ + λ‖X‖_* + D Σ(σⱼ(AᵀY) − λ)₊ + Tr(BᵀY) + λ‖Y‖_*`
    fn duality_gap(&self, z: &PrimalPair<T>) -> Result<T> {
        self.ensure_shape(z, "duality_gap")?;
        let bound = self.radius * (T::one() + feasibility_slack::<T>()) + T::lit(1e-8);
        let sx = singular_values(&z.x)?;
        let sy = singular_values(&z.y)?;
        for s in [&sx, &sy] {
            let top = s.first().copied().unwrap_or_else(T::zero);
            if top > bound {
                return Err(infeasible("duality_gap", top, self.radius));
            }
        }
        let lam = self.lambda;
        let excess = |s: Vec<T>| -> T { s.into_iter().map(|v| (v - lam).max(T::zero())).sum() };
        let primal = excess(singular_values(&self.a.matmul(&z.x)?.sub(&self.b))?);
        let dual = excess(singular_values(&self.a.transpose_matmul(&z.y)?)?);
        let nuc_x: T = sx.into_iter().sum();
        let nuc_y: T = sy.into_iter().sum();
        Ok(self.radius * primal + lam * nuc_x + self.radius * dual + self.b.dot(&z.y) + lam * nuc_y)
    }

    /// Entries i.i.d. `U[−1, 1]`, then spectrally clipped to the ball.
    fn init_point(&self, seed: u64) -> Result<PrimalPair<T>> {
        let mut rng = rng::stream(seed, &[rng::INIT_POINT, 2]);
        let x = Matrix::from_fn(self.m(), self.p(), |_, _| T::lit(rng.random_range(-1.0..=1.0)));
        let y = Matrix::from_fn(self.n(), self.p(), |_, _| T::lit(rng.random_range(-1.0..=1.0)));
        Ok(PrimalPair::new(
            svt_clip(&x, T::zero(), self.radius)?,
            svt_clip(&y, T::zero(), self.radius)?,
        ))
    }

    fn lipschitz(&self) -> Result<T> {
        norms::spectral(&self.a)
    }
}
