use rand::Rng;

use super::{bilinear_gradient_batch, feasibility_slack, infeasible, ProblemKind, SaddleProblem};
use crate::bregman::Regularizer;
use crate::error::{Error, Result};
use crate::linalg::{mat_transpose_vec, mat_vec, norms, Matrix};
use crate::pair::{DualPoint, PairShape, PrimalPair};
use crate::rng;
use crate::scalar::Scalar;

/// `min_{‖x‖∞≤D} max_{‖y‖∞≤D} ⟨Ax − b, y⟩ + λ‖x‖₁ − λ‖y‖₁` with
/// `A ∈ R^{n×m}`, `b ∈ R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearL1Problem<T> {
    pub a: Matrix<T>,
    /// `n x 1`
    pub b: Matrix<T>,
    pub lambda: T,
    pub radius: T,
}

/// `A` (`n x m`) and `b` with i.i.d. `U[−1, 1]` entries from the seeded
/// stream, `λ = 0.1`, `D = 0.05`.
pub fn generate_l1_problem<T: Scalar>(m: usize, n: usize, seed: u64) -> Result<BilinearL1Problem<T>> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("generate_l1_problem", "m and n must be >= 1"));
    }
    let mut rng = rng::stream(seed, &[rng::PROBLEM_DATA, 1]);
    let a = Matrix::from_fn(n, m, |_, _| T::lit(rng.random_range(-1.0..=1.0)));
    let b = Matrix::from_fn(n, 1, |_, _| T::lit(rng.random_range(-1.0..=1.0)));
    BilinearL1Problem::new(a, b, T::lit(0.1), T::lit(0.05))
}

impl<T: Scalar> BilinearL1Problem<T> {
    pub fn new(a: Matrix<T>, b: Matrix<T>, lambda: T, radius: T) -> Result<Self> {
        if a.rows() == 0 || a.cols() == 0 {
            return Err(Error::invalid("BilinearL1Problem", "A must be non-empty"));
        }
        if b.shape() != (a.rows(), 1) {
            return Err(Error::dims(
                "BilinearL1Problem",
                format!("{}x1", a.rows()),
                format!("{}x{}", b.rows(), b.cols()),
            ));
        }
        a.ensure_finite("BilinearL1Problem")?;
        b.ensure_finite("BilinearL1Problem")?;
        Regularizer::l1_box(lambda, radius)?;
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

    fn check_feasible(&self, z: &PrimalPair<T>, op: &'static str) -> Result<()> {
        let bound = self.radius * (T::one() + feasibility_slack::<T>());
        for block in [&z.x, &z.y] {
            let norm = norms::linf(block.as_slice())?;
            if norm > bound {
                return Err(infeasible(op, norm, self.radius));
            }
        }
        Ok(())
    }

    /// Brute-force `max_y φ(x̂, y) − min_x φ(x, ŷ)` over a uniform grid with
    /// `grid_points` values per coordinate on `[−D, D]`. Only for tiny
    /// instances (`m + n ≤ 6`).
    pub fn brute_force_gap(&self, z: &PrimalPair<T>, grid_points: usize) -> Result<T> {
        self.ensure_shape(z, "brute_force_gap")?;
        if self.m() + self.n() > 6 {
            return Err(Error::invalid("brute_force_gap", "total dimension exceeds 6"));
        }
        if grid_points < 2 {
            return Err(Error::invalid("brute_force_gap", "need at least 2 grid points"));
        }
        let step = T::lit(2.0) * self.radius / T::from_count(grid_points - 1);
        let axis: Vec<T> = (0..grid_points)
            .map(|i| -self.radius + step * T::from_count(i))
            .collect();

        let mut best_y = T::neg_infinity();
        for_each_grid_point(&axis, self.n(), |y| {
            let pt = PrimalPair::new(z.x.clone(), Matrix::column(y.to_vec()));
            if let Ok(v) = self.objective(&pt) {
                best_y = best_y.max(v);
            }
        });
        let mut best_x = T::infinity();
        for_each_grid_point(&axis, self.m(), |x| {
            let pt = PrimalPair::new(Matrix::column(x.to_vec()), z.y.clone());
            if let Ok(v) = self.objective(&pt) {
                best_x = best_x.min(v);
            }
        });
        Ok(best_y - best_x)
    }
}

fn for_each_grid_point<T: Scalar>(axis: &[T], dim: usize, mut f: impl FnMut(&[T])) {
    let mut idx = vec![0usize; dim];
    let mut point: Vec<T> = vec![axis[0]; dim];
    loop {
        f(&point);
        let mut d = 0;
        loop {
            if d == dim {
                return;
            }
            idx[d] += 1;
            if idx[d] < axis.len() {
                point[d] = axis[idx[d]];
                break;
            }
            idx[d] = 0;
            point[d] = axis[0];
            d += 1;
        }
    }
}

impl<T: Scalar> SaddleProblem<T> for BilinearL1Problem<T> {
    fn kind(&self) -> ProblemKind {
        ProblemKind::L1
    }

    fn shape(&self) -> PairShape {
        PairShape::vectors(self.m(), self.n())
    }

    fn regularizer(&self) -> Regularizer<T> {
        Regularizer {
            kind: crate::bregman::RegularizerKind::L1Box,
            lambda: self.lambda,
            radius: self.radius,
        }
    }

    fn gradient(&self, z: &PrimalPair<T>) -> Result<DualPoint<T>> {
        self.ensure_shape(z, "gradient")?;
        let gx = mat_transpose_vec(&self.a, z.y.as_slice())?;
        let ax = mat_vec(&self.a, z.x.as_slice())?;
        let gy = self.b.as_slice().iter().zip(ax).map(|(&b, ax)| b - ax).collect();
        Ok(PrimalPair::from_vectors(gx, gy))
    }

    fn gradient_batch(&self, zs: &[&PrimalPair<T>]) -> Result<Vec<DualPoint<T>>> {
        for z in zs {
            self.ensure_shape(z, "gradient_batch")?;
        }
        bilinear_gradient_batch(&self.a, &self.b, zs)
    }

    fn objective(&self, z: &PrimalPair<T>) -> Result<T> {
        self.ensure_shape(z, "objective")?;
        let ax = mat_vec(&self.a, z.x.as_slice())?;
        let coupling: T = ax
            .iter()
            .zip(self.b.as_slice())
            .zip(z.y.as_slice())
            .map(|((&ax, &b), &y)| (ax - b) * y)
            .sum();
        Ok(coupling + self.lambda * (norms::l1(z.x.as_slice())? - norms::l1(z.y.as_slice())?))
    }

    /// `D‖(|Ax − b| − λ)₊‖₁ + λ‖x‖₁ + D‖(|Aᵀy| − λ)₊‖₁ + ⟨b, y⟩ + λ‖y‖₁`
    fn duality_gap(&self, z: &PrimalPair<T>) -> Result<T> {
        self.ensure_shape(z, "duality_gap")?;
        self.check_feasible(z, "duality_gap")?;
        let lam = self.lambda;
        let excess = |v: T| (v.abs() - lam).max(T::zero());
        let ax = mat_vec(&self.a, z.x.as_slice())?;
        let aty = mat_transpose_vec(&self.a, z.y.as_slice())?;
        let primal: T = ax.iter().zip(self.b.as_slice()).map(|(&ax, &b)| excess(ax - b)).sum();
        let dual: T = aty.iter().map(|&v| excess(v)).sum();
        let by: T = self.b.dot(&z.y);
        Ok(self.radius * primal
            + lam * norms::l1(z.x.as_slice())?
            + self.radius * dual
            + by
            + lam * norms::l1(z.y.as_slice())?)
    }

    /// Entries i.i.d. `U[−D, D]`.
    fn init_point(&self, seed: u64) -> Result<PrimalPair<T>> {
        let mut rng = rng::stream(seed, &[rng::INIT_POINT, 1]);
        let d = self.radius.to_f64().unwrap_or(0.0);
        let mut draw = |len: usize| -> Vec<T> { (0..len).map(|_| T::lit(rng.random_range(-d..=d))).collect() };
        let x = draw(self.m());
        let y = draw(self.n());
        Ok(PrimalPair::from_vectors(x, y))
    }

    fn lipschitz(&self) -> Result<T> {
        norms::spectral(&self.a)
    }
}
