//! Benchmark saddle problems: data generation, gradient oracles, closed-form
//! duality gaps and solution-structure metrics.

mod dump;
mod l1;
mod noise;
mod nuclear;
mod quadratic;

use std::fmt;
use std::str::FromStr;

pub use dump::{read_problem, write_problem};
pub use l1::{generate_l1_problem, BilinearL1Problem};
pub use noise::{HalfStep, NoiseKey, NoiseModel};
pub use nuclear::{generate_nuclear_problem, BilinearNuclearProblem};
pub use quadratic::{generate_quadratic_problem, QuadraticL1Problem};

use crate::bregman::Regularizer;
use crate::error::{Error, Result};
use crate::linalg::{singular_values, Matrix};
use crate::pair::{DualPoint, PairShape, PrimalPair};
use crate::scalar::Scalar;

/// Entries (and singular values) below this magnitude count as zero.
pub const ZERO_THRESHOLD: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    L1,
    Nuclear,
    Quadratic,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::L1 => "l1",
            ProblemKind::Nuclear => "nuclear",
            ProblemKind::Quadratic => "quadratic",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(ProblemKind::L1),
            "nuclear" => Ok(ProblemKind::Nuclear),
            "quadratic" => Ok(ProblemKind::Quadratic),
            other => Err(Error::invalid("ProblemKind", format!("unknown problem `{other}`"))),
        }
    }
}

/// A composite convex-concave problem `min_x max_y f(x, y) + ψ(x) − ψ(y)`
/// over the feasible balls of its regularizer.
pub trait SaddleProblem<T: Scalar>: Send + Sync {
    fn kind(&self) -> ProblemKind;

    fn shape(&self) -> PairShape;

    fn regularizer(&self) -> Regularizer<T>;

    /// Monotone operator `g(z) = (∇_x f, −∇_y f)`.
    fn gradient(&self, z: &PrimalPair<T>) -> Result<DualPoint<T>>;

    /// `g` at several points. Implementations may fuse the work into matrix
    /// products; results equal per-point evaluation up to summation order.
    fn gradient_batch(&self, zs: &[&PrimalPair<T>]) -> Result<Vec<DualPoint<T>>> {
        zs.iter().map(|z| self.gradient(z)).collect()
    }

    /// `φ(x, y)` with the regularizers but without the ball indicators.
    fn objective(&self, z: &PrimalPair<T>) -> Result<T>;

    /// `max_y φ(x̂, y) − min_x φ(x, ŷ)` at a feasible point.
    fn duality_gap(&self, z: &PrimalPair<T>) -> Result<T>;

    /// Seeded starting point inside the feasible set.
    fn init_point(&self, seed: u64) -> Result<PrimalPair<T>>;

    /// Lipschitz constant of `g` in the Euclidean norm.
    fn lipschitz(&self) -> Result<T>;

    fn ensure_shape(&self, z: &PrimalPair<T>, op: &'static str) -> Result<()> {
        let expected = self.shape();
        if z.shape() != expected {
            return Err(Error::dims(op, format!("{expected:?}"), format!("{:?}", z.shape())));
        }
        Ok(())
    }
}

/// Owned problem of any supported kind.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemInstance<T> {
    L1(BilinearL1Problem<T>),
    Nuclear(BilinearNuclearProblem<T>),
    Quadratic(QuadraticL1Problem<T>),
}

macro_rules! delegate {
    ($self:ident, $p:ident => $e:expr) => {
        match $self {
            ProblemInstance::L1($p) => $e,
            ProblemInstance::Nuclear($p) => $e,
            ProblemInstance::Quadratic($p) => $e,
        }
    };
}

impl<T: Scalar> SaddleProblem<T> for ProblemInstance<T> {
    fn kind(&self) -> ProblemKind {
        delegate!(self, p => p.kind())
    }

    fn shape(&self) -> PairShape {
        delegate!(self, p => p.shape())
    }

    fn regularizer(&self) -> Regularizer<T> {
        delegate!(self, p => p.regularizer())
    }

    fn gradient(&self, z: &PrimalPair<T>) -> Result<DualPoint<T>> {
        delegate!(self, p => p.gradient(z))
    }

    fn gradient_batch(&self, zs: &[&PrimalPair<T>]) -> Result<Vec<DualPoint<T>>> {
        delegate!(self, p => p.gradient_batch(zs))
    }

    fn objective(&self, z: &PrimalPair<T>) -> Result<T> {
        delegate!(self, p => p.objective(z))
    }

    fn duality_gap(&self, z: &PrimalPair<T>) -> Result<T> {
        delegate!(self, p => p.duality_gap(z))
    }

    fn init_point(&self, seed: u64) -> Result<PrimalPair<T>> {
        delegate!(self, p => p.init_point(seed))
    }

    fn lipschitz(&self) -> Result<T> {
        delegate!(self, p => p.lipschitz())
    }
}

/// `g(z) = (Aᵀy, b − Ax)` for a batch of points, fused into two products.
pub(crate) fn bilinear_gradient_batch<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    zs: &[&PrimalPair<T>],
) -> Result<Vec<DualPoint<T>>> {
    if zs.is_empty() {
        return Ok(Vec::new());
    }
    let width = b.cols();
    let xs: Vec<&Matrix<T>> = zs.iter().map(|z| &z.x).collect();
    let ys: Vec<&Matrix<T>> = zs.iter().map(|z| &z.y).collect();
    let ax = a.matmul(&Matrix::hstack(&xs)?)?;
    let aty = a.transpose_matmul(&Matrix::hstack(&ys)?)?;
    let gx = aty.split_columns(width);
    let gy = ax.split_columns(width);
    Ok(gx
        .into_iter()
        .zip(gy)
        .map(|(gx, ax)| {
            let gy = b.sub(&ax);
            PrimalPair::new(gx, gy)
        })
        .collect())
}

/// Fraction of entries with magnitude at least [`ZERO_THRESHOLD`].
pub fn sparsity<T: Scalar>(v: &[T]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let thr = T::lit(ZERO_THRESHOLD);
    v.iter().filter(|x| x.abs() >= thr).count() as f64 / v.len() as f64
}

/// Number of singular values at least [`ZERO_THRESHOLD`].
pub fn numerical_rank<T: Scalar>(w: &Matrix<T>) -> Result<usize> {
    let thr = T::lit(ZERO_THRESHOLD);
    Ok(singular_values(w)?.into_iter().filter(|&s| s >= thr).count())
}

/// Relative tolerance of the feasibility checks: rounding in averages of
/// boundary points may overshoot the radius by a few ulps.
pub(crate) fn feasibility_slack<T: Scalar>() -> T {
    T::lit(1e-9).max(T::epsilon() * T::lit(16.0))
}

pub(crate) fn infeasible(op: &'static str, norm: impl fmt::Display, radius: impl fmt::Display) -> Error {
    Error::Infeasible {
        op,
        detail: format!("block norm {norm} exceeds radius {radius}"),
    }
}
