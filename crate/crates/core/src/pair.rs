use crate::error::Result;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// A point `z = (x, y)` of a two-block saddle problem, or a dual-space image
/// of one. Vector blocks are single-column matrices; the `y` block may be
/// empty for plain minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair<T> {
    pub x: Matrix<T>,
    pub y: Matrix<T>,
}

/// Primal iterate `(x, y)`.
pub type PrimalPair<T> = Pair<T>;
/// Dual-space point (the running dual variable or its anchor-shifted image).
pub type DualPoint<T> = Pair<T>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairShape {
    pub x: (usize, usize),
    pub y: (usize, usize),
}

impl PairShape {
    pub fn vectors(nx: usize, ny: usize) -> Self {
        Self { x: (nx, 1), y: (ny, 1) }
    }

    pub fn dim(&self) -> usize {
        self.x.0 * self.x.1 + self.y.0 * self.y.1
    }
}

impl<T: Scalar> Pair<T> {
    pub fn new(x: Matrix<T>, y: Matrix<T>) -> Self {
        Self { x, y }
    }

    pub fn from_vectors(x: Vec<T>, y: Vec<T>) -> Self {
        Self {
            x: Matrix::column(x),
            y: Matrix::column(y),
        }
    }

    pub fn zeros(shape: PairShape) -> Self {
        Self {
            x: Matrix::zeros(shape.x.0, shape.x.1),
            y: Matrix::zeros(shape.y.0, shape.y.1),
        }
    }

    pub fn shape(&self) -> PairShape {
        PairShape {
            x: self.x.shape(),
            y: self.y.shape(),
        }
    }

    pub fn ensure_same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        self.x.ensure_same_shape(&other.x, op)?;
        self.y.ensure_same_shape(&other.y, op)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            x: self.x.add(&other.x),
            y: self.y.add(&other.y),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            x: self.x.sub(&other.x),
            y: self.y.sub(&other.y),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            x: self.x.scale(s),
            y: self.y.scale(s),
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: T, other: &Self) {
        self.x.axpy(s, &other.x);
        self.y.axpy(s, &other.y);
    }

    pub fn dot(&self, other: &Self) -> T {
        self.x.dot(&other.x) + self.y.dot(&other.y)
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.x.as_slice().iter().chain(self.y.as_slice())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.x.as_mut_slice().iter_mut().chain(self.y.as_mut_slice().iter_mut())
    }

    /// Mean of equally shaped points, summed in slice order.
    pub fn mean(points: &[&Self]) -> Self {
        let mut acc = Self::zeros(points[0].shape());
        for p in points {
            acc.axpy(T::one(), p);
        }
        acc.scale(T::one() / T::from_count(points.len()))
    }
}
