use crate::error::{Error, Result};
use crate::linalg::{singular_values, Matrix};
use crate::scalar::Scalar;

fn finite<T: Scalar>(v: &[T], op: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { op })
    }
}

pub fn l1<T: Scalar>(v: &[T]) -> Result<T> {
    finite(v, "l1")?;
    Ok(v.iter().map(|x| x.abs()).sum())
}

pub fn linf<T: Scalar>(v: &[T]) -> Result<T> {
    finite(v, "linf")?;
    Ok(v.iter().fold(T::zero(), |m, x| m.max(x.abs())))
}

pub fn l2<T: Scalar>(v: &[T]) -> Result<T> {
    finite(v, "l2")?;
    Ok(v.iter().map(|&x| x * x).sum::<T>().sqrt())
}

pub fn frobenius<T: Scalar>(w: &Matrix<T>) -> Result<T> {
    l2(w.as_slice())
}

/// Sum of singular values.
pub fn nuclear<T: Scalar>(w: &Matrix<T>) -> Result<T> {
    Ok(singular_values(w)?.into_iter().sum())
}

/// Largest singular value.
pub fn spectral<T: Scalar>(w: &Matrix<T>) -> Result<T> {
    Ok(singular_values(w)?.first().copied().unwrap_or_else(T::zero))
}
