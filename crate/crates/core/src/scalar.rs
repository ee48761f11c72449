//! Floating point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the solvers are generic over.
///
/// Implemented for `f32` and `f64`. The experiments and the CLI run in `f64`;
/// `f32` is supported for the kernels but tolerances tuned for double
/// precision (SVD convergence, feasibility slack) are relaxed to a few ulps
/// of the narrower type.
pub trait Scalar:
    'static + Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Default + Debug + Display + LowerExp + Send + Sync
{
    /// Converts an `f64` literal. Panics only for values not representable
    /// at all, which never happens for the finite constants used here.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in a float")
    }

    /// General matrix product `C <- alpha * A * B + beta * C` on strided
    /// storage, `A` is `m x k`, `B` is `k x n`, `C` is `m x n`.
    ///
    /// The default is a plain triple loop; the primitive float types dispatch
    /// to a blocked kernel.
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: &[Self],
        rsa: isize,
        csa: isize,
        b: &[Self],
        rsb: isize,
        csb: isize,
        beta: Self,
        c: &mut [Self],
        rsc: isize,
        csc: isize,
    ) {
        let at = |i: usize, j: usize, rs: isize, cs: isize| (i as isize * rs + j as isize * cs) as usize;
        for i in 0..m {
            for j in 0..n {
                let mut acc = Self::zero();
                for l in 0..k {
                    acc += a[at(i, l, rsa, csa)] * b[at(l, j, rsb, csb)];
                }
                let idx = at(i, j, rsc, csc);
                c[idx] = if beta == Self::zero() {
                    alpha * acc
                } else {
                    alpha * acc + beta * c[idx]
                };
            }
        }
    }
}

macro_rules! blocked_gemm {
    ($ty:ty, $kernel:path) => {
        impl Scalar for $ty {
            #[allow(clippy::too_many_arguments)]
            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                alpha: Self,
                a: &[Self],
                rsa: isize,
                csa: isize,
                b: &[Self],
                rsb: isize,
                csb: isize,
                beta: Self,
                c: &mut [Self],
                rsc: isize,
                csc: isize,
            ) {
                if m == 0 || n == 0 {
                    return;
                }
                let extent = |rows: usize, cols: usize, rs: isize, cs: isize| {
                    if rows == 0 || cols == 0 {
                        0
                    } else {
                        ((rows - 1) as isize * rs + (cols - 1) as isize * cs) as usize + 1
                    }
                };
                assert!(a.len() >= extent(m, k, rsa, csa), "gemm: lhs buffer too short");
                assert!(b.len() >= extent(k, n, rsb, csb), "gemm: rhs buffer too short");
                assert!(c.len() >= extent(m, n, rsc, csc), "gemm: output buffer too short");
                // SAFETY: the asserts above bound every index the kernel touches
                // for non-negative strides, and `c` is uniquely borrowed.
                unsafe {
                    $kernel(
                        m,
                        k,
                        n,
                        alpha,
                        a.as_ptr(),
                        rsa,
                        csa,
                        b.as_ptr(),
                        rsb,
                        csb,
                        beta,
                        c.as_mut_ptr(),
                        rsc,
                        csc,
                    );
                }
            }
        }
    };
}

blocked_gemm!(f32, matrixmultiply::sgemm);
blocked_gemm!(f64, matrixmultiply::dgemm);
