//! Thin singular value decomposition by one-sided (Hestenes) Jacobi.
//!
//! Tall inputs are first reduced to a square upper-triangular factor with
//! Householder QR, Jacobi sweeps then run on the small factor. Sweeps are
//! cyclic in `(p, q)` order, so the result is a pure function of the input
//! bytes.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 80;

/// `W = U diag(S) Vᵀ` with `r = min(rows, cols)` singular triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd<T> {
    /// `rows x r`, orthonormal columns.
    pub u: Matrix<T>,
    /// Nonincreasing, nonnegative.
    pub s: Vec<T>,
    /// `cols x r`, orthonormal columns.
    pub v: Matrix<T>,
}

impl<T: Scalar> Svd<T> {
    /// `U diag(values) Vᵀ` for a replacement spectrum of the same length.
    pub fn recompose_with(&self, values: &[T]) -> Matrix<T> {
        debug_assert_eq!(values.len(), self.s.len());
        let (n, m) = (self.u.rows(), self.v.rows());
        let mut out = Matrix::zeros(n, m);
        for (k, &sk) in values.iter().enumerate() {
            if sk == T::zero() {
                continue;
            }
            for i in 0..n {
                let uik = self.u[(i, k)] * sk;
                if uik == T::zero() {
                    continue;
                }
                let row = &mut out.as_mut_slice()[i * m..(i + 1) * m];
                for (j, o) in row.iter_mut().enumerate() {
                    *o += uik * self.v[(j, k)];
                }
            }
        }
        out
    }

    pub fn recompose(&self) -> Matrix<T> {
        self.recompose_with(&self.s)
    }
}

/// Thin SVD of `w`.
///
/// Singular vectors follow a fixed sign convention: in every column of `U`
/// the entry of largest magnitude (lowest index on ties) is nonnegative.
pub fn thin_svd<T: Scalar>(w: &Matrix<T>) -> Result<Svd<T>> {
    w.ensure_finite("thin_svd")?;
    let (n, m) = w.shape();
    if n == 0 || m == 0 {
        return Err(Error::invalid("thin_svd", "matrix has an empty dimension"));
    }
    let (mut u, s, mut v) = if n >= m {
        let f = tall(n, m, |i, j| w[(i, j)], true)?;
        (f.u.expect("vectors requested"), f.s, f.v.expect("vectors requested"))
    } else {
        let f = tall(m, n, |i, j| w[(j, i)], true)?;
        (f.v.expect("vectors requested"), f.s, f.u.expect("vectors requested"))
    };
    fix_signs(&mut u, &mut v);
    Ok(Svd { u, s, v })
}

/// Singular values only, in nonincreasing order.
pub fn singular_values<T: Scalar>(w: &Matrix<T>) -> Result<Vec<T>> {
    w.ensure_finite("singular_values")?;
    let (n, m) = w.shape();
    if n == 0 || m == 0 {
        return Ok(Vec::new());
    }
    let f = if n >= m {
        tall(n, m, |i, j| w[(i, j)], false)?
    } else {
        tall(m, n, |i, j| w[(j, i)], false)?
    };
    Ok(f.s)
}

struct TallFactors<T> {
    u: Option<Matrix<T>>,
    s: Vec<T>,
    v: Option<Matrix<T>>,
}

struct Reflector<T> {
    start: usize,
    v: Vec<T>,
    beta: T,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// SVD of a `rows x cols` matrix with `rows >= cols`, given by accessor.
fn tall<T: Scalar>(rows: usize, cols: usize, get: impl Fn(usize, usize) -> T, vectors: bool) -> Result<TallFactors<T>> {
    // column-major working copy
    let mut a = vec![T::zero(); rows * cols];
    for j in 0..cols {
        for i in 0..rows {
            a[j * rows + i] = get(i, j);
        }
    }

    let mut reflectors = Vec::new();
    let mut b = if rows > cols {
        householder_qr(&mut a, rows, cols, &mut reflectors);
        let mut r = vec![T::zero(); cols * cols];
        for j in 0..cols {
            for i in 0..=j {
                r[j * cols + i] = a[j * rows + i];
            }
        }
        r
    } else {
        a
    };

    let mut v = vec![T::zero(); cols * cols];
    for j in 0..cols {
        v[j * cols + j] = T::one();
    }
    jacobi_sweeps(&mut b, &mut v, cols)?;

    let norms: Vec<T> = (0..cols)
        .map(|j| dot(&b[j * cols..(j + 1) * cols], &b[j * cols..(j + 1) * cols]).sqrt())
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&p, &q| norms[q].partial_cmp(&norms[p]).expect("finite norms"));
    let s: Vec<T> = order.iter().map(|&j| norms[j]).collect();

    if !vectors {
        return Ok(TallFactors { u: None, s, v: None });
    }

    // Left vectors of the square factor, in sorted order.
    let smax = s.first().copied().unwrap_or_else(T::zero);
    let negligible = smax * T::epsilon();
    let mut ub = vec![T::zero(); cols * cols];
    let mut missing = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        let col = &b[j * cols..(j + 1) * cols];
        if s[k] > negligible && s[k] > T::zero() {
            for i in 0..cols {
                ub[k * cols + i] = col[i] / s[k];
            }
        } else {
            missing.push(k);
        }
    }
    complete_basis(&mut ub, cols, &missing);

    let u = if rows > cols {
        let mut full = vec![T::zero(); rows * cols];
        for k in 0..cols {
            full[k * rows..k * rows + cols].copy_from_slice(&ub[k * cols..(k + 1) * cols]);
        }
        for refl in reflectors.iter().rev() {
            for k in 0..cols {
                let col = &mut full[k * rows + refl.start..(k + 1) * rows];
                let d = dot(&refl.v, col) * refl.beta;
                for (c, &h) in col.iter_mut().zip(&refl.v) {
                    *c -= d * h;
                }
            }
        }
        Matrix::from_fn(rows, cols, |i, k| full[k * rows + i])
    } else {
        Matrix::from_fn(rows, cols, |i, k| ub[k * cols + i])
    };
    let vm = Matrix::from_fn(cols, cols, |i, k| v[order[k] * cols + i]);
    Ok(TallFactors {
        u: Some(u),
        s,
        v: Some(vm),
    })
}

/// In-place Householder QR of a column-major `rows x cols` buffer. On exit the
/// upper triangle holds `R`; the reflectors `H = I - beta v vᵀ` are returned.
fn householder_qr<T: Scalar>(a: &mut [T], rows: usize, cols: usize, out: &mut Vec<Reflector<T>>) {
    for j in 0..cols {
        let x = &a[j * rows + j..(j + 1) * rows];
        let norm = dot(x, x).sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if x[0] > T::zero() { -norm } else { norm };
        let mut hv = x.to_vec();
        hv[0] -= alpha;
        let vv = dot(&hv, &hv);
        if vv == T::zero() {
            continue;
        }
        let beta = T::lit(2.0) / vv;
        for c in j + 1..cols {
            let col = &mut a[c * rows + j..(c + 1) * rows];
            let d = dot(&hv, col) * beta;
            for (e, &h) in col.iter_mut().zip(&hv) {
                *e -= d * h;
            }
        }
        let col = &mut a[j * rows + j..(j + 1) * rows];
        col[0] = alpha;
        for e in &mut col[1..] {
            *e = T::zero();
        }
        out.push(Reflector { start: j, v: hv, beta });
    }
}

fn jacobi_sweeps<T: Scalar>(b: &mut [T], v: &mut [T], n: usize) -> Result<()> {
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(8.0));
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let bp = &b[p * n..(p + 1) * n];
                    let bq = &b[q * n..(q + 1) * n];
                    (dot(bp, bp), dot(bq, bq), dot(bp, bq))
                };
                if gamma == T::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + T::one().hypot(zeta));
                let c = T::one() / T::one().hypot(t);
                let s = c * t;
                rotate(b, n, p, q, c, s);
                rotate(v, n, p, q, c, s);
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::SvdNoConvergence { sweeps: MAX_SWEEPS })
}

#[inline]
fn rotate<T: Scalar>(buf: &mut [T], n: usize, p: usize, q: usize, c: T, s: T) {
    let (head, tail) = buf.split_at_mut(q * n);
    let cp = &mut head[p * n..(p + 1) * n];
    let cq = &mut tail[..n];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Fills the listed columns of a column-major `n x n` buffer with unit
/// vectors orthogonal to every other column (modified Gram-Schmidt over the
/// standard basis, two passes).
fn complete_basis<T: Scalar>(q: &mut [T], n: usize, missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let mut filled: Vec<bool> = vec![true; n];
    for &k in missing {
        filled[k] = false;
    }
    let mut candidate = 0;
    for &k in missing {
        loop {
            assert!(candidate < n, "basis completion ran out of candidates");
            let mut w = vec![T::zero(); n];
            w[candidate] = T::one();
            candidate += 1;
            for _ in 0..2 {
                for (j, &done) in filled.iter().enumerate() {
                    if !done {
                        continue;
                    }
                    let col = &q[j * n..(j + 1) * n];
                    let d = dot(col, &w);
                    for (e, &c) in w.iter_mut().zip(col) {
                        *e -= d * c;
                    }
                }
            }
            let norm = dot(&w, &w).sqrt();
            if norm > T::lit(0.5) {
                for (dst, &e) in q[k * n..(k + 1) * n].iter_mut().zip(&w) {
                    *dst = e / norm;
                }
                filled[k] = true;
                break;
            }
        }
    }
}

fn fix_signs<T: Scalar>(u: &mut Matrix<T>, v: &mut Matrix<T>) {
    for k in 0..u.cols() {
        let mut best = 0;
        let mut best_abs = T::zero();
        for i in 0..u.rows() {
            let a = u[(i, k)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if u[(best, k)] < T::zero() {
            for i in 0..u.rows() {
                u[(i, k)] = -u[(i, k)];
            }
            for i in 0..v.rows() {
                v[(i, k)] = -v[(i, k)];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> Matrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    fn check_invariants(w: &Matrix<f64>, f: &Svd<f64>) {
        let r = w.rows().min(w.cols());
        assert_eq!(f.s.len(), r);
        assert_eq!(f.u.shape(), (w.rows(), r));
        assert_eq!(f.v.shape(), (w.cols(), r));
        for pair in f.s.windows(2) {
            assert!(pair[0] >= pair[1]);
        }
        assert!(f.s.iter().all(|&x| x >= 0.0));
        for q in [&f.u, &f.v] {
            let g = q.transpose_matmul(q).unwrap();
            for i in 0..r {
                for j in 0..r {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((g[(i, j)] - e).abs() < 1e-10, "gram {i},{j} = {}", g[(i, j)]);
                }
            }
        }
        let fro = w.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
        let err = f.recompose().sub(w);
        let err = err.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(err <= 1e-8 * fro.max(1.0), "reconstruction error {err}");
    }

    #[test]
    fn identity_and_diagonal() {
        let f = thin_svd(&Matrix::<f64>::identity(3)).unwrap();
        assert_eq!(f.s, vec![1.0, 1.0, 1.0]);
        let d = Matrix::diag(&[3.0, 0.0]);
        let f = thin_svd(&d).unwrap();
        assert_eq!(f.s, vec![3.0, 0.0]);
        check_invariants(&d, &f);
    }

    #[test]
    fn shapes_tall_wide_square() {
        for (r, c, seed) in [(4, 3, 1), (3, 4, 2), (5, 5, 3), (60, 7, 4), (1, 5, 5), (6, 1, 6)] {
            let w = random(r, c, seed);
            check_invariants(&w, &thin_svd(&w).unwrap());
        }
    }

    #[test]
    fn rank_deficient_input_keeps_orthonormal_factors() {
        let a = random(8, 2, 9);
        let b = random(2, 5, 10);
        let w = a.matmul(&b).unwrap();
        let f = thin_svd(&w).unwrap();
        check_invariants(&w, &f);
        assert!(f.s[2] < 1e-12 * f.s[0]);
        let z = Matrix::<f64>::zeros(3, 2);
        let f = thin_svd(&z).unwrap();
        check_invariants(&z, &f);
        assert_eq!(f.s, vec![0.0, 0.0]);
    }

    #[test]
    fn sign_convention_holds() {
        let w = random(6, 4, 11);
        let f = thin_svd(&w).unwrap();
        for k in 0..f.u.cols() {
            let col: Vec<f64> = (0..f.u.rows()).map(|i| f.u[(i, k)]).collect();
            let mut best = 0;
            for i in 1..col.len() {
                if col[i].abs() > col[best].abs() {
                    best = i;
                }
            }
            assert!(col[best] >= 0.0);
        }
    }

    #[test]
    fn repeated_runs_are_identical() {
        let w = random(9, 4, 12);
        let a = thin_svd(&w).unwrap();
        let b = thin_svd(&w).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_non_finite() {
        let mut w = Matrix::<f64>::identity(2);
        w[(0, 1)] = f64::NAN;
        assert_eq!(thin_svd(&w), Err(Error::NonFinite { op: "thin_svd" }));
    }

    #[test]
    fn values_only_agree_with_full() {
        let w = random(30, 6, 13);
        assert_eq!(singular_values(&w).unwrap(), thin_svd(&w).unwrap().s);
    }

    #[test]
    fn single_precision_reconstructs() {
        let w64 = random(7, 3, 14);
        let w = Matrix::from_fn(7, 3, |i, j| w64[(i, j)] as f32);
        let f = thin_svd(&w).unwrap();
        let err = f.recompose().sub(&w);
        assert!(err.as_slice().iter().all(|x| x.abs() < 1e-5));
    }
}
