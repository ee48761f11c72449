use fedualex::linalg::{mat_transpose_vec, mat_vec, norms, singular_values, thin_svd, Matrix};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn to_nalgebra(w: &Matrix<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(w.rows(), w.cols(), w.as_slice())
}

/// Singular values as square roots of the eigenvalues of WᵀW, descending.
fn eigen_singular_values(w: &Matrix<f64>) -> Vec<f64> {
    let a = to_nalgebra(w);
    let gram = a.transpose() * &a;
    let mut ev: Vec<f64> = gram
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev.truncate(w.rows().min(w.cols()));
    ev
}

#[test]
fn mat_vec_examples() {
    let id = Matrix::<f64>::identity(2);
    assert_eq!(mat_vec(&id, &[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
    let two = Matrix::from_rows(&[vec![2.0]]).unwrap();
    assert_eq!(mat_vec(&two, &[0.5]).unwrap(), vec![1.0]);
}

#[test]
fn mat_vec_against_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_matrix(&mut rng, 3, 2);
    let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let got = mat_vec(&a, &x).unwrap();
    for i in 0..3 {
        let mut s = 0.0;
        for j in 0..2 {
            s += a.as_slice()[i * 2 + j] * x[j];
        }
        assert!((got[i] - s).abs() <= 1e-12);
    }
}

#[test]
fn mat_transpose_vec_examples() {
    let id = Matrix::<f64>::identity(3);
    assert_eq!(mat_transpose_vec(&id, &[1.0, -2.0, 0.5]).unwrap(), vec![1.0, -2.0, 0.5]);
    let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    assert_eq!(mat_transpose_vec(&a, &[1.0, 1.0]).unwrap(), vec![4.0, 6.0]);
    let z = Matrix::<f64>::zeros(2, 3);
    assert_eq!(mat_transpose_vec(&z, &[5.0, -7.0]).unwrap(), vec![0.0; 3]);
}

#[test]
fn mat_transpose_vec_against_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_matrix(&mut rng, 5, 4);
    let y: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
    let got = mat_transpose_vec(&a, &y).unwrap();
    for j in 0..4 {
        let s: f64 = (0..5).map(|i| a.as_slice()[i * 4 + j] * y[i]).sum();
        assert!((got[j] - s).abs() <= 1e-12);
    }
}

#[test]
fn svd_examples() {
    assert_eq!(thin_svd(&Matrix::<f64>::identity(3)).unwrap().s, vec![1.0, 1.0, 1.0]);
    let s: Vec<f64> = thin_svd(&Matrix::diag(&[3.0, 0.0])).unwrap().s;
    assert!((s[0] - 3.0).abs() < 1e-15 && s[1].abs() < 1e-15);
}

#[test]
fn svd_of_random_4x3_against_eigen_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = random_matrix(&mut rng, 4, 3);
    let svd = thin_svd(&w).unwrap();
    let back = svd.recompose();
    let err = norms::frobenius(&back.sub(&w)).unwrap();
    assert!(err <= 1e-8, "reconstruction error {err}");
    for (a, b) in svd.s.iter().zip(eigen_singular_values(&w)) {
        assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }
}

#[test]
fn svd_factors_are_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (r, c) in [(6, 3), (3, 6), (5, 5), (20, 20)] {
        let w = random_matrix(&mut rng, r, c);
        let svd = thin_svd(&w).unwrap();
        for f in [&svd.u, &svd.v] {
            let g = f.transpose_matmul(f).unwrap();
            let err = norms::frobenius(&g.sub(&Matrix::identity(g.rows()))).unwrap();
            assert!(err <= 1e-10, "{r}x{c}: {err}");
        }
        assert!(svd.s.windows(2).all(|p| p[0] >= p[1]));
    }
}

#[test]
fn svd_is_repeatable() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = random_matrix(&mut rng, 7, 4);
    assert_eq!(thin_svd(&w).unwrap(), thin_svd(&w.clone()).unwrap());
}

#[test]
fn norm_examples() {
    assert_eq!(norms::l1(&[1.0, -2.0, 3.0]).unwrap(), 6.0);
    assert_eq!(norms::linf(&[1.0, -2.0, 3.0]).unwrap(), 3.0);
    assert_eq!(norms::l2(&[3.0, -4.0]).unwrap(), 5.0);
    assert_eq!(norms::spectral(&Matrix::<f64>::identity(2)).unwrap(), 1.0);
}

#[test]
fn nuclear_against_trace_sqrt_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let w = random_matrix(&mut rng, 3, 3);
    let sum_s: f64 = singular_values(&w).unwrap().iter().sum();
    let trace_sqrt: f64 = eigen_singular_values(&w).iter().sum();
    let nuc = norms::nuclear(&w).unwrap();
    assert!((nuc - sum_s).abs() <= 1e-12);
    assert!((nuc - trace_sqrt).abs() <= 1e-8);
}

#[test]
fn nuclear_equals_spectral_only_at_rank_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
    let v: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
    let outer = Matrix::from_fn(4, 3, |i, j| u[i] * v[j]);
    let (n, s) = (norms::nuclear(&outer).unwrap(), norms::spectral(&outer).unwrap());
    assert!((n - s).abs() <= 1e-8 * s);

    let full = random_matrix(&mut rng, 4, 3);
    let (n, s) = (norms::nuclear(&full).unwrap(), norms::spectral(&full).unwrap());
    assert!(n > s + 1e-8);
}

fn matrix_strategy() -> impl Strategy<Value = Matrix<f64>> {
    (1usize..7, 1usize..7).prop_flat_map(|(r, c)| {
        prop::collection::vec(-10.0f64..10.0, r * c).prop_map(move |d| Matrix::from_row_major(r, c, d).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn nuclear_dominates_spectral(w in matrix_strategy()) {
        let n = norms::nuclear(&w).unwrap();
        let s = norms::spectral(&w).unwrap();
        prop_assert!(s >= 0.0);
        prop_assert!(n >= s * (1.0 - 1e-12));
    }

    #[test]
    fn spectral_bounds_the_action(w in matrix_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..w.cols()).map(|_| rng.random_range(-5.0..5.0)).collect();
        let wx = mat_vec(&w, &x).unwrap();
        let lhs = norms::l2(&wx).unwrap();
        let rhs = norms::spectral(&w).unwrap() * norms::l2(&x).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-10) + 1e-12, "{} > {}", lhs, rhs);
    }

    #[test]
    fn svd_reconstructs(w in matrix_strategy()) {
        let svd = thin_svd(&w).unwrap();
        let scale = norms::frobenius(&w).unwrap().max(1.0);
        let err = norms::frobenius(&svd.recompose().sub(&w)).unwrap();
        prop_assert!(err <= 1e-10 * scale);
        for (a, b) in svd.s.iter().zip(eigen_singular_values(&w)) {
            prop_assert!((a - b).abs() <= 1e-7 * scale);
        }
    }
}
