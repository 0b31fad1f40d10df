mod common;

use common::{c, diag, gaussian_complex, ge_rank, max_abs_diff, random_unitary, real, rng};
use fixspec::linalg::{
    bordered_equivalence_check, bordered_matrix, bordered_rank, eigenvalues, numeric_rank, rank_factorize,
    rank_restoring_gains, GainRestoration,
};
use fixspec::{Complex64, ComplexMatrix, RankTolerance};

fn tol() -> RankTolerance {
    RankTolerance::default()
}

#[test]
fn tiny_singular_value_is_dropped_under_unitary_mixing() {
    let mut r = rng(11);
    for _ in 0..20 {
        let u = random_unitary(&mut r, 3);
        let v = random_unitary(&mut r, 3);
        let m = &(&u * &diag(&[1.0, 1e-14, 0.0])) * &v;
        assert_eq!(numeric_rank(&m, tol()), 1);
        let m = &(&u * &diag(&[1.0, 1e-6, 0.0])) * &v;
        assert_eq!(numeric_rank(&m, tol()), 2);
    }
}

#[test]
fn numeric_rank_matches_elimination_on_constructed_ranks() {
    let mut r = rng(12);
    for trial in 0..200 {
        let rows = 1 + trial % 6;
        let cols = 1 + (trial / 6) % 6;
        let k = trial % (rows.min(cols) + 1);
        let m = &gaussian_complex(&mut r, rows, k) * &gaussian_complex(&mut r, k, cols);
        assert_eq!(numeric_rank(&m, tol()), k, "{rows}x{cols} of rank {k}");
        assert_eq!(ge_rank(&m, 1e-9), k);
    }
}

#[test]
fn eigenvalues_have_small_residual() {
    let mut r = rng(13);
    for n in 1..=7 {
        for _ in 0..10 {
            let a = gaussian_complex(&mut r, n, n);
            let values = eigenvalues(&a).unwrap();
            assert_eq!(values.len(), n);
            let scale = a.frobenius_norm().max(1.0);
            for lambda in values {
                let shifted = &ComplexMatrix::identity(n).scale(lambda) - &a;
                assert!(shifted.min_singular_value() <= 1e-10 * scale, "residual at {lambda}");
            }
        }
    }
}

#[test]
fn eigenvalues_of_known_matrices() {
    // Rotation generator: +-i.
    let values = eigenvalues(&real(&[&[0.0, -1.0], &[1.0, 0.0]])).unwrap();
    assert!((values[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
    assert!((values[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    // Triangular: the diagonal, sorted.
    let values = eigenvalues(&real(&[&[3.0, 1.0, 2.0], &[0.0, -1.0, 5.0], &[0.0, 0.0, 2.0]])).unwrap();
    for (got, want) in values.iter().zip([-1.0, 2.0, 3.0]) {
        assert!((got - c(want)).norm() < 1e-12);
    }
}

#[test]
fn factorization_reconstructs_with_independent_factors() {
    let mut r = rng(14);
    for trial in 0..100 {
        let rows = 1 + trial % 5;
        let cols = 1 + (trial / 5) % 5;
        let k = trial % (rows.min(cols) + 1);
        let m = &gaussian_complex(&mut r, rows, k) * &gaussian_complex(&mut r, k, cols);
        let f = rank_factorize(&m, tol());
        assert_eq!(f.rank, k);
        assert_eq!((f.w.rows(), f.w.cols(), f.r.rows(), f.r.cols()), (rows, k, k, cols));
        assert!(max_abs_diff(&f.product(), &m) <= 1e-10 * m.frobenius_norm().max(1.0));
        assert_eq!(ge_rank(&f.w, 1e-9), k);
        assert_eq!(ge_rank(&f.r, 1e-9), k);
    }
}

#[test]
fn bordered_rank_matches_assembled_elimination() {
    let mut r = rng(15);
    for trial in 0..200 {
        let n = 1 + trial % 5;
        let m = trial % 3;
        let l = (trial / 3) % 3;
        // Low-rank blocks give a spread of bordered ranks.
        let ka = trial % (n + 1);
        let a = &gaussian_complex(&mut r, n, ka) * &gaussian_complex(&mut r, ka, n);
        let b = gaussian_complex(&mut r, n, m);
        let cm = gaussian_complex(&mut r, l, n);
        let assembled = bordered_matrix(&a, &b, &cm).unwrap();
        assert_eq!((assembled.rows(), assembled.cols()), (n + l, n + m));
        for i in 0..n {
            for j in 0..n {
                assert_eq!(assembled.get(i, j), a.get(i, j));
            }
        }
        for i in n..n + l {
            for j in n..n + m {
                assert_eq!(assembled.get(i, j), c(0.0));
            }
        }
        assert_eq!(bordered_rank(&a, &b, &cm, tol()).unwrap(), ge_rank(&assembled, 1e-9));
    }
}

#[test]
fn constructive_gains_on_hand_cases() {
    // diag(1, 0, 0) needs both an input and an output direction.
    let a = diag(&[1.0, 0.0, 0.0]);
    let b = real(&[&[0.0], &[1.0], &[0.0]]);
    let cm = real(&[&[0.0, 0.0, 1.0]]);
    match rank_restoring_gains(&a, &b, &cm, tol()).unwrap() {
        GainRestoration::Restored { e, k } => {
            let closed = &(&a + &(&b * &e)) + &(&k * &cm);
            assert_eq!(ge_rank(&closed, 1e-9), 3);
        }
        GainRestoration::Deficient => panic!("bordered rank is 3"),
    }
    // The output only repeats what A already sees: rank [[A, B], [C, 0]] = 2.
    let cm = real(&[&[1.0, 0.0, 0.0]]);
    assert_eq!(bordered_rank(&a, &b, &cm, tol()).unwrap(), 2);
    assert_eq!(
        rank_restoring_gains(&a, &b, &cm, tol()).unwrap(),
        GainRestoration::Deficient
    );
    assert!(bordered_equivalence_check(&a, &b, &cm, tol(), 10, 1).unwrap());
}
