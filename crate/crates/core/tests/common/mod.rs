#![allow(dead_code)]

use fixspec::{Complex64, ComplexMatrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rank by Gaussian elimination with complete pivoting. A pivot counts when
/// it exceeds `rel` times the largest entry of the input.
pub fn ge_rank(m: &ComplexMatrix, rel: f64) -> usize {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<Vec<Complex64>> = (0..rows).map(|i| (0..cols).map(|j| m.get(i, j)).collect()).collect();
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    while rank < rows.min(cols) {
        let mut best = (rank, rank, 0.0);
        for (i, row) in a.iter().enumerate().skip(rank) {
            for (j, z) in row.iter().enumerate().skip(rank) {
                if z.norm() > best.2 {
                    best = (i, j, z.norm());
                }
            }
        }
        if best.2 <= rel * scale {
            break;
        }
        a.swap(rank, best.0);
        for row in a.iter_mut() {
            row.swap(rank, best.1);
        }
        let pivot_row = a[rank].clone();
        for row in a.iter_mut().skip(rank + 1) {
            let factor = row[rank] / pivot_row[rank];
            for (x, p) in row[rank..].iter_mut().zip(&pivot_row[rank..]) {
                *x -= factor * p;
            }
        }
        rank += 1;
    }
    rank
}

pub fn gaussian_complex<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let entries = (0..rows * cols)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    ComplexMatrix::from_row_major(rows, cols, entries).unwrap()
}

pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let q = gaussian_complex(rng, n, n).into_dmatrix().qr().q();
    ComplexMatrix::from_dmatrix(q).unwrap()
}

pub fn real(rows: &[&[f64]]) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(rows).unwrap()
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn diag(values: &[f64]) -> ComplexMatrix {
    let v: Vec<Complex64> = values.iter().map(|&x| c(x)).collect();
    ComplexMatrix::diagonal(&v)
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let d: DMatrix<Complex64> = a.as_dmatrix() - b.as_dmatrix();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
