//! Seeded random instances: systems (generic, with an embedded fixed mode,
//! block-decoupled, degenerate), vector-pair and matrix families with
//! built-in linear dependencies, and bordered-rank triples.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fixed::{Channel, MultiChannelSystem};
use crate::grank::{FamilyMember, MatrixFamily, VectorPairFamily};
use crate::linalg::ComplexMatrix;
use crate::sampling::{complex_uniform_matrix, real_uniform_matrix};

/// Input and output widths `(m_i, l_i)` of one channel.
pub type ChannelDims = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SystemKind {
    /// All entries uniform on `[-1, 1]`.
    Generic,
    /// `lambda` is made fixed by construction; see [`embedded_fixed_mode_system`].
    EmbeddedFixedMode { lambda: f64 },
    /// Block-diagonal `A` with channels acting on and reading from chosen
    /// blocks, hidden behind a random similarity transform.
    Decoupled,
    /// Generic, except that some channels lose their input, their output or
    /// both.
    Degenerate,
}

fn random_subset<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<usize> {
    (0..k).filter(|_| rng.random_bool(0.5)).collect()
}

/// A system with `lambda` in its fixed spectrum.
///
/// A channel subset `S` and splitting `a + b = n - 1` are drawn, then
///
/// ```text
/// lambda I - A = U X + Y V,   B_i = U G_i (i in S),   C_j = H_j V (j not in S)
/// ```
///
/// with `U: n x a`, `V: b x n`. The bordered pencil then factors through an
/// inner dimension of `a + b < n`. Returns the system and `S`.
pub fn embedded_fixed_mode_system<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    dims: &[ChannelDims],
    lambda: f64,
) -> Result<(MultiChannelSystem, Vec<usize>)> {
    if n == 0 || dims.is_empty() {
        return Err(Error::InvalidInput("need n >= 1 and at least one channel".into()));
    }
    let k = dims.len();
    let subset = random_subset(rng, k);
    let a_dim = rng.random_range(0..n);
    let b_dim = n - 1 - a_dim;
    let u = real_uniform_matrix(rng, n, a_dim);
    let x = real_uniform_matrix(rng, a_dim, n);
    let y = real_uniform_matrix(rng, n, b_dim);
    let v = real_uniform_matrix(rng, b_dim, n);
    let shift = &(&u * &x) + &(&y * &v);
    let a = &ComplexMatrix::identity(n).scale(Complex64::new(lambda, 0.0)) - &shift;
    let channels = dims
        .iter()
        .enumerate()
        .map(|(i, &(m, l))| {
            let b = if subset.contains(&i) {
                &u * &real_uniform_matrix(rng, a_dim, m)
            } else {
                real_uniform_matrix(rng, n, m)
            };
            let c = if subset.contains(&i) {
                real_uniform_matrix(rng, l, n)
            } else {
                &real_uniform_matrix(rng, l, b_dim) * &v
            };
            Channel { b, c }
        })
        .collect();
    Ok((MultiChannelSystem::new(a, channels)?, subset))
}

fn block_support(n1: usize, n: usize, which: u8) -> Vec<bool> {
    (0..n)
        .map(|i| match which {
            0 => i < n1,
            1 => i >= n1,
            _ => true,
        })
        .collect()
}

fn decoupled_system<R: Rng + ?Sized>(rng: &mut R, n: usize, dims: &[ChannelDims]) -> Result<MultiChannelSystem> {
    let n1 = if n > 1 { rng.random_range(1..n) } else { 1 };
    let mut a = real_uniform_matrix(rng, n, n).into_dmatrix();
    for i in 0..n {
        for j in 0..n {
            if (i < n1) != (j < n1) {
                a[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    let mut t = real_uniform_matrix(rng, n, n).scale(Complex64::new(0.3, 0.0));
    t = &t + &ComplexMatrix::identity(n);
    let t_inv = ComplexMatrix::from_dmatrix(
        t.as_dmatrix()
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("similarity transform is singular".into()))?,
    )?;
    let a = ComplexMatrix::from_dmatrix(a)?;
    let channels = dims
        .iter()
        .map(|&(m, l)| {
            let rows_in = block_support(n1, n, rng.random_range(0..3));
            let cols_out = block_support(n1, n, rng.random_range(0..3));
            let mut b = real_uniform_matrix(rng, n, m).into_dmatrix();
            let mut c = real_uniform_matrix(rng, l, n).into_dmatrix();
            for i in 0..n {
                if !rows_in[i] {
                    b.row_mut(i).fill(Complex64::new(0.0, 0.0));
                }
                if !cols_out[i] {
                    c.column_mut(i).fill(Complex64::new(0.0, 0.0));
                }
            }
            let b = ComplexMatrix::from_dmatrix(b).expect("finite");
            let c = ComplexMatrix::from_dmatrix(c).expect("finite");
            Channel {
                b: &t * &b,
                c: &c * &t_inv,
            }
        })
        .collect();
    MultiChannelSystem::new(&(&t * &a) * &t_inv, channels)
}

pub fn random_system<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    dims: &[ChannelDims],
    kind: SystemKind,
) -> Result<MultiChannelSystem> {
    if n == 0 || dims.is_empty() {
        return Err(Error::InvalidInput("need n >= 1 and at least one channel".into()));
    }
    match kind {
        SystemKind::EmbeddedFixedMode { lambda } => Ok(embedded_fixed_mode_system(rng, n, dims, lambda)?.0),
        SystemKind::Decoupled => decoupled_system(rng, n, dims),
        SystemKind::Generic | SystemKind::Degenerate => {
            let a = real_uniform_matrix(rng, n, n);
            let channels = dims
                .iter()
                .map(|&(m, l)| {
                    let (m, l) = if kind == SystemKind::Degenerate {
                        match rng.random_range(0..4) {
                            0 => (0, l),
                            1 => (m, 0),
                            2 => (0, 0),
                            _ => (m, l),
                        }
                    } else {
                        (m, l)
                    };
                    Channel {
                        b: real_uniform_matrix(rng, n, m),
                        c: real_uniform_matrix(rng, l, n),
                    }
                })
                .collect();
            MultiChannelSystem::new(a, channels)
        }
    }
}

/// Random channel widths in `1..=max_width`.
pub fn random_dims<R: Rng + ?Sized>(rng: &mut R, k: usize, max_width: usize) -> Vec<ChannelDims> {
    (0..k)
        .map(|_| (rng.random_range(1..=max_width), rng.random_range(1..=max_width)))
        .collect()
}

/// A system of random kind with `n <= max_n`, `k <= max_k`.
pub fn random_mixed_system<R: Rng + ?Sized>(rng: &mut R, max_n: usize, max_k: usize) -> Result<MultiChannelSystem> {
    let n = rng.random_range(1..=max_n);
    let k = rng.random_range(1..=max_k);
    let dims = random_dims(rng, k, 2);
    let kind = match rng.random_range(0..4) {
        0 => SystemKind::Generic,
        1 => SystemKind::EmbeddedFixedMode {
            lambda: (rng.random_range(-4..=4) as f64) * 0.5,
        },
        2 => SystemKind::Decoupled,
        _ => SystemKind::Degenerate,
    };
    random_system(rng, n, &dims, kind)
}

/// Vectors drawn from a random subspace of dimension `1..=dim`, with
/// occasional zero vectors and scaled repeats.
fn structured_vectors<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> Vec<ComplexMatrix> {
    if dim == 0 {
        return vec![ComplexMatrix::zeros(0, 1); count];
    }
    let sub_dim = rng.random_range(1..=dim);
    let basis = complex_uniform_matrix(rng, dim, sub_dim);
    let mut out: Vec<ComplexMatrix> = Vec::with_capacity(count);
    for _ in 0..count {
        let roll: f64 = rng.random();
        let v = if roll < 0.08 {
            ComplexMatrix::zeros(dim, 1)
        } else if roll < 0.2 && !out.is_empty() {
            let src = rng.random_range(0..out.len());
            out[src].scale(Complex64::new(rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0)))
        } else {
            &basis * &complex_uniform_matrix(rng, sub_dim, 1)
        };
        out.push(v);
    }
    out
}

/// `d` pairs in `C^{n1} x C^{1 x n2}` with planted dependencies.
pub fn random_pair_family<R: Rng + ?Sized>(rng: &mut R, d: usize, n1: usize, n2: usize) -> VectorPairFamily {
    let ws = structured_vectors(rng, n1, d);
    let rs: Vec<ComplexMatrix> = structured_vectors(rng, n2, d).iter().map(|r| r.transpose()).collect();
    let pairs: Vec<_> = ws.into_iter().zip(rs).collect();
    VectorPairFamily::from_pairs(n1, n2, &pairs).expect("dimensions are consistent")
}

/// Pair family with `d <= max_d`, `n1, n2 <= max_dim`.
pub fn random_sized_pair_family<R: Rng + ?Sized>(rng: &mut R, max_d: usize, max_dim: usize) -> VectorPairFamily {
    let d = rng.random_range(0..=max_d);
    let n1 = rng.random_range(1..=max_dim);
    let n2 = rng.random_range(1..=max_dim);
    random_pair_family(rng, d, n1, n2)
}

/// `d` members with `alpha_t <= max_alpha`, `beta_t <= max_beta`; columns
/// and rows come from shared random subspaces.
pub fn random_matrix_family<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    n1: usize,
    n2: usize,
    max_alpha: usize,
    max_beta: usize,
) -> MatrixFamily {
    let alphas: Vec<usize> = (0..d).map(|_| rng.random_range(0..=max_alpha)).collect();
    let betas: Vec<usize> = (0..d).map(|_| rng.random_range(0..=max_beta)).collect();
    let mut cols = structured_vectors(rng, n1, alphas.iter().sum()).into_iter();
    let mut rows = structured_vectors(rng, n2, betas.iter().sum()).into_iter();
    let members = alphas
        .iter()
        .zip(&betas)
        .map(|(&alpha, &beta)| {
            let w_cols: Vec<ComplexMatrix> = cols.by_ref().take(alpha).collect();
            let r_rows: Vec<ComplexMatrix> = rows.by_ref().take(beta).map(|r| r.transpose()).collect();
            let w_refs: Vec<&ComplexMatrix> = w_cols.iter().collect();
            let r_refs: Vec<&ComplexMatrix> = r_rows.iter().collect();
            FamilyMember {
                w: ComplexMatrix::hstack(n1, &w_refs).expect("n1 rows"),
                r: ComplexMatrix::vstack(n2, &r_refs).expect("n2 columns"),
            }
        })
        .collect();
    MatrixFamily::new(n1, n2, members).expect("dimensions are consistent")
}

/// Random complex `n1 x n2` matrix of rank `rank` (generically).
pub fn random_low_rank<R: Rng + ?Sized>(rng: &mut R, n1: usize, n2: usize, rank: usize) -> ComplexMatrix {
    &complex_uniform_matrix(rng, n1, rank) * &complex_uniform_matrix(rng, rank, n2)
}

/// `(A, B, C)` with `A: n x n`, `B: n x m`, `C: l x n`. Roughly a third of
/// the draws are forced to have bordered rank below `n`.
pub fn random_bordered_triple<R: Rng + ?Sized>(
    rng: &mut R,
    max_n: usize,
    max_width: usize,
) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(0..=max_width);
    let l = rng.random_range(0..=max_width);
    match rng.random_range(0..3) {
        0 => (
            complex_uniform_matrix(rng, n, n),
            complex_uniform_matrix(rng, n, m),
            complex_uniform_matrix(rng, l, n),
        ),
        1 => {
            let r = rng.random_range(0..=n);
            let rb = rng.random_range(0..=m.min(n));
            let rc = rng.random_range(0..=l.min(n));
            (
                random_low_rank(rng, n, n, r),
                random_low_rank(rng, n, m, rb),
                random_low_rank(rng, l, n, rc),
            )
        }
        _ => {
            // [[A, B], [C, 0]] = [[U, Y], [0, H]] * [[X, G], [V, 0]] with
            // inner dimension a + b < n.
            let inner = rng.random_range(0..n);
            let a_dim = rng.random_range(0..=inner);
            let b_dim = inner - a_dim;
            let u = complex_uniform_matrix(rng, n, a_dim);
            let y = complex_uniform_matrix(rng, n, b_dim);
            let h = complex_uniform_matrix(rng, l, b_dim);
            let x = complex_uniform_matrix(rng, a_dim, n);
            let g = complex_uniform_matrix(rng, a_dim, m);
            let v = complex_uniform_matrix(rng, b_dim, n);
            (&(&u * &x) + &(&y * &v), &u * &g, &h * &v)
        }
    }
}
