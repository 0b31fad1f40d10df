//! Tolerance-aware dense complex linear algebra.
//!
//! All rank decisions in the crate go through [`numeric_rank`]: a singular
//! value counts as nonzero when it exceeds `relative_threshold * sigma_max`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{dim_err, Error, Result};
use crate::sampling::{complex_uniform_matrix, stream_rng};

/// Dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ComplexMatrix({}x{}) {:?}",
            self.rows(),
            self.cols(),
            self.to_row_major()
        )
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(dim_err(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_iterator(rows, cols, entries))
    }

    /// Real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_row_major(rows, cols, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Real matrix from nested rows; all rows must have `cols` entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(dim_err(format!("row {i} has {} entries, expected {cols}", row.len())));
            }
            entries.extend_from_slice(row);
        }
        Self::from_real(rows.len(), cols, &entries)
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    /// For results of arithmetic on already-validated matrices.
    pub(crate) fn from_dmatrix_unchecked(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let n = values.len();
        Self(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                values[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn column_vector(values: &[Complex64]) -> Self {
        Self(DMatrix::from_column_slice(values.len(), 1, values))
    }

    pub fn row_vector(values: &[Complex64]) -> Self {
        Self(DMatrix::from_row_slice(1, values.len(), values))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.rows() == 0 || self.cols() == 0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn to_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }

    pub fn column(&self, j: usize) -> ComplexMatrix {
        Self(self.0.columns(j, 1).into_owned())
    }

    pub fn row(&self, i: usize) -> ComplexMatrix {
        Self(self.0.rows(i, 1).into_owned())
    }

    pub fn select_columns(&self, indices: &[usize]) -> ComplexMatrix {
        Self(DMatrix::from_fn(self.rows(), indices.len(), |i, j| {
            self.0[(i, indices[j])]
        }))
    }

    pub fn select_rows(&self, indices: &[usize]) -> ComplexMatrix {
        Self(DMatrix::from_fn(indices.len(), self.cols(), |i, j| {
            self.0[(indices[i], j)]
        }))
    }

    pub fn transpose(&self) -> ComplexMatrix {
        Self(self.0.transpose())
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: Complex64) -> ComplexMatrix {
        Self(self.0.map(|z| z * factor))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Horizontal concatenation. `rows` fixes the height when `blocks` is
    /// empty or contains zero-column blocks.
    pub fn hstack(rows: usize, blocks: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
        let mut cols = 0;
        for (i, b) in blocks.iter().enumerate() {
            if b.rows() != rows {
                return Err(dim_err(format!("block {i} has {} rows, expected {rows}", b.rows())));
            }
            cols += b.cols();
        }
        let mut out = DMatrix::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            out.view_mut((0, offset), (rows, b.cols())).copy_from(&b.0);
            offset += b.cols();
        }
        Ok(Self(out))
    }

    /// Vertical concatenation; see [`ComplexMatrix::hstack`].
    pub fn vstack(cols: usize, blocks: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
        let mut rows = 0;
        for (i, b) in blocks.iter().enumerate() {
            if b.cols() != cols {
                return Err(dim_err(format!("block {i} has {} columns, expected {cols}", b.cols())));
            }
            rows += b.rows();
        }
        let mut out = DMatrix::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            out.view_mut((offset, 0), (b.rows(), cols)).copy_from(&b.0);
            offset += b.rows();
        }
        Ok(Self(out))
    }

    /// Singular values in descending order. Empty matrices have none.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.is_empty() {
            return Vec::new();
        }
        let mut sv: Vec<f64> = self
            .0
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Smallest singular value of a matrix treated as `min(rows, cols)`
    /// wide; zero for empty matrices.
    pub fn min_singular_value(&self) -> f64 {
        self.singular_values().last().copied().unwrap_or(0.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Relative singular-value cutoff used for every rank decision.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RankTolerance(f64);

impl RankTolerance {
    pub const DEFAULT: f64 = 1e-9;

    pub fn new(relative_threshold: f64) -> Result<Self> {
        if relative_threshold > 0.0 && relative_threshold < 1.0 {
            Ok(Self(relative_threshold))
        } else {
            Err(Error::InvalidInput(format!(
                "rank tolerance must lie in (0, 1), got {relative_threshold}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for RankTolerance {
    fn default() -> Self {
        Self(Self::DEFAULT)
    }
}

impl TryFrom<f64> for RankTolerance {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RankTolerance> for f64 {
    fn from(t: RankTolerance) -> f64 {
        t.0
    }
}

fn count_above(sv: &[f64], tol: RankTolerance) -> usize {
    let Some(&largest) = sv.first() else { return 0 };
    if largest == 0.0 {
        return 0;
    }
    let cutoff = tol.0 * largest;
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Number of singular values above `tol * sigma_max`.
pub fn numeric_rank(m: &ComplexMatrix, tol: RankTolerance) -> usize {
    count_above(&m.singular_values(), tol)
}

/// Eigenvalues with multiplicity, sorted by real part then imaginary part.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(dim_err(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur =
        nalgebra::Schur::try_new(a.0.clone(), f64::EPSILON, 1000 * n.max(10)).ok_or(Error::EigenNoConvergence(n))?;
    let mut values: Vec<Complex64> = schur
        .eigenvalues()
        .ok_or(Error::EigenNoConvergence(n))?
        .iter()
        .copied()
        .collect();
    values.sort_by(cmp_complex);
    Ok(values)
}

/// Lexicographic order on (real, imaginary).
pub fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// `M = W * R` with `W` of full column rank and `R` of full row rank.
#[derive(Clone, Debug, PartialEq)]
pub struct RankFactorization {
    pub rank: usize,
    pub w: ComplexMatrix,
    pub r: ComplexMatrix,
}

impl RankFactorization {
    pub fn product(&self) -> ComplexMatrix {
        &self.w * &self.r
    }

    /// Column `i` of `W` and row `i` of `R`.
    pub fn pair(&self, i: usize) -> (ComplexMatrix, ComplexMatrix) {
        (self.w.column(i), self.r.row(i))
    }
}

struct SortedSvd {
    u: DMatrix<Complex64>,
    sv: Vec<f64>,
    v_t: DMatrix<Complex64>,
}

/// Thin SVD with singular values (and matching vectors) in descending order.
fn sorted_svd(m: &DMatrix<Complex64>) -> SortedSvd {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    SortedSvd {
        u: DMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]),
        sv: order.iter().map(|&k| svd.singular_values[k]).collect(),
        v_t: DMatrix::from_fn(order.len(), v_t.ncols(), |i, j| v_t[(order[i], j)]),
    }
}

/// Rank factorization through the SVD: `W = U_t * Sigma_t`, `R = V_t^H`.
pub fn rank_factorize(m: &ComplexMatrix, tol: RankTolerance) -> RankFactorization {
    let (n1, n2) = (m.rows(), m.cols());
    if m.is_empty() {
        return RankFactorization {
            rank: 0,
            w: ComplexMatrix::zeros(n1, 0),
            r: ComplexMatrix::zeros(0, n2),
        };
    }
    let svd = sorted_svd(&m.0);
    let t = count_above(&svd.sv, tol);
    let w = DMatrix::from_fn(n1, t, |i, j| svd.u[(i, j)] * svd.sv[j]);
    let r = svd.v_t.rows(0, t).into_owned();
    RankFactorization {
        rank: t,
        w: ComplexMatrix(w),
        r: ComplexMatrix(r),
    }
}

fn check_bordered_dims(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix) -> Result<usize> {
    if !a.is_square() {
        return Err(dim_err(format!("A must be square, got {}x{}", a.rows(), a.cols())));
    }
    let n = a.rows();
    if b.rows() != n {
        return Err(dim_err(format!("B has {} rows, expected {n}", b.rows())));
    }
    if c.cols() != n {
        return Err(dim_err(format!("C has {} columns, expected {n}", c.cols())));
    }
    Ok(n)
}

/// Assembles `[[A, B], [C, 0]]`. Zero-width `B` or zero-height `C` blocks
/// simply drop out.
pub fn bordered_matrix(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = check_bordered_dims(a, b, c)?;
    let (m, l) = (b.cols(), c.rows());
    let mut out = DMatrix::zeros(n + l, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(&a.0);
    out.view_mut((0, n), (n, m)).copy_from(&b.0);
    out.view_mut((n, 0), (l, n)).copy_from(&c.0);
    Ok(ComplexMatrix(out))
}

pub fn bordered_rank(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix, tol: RankTolerance) -> Result<usize> {
    Ok(numeric_rank(&bordered_matrix(a, b, c)?, tol))
}

/// Outcome of [`rank_restoring_gains`].
#[derive(Clone, Debug, PartialEq)]
pub enum GainRestoration {
    /// `rank(A + B*E + K*C) == n`.
    Restored { e: ComplexMatrix, k: ComplexMatrix },
    /// The bordered matrix has rank below `n`; no gains can help.
    Deficient,
}

/// Orthonormal basis (as columns) of the numerical null space of `c`,
/// which has `n` columns.
fn null_space_basis(c: &ComplexMatrix, tol: RankTolerance) -> DMatrix<Complex64> {
    let n = c.cols();
    if c.rows() == 0 || numeric_rank(c, tol) == 0 {
        return DMatrix::identity(n, n);
    }
    // Pad with zero rows so the SVD returns a full n x n right factor.
    let rows = c.rows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (c.rows(), n)).copy_from(&c.0);
    let svd = sorted_svd(&padded);
    let rank = count_above(&svd.sv, tol);
    svd.v_t.rows(rank, n - rank).adjoint()
}

/// Greedy column completion: finds `G` (`b.cols() x p.cols()`) such that
/// `p + b * G` has full column rank, adding one column of `b` to every
/// column of `p` that falls into the span of its predecessors.
fn complete_columns(p: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: RankTolerance) -> DMatrix<Complex64> {
    let (n, q) = (p.nrows(), p.ncols());
    let m = b.ncols();
    let mut g = DMatrix::zeros(m, q);
    let scale = p.norm().max(b.norm()).max(f64::MIN_POSITIVE);
    let accept = tol.value().sqrt() * scale;
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(n);

    let residual = |v: &DVector<Complex64>, basis: &[DVector<Complex64>]| {
        let mut r = v.clone();
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for q in basis {
                let coef = q.dotc(&r);
                r -= q * coef;
            }
        }
        r
    };

    for j in 0..q {
        let col: DVector<Complex64> = p.column(j).into_owned();
        let mut res = residual(&col, &basis);
        if res.norm() <= accept && m > 0 {
            let best = (0..m)
                .map(|i| {
                    let bi: DVector<Complex64> = b.column(i).into_owned();
                    let r = residual(&bi, &basis);
                    (i, r.norm(), bi.norm())
                })
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .expect("m > 0");
            if best.1 > 0.0 {
                let step = col.norm().max(scale / (q.max(1) as f64)) / best.2;
                g[(best.0, j)] = Complex64::new(step, 0.0);
                let shifted = &col + b.column(best.0) * Complex64::new(step, 0.0);
                res = residual(&shifted, &basis);
            }
        }
        let norm = res.norm();
        if norm > 0.0 && basis.len() < n {
            basis.push(res / Complex64::new(norm, 0.0));
        }
    }
    g
}

fn constructive_gains(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    tol: RankTolerance,
) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.rows();
    // Step 1: make [A + B E; C] injective by acting on null(C).
    let v_null = null_space_basis(c, tol);
    let restricted = &a.0 * &v_null;
    let g1 = complete_columns(&restricted, &b.0, tol);
    let e = &g1 * v_null.adjoint();
    let a1 = &a.0 + &b.0 * &e;
    // Step 2: the transposed problem for K.
    let g2 = complete_columns(&a1.transpose(), &c.0.transpose(), tol);
    let k = g2.transpose();
    debug_assert_eq!(e.shape(), (b.cols(), n));
    debug_assert_eq!(k.shape(), (n, c.rows()));
    (ComplexMatrix(e), ComplexMatrix(k))
}

fn closed_form(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    e: &ComplexMatrix,
    k: &ComplexMatrix,
) -> ComplexMatrix {
    &(a + &(b * e)) + &(k * c)
}

const GAIN_FALLBACK_DRAWS: u64 = 64;
const GAIN_FALLBACK_SEED: u64 = 0x6a09_e667_f3bc_c908;

/// Gains `E`, `K` with `rank(A + B E + K C) == n`, or `Deficient` when the
/// bordered matrix `[[A, B], [C, 0]]` has rank below `n`.
///
/// The greedy construction works column by column on `null(C)` and then on
/// the transposed problem. If rounding defeats it, random gains are tried,
/// which succeed generically.
pub fn rank_restoring_gains(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    tol: RankTolerance,
) -> Result<GainRestoration> {
    let n = check_bordered_dims(a, b, c)?;
    if bordered_rank(a, b, c, tol)? < n {
        return Ok(GainRestoration::Deficient);
    }
    let (e, k) = constructive_gains(a, b, c, tol);
    if numeric_rank(&closed_form(a, b, c, &e, &k), tol) == n {
        return Ok(GainRestoration::Restored { e, k });
    }
    for draw in 0..GAIN_FALLBACK_DRAWS {
        let mut rng = stream_rng(GAIN_FALLBACK_SEED, draw);
        let e = complex_uniform_matrix(&mut rng, b.cols(), n);
        let k = complex_uniform_matrix(&mut rng, n, c.rows());
        if numeric_rank(&closed_form(a, b, c, &e, &k), tol) == n {
            return Ok(GainRestoration::Restored { e, k });
        }
    }
    Err(Error::Numerical(
        "bordered rank is full but no rank-restoring gains were found".into(),
    ))
}

/// Executable self-test of the bordered-rank equivalence: compares
/// `rank [[A, B], [C, 0]] < n` with `rank(A + B E + K C) < n` over `trials`
/// random complex gain pairs plus the constructive pair. Returns `true` when
/// both sides agree.
pub fn bordered_equivalence_check(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    tol: RankTolerance,
    trials: usize,
    seed: u64,
) -> Result<bool> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let n = check_bordered_dims(a, b, c)?;
    let bordered_deficient = bordered_rank(a, b, c, tol)? < n;

    let mut always_deficient = true;
    for trial in 0..trials as u64 {
        let mut rng = stream_rng(seed, trial);
        let e = complex_uniform_matrix(&mut rng, b.cols(), n);
        let k = complex_uniform_matrix(&mut rng, n, c.rows());
        if numeric_rank(&closed_form(a, b, c, &e, &k), tol) == n {
            always_deficient = false;
        }
    }
    if !bordered_deficient {
        match rank_restoring_gains(a, b, c, tol)? {
            GainRestoration::Restored { e, k } => {
                if numeric_rank(&closed_form(a, b, c, &e, &k), tol) == n {
                    always_deficient = false;
                }
            }
            GainRestoration::Deficient => {}
        }
    }
    Ok(bordered_deficient == always_deficient)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rank_of_trivial_matrices() {
        let tol = RankTolerance::default();
        assert_eq!(numeric_rank(&ComplexMatrix::zeros(3, 3), tol), 0);
        assert_eq!(numeric_rank(&ComplexMatrix::identity(4), tol), 4);
        assert_eq!(numeric_rank(&ComplexMatrix::zeros(0, 5), tol), 0);
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let err = ComplexMatrix::from_real(1, 2, &[1.0, f64::NAN]).unwrap_err();
        assert_eq!(err, Error::NonFinite { row: 0, col: 1 });
        assert!(ComplexMatrix::from_row_major(1, 1, vec![c(0.0, f64::INFINITY)]).is_err());
        assert!(ComplexMatrix::from_real(2, 2, &[1.0]).is_err());
    }

    #[test]
    fn tolerance_must_be_in_open_unit_interval() {
        assert!(RankTolerance::new(0.0).is_err());
        assert!(RankTolerance::new(1.0).is_err());
        assert!(RankTolerance::new(-1e-3).is_err());
        assert!(RankTolerance::new(0.5).is_ok());
    }

    #[test]
    fn eigenvalues_of_small_matrices() {
        let d = ComplexMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 1.0]]).unwrap();
        let ev = eigenvalues(&d).unwrap();
        assert!((ev[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((ev[1] - c(2.0, 0.0)).norm() < 1e-12);

        let rot = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
        let ev = eigenvalues(&rot).unwrap();
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-12);

        assert!(eigenvalues(&ComplexMatrix::zeros(2, 3)).is_err());
        assert!(eigenvalues(&ComplexMatrix::zeros(0, 0)).unwrap().is_empty());
    }

    #[test]
    fn factorization_of_zero_and_identity() {
        let tol = RankTolerance::default();
        let f = rank_factorize(&ComplexMatrix::zeros(3, 4), tol);
        assert_eq!(f.rank, 0);
        assert_eq!((f.w.rows(), f.w.cols()), (3, 0));
        assert_eq!((f.r.rows(), f.r.cols()), (0, 4));

        let f = rank_factorize(&ComplexMatrix::identity(3), tol);
        assert_eq!(f.rank, 3);
        assert!((&f.product() - &ComplexMatrix::identity(3)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn bordered_rank_trivial_blocks() {
        let tol = RankTolerance::default();
        let z = ComplexMatrix::zeros(2, 2);
        let none_b = ComplexMatrix::zeros(2, 0);
        let none_c = ComplexMatrix::zeros(0, 2);
        assert_eq!(bordered_rank(&z, &none_b, &none_c, tol).unwrap(), 0);
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(bordered_rank(&z, &i2, &i2, tol).unwrap(), 4);
    }

    #[test]
    fn bordered_rank_rejects_mismatched_blocks() {
        let tol = RankTolerance::default();
        let a = ComplexMatrix::identity(2);
        assert!(bordered_rank(&a, &ComplexMatrix::zeros(3, 1), &ComplexMatrix::zeros(0, 2), tol).is_err());
        assert!(bordered_rank(&a, &ComplexMatrix::zeros(2, 1), &ComplexMatrix::zeros(1, 3), tol).is_err());
        assert!(bordered_rank(
            &ComplexMatrix::zeros(2, 3),
            &ComplexMatrix::zeros(2, 1),
            &ComplexMatrix::zeros(1, 3),
            tol
        )
        .is_err());
    }

    #[test]
    fn gains_for_full_rank_a_are_empty() {
        let tol = RankTolerance::default();
        let a = ComplexMatrix::identity(2);
        match rank_restoring_gains(&a, &ComplexMatrix::zeros(2, 0), &ComplexMatrix::zeros(0, 2), tol).unwrap() {
            GainRestoration::Restored { e, k } => {
                assert_eq!((e.rows(), e.cols()), (0, 2));
                assert_eq!((k.rows(), k.cols()), (2, 0));
            }
            GainRestoration::Deficient => panic!("identity is full rank"),
        }
    }

    #[test]
    fn single_input_restores_scalar() {
        let tol = RankTolerance::default();
        let a = ComplexMatrix::zeros(1, 1);
        let b = ComplexMatrix::identity(1);
        let cm = ComplexMatrix::zeros(0, 1);
        match rank_restoring_gains(&a, &b, &cm, tol).unwrap() {
            GainRestoration::Restored { e, .. } => {
                assert!(e.get(0, 0).norm() > 0.0);
                assert_eq!(numeric_rank(&(&b * &e), tol), 1);
            }
            GainRestoration::Deficient => panic!("bordered rank is 1"),
        }
        assert!(bordered_equivalence_check(&a, &b, &cm, tol, 5, 3).unwrap());
    }

    #[test]
    fn unactuated_zero_is_deficient() {
        let tol = RankTolerance::default();
        let a = ComplexMatrix::zeros(2, 2);
        let b = ComplexMatrix::zeros(2, 0);
        let cm = ComplexMatrix::zeros(1, 2);
        assert_eq!(
            rank_restoring_gains(&a, &b, &cm, tol).unwrap(),
            GainRestoration::Deficient
        );
        assert!(bordered_equivalence_check(&a, &b, &cm, tol, 5, 0).unwrap());
    }

    #[test]
    fn identity_input_restores_zero_dynamics() {
        let tol = RankTolerance::default();
        let a = ComplexMatrix::zeros(2, 2);
        let b = ComplexMatrix::identity(2);
        let cm = ComplexMatrix::zeros(0, 2);
        assert_eq!(bordered_rank(&a, &b, &cm, tol).unwrap(), 2);
        assert!(bordered_equivalence_check(&a, &b, &cm, tol, 5, 11).unwrap());
        assert!(bordered_equivalence_check(&a, &b, &cm, tol, 0, 11).is_err());
    }

    #[test]
    fn greedy_gains_mix_input_and_output_sides() {
        // A = diag(1, 0, 0); the missing directions are reachable only
        // through one input and one output.
        let tol = RankTolerance::default();
        let a = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let b = ComplexMatrix::from_real_rows(&[&[0.0], &[1.0], &[0.0]]).unwrap();
        let cm = ComplexMatrix::from_real_rows(&[&[0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(bordered_rank(&a, &b, &cm, tol).unwrap(), 3);
        let (e, k) = constructive_gains(&a, &b, &cm, tol);
        assert_eq!(numeric_rank(&closed_form(&a, &b, &cm, &e, &k), tol), 3);
    }

    #[test]
    fn stacking_checks_dimensions() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::zeros(3, 1);
        assert!(ComplexMatrix::hstack(2, &[&a, &b]).is_err());
        let s = ComplexMatrix::hstack(2, &[&a, &ComplexMatrix::zeros(2, 0)]).unwrap();
        assert_eq!((s.rows(), s.cols()), (2, 2));
        let v = ComplexMatrix::vstack(3, &[]).unwrap();
        assert_eq!((v.rows(), v.cols()), (0, 3));
    }
}
