use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};
use crate::linalg::{ComplexMatrix, RankFactorization};
use crate::sampling::{annulus_matrix, annulus_sample};

/// Pairs `(w_i, r_i)` of a column vector in `C^{n1}` and a row vector in
/// `C^{1 x n2}`. Stored as an `n1 x d` matrix of columns and a `d x n2`
/// matrix of rows, so index sets select columns and rows directly.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorPairFamily {
    columns: ComplexMatrix,
    rows: ComplexMatrix,
}

impl VectorPairFamily {
    pub fn empty(n1: usize, n2: usize) -> Self {
        Self {
            columns: ComplexMatrix::zeros(n1, 0),
            rows: ComplexMatrix::zeros(0, n2),
        }
    }

    /// `columns` is `n1 x d`, `rows` is `d x n2`.
    pub fn from_matrices(columns: ComplexMatrix, rows: ComplexMatrix) -> Result<Self> {
        if columns.cols() != rows.rows() {
            return Err(dim_err(format!(
                "{} column vectors but {} row vectors",
                columns.cols(),
                rows.rows()
            )));
        }
        Ok(Self { columns, rows })
    }

    /// Builds a family from `(w, r)` pairs given as `n1 x 1` and `1 x n2`
    /// matrices.
    pub fn from_pairs(n1: usize, n2: usize, pairs: &[(ComplexMatrix, ComplexMatrix)]) -> Result<Self> {
        for (i, (w, r)) in pairs.iter().enumerate() {
            if w.rows() != n1 || w.cols() != 1 {
                return Err(dim_err(format!(
                    "pair {i}: w is {}x{}, expected {n1}x1",
                    w.rows(),
                    w.cols()
                )));
            }
            if r.rows() != 1 || r.cols() != n2 {
                return Err(dim_err(format!(
                    "pair {i}: r is {}x{}, expected 1x{n2}",
                    r.rows(),
                    r.cols()
                )));
            }
        }
        let ws: Vec<&ComplexMatrix> = pairs.iter().map(|(w, _)| w).collect();
        let rs: Vec<&ComplexMatrix> = pairs.iter().map(|(_, r)| r).collect();
        Ok(Self {
            columns: ComplexMatrix::hstack(n1, &ws)?,
            rows: ComplexMatrix::vstack(n2, &rs)?,
        })
    }

    pub fn n1(&self) -> usize {
        self.columns.rows()
    }

    pub fn n2(&self) -> usize {
        self.rows.cols()
    }

    pub fn len(&self) -> usize {
        self.columns.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All column vectors as an `n1 x d` matrix.
    pub fn columns(&self) -> &ComplexMatrix {
        &self.columns
    }

    /// All row vectors as a `d x n2` matrix.
    pub fn rows(&self) -> &ComplexMatrix {
        &self.rows
    }

    pub fn pair(&self, i: usize) -> (ComplexMatrix, ComplexMatrix) {
        (self.columns.column(i), self.rows.row(i))
    }

    /// `w_S`: the columns indexed by `subset`, in the given order.
    pub fn w_subset(&self, subset: &[usize]) -> ComplexMatrix {
        self.columns.select_columns(subset)
    }

    /// `r_S`: the rows indexed by `subset`, in the given order.
    pub fn r_subset(&self, subset: &[usize]) -> ComplexMatrix {
        self.rows.select_rows(subset)
    }

    /// Appends one pair; used for monotonicity checks.
    pub fn with_pair(&self, w: &ComplexMatrix, r: &ComplexMatrix) -> Result<Self> {
        Ok(Self {
            columns: ComplexMatrix::hstack(self.n1(), &[&self.columns, w])?,
            rows: ComplexMatrix::vstack(self.n2(), &[&self.rows, r])?,
        })
    }

    /// Pairs from a rank factorization: column `i` of `W` with row `i` of `R`.
    pub fn from_factorization(f: &RankFactorization) -> Self {
        Self {
            columns: f.w.clone(),
            rows: f.r.clone(),
        }
    }

    /// Concatenation `self` followed by `other`.
    pub fn concat(&self, other: &VectorPairFamily) -> Result<Self> {
        Ok(Self {
            columns: ComplexMatrix::hstack(self.n1(), &[&self.columns, &other.columns])?,
            rows: ComplexMatrix::vstack(self.n2(), &[&self.rows, &other.rows])?,
        })
    }
}

/// One member `(W_t, R_t)` of a [`MatrixFamily`]; `W_t` is `n1 x alpha_t`,
/// `R_t` is `beta_t x n2`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyMember {
    pub w: ComplexMatrix,
    pub r: ComplexMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFamily {
    n1: usize,
    n2: usize,
    members: Vec<FamilyMember>,
}

impl MatrixFamily {
    pub fn new(n1: usize, n2: usize, members: Vec<FamilyMember>) -> Result<Self> {
        for (t, m) in members.iter().enumerate() {
            if m.w.rows() != n1 {
                return Err(dim_err(format!("member {t}: W has {} rows, expected {n1}", m.w.rows())));
            }
            if m.r.cols() != n2 {
                return Err(dim_err(format!(
                    "member {t}: R has {} columns, expected {n2}",
                    m.r.cols()
                )));
            }
        }
        Ok(Self { n1, n2, members })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[FamilyMember] {
        &self.members
    }

    /// `W_S = [W_{i1} ... W_{is}]` for ascending `subset`.
    pub fn w_subset(&self, subset: &[usize]) -> ComplexMatrix {
        let blocks: Vec<&ComplexMatrix> = subset.iter().map(|&t| &self.members[t].w).collect();
        ComplexMatrix::hstack(self.n1, &blocks).expect("member dimensions validated")
    }

    /// `R_S` stacked vertically for ascending `subset`.
    pub fn r_subset(&self, subset: &[usize]) -> ComplexMatrix {
        let blocks: Vec<&ComplexMatrix> = subset.iter().map(|&t| &self.members[t].r).collect();
        ComplexMatrix::vstack(self.n2, &blocks).expect("member dimensions validated")
    }

    /// Each pair of a vector family becomes a rank-one member.
    pub fn from_pairs(fam: &VectorPairFamily) -> Self {
        let members = (0..fam.len())
            .map(|i| {
                let (w, r) = fam.pair(i);
                FamilyMember { w, r }
            })
            .collect();
        Self {
            n1: fam.n1(),
            n2: fam.n2(),
            members,
        }
    }

    /// The rank-one pairs of `factorization` as members, followed by the
    /// members of `self`.
    pub fn prepend_factorization(&self, factorization: &RankFactorization) -> Result<Self> {
        let mut members: Vec<FamilyMember> = (0..factorization.rank)
            .map(|i| {
                let (w, r) = factorization.pair(i);
                FamilyMember { w, r }
            })
            .collect();
        members.extend(self.members.iter().cloned());
        Self::new(self.n1, self.n2, members)
    }
}

/// Origin of an expanded pair: column `column` of `W_member` with row `row`
/// of `R_member`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairOrigin {
    pub member: usize,
    pub column: usize,
    pub row: usize,
}

/// All column/row pairs of a matrix family, in (member, column, row)
/// lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpandedFamily {
    pub pairs: VectorPairFamily,
    pub origins: Vec<PairOrigin>,
}

/// Expands `sum_t W_t P_t R_t` into `sum_{t,i,j} w_t^i p_t^{ij} r_t^j`.
/// The result has `sum_t alpha_t * beta_t` pairs.
pub fn expand_matrix_family(fam: &MatrixFamily) -> ExpandedFamily {
    let mut ws = Vec::new();
    let mut rs = Vec::new();
    let mut origins = Vec::new();
    for (t, m) in fam.members.iter().enumerate() {
        for i in 0..m.w.cols() {
            for j in 0..m.r.rows() {
                ws.push(m.w.column(i));
                rs.push(m.r.row(j));
                origins.push(PairOrigin {
                    member: t,
                    column: i,
                    row: j,
                });
            }
        }
    }
    let w_refs: Vec<&ComplexMatrix> = ws.iter().collect();
    let r_refs: Vec<&ComplexMatrix> = rs.iter().collect();
    let pairs = VectorPairFamily {
        columns: ComplexMatrix::hstack(fam.n1, &w_refs).expect("validated"),
        rows: ComplexMatrix::vstack(fam.n2, &r_refs).expect("validated"),
    };
    ExpandedFamily { pairs, origins }
}

/// A parameter-weighted sum whose generic rank can be estimated by drawing
/// the parameters at random.
pub trait ParameterizedSum {
    fn shape(&self) -> (usize, usize);

    /// One realization with independent parameters from the annulus
    /// `0.5 <= |p| <= 1.5`.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix;
}

impl ParameterizedSum for VectorPairFamily {
    fn shape(&self) -> (usize, usize) {
        (self.n1(), self.n2())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix {
        let params: Vec<_> = (0..self.len()).map(|_| annulus_sample(rng)).collect();
        let scaled = &self.columns * &ComplexMatrix::diagonal(&params);
        &scaled * &self.rows
    }
}

impl ParameterizedSum for MatrixFamily {
    fn shape(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.n1, self.n2);
        for m in &self.members {
            let p = annulus_matrix(rng, m.w.cols(), m.r.rows());
            acc = &acc + &(&(&m.w * &p) * &m.r);
        }
        acc
    }
}

/// `constant + sum`, where only `sum` carries parameters.
pub struct ShiftedSum<'a, F> {
    pub constant: &'a ComplexMatrix,
    pub sum: &'a F,
}

impl<F: ParameterizedSum> ParameterizedSum for ShiftedSum<'_, F> {
    fn shape(&self) -> (usize, usize) {
        self.sum.shape()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix {
        self.constant + &self.sum.sample(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn e(n: usize, i: usize) -> Vec<Complex64> {
        (0..n)
            .map(|k| Complex64::new(if k == i { 1.0 } else { 0.0 }, 0.0))
            .collect()
    }

    #[test]
    fn expansion_of_identity_member() {
        let fam = MatrixFamily::new(
            2,
            2,
            vec![FamilyMember {
                w: ComplexMatrix::identity(2),
                r: ComplexMatrix::identity(2),
            }],
        )
        .unwrap();
        let ex = expand_matrix_family(&fam);
        assert_eq!(ex.pairs.len(), 4);
        let expected = [(0, 0), (0, 1), (1, 0), (1, 1)];
        for (k, &(i, j)) in expected.iter().enumerate() {
            let (w, r) = ex.pairs.pair(k);
            assert_eq!(w, ComplexMatrix::column_vector(&e(2, i)));
            assert_eq!(r, ComplexMatrix::row_vector(&e(2, j)));
            assert_eq!(
                ex.origins[k],
                PairOrigin {
                    member: 0,
                    column: i,
                    row: j
                }
            );
        }
    }

    #[test]
    fn zero_width_member_contributes_nothing() {
        let fam = MatrixFamily::new(
            2,
            3,
            vec![
                FamilyMember {
                    w: ComplexMatrix::zeros(2, 0),
                    r: ComplexMatrix::identity(3),
                },
                FamilyMember {
                    w: ComplexMatrix::identity(2),
                    r: ComplexMatrix::zeros(1, 3),
                },
            ],
        )
        .unwrap();
        let ex = expand_matrix_family(&fam);
        assert_eq!(ex.pairs.len(), 2);
        assert!(ex.origins.iter().all(|o| o.member == 1));
    }

    #[test]
    fn member_dimensions_are_checked() {
        let bad = MatrixFamily::new(
            2,
            2,
            vec![FamilyMember {
                w: ComplexMatrix::identity(3),
                r: ComplexMatrix::identity(2),
            }],
        );
        assert!(bad.is_err());
        let pairs = VectorPairFamily::from_pairs(2, 2, &[(ComplexMatrix::zeros(3, 1), ComplexMatrix::zeros(1, 2))]);
        assert!(pairs.is_err());
    }
}
