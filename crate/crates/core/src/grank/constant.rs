use serde::{Deserialize, Serialize};

use super::matroid::{intersect, LinearMatroid, PartitionMatroid};
use super::{
    expand_matrix_family, grank_pairs_matroid, grank_sampled, JointIndependentSet, MatrixFamily, ShiftedSum,
    SubsetCertificate, VectorPairFamily,
};
use crate::error::{dim_err, Result};
use crate::linalg::{rank_factorize, ComplexMatrix, RankTolerance};

/// Generic rank of `M + sum_t W_t P_t R_t`, evaluated exactly, by direct
/// sampling, and with `M` replaced by parameterized rank-one factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantPlusGrank {
    /// Exact generic rank with `M` held fixed.
    pub rank: usize,
    /// Largest rank of `M + sum W P R` over random parameter draws.
    pub sampled_rank: usize,
    /// `rank(M)`, i.e. the number of prepended pairs.
    pub factor_rank: usize,
    /// Generic rank once every factor pair of `M` carries its own
    /// parameter. Never below `rank`, and strictly above it when the
    /// constant's structure is what keeps the sum deficient.
    pub absorbed_rank: usize,
    /// Witness for `absorbed_rank`: indices into the prepended expansion,
    /// `0..factor_rank` being the factor pairs of `M`, the rest following
    /// [`expand_matrix_family`] order.
    pub witness: JointIndependentSet,
    pub certificate: SubsetCertificate,
}

impl ConstantPlusGrank {
    pub fn routes_agree(&self) -> bool {
        self.rank == self.sampled_rank
    }

    pub fn absorption_holds(&self) -> bool {
        self.rank == self.absorbed_rank
    }
}

/// Exact generic rank of `m + sum_i p_i w_i r_i`.
///
/// The value is `max over X of rank [[m, W_X], [R_X, 0]] - |X|`. It is found
/// as a maximum common independent set of the columns of
/// `[[m, W, 0], [R, 0, I]]` and the partition matroid that forbids taking
/// both the column of `w_i` and the unit column of row `r_i`, minus `d`.
pub fn grank_constant_plus_pairs(m: &ComplexMatrix, pairs: &VectorPairFamily, tol: RankTolerance) -> Result<usize> {
    let (n1, n2, d) = (pairs.n1(), pairs.n2(), pairs.len());
    if m.rows() != n1 || m.cols() != n2 {
        return Err(dim_err(format!(
            "constant is {}x{}, family is {n1}x{n2}",
            m.rows(),
            m.cols()
        )));
    }
    let top = ComplexMatrix::hstack(n1, &[m, pairs.columns(), &ComplexMatrix::zeros(n1, d)])?;
    let bottom = ComplexMatrix::hstack(
        d,
        &[pairs.rows(), &ComplexMatrix::zeros(d, d), &ComplexMatrix::identity(d)],
    )?;
    let columns = LinearMatroid {
        vectors: ComplexMatrix::vstack(n2 + 2 * d, &[&top, &bottom])?,
        tol,
    };
    let pairing = PartitionMatroid {
        block_of: (0..n2 + 2 * d).map(|e| if e < n2 + d { e } else { e - d }).collect(),
    };
    let common = intersect(&columns, &pairing, n2 + 2 * d);
    // Only a tolerance too coarse to see the unit columns leaves fewer than `d`.
    Ok(common.chosen.len().saturating_sub(d))
}

/// Generic rank of `m + sum_t W_t P_t R_t` with `m` held fixed, reported
/// together with the sampled rank and the rank after replacing `m` by
/// parameterized rank-one factors.
pub fn grank_constant_plus_family(
    m: &ComplexMatrix,
    fam: &MatrixFamily,
    tol: RankTolerance,
    trials: usize,
    seed: u64,
) -> Result<ConstantPlusGrank> {
    if m.rows() != fam.n1() || m.cols() != fam.n2() {
        return Err(dim_err(format!(
            "constant is {}x{}, family is {}x{}",
            m.rows(),
            m.cols(),
            fam.n1(),
            fam.n2()
        )));
    }
    let rank = grank_constant_plus_pairs(m, &expand_matrix_family(fam).pairs, tol)?;
    let factorization = rank_factorize(m, tol);
    let prepended = fam.prepend_factorization(&factorization)?;
    let absorbed = grank_pairs_matroid(&expand_matrix_family(&prepended).pairs, tol);
    let sampled_rank = grank_sampled(&ShiftedSum { constant: m, sum: fam }, trials, seed, tol)?;
    Ok(ConstantPlusGrank {
        rank,
        sampled_rank,
        factor_rank: factorization.rank,
        absorbed_rank: absorbed.rank,
        witness: absorbed.witness,
        certificate: absorbed.certificate,
    })
}
