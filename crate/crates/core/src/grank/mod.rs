//! Generic rank of parameter-weighted sums `sum_i w_i p_i r_i` and
//! `sum_t W_t P_t R_t`.
//!
//! Three independent evaluations are provided and are expected to agree:
//! linear-matroid intersection on the column and row vectors, the minimum
//! over index subsets of `rank w_S + rank r_{complement}`, and random
//! sampling of the parameters. Matrix families reduce to vector families by
//! expanding every member into its column/row pairs.

mod constant;
mod family;
mod matroid;
mod minformula;
mod sampled;

use serde::{Deserialize, Serialize};

pub use constant::{grank_constant_plus_family, grank_constant_plus_pairs, ConstantPlusGrank};
pub use family::{
    expand_matrix_family, ExpandedFamily, FamilyMember, MatrixFamily, PairOrigin, ParameterizedSum, ShiftedSum,
    VectorPairFamily,
};
pub use matroid::{grank_pairs_matroid, is_jointly_independent, IntersectionResult};
pub use minformula::{
    grank_matrix_minformula, grank_matrix_minformula_with_cap, grank_pairs_minformula, grank_pairs_minformula_with_cap,
    member_subset_value, pair_subset_value, refine_min_subset, DEFAULT_ENUMERATION_CAP,
};
pub use sampled::grank_sampled;

/// Indices of a jointly independent set of pairs, ascending. For expanded
/// matrix families the indices refer to [`ExpandedFamily::origins`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointIndependentSet {
    pub indices: Vec<usize>,
}

impl JointIndependentSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// The (member, column, row) triples behind the indices.
    pub fn origins(&self, expanded: &ExpandedFamily) -> Vec<PairOrigin> {
        self.indices.iter().map(|&i| expanded.origins[i]).collect()
    }
}

/// A subset `S` together with `rank(w_S) + rank(r_{complement of S})`
/// (or the member-level analogue). Every certificate value bounds the
/// generic rank from above.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetCertificate {
    pub subset: Vec<usize>,
    pub value: usize,
}

/// Ascending complement of `subset` within `0..d`.
pub fn complement(subset: &[usize], d: usize) -> Vec<usize> {
    let mut inside = vec![false; d];
    for &i in subset {
        inside[i] = true;
    }
    (0..d).filter(|&i| !inside[i]).collect()
}
