use std::cmp::Ordering;

use rayon::prelude::*;

use super::{complement, expand_matrix_family, MatrixFamily, SubsetCertificate, VectorPairFamily};
use crate::error::{Error, Result};
use crate::linalg::{numeric_rank, RankTolerance};

/// Largest index-set size enumerated exhaustively (2^20 subsets).
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// `rank(w_S) + rank(r_{complement of S})`.
pub fn pair_subset_value(fam: &VectorPairFamily, subset: &[usize], tol: RankTolerance) -> usize {
    let rest = complement(subset, fam.len());
    numeric_rank(&fam.w_subset(subset), tol) + numeric_rank(&fam.r_subset(&rest), tol)
}

/// `rank(W_S) + rank(R_{complement of S})` over member indices.
pub fn member_subset_value(fam: &MatrixFamily, subset: &[usize], tol: RankTolerance) -> usize {
    let rest = complement(subset, fam.len());
    numeric_rank(&fam.w_subset(subset), tol) + numeric_rank(&fam.r_subset(&rest), tol)
}

fn mask_to_subset(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

/// Lexicographic comparison of the ascending index lists encoded by two
/// bit masks; a proper prefix sorts first.
fn lex_cmp(a: u64, b: u64) -> Ordering {
    let (mut a, mut b) = (a, b);
    loop {
        match (a, b) {
            (0, 0) => return Ordering::Equal,
            (0, _) => return Ordering::Less,
            (_, 0) => return Ordering::Greater,
            _ => {
                let (la, lb) = (a.trailing_zeros(), b.trailing_zeros());
                if la != lb {
                    return la.cmp(&lb);
                }
                a &= a - 1;
                b &= b - 1;
            }
        }
    }
}

/// Minimum of `value(S)` over all subsets of `0..d`, ties broken toward the
/// lexicographically smallest subset. The scan runs in parallel; the
/// reduction is a total order, so the result matches a sequential scan.
fn minimize_over_subsets<F>(d: usize, cap: usize, what: &'static str, value: F) -> Result<SubsetCertificate>
where
    F: Fn(&[usize]) -> usize + Sync,
{
    if d > cap || d >= 64 {
        return Err(Error::Capacity { what, size: d, cap });
    }
    let (best_value, best_mask) = (0..1u64 << d)
        .into_par_iter()
        .map(|mask| (value(&mask_to_subset(mask)), mask))
        .min_by(|x, y| x.0.cmp(&y.0).then_with(|| lex_cmp(x.1, y.1)))
        .expect("at least the empty subset");
    Ok(SubsetCertificate {
        subset: mask_to_subset(best_mask),
        value: best_value,
    })
}

pub fn grank_pairs_minformula(fam: &VectorPairFamily, tol: RankTolerance) -> Result<SubsetCertificate> {
    grank_pairs_minformula_with_cap(fam, tol, DEFAULT_ENUMERATION_CAP)
}

pub fn grank_pairs_minformula_with_cap(
    fam: &VectorPairFamily,
    tol: RankTolerance,
    cap: usize,
) -> Result<SubsetCertificate> {
    minimize_over_subsets(fam.len(), cap, "vector-pair family", |s| pair_subset_value(fam, s, tol))
}

pub fn grank_matrix_minformula(fam: &MatrixFamily, tol: RankTolerance) -> Result<SubsetCertificate> {
    grank_matrix_minformula_with_cap(fam, tol, DEFAULT_ENUMERATION_CAP)
}

pub fn grank_matrix_minformula_with_cap(
    fam: &MatrixFamily,
    tol: RankTolerance,
    cap: usize,
) -> Result<SubsetCertificate> {
    minimize_over_subsets(fam.len(), cap, "matrix family", |s| member_subset_value(fam, s, tol))
}

/// Turns a subset of expanded pair indices into a member-level subset whose
/// value is no larger.
///
/// Member `t` joins the result when every column of `W_t` occurs in
/// `w_{S0}`; its rows then leave the complement side. Otherwise its columns
/// leave `w_{S0}` and, since some column of `W_t` pairs with every row of
/// `R_t` outside `S0`, all of `R_t` already sits on the complement side.
pub fn refine_min_subset(fam: &MatrixFamily, vector_subset: &[usize], tol: RankTolerance) -> Result<SubsetCertificate> {
    let expanded = expand_matrix_family(fam);
    let total = expanded.origins.len();
    let mut seen = vec![false; total];
    for &i in vector_subset {
        if i >= total {
            return Err(Error::InvalidInput(format!(
                "expanded index {i} out of range (family has {total} pairs)"
            )));
        }
        if seen[i] {
            return Err(Error::InvalidInput(format!("expanded index {i} repeated")));
        }
        seen[i] = true;
    }

    let mut covered: Vec<Vec<bool>> = fam.members().iter().map(|m| vec![false; m.w.cols()]).collect();
    for &i in vector_subset {
        let o = expanded.origins[i];
        covered[o.member][o.column] = true;
    }
    let subset: Vec<usize> = covered
        .iter()
        .enumerate()
        .filter(|(_, cols)| cols.iter().all(|&c| c))
        .map(|(t, _)| t)
        .collect();
    let value = member_subset_value(fam, &subset, tol);
    Ok(SubsetCertificate { subset, value })
}
