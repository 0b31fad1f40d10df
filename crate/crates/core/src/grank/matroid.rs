//! Maximum jointly independent sets by linear-matroid intersection.
//!
//! One matroid lives on the column vectors `w_i`, the other on the row
//! vectors `r_i`; both share the ground set of pair indices. Augmentation
//! follows shortest paths in the exchange graph. When no path exists, the
//! elements that can still reach a sink form a subset `U` with
//! `rank w_U + rank r_{complement of U} == |I|`, which certifies optimality.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{pair_subset_value, JointIndependentSet, SubsetCertificate, VectorPairFamily};
use crate::linalg::{numeric_rank, ComplexMatrix, RankTolerance};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionResult {
    pub rank: usize,
    pub witness: JointIndependentSet,
    /// Dual certificate read off the final exchange graph.
    pub certificate: SubsetCertificate,
}

/// Independence oracle over the ground set `0..size`.
pub(crate) trait Matroid {
    fn is_independent(&self, set: &[usize]) -> bool;
}

pub(crate) struct LinearMatroid {
    /// Elements are the columns.
    pub vectors: ComplexMatrix,
    pub tol: RankTolerance,
}

impl Matroid for LinearMatroid {
    fn is_independent(&self, set: &[usize]) -> bool {
        if set.len() > self.vectors.rows() {
            return false;
        }
        numeric_rank(&self.vectors.select_columns(set), self.tol) == set.len()
    }
}

/// At most one element from each block.
pub(crate) struct PartitionMatroid {
    pub block_of: Vec<usize>,
}

impl Matroid for PartitionMatroid {
    fn is_independent(&self, set: &[usize]) -> bool {
        let mut blocks: Vec<usize> = set.iter().map(|&e| self.block_of[e]).collect();
        blocks.sort_unstable();
        blocks.windows(2).all(|w| w[0] != w[1])
    }
}

/// Both the columns and the rows selected by `indices` are linearly
/// independent.
pub fn is_jointly_independent(fam: &VectorPairFamily, indices: &[usize], tol: RankTolerance) -> bool {
    let k = indices.len();
    numeric_rank(&fam.w_subset(indices), tol) == k && numeric_rank(&fam.r_subset(indices), tol) == k
}

fn with_swap(current: &[usize], remove: Option<usize>, add: usize) -> Vec<usize> {
    let mut out: Vec<usize> = current.iter().copied().filter(|&i| Some(i) != remove).collect();
    out.push(add);
    out
}

/// A maximum common independent set, and for every element whether it can
/// reach a sink of the final exchange graph.
pub(crate) struct Intersection {
    pub chosen: Vec<usize>,
    pub reaches_sink: Vec<bool>,
}

/// Greedy start, then shortest augmenting paths until none is left.
pub(crate) fn intersect(m1: &dyn Matroid, m2: &dyn Matroid, size: usize) -> Intersection {
    let mut chosen = vec![false; size];
    let mut current: Vec<usize> = Vec::new();
    for (x, taken) in chosen.iter_mut().enumerate() {
        let trial = with_swap(&current, None, x);
        if m1.is_independent(&trial) && m2.is_independent(&trial) {
            current = trial;
            *taken = true;
        }
    }

    loop {
        let current: Vec<usize> = (0..size).filter(|&i| chosen[i]).collect();
        let outside: Vec<usize> = (0..size).filter(|&i| !chosen[i]).collect();

        let mut source = vec![false; size];
        let mut sink = vec![false; size];
        for &x in &outside {
            source[x] = m1.is_independent(&with_swap(&current, None, x));
            sink[x] = m2.is_independent(&with_swap(&current, None, x));
        }

        // Exchange graph: y -> x when I - y + x is independent in the first
        // matroid, x -> y when it is independent in the second.
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); size];
        for &y in &current {
            for &x in &outside {
                let swapped = with_swap(&current, Some(y), x);
                if source[x] || m1.is_independent(&swapped) {
                    adj[y].push(x);
                }
                if sink[x] || m2.is_independent(&swapped) {
                    adj[x].push(y);
                }
            }
        }

        match shortest_path(&adj, &source, &sink) {
            Some(path) => {
                for v in path {
                    chosen[v] = !chosen[v];
                }
            }
            None => {
                return Intersection {
                    chosen: current,
                    reaches_sink: reaches_sink(&adj, &sink),
                }
            }
        }
    }
}

pub fn grank_pairs_matroid(fam: &VectorPairFamily, tol: RankTolerance) -> IntersectionResult {
    let d = fam.len();
    let col_matroid = LinearMatroid {
        vectors: fam.columns().clone(),
        tol,
    };
    let row_matroid = LinearMatroid {
        vectors: fam.rows().transpose(),
        tol,
    };
    let Intersection { chosen, reaches_sink } = intersect(&col_matroid, &row_matroid, d);
    let u: Vec<usize> = (0..d).filter(|&i| reaches_sink[i]).collect();
    let value = pair_subset_value(fam, &u, tol);
    IntersectionResult {
        rank: chosen.len(),
        witness: JointIndependentSet { indices: chosen },
        certificate: SubsetCertificate { subset: u, value },
    }
}

/// Breadth-first search from all sources; returns the first sink reached
/// along with its path, so the path is a shortest one.
fn shortest_path(adj: &[Vec<usize>], source: &[bool], sink: &[bool]) -> Option<Vec<usize>> {
    let d = adj.len();
    let mut parent: Vec<Option<usize>> = vec![None; d];
    let mut seen = vec![false; d];
    let mut queue = VecDeque::new();
    for v in 0..d {
        if source[v] {
            seen[v] = true;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        if sink[v] {
            let mut path = vec![v];
            let mut cur = v;
            while let Some(p) = parent[cur] {
                path.push(p);
                cur = p;
            }
            return Some(path);
        }
        for &next in &adj[v] {
            if !seen[next] {
                seen[next] = true;
                parent[next] = Some(v);
                queue.push_back(next);
            }
        }
    }
    None
}

fn reaches_sink(adj: &[Vec<usize>], sink: &[bool]) -> Vec<bool> {
    let d = adj.len();
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); d];
    for (u, outs) in adj.iter().enumerate() {
        for &v in outs {
            reverse[v].push(u);
        }
    }
    let mut reach = sink.to_vec();
    let mut queue: VecDeque<usize> = (0..d).filter(|&v| sink[v]).collect();
    while let Some(v) = queue.pop_front() {
        for &u in &reverse[v] {
            if !reach[u] {
                reach[u] = true;
                queue.push_back(u);
            }
        }
    }
    reach
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn real_pairs(pairs: &[(&[f64], &[f64])]) -> VectorPairFamily {
        let n1 = pairs[0].0.len();
        let n2 = pairs[0].1.len();
        let v: Vec<_> = pairs
            .iter()
            .map(|(w, r)| {
                (
                    ComplexMatrix::from_real(n1, 1, w).unwrap(),
                    ComplexMatrix::from_real(1, n2, r).unwrap(),
                )
            })
            .collect();
        VectorPairFamily::from_pairs(n1, n2, &v).unwrap()
    }

    #[test]
    fn empty_family_has_rank_zero() {
        let res = grank_pairs_matroid(&VectorPairFamily::empty(3, 2), RankTolerance::default());
        assert_eq!(res.rank, 0);
        assert!(res.witness.is_empty());
        assert_eq!(res.certificate.value, 0);
    }

    #[test]
    fn duplicate_columns_limit_rank() {
        let fam = real_pairs(&[(&[1.0, 0.0], &[1.0, 0.0]), (&[1.0, 0.0], &[0.0, 1.0])]);
        let res = grank_pairs_matroid(&fam, RankTolerance::default());
        assert_eq!(res.rank, 1);
        assert_eq!(res.certificate.value, 1);
    }

    #[test]
    fn augmenting_path_needs_an_exchange() {
        // Greedy picks pair 0 first; the optimum {1, 2} needs an exchange.
        let fam = real_pairs(&[
            (&[1.0, 0.0], &[1.0, 0.0]),
            (&[1.0, 0.0], &[0.0, 1.0]),
            (&[0.0, 1.0], &[1.0, 0.0]),
        ]);
        let res = grank_pairs_matroid(&fam, RankTolerance::default());
        assert_eq!(res.rank, 2);
        assert!(is_jointly_independent(
            &fam,
            &res.witness.indices,
            RankTolerance::default()
        ));
        assert_eq!(res.certificate.value, 2);
    }

    #[test]
    fn zero_vectors_are_never_chosen() {
        let z = Complex64::new(0.0, 0.0);
        let fam = VectorPairFamily::from_pairs(
            1,
            1,
            &[(
                ComplexMatrix::column_vector(&[z]),
                ComplexMatrix::row_vector(&[Complex64::new(1.0, 0.0)]),
            )],
        )
        .unwrap();
        assert_eq!(grank_pairs_matroid(&fam, RankTolerance::default()).rank, 0);
    }
}
