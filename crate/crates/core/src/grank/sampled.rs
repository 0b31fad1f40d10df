use super::ParameterizedSum;
use crate::error::{Error, Result};
use crate::linalg::{numeric_rank, RankTolerance};
use crate::sampling::stream_rng;

/// Largest numeric rank over `trials` independent parameter draws; trial
/// `i` uses stream `i` of `seed`.
pub fn grank_sampled<F: ParameterizedSum + ?Sized>(
    fam: &F,
    trials: usize,
    seed: u64,
    tol: RankTolerance,
) -> Result<usize> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let (n1, n2) = fam.shape();
    let cap = n1.min(n2);
    let mut best = 0;
    for trial in 0..trials as u64 {
        let mut rng = stream_rng(seed, trial);
        best = best.max(numeric_rank(&fam.sample(&mut rng), tol));
        if best == cap {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grank::VectorPairFamily;
    use crate::linalg::ComplexMatrix;

    #[test]
    fn trivial_sampled_ranks() {
        let tol = RankTolerance::default();
        assert_eq!(grank_sampled(&VectorPairFamily::empty(2, 2), 1, 0, tol).unwrap(), 0);
        let single = VectorPairFamily::from_pairs(
            2,
            2,
            &[(
                ComplexMatrix::from_real(2, 1, &[1.0, 0.0]).unwrap(),
                ComplexMatrix::from_real(1, 2, &[1.0, 0.0]).unwrap(),
            )],
        )
        .unwrap();
        assert_eq!(grank_sampled(&single, 1, 9, tol).unwrap(), 1);
        assert!(grank_sampled(&single, 0, 9, tol).is_err());
    }
}
