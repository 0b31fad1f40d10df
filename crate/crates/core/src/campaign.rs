//! Randomized cross-validation campaigns.
//!
//! Each campaign draws seeded random instances and checks that independent
//! routes to the same quantity agree. Instance `i` of a campaign uses stream
//! `i` of the campaign seed, so runs are reproducible and instances can be
//! evaluated in parallel.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fixed::{
    blocking_subset_via_grank, closed_loop_grank_detail, fixed_spectrum, fixed_spectrum_sampled, pencil_rank_test,
    MultiChannelSystem, DEFAULT_MATCH_TOL, DEFAULT_ORACLE_TRIALS,
};
use crate::grank::{
    expand_matrix_family, grank_constant_plus_family, grank_matrix_minformula, grank_pairs_matroid,
    grank_pairs_minformula, grank_sampled, is_jointly_independent, pair_subset_value, refine_min_subset, MatrixFamily,
};
use crate::instances::{
    random_bordered_triple, random_dims, random_low_rank, random_matrix_family, random_mixed_system,
    random_sized_pair_family, random_system, SystemKind,
};
use crate::linalg::{
    bordered_equivalence_check, bordered_rank, numeric_rank, rank_restoring_gains, ComplexMatrix, GainRestoration,
    RankTolerance,
};
use crate::sampling::{stream_rng, sub_seed};

/// Largest expanded family solved by plain enumeration inside the
/// matrix-family campaign; larger ones use the certified matroid optimum.
pub const EXPANDED_ENUMERATION_LIMIT: usize = 14;

const MAX_RECORDED_FAILURES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CampaignConfig {
    pub instances: usize,
    pub seed: u64,
    pub max_n: usize,
    pub max_k: usize,
    pub tol: RankTolerance,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            instances: 50,
            seed: 0,
            max_n: 5,
            max_k: 3,
            tol: RankTolerance::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignOutcome {
    pub name: String,
    pub passed: usize,
    pub failed: usize,
    /// The first few failure descriptions.
    pub failures: Vec<String>,
}

impl CampaignOutcome {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Campaign {
    /// Pencil test vs. randomized feedback vs. closed-loop generic rank.
    PencilEquivalence,
    /// Matroid intersection vs. subset min-formula vs. sampling.
    PairGenericRank,
    /// Member-level vs. expanded min-formula vs. sampling, plus refinement.
    MatrixFamilyExpansion,
    /// Constant term vs. its parameterized rank factors.
    ConstantAbsorption,
    /// Bordered rank vs. rank under random and constructive gains.
    BorderedGains,
    /// Single-channel systems against the controllability/observability rank tests.
    CentralizedPbh,
}

impl Campaign {
    pub const ALL: [Campaign; 6] = [
        Campaign::PencilEquivalence,
        Campaign::PairGenericRank,
        Campaign::MatrixFamilyExpansion,
        Campaign::ConstantAbsorption,
        Campaign::BorderedGains,
        Campaign::CentralizedPbh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Campaign::PencilEquivalence => "pencil-equivalence",
            Campaign::PairGenericRank => "pair-generic-rank",
            Campaign::MatrixFamilyExpansion => "matrix-family-expansion",
            Campaign::ConstantAbsorption => "constant-absorption",
            Campaign::BorderedGains => "bordered-gains",
            Campaign::CentralizedPbh => "centralized-pbh",
        }
    }

    fn stream(self) -> u64 {
        Campaign::ALL.iter().position(|&c| c == self).expect("listed") as u64
    }

    pub fn run(self, cfg: &CampaignConfig) -> CampaignOutcome {
        let campaign_seed = sub_seed(cfg.seed, 1000 + self.stream());
        let results: Vec<std::result::Result<(), String>> = (0..cfg.instances as u64)
            .into_par_iter()
            .map(|i| {
                let seed = sub_seed(campaign_seed, i);
                let outcome = match self {
                    Campaign::PencilEquivalence => check_pencil_equivalence(seed, cfg),
                    Campaign::PairGenericRank => check_pair_generic_rank(seed, cfg),
                    Campaign::MatrixFamilyExpansion => check_matrix_family(seed, cfg),
                    Campaign::ConstantAbsorption => check_constant_absorption(seed, cfg),
                    Campaign::BorderedGains => check_bordered_gains(seed, cfg),
                    Campaign::CentralizedPbh => check_centralized(seed, cfg),
                };
                match outcome {
                    Ok(None) => Ok(()),
                    Ok(Some(msg)) => Err(format!("instance {i}: {msg}")),
                    Err(e) => Err(format!("instance {i}: error: {e}")),
                }
            })
            .collect();
        let failures: Vec<String> = results.iter().filter_map(|r| r.clone().err()).collect();
        CampaignOutcome {
            name: self.name().to_string(),
            passed: results.len() - failures.len(),
            failed: failures.len(),
            failures: failures.into_iter().take(MAX_RECORDED_FAILURES).collect(),
        }
    }
}

pub fn run_all(cfg: &CampaignConfig) -> Vec<CampaignOutcome> {
    Campaign::ALL.iter().map(|c| c.run(cfg)).collect()
}

/// `Ok(None)` on success, `Ok(Some(reason))` on a disagreement.
type Check = Result<Option<String>>;

fn fail(msg: String) -> Check {
    Ok(Some(msg))
}

/// Per-mode verdicts of the three routes; returns the first disagreement.
pub fn pencil_equivalence_verdicts(sys: &MultiChannelSystem, tol: RankTolerance, seed: u64) -> Check {
    let n = sys.n();
    let report = fixed_spectrum(sys, tol)?;
    let sampled = fixed_spectrum_sampled(sys, DEFAULT_ORACLE_TRIALS, sub_seed(seed, 1), DEFAULT_MATCH_TOL)?;
    let reach = report.cluster_tol.max(DEFAULT_MATCH_TOL);
    for (idx, mode) in report.modes.iter().enumerate() {
        let lambda = mode.lambda;
        let oracle = sampled.iter().any(|z| (z - lambda).norm() <= reach);
        let detail = closed_loop_grank_detail(sys, lambda, tol, 3, sub_seed(seed, 2 + idx as u64))?;
        let grank_deficient = detail.rank < n;
        if mode.is_fixed != oracle || mode.is_fixed != grank_deficient {
            return fail(format!(
                "lambda = {lambda}: pencil says fixed = {}, feedback oracle {oracle}, closed-loop generic rank {} (n = {n})",
                mode.is_fixed, detail.rank
            ));
        }
        if !detail.routes_agree() {
            return fail(format!(
                "lambda = {lambda}: closed-loop generic rank {} but sampled rank {}",
                detail.rank, detail.sampled_rank
            ));
        }
        if let Some(cert) = &mode.certificate {
            let test = pencil_rank_test(sys, lambda, &cert.subset, tol)?;
            if !test.deficient || n - test.rank != cert.deficiency {
                return fail(format!(
                    "lambda = {lambda}: certificate {:?} does not recompute",
                    cert.subset
                ));
            }
        }
        // The factor-absorbing route may miss a fixed mode but must never
        // return a subset that does not block.
        if let Some(route) = blocking_subset_via_grank(sys, lambda, tol)? {
            let test = pencil_rank_test(sys, lambda, &route.channels, tol)?;
            if !mode.is_fixed || !test.deficient || route.value >= n {
                return fail(format!(
                    "lambda = {lambda}: generic-rank route returned {:?} (value {}), pencil rank {}",
                    route.channels, route.value, test.rank
                ));
            }
        }
    }
    Ok(None)
}

fn check_pencil_equivalence(seed: u64, cfg: &CampaignConfig) -> Check {
    let mut rng = stream_rng(seed, 0);
    let sys = random_mixed_system(&mut rng, cfg.max_n, cfg.max_k)?;
    pencil_equivalence_verdicts(&sys, cfg.tol, seed)
}

fn check_pair_generic_rank(seed: u64, cfg: &CampaignConfig) -> Check {
    let tol = cfg.tol;
    let mut rng = stream_rng(seed, 0);
    let fam = random_sized_pair_family(&mut rng, 8, 6);
    let matroid = grank_pairs_matroid(&fam, tol);
    let minformula = grank_pairs_minformula(&fam, tol)?;
    let sampled = grank_sampled(&fam, 3, sub_seed(seed, 1), tol)?;
    if matroid.rank != minformula.value || matroid.rank != sampled {
        return fail(format!(
            "matroid {} vs min-formula {} vs sampled {} (d = {}, {}x{})",
            matroid.rank,
            minformula.value,
            sampled,
            fam.len(),
            fam.n1(),
            fam.n2()
        ));
    }
    if matroid.witness.len() != minformula.value {
        return fail(format!(
            "witness size {} differs from certificate value {}",
            matroid.witness.len(),
            minformula.value
        ));
    }
    if !is_jointly_independent(&fam, &matroid.witness.indices, tol) {
        return fail(format!(
            "witness {:?} is not jointly independent",
            matroid.witness.indices
        ));
    }
    if matroid.certificate.value != matroid.rank || pair_subset_value(&fam, &minformula.subset, tol) != minformula.value
    {
        return fail("certificate values do not recompute".into());
    }
    Ok(None)
}

fn check_matrix_family(seed: u64, cfg: &CampaignConfig) -> Check {
    let tol = cfg.tol;
    let mut rng = stream_rng(seed, 0);
    let d = rng.random_range(1..=5);
    let n1 = rng.random_range(1..=5);
    let n2 = rng.random_range(1..=5);
    let fam = random_matrix_family(&mut rng, d, n1, n2, 3, 3);
    let member_level = grank_matrix_minformula(&fam, tol)?;
    let expanded = expand_matrix_family(&fam);
    let expected_len: usize = fam.members().iter().map(|m| m.w.cols() * m.r.rows()).sum();
    if expanded.pairs.len() != expected_len {
        return fail(format!(
            "expansion has {} pairs, expected {expected_len}",
            expanded.pairs.len()
        ));
    }

    let intersection = grank_pairs_matroid(&expanded.pairs, tol);
    let (expanded_min, expanded_minimizer) = if expanded.pairs.len() <= EXPANDED_ENUMERATION_LIMIT {
        let cert = grank_pairs_minformula(&expanded.pairs, tol)?;
        (cert.value, cert.subset)
    } else {
        // Weak duality makes a matching primal/dual pair optimal.
        if intersection.certificate.value != intersection.rank {
            return fail(format!(
                "dual certificate value {} differs from |I| = {}",
                intersection.certificate.value, intersection.rank
            ));
        }
        (intersection.rank, intersection.certificate.subset.clone())
    };
    let sampled = grank_sampled(&fam, 3, sub_seed(seed, 1), tol)?;
    if member_level.value != expanded_min || member_level.value != sampled || intersection.rank != expanded_min {
        return fail(format!(
            "member-level {} vs expanded {} vs sampled {} vs matroid {}",
            member_level.value, expanded_min, sampled, intersection.rank
        ));
    }
    let refined = refine_min_subset(&fam, &expanded_minimizer, tol)?;
    if refined.value != member_level.value {
        return fail(format!(
            "refined certificate {:?} has value {}, member-level minimum is {}",
            refined.subset, refined.value, member_level.value
        ));
    }
    Ok(None)
}

/// A constant built from the family's own vectors half of the time, so it
/// interacts with the parameterized terms.
fn constant_for<R: Rng + ?Sized>(rng: &mut R, fam: &MatrixFamily, rank: usize) -> ComplexMatrix {
    let cols: Vec<ComplexMatrix> = fam
        .members()
        .iter()
        .flat_map(|m| (0..m.w.cols()).map(|i| m.w.column(i)))
        .collect();
    let rows: Vec<ComplexMatrix> = fam
        .members()
        .iter()
        .flat_map(|m| (0..m.r.rows()).map(|j| m.r.row(j)))
        .collect();
    if rng.random_bool(0.5) && !cols.is_empty() && !rows.is_empty() {
        let mut acc = ComplexMatrix::zeros(fam.n1(), fam.n2());
        for _ in 0..rank {
            let w = &cols[rng.random_range(0..cols.len())];
            let r = &rows[rng.random_range(0..rows.len())];
            acc = &acc + &(w * r);
        }
        acc
    } else {
        random_low_rank(rng, fam.n1(), fam.n2(), rank)
    }
}

fn check_constant_absorption(seed: u64, cfg: &CampaignConfig) -> Check {
    let tol = cfg.tol;
    let mut rng = stream_rng(seed, 0);
    let n1 = rng.random_range(1..=5);
    let n2 = rng.random_range(1..=5);
    let d = rng.random_range(0..=4);
    let fam = random_matrix_family(&mut rng, d, n1, n2, 2, 2);
    let t = rng.random_range(0..=4usize.min(n1).min(n2));
    let m = constant_for(&mut rng, &fam, t);

    let combined = grank_constant_plus_family(&m, &fam, tol, 3, sub_seed(seed, 1))?;
    let factors = crate::linalg::rank_factorize(&m, tol);
    let parameterized = fam.prepend_factorization(&factors)?;
    let fully_sampled = grank_sampled(&parameterized, 3, sub_seed(seed, 2), tol)?;
    if combined.rank != combined.sampled_rank
        || combined.rank != fully_sampled
        || combined.absorbed_rank != fully_sampled
    {
        return fail(format!(
            "exact {} vs sampled constant-plus-family {} vs parameterized factors {} (sampled {})",
            combined.rank, combined.sampled_rank, combined.absorbed_rank, fully_sampled
        ));
    }
    if combined.factor_rank != numeric_rank(&m, tol) {
        return fail("factor count differs from rank of the constant".into());
    }
    Ok(None)
}

fn check_bordered_gains(seed: u64, cfg: &CampaignConfig) -> Check {
    let tol = cfg.tol;
    let mut rng = stream_rng(seed, 0);
    let (a, b, c) = random_bordered_triple(&mut rng, 6, 3);
    let n = a.rows();
    if !bordered_equivalence_check(&a, &b, &c, tol, 20, sub_seed(seed, 1))? {
        return fail(format!(
            "equivalence check failed (n = {n}, m = {}, l = {})",
            b.cols(),
            c.rows()
        ));
    }
    if bordered_rank(&a, &b, &c, tol)? >= n {
        match rank_restoring_gains(&a, &b, &c, tol)? {
            GainRestoration::Restored { e, k } => {
                let closed = &(&a + &(&b * &e)) + &(&k * &c);
                if numeric_rank(&closed, tol) != n {
                    return fail("constructive gains do not restore full rank".into());
                }
            }
            GainRestoration::Deficient => return fail("full bordered rank reported as deficient".into()),
        }
    }
    Ok(None)
}

/// Controllability/observability rank tests at `lambda`, assembled directly.
pub fn pbh_uncontrollable_or_unobservable(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    lambda: Complex64,
    tol: RankTolerance,
) -> Result<bool> {
    let n = a.rows();
    let shifted = &ComplexMatrix::identity(n).scale(lambda) - a;
    let ctrb = ComplexMatrix::hstack(n, &[&shifted, b])?;
    let obsv = ComplexMatrix::vstack(n, &[&shifted, c])?;
    Ok(numeric_rank(&ctrb, tol) < n || numeric_rank(&obsv, tol) < n)
}

fn check_centralized(seed: u64, cfg: &CampaignConfig) -> Check {
    let tol = cfg.tol;
    let mut rng = stream_rng(seed, 0);
    let n = rng.random_range(1..=cfg.max_n);
    let dims = random_dims(&mut rng, 1, 2);
    let kind = match rng.random_range(0..4) {
        0 => SystemKind::Generic,
        1 => SystemKind::EmbeddedFixedMode {
            lambda: rng.random_range(-2..=2) as f64,
        },
        2 => SystemKind::Decoupled,
        _ => SystemKind::Degenerate,
    };
    let sys = random_system(&mut rng, n, &dims, kind)?;
    let report = fixed_spectrum(&sys, tol)?;
    let ch = &sys.channels()[0];
    for mode in &report.modes {
        let pbh = pbh_uncontrollable_or_unobservable(sys.a(), &ch.b, &ch.c, mode.lambda, tol)?;
        if pbh != mode.is_fixed {
            return fail(format!(
                "lambda = {}: pencil verdict {} vs rank tests {pbh}",
                mode.lambda, mode.is_fixed
            ));
        }
    }
    Ok(None)
}
