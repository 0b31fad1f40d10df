//! Fixed modes of `x' = A x + sum_i B_i u_i`, `y_i = C_i x` under
//! decentralized feedback `u_i = F_i y_i`.
//!
//! An eigenvalue `lambda` of `A` is fixed exactly when some channel subset
//! `S` makes the bordered pencil
//!
//! ```text
//! [ lambda I - A    B_S ]
//! [ C_{k - S}        0  ]
//! ```
//!
//! rank deficient (rank < n). [`fixed_spectrum`] scans all subsets per
//! eigenvalue; [`fixed_spectrum_sampled`] checks the definition directly by
//! drawing random real gains; [`grank_closed_loop`] computes the generic
//! rank of `lambda I - A - sum B_j F_j C_j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::grank::{
    expand_matrix_family, grank_constant_plus_family, grank_pairs_matroid, refine_min_subset, ConstantPlusGrank,
    FamilyMember, MatrixFamily, SubsetCertificate, DEFAULT_ENUMERATION_CAP,
};
use crate::linalg::{bordered_matrix, eigenvalues, numeric_rank, rank_factorize, ComplexMatrix, RankTolerance};
use crate::sampling::{real_uniform_matrix, stream_rng};

/// Absolute distance under which computed eigenvalues are treated as one.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-7;
/// Closed-loop eigenvalues within this distance count as the same mode.
pub const DEFAULT_MATCH_TOL: f64 = 1e-6;
pub const DEFAULT_ORACLE_TRIALS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    /// `n x m_i`
    pub b: ComplexMatrix,
    /// `l_i x n`
    pub c: ComplexMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiChannelSystem {
    a: ComplexMatrix,
    channels: Vec<Channel>,
}

impl MultiChannelSystem {
    pub fn new(a: ComplexMatrix, channels: Vec<Channel>) -> Result<Self> {
        if !a.is_square() {
            return Err(dim_err(format!("A must be square, got {}x{}", a.rows(), a.cols())));
        }
        if channels.is_empty() {
            return Err(Error::InvalidInput("a system needs at least one channel".into()));
        }
        let n = a.rows();
        for (i, ch) in channels.iter().enumerate() {
            if ch.b.rows() != n {
                return Err(dim_err(format!(
                    "channel {i}: B has {} rows, expected {n}",
                    ch.b.rows()
                )));
            }
            if ch.c.cols() != n {
                return Err(dim_err(format!(
                    "channel {i}: C has {} columns, expected {n}",
                    ch.c.cols()
                )));
            }
        }
        Ok(Self { a, channels })
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn k(&self) -> usize {
        self.channels.len()
    }

    /// `B_S`, columns in ascending channel order.
    pub fn input_block(&self, subset: &[usize]) -> ComplexMatrix {
        let blocks: Vec<&ComplexMatrix> = subset.iter().map(|&i| &self.channels[i].b).collect();
        ComplexMatrix::hstack(self.n(), &blocks).expect("validated")
    }

    /// `C_S`, rows in ascending channel order.
    pub fn output_block(&self, subset: &[usize]) -> ComplexMatrix {
        let blocks: Vec<&ComplexMatrix> = subset.iter().map(|&i| &self.channels[i].c).collect();
        ComplexMatrix::vstack(self.n(), &blocks).expect("validated")
    }

    /// `A + sum_i B_i F_i C_i`.
    pub fn closed_loop(&self, gains: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        if gains.len() != self.k() {
            return Err(dim_err(format!("{} gains for {} channels", gains.len(), self.k())));
        }
        let mut acc = self.a.clone();
        for (i, (ch, f)) in self.channels.iter().zip(gains).enumerate() {
            if f.rows() != ch.b.cols() || f.cols() != ch.c.rows() {
                return Err(dim_err(format!(
                    "gain {i} is {}x{}, expected {}x{}",
                    f.rows(),
                    f.cols(),
                    ch.b.cols(),
                    ch.c.rows()
                )));
            }
            acc = &acc + &(&(&ch.b * f) * &ch.c);
        }
        Ok(acc)
    }

    /// Replaces channels `i` and `j` by one channel with `B = [B_i B_j]`
    /// and `C = [C_i; C_j]`, placed at the position of `min(i, j)`.
    pub fn merge_channels(&self, i: usize, j: usize) -> Result<Self> {
        if i == j || i >= self.k() || j >= self.k() {
            return Err(Error::InvalidInput(format!("cannot merge channels {i} and {j}")));
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let n = self.n();
        let merged = Channel {
            b: ComplexMatrix::hstack(n, &[&self.channels[lo].b, &self.channels[hi].b])?,
            c: ComplexMatrix::vstack(n, &[&self.channels[lo].c, &self.channels[hi].c])?,
        };
        let mut channels = Vec::with_capacity(self.k() - 1);
        for (idx, ch) in self.channels.iter().enumerate() {
            if idx == lo {
                channels.push(merged.clone());
            } else if idx != hi {
                channels.push(ch.clone());
            }
        }
        Self::new(self.a.clone(), channels)
    }

    /// Channels as a matrix family `{(B_j, C_j)}`.
    pub fn channel_family(&self) -> MatrixFamily {
        let members = self
            .channels
            .iter()
            .map(|ch| FamilyMember {
                w: ch.b.clone(),
                r: ch.c.clone(),
            })
            .collect();
        MatrixFamily::new(self.n(), self.n(), members).expect("validated")
    }

    fn shifted(&self, lambda: Complex64) -> ComplexMatrix {
        &ComplexMatrix::identity(self.n()).scale(lambda) - &self.a
    }
}

fn validate_subset(subset: &[usize], k: usize) -> Result<Vec<usize>> {
    let mut s = subset.to_vec();
    s.sort_unstable();
    for w in s.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidInput(format!("channel {} listed twice", w[0])));
        }
    }
    if let Some(&last) = s.last() {
        if last >= k {
            return Err(Error::InvalidInput(format!(
                "channel index {last} out of range for k = {k}"
            )));
        }
    }
    Ok(s)
}

fn complement_of(subset: &[usize], k: usize) -> Vec<usize> {
    (0..k).filter(|i| !subset.contains(i)).collect()
}

/// `[[lambda I - A, B_S], [C_{k-S}, 0]]`.
pub fn pencil_matrix(sys: &MultiChannelSystem, lambda: Complex64, subset: &[usize]) -> Result<ComplexMatrix> {
    let s = validate_subset(subset, sys.k())?;
    let rest = complement_of(&s, sys.k());
    bordered_matrix(&sys.shifted(lambda), &sys.input_block(&s), &sys.output_block(&rest))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PencilRank {
    pub rank: usize,
    pub deficient: bool,
}

pub fn pencil_rank_test(
    sys: &MultiChannelSystem,
    lambda: Complex64,
    subset: &[usize],
    tol: RankTolerance,
) -> Result<PencilRank> {
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(Error::InvalidInput("lambda must be finite".into()));
    }
    let rank = numeric_rank(&pencil_matrix(sys, lambda, subset)?, tol);
    Ok(PencilRank {
        rank,
        deficient: rank < sys.n(),
    })
}

/// Witness that `lambda` is fixed: the pencil at `subset` has rank
/// `n - deficiency`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedModeCertificate {
    pub lambda: Complex64,
    /// Zero-based channel indices, ascending.
    pub subset: Vec<usize>,
    pub deficiency: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeVerdict {
    pub lambda: Complex64,
    /// Number of computed eigenvalues merged into this mode.
    pub multiplicity: usize,
    pub is_fixed: bool,
    pub certificate: Option<FixedModeCertificate>,
    /// Whether the randomized-feedback oracle reached the same verdict.
    pub oracle_agrees: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    pub trials: usize,
    pub seed: u64,
    pub match_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedSpectrumReport {
    pub n: usize,
    pub k: usize,
    pub tolerance: f64,
    pub cluster_tol: f64,
    /// All eigenvalues of `A` with multiplicity, sorted.
    pub eigenvalues: Vec<Complex64>,
    pub modes: Vec<ModeVerdict>,
    pub oracle: Option<OracleSettings>,
}

impl FixedSpectrumReport {
    pub fn fixed_modes(&self) -> Vec<Complex64> {
        self.modes.iter().filter(|m| m.is_fixed).map(|m| m.lambda).collect()
    }

    pub fn has_fixed_spectrum(&self) -> bool {
        self.modes.iter().any(|m| m.is_fixed)
    }

    /// Records, per mode, whether the sampled fixed modes contain it.
    pub fn attach_oracle(&mut self, sampled: &[Complex64], settings: OracleSettings) {
        let reach = self.cluster_tol.max(settings.match_tol);
        for mode in &mut self.modes {
            let survives = sampled.iter().any(|z| (z - mode.lambda).norm() <= reach);
            mode.oracle_agrees = Some(survives == mode.is_fixed);
        }
        self.oracle = Some(settings);
    }

    pub fn oracle_disagreements(&self) -> usize {
        self.modes.iter().filter(|m| m.oracle_agrees == Some(false)).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedSpectrumOptions {
    pub tol: RankTolerance,
    pub cluster_tol: f64,
    pub subset_cap: usize,
}

impl Default for FixedSpectrumOptions {
    fn default() -> Self {
        Self {
            tol: RankTolerance::default(),
            cluster_tol: DEFAULT_CLUSTER_TOL,
            subset_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// Groups sorted eigenvalues lying within `cluster_tol` of a cluster's
/// running mean; returns `(mean, count)` per cluster.
pub fn cluster_eigenvalues(values: &[Complex64], cluster_tol: f64) -> Vec<(Complex64, usize)> {
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for &z in values {
        match clusters.iter_mut().find(|(mean, _)| (z - *mean).norm() <= cluster_tol) {
            Some((mean, count)) => {
                *mean = (*mean * *count as f64 + z) / (*count as f64 + 1.0);
                *count += 1;
            }
            None => clusters.push((z, 1)),
        }
    }
    clusters
}

/// Subsets of `0..k` by increasing size, lexicographic within a size.
fn subsets_by_size(k: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..=k).flat_map(move |size| Combinations::new(k, size))
}

struct Combinations {
    k: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(k: usize, size: usize) -> Self {
        Self {
            k,
            current: (size <= k).then(|| (0..size).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        let size = next.len();
        let mut i = size;
        while i > 0 {
            i -= 1;
            if next[i] < self.k - size + i {
                next[i] += 1;
                for j in i + 1..size {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

fn check_subset_cap(sys: &MultiChannelSystem, cap: usize) -> Result<()> {
    if sys.k() > cap {
        return Err(Error::Capacity {
            what: "channel set",
            size: sys.k(),
            cap,
        });
    }
    Ok(())
}

fn search_blocking(
    sys: &MultiChannelSystem,
    lambda: Complex64,
    tol: RankTolerance,
) -> Result<Option<FixedModeCertificate>> {
    for subset in subsets_by_size(sys.k()) {
        let test = pencil_rank_test(sys, lambda, &subset, tol)?;
        if test.deficient {
            return Ok(Some(FixedModeCertificate {
                lambda,
                subset,
                deficiency: sys.n() - test.rank,
            }));
        }
    }
    Ok(None)
}

/// Smallest (by size, then lexicographically) channel subset making the
/// pencil at `lambda` rank deficient, or `None`.
pub fn find_blocking_subset(
    sys: &MultiChannelSystem,
    lambda: Complex64,
    tol: RankTolerance,
) -> Result<Option<FixedModeCertificate>> {
    check_subset_cap(sys, DEFAULT_ENUMERATION_CAP)?;
    search_blocking(sys, lambda, tol)
}

pub fn fixed_spectrum(sys: &MultiChannelSystem, tol: RankTolerance) -> Result<FixedSpectrumReport> {
    fixed_spectrum_with(
        sys,
        FixedSpectrumOptions {
            tol,
            ..Default::default()
        },
    )
}

pub fn fixed_spectrum_with(sys: &MultiChannelSystem, opts: FixedSpectrumOptions) -> Result<FixedSpectrumReport> {
    check_subset_cap(sys, opts.subset_cap)?;
    let eigs = eigenvalues(sys.a())?;
    let mut modes = Vec::new();
    for (lambda, multiplicity) in cluster_eigenvalues(&eigs, opts.cluster_tol) {
        let certificate = search_blocking(sys, lambda, opts.tol)?;
        modes.push(ModeVerdict {
            lambda,
            multiplicity,
            is_fixed: certificate.is_some(),
            certificate,
            oracle_agrees: None,
        });
    }
    Ok(FixedSpectrumReport {
        n: sys.n(),
        k: sys.k(),
        tolerance: opts.tol.value(),
        cluster_tol: opts.cluster_tol,
        eigenvalues: eigs,
        modes,
        oracle: None,
    })
}

/// Eigenvalues of `A` (with multiplicity) that survive `trials` random
/// real decentralized feedbacks, entries of each `F_i` uniform on
/// `[-1, 1]`. Each surviving eigenvalue must be matched, within
/// `match_tol`, by a distinct closed-loop eigenvalue in every trial.
pub fn fixed_spectrum_sampled(
    sys: &MultiChannelSystem,
    trials: usize,
    seed: u64,
    match_tol: f64,
) -> Result<Vec<Complex64>> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let mut survivors = eigenvalues(sys.a())?;
    for trial in 0..trials as u64 {
        let mut rng = stream_rng(seed, trial);
        let gains: Vec<ComplexMatrix> = sys
            .channels()
            .iter()
            .map(|ch| real_uniform_matrix(&mut rng, ch.b.cols(), ch.c.rows()))
            .collect();
        let closed = eigenvalues(&sys.closed_loop(&gains)?)?;
        let mut used = vec![false; closed.len()];
        survivors.retain(|&z| {
            let nearest = closed
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, w)| (i, (w - z).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match nearest {
                Some((i, dist)) if dist <= match_tol => {
                    used[i] = true;
                    true
                }
                _ => false,
            }
        });
        if survivors.is_empty() {
            break;
        }
    }
    Ok(survivors)
}

/// Generic rank of `lambda I - A - sum_j B_j F_j C_j` with every `F_j`
/// fully parameterized; equals `n` exactly when `lambda` is not fixed.
pub fn grank_closed_loop(
    sys: &MultiChannelSystem,
    lambda: Complex64,
    tol: RankTolerance,
    trials: usize,
    seed: u64,
) -> Result<usize> {
    Ok(closed_loop_grank_detail(sys, lambda, tol, trials, seed)?.rank)
}

/// As [`grank_closed_loop`], with the sampled cross-check and certificates.
pub fn closed_loop_grank_detail(
    sys: &MultiChannelSystem,
    lambda: Complex64,
    tol: RankTolerance,
    trials: usize,
    seed: u64,
) -> Result<ConstantPlusGrank> {
    grank_constant_plus_family(&sys.shifted(lambda), &sys.channel_family(), tol, trials, seed)
}

/// Blocking subset recovered through the generic-rank machinery.
#[derive(Clone, Debug, PartialEq)]
pub struct GrankRouteCertificate {
    /// Zero-based channel indices.
    pub channels: Vec<usize>,
    /// Indices of the rank-one factor pairs of `A - lambda I` on the column side.
    pub factor_pairs: Vec<usize>,
    /// `rank [w_S1 B_S2] + rank [r_{t - S1}; C_{k - S2}]`.
    pub value: usize,
    pub generic_rank: usize,
}

/// Second route to a blocking subset: factor `A - lambda I` into `t`
/// jointly independent rank-one pairs, intersect matroids on the expanded
/// family `{(w_i, r_i)} + {(B_j, C_j)}`, refine the dual certificate to
/// member level and keep its channel part.
///
/// A returned subset is always blocking. The route is incomplete: giving
/// each factor of `A - lambda I` its own parameter can lift the generic
/// rank to `n` while `lambda` is still fixed, and then `None` comes back.
pub fn blocking_subset_via_grank(
    sys: &MultiChannelSystem,
    lambda: Complex64,
    tol: RankTolerance,
) -> Result<Option<GrankRouteCertificate>> {
    let n = sys.n();
    let shifted = &sys.a().clone() - &ComplexMatrix::identity(n).scale(lambda);
    let factorization = rank_factorize(&shifted, tol);
    let t = factorization.rank;
    let family = sys.channel_family().prepend_factorization(&factorization)?;
    let expanded = expand_matrix_family(&family);
    let intersection = grank_pairs_matroid(&expanded.pairs, tol);
    if intersection.rank >= n {
        return Ok(None);
    }
    let SubsetCertificate { subset, value } = refine_min_subset(&family, &intersection.certificate.subset, tol)?;
    Ok(Some(GrankRouteCertificate {
        channels: subset.iter().filter(|&&i| i >= t).map(|&i| i - t).collect(),
        factor_pairs: subset.into_iter().filter(|&i| i < t).collect(),
        value,
        generic_rank: intersection.rank,
    }))
}
