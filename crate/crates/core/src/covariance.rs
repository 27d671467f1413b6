//! Sample covariance, estimation error and empirical checks of the
//! inequalities behind the sample-size bounds.
//!
//! Suprema over the sphere that are not a single operator norm are estimated
//! by maxima over random probe directions plus the top eigenvectors of the
//! natural matrices; they are lower estimates of the true suprema.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};

use crate::distributions::{builtin_registry, random_unit, sample, VectorModel};
use crate::error::{Error, Result};
use crate::linalg::{dot, op_norm, SymMat};
use crate::rng::{rng_from_seed, SeedHasher, SimRng};
use crate::seq::{weak_lp_norm, CoeffSeq};

/// Relative accuracy used for operator norms in reports.
pub const NORM_TOL: f64 = 1e-9;

/// `N` vectors in `R^n`, stored row-major, with the model that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub n: usize,
    pub data: Vec<f64>,
    pub model: VectorModel,
    pub seed: u64,
}

impl SampleSet {
    pub fn draw(model: &VectorModel, big_n: usize, seed: u64) -> Result<Self> {
        let rows = sample(model, big_n, seed)?;
        Self::from_rows(&rows, model.clone(), seed)
    }

    pub fn from_rows(rows: &[Vec<f64>], model: VectorModel, seed: u64) -> Result<Self> {
        let n = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || n == 0 {
            return Err(Error::contract("a sample set needs N ≥ 1 vectors of dimension ≥ 1"));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::contract("sample vectors differ in dimension"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::contract("samples must be finite"));
        }
        Ok(Self {
            n,
            data: rows.concat(),
            model,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n)
    }

    fn matrix_of(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), self.n, |r, c| self.row(idx[r])[c])
    }

    /// `Σ_{i ∈ idx} X_i X_iᵀ`
    pub fn gram_sum(&self, idx: &[usize]) -> SymMat {
        let x = self.matrix_of(idx);
        SymMat::symmetrize(x.tr_mul(&x))
    }

    /// `<X_i, x>` for every sample.
    pub fn coefficients(&self, x: &[f64]) -> Vec<f64> {
        self.rows().map(|r| dot(r, x)).collect()
    }
}

/// `(1/N) Σ X_i X_iᵀ`
pub fn sample_covariance(s: &SampleSet) -> SymMat {
    let x = DMatrix::from_row_slice(s.len(), s.n, &s.data);
    SymMat::symmetrize(x.tr_mul(&x) / s.len() as f64)
}

/// `‖Σ_N - Σ‖`
pub fn estimation_error(sigma_n: &SymMat, sigma: &SymMat) -> Result<f64> {
    op_norm(&sigma_n.sub(sigma)?, NORM_TOL)
}

/// `sqrt((4/c) log₂(2/δ) n/N)`, the deviation level of the sub-gaussian
/// net argument.
pub fn subgaussian_predicted_error(n: usize, big_n: usize, delta: f64, c_bernstein: f64) -> Result<f64> {
    if n == 0 || big_n < n {
        return Err(Error::contract(format!("need N ≥ n ≥ 1, got n={n}, N={big_n}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::contract(format!("delta must lie in (0,1], got {delta}")));
    }
    if !(c_bernstein > 0.0) {
        return Err(Error::contract("Bernstein constant must be positive"));
    }
    Ok((4.0 / c_bernstein * (2.0 / delta).log2() * n as f64 / big_n as f64).sqrt())
}

pub const DEFAULT_BERNSTEIN: f64 = 0.25;

/// Random subsets drawn per size in the profile reports.
pub const SUBSETS_PER_SIZE: usize = 8;

fn check_q(q: f64) -> Result<()> {
    if q > 4.0 {
        Ok(())
    } else {
        Err(Error::contract(format!("q must exceed 4, got {q}")))
    }
}

fn check_sizes(sizes: &[usize], lo: usize, big_n: usize) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::contract("subset size list is empty"));
    }
    if let Some(&s) = sizes.iter().find(|&&s| s < lo || s > big_n) {
        return Err(Error::contract(format!("subset size {s} outside [{lo}, {big_n}]")));
    }
    Ok(())
}

fn random_subset(rng: &mut SimRng, big_n: usize, size: usize) -> Vec<usize> {
    let mut v = sample_indices(rng, big_n, size).into_vec();
    v.sort_unstable();
    v
}

/// Unit eigenvectors of the largest and smallest eigenvalues.
fn extreme_eigenvectors(a: &SymMat) -> [Vec<f64>; 2] {
    let eig = nalgebra::SymmetricEigen::new(a.matrix().clone());
    let (mut hi, mut lo) = (0, 0);
    for (i, v) in eig.eigenvalues.iter().enumerate() {
        if *v > eig.eigenvalues[hi] {
            hi = i;
        }
        if *v < eig.eigenvalues[lo] {
            lo = i;
        }
    }
    [
        eig.eigenvectors.column(hi).iter().copied().collect(),
        eig.eigenvectors.column(lo).iter().copied().collect(),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub size: usize,
    /// Largest observed left-hand side.
    pub lhs: f64,
    /// The bound's shape without its constant.
    pub bound: f64,
    /// `lhs / bound`: the smallest constant consistent with the observations.
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub entries: Vec<ProfileEntry>,
    pub t: f64,
    pub q: f64,
    pub subsets_per_size: usize,
    pub n_directions: usize,
    pub seed: u64,
}

impl ProfileReport {
    pub fn max_constant(&self) -> f64 {
        self.entries.iter().map(|e| e.constant).fold(0.0, f64::max)
    }
}

/// Probe estimate of `sup_x ‖(<X_i,x>)_{i∈E}‖²_{2,∞}` against
/// `n + t² (N/|E|)^{4/q} |E|` for random subsets of each size.
pub fn weak_l2_profile(
    s: &SampleSet,
    subset_sizes: &[usize],
    n_directions: usize,
    t: f64,
    q: f64,
    seed: u64,
) -> Result<ProfileReport> {
    check_q(q)?;
    check_sizes(subset_sizes, 1, s.len())?;
    let big_n = s.len() as f64;
    let mut rng = rng_from_seed(seed);
    let dirs: Vec<Vec<f64>> = (0..n_directions).map(|_| random_unit(&mut rng, s.n)).collect();
    let mut entries = Vec::new();
    for &size in subset_sizes {
        let mut lhs: f64 = 0.0;
        for _ in 0..SUBSETS_PER_SIZE {
            let e = random_subset(&mut rng, s.len(), size);
            let mut probes = dirs.clone();
            probes.extend(extreme_eigenvectors(&s.gram_sum(&e)));
            for x in &probes {
                let c: Vec<f64> = e.iter().map(|&i| dot(s.row(i), x)).collect();
                let w = weak_lp_norm(&CoeffSeq::new(c)?, 2.0)?;
                lhs = lhs.max(w * w);
            }
        }
        let bound = s.n as f64 + t * t * (big_n / size as f64).powf(4.0 / q) * size as f64;
        entries.push(ProfileEntry {
            size,
            lhs,
            bound,
            constant: lhs / bound,
        });
    }
    Ok(ProfileReport {
        entries,
        t,
        q,
        subsets_per_size: SUBSETS_PER_SIZE,
        n_directions,
        seed,
    })
}

/// `max_{E, k ∈ E} (1/|E|) Σ_{i∈E, i≠k} <X_i,X_k>²` against
/// `t² (N/|E|)^{4/q} n` for random subsets of each size.
pub fn orthogonality_profile(
    s: &SampleSet,
    subset_sizes: &[usize],
    t: f64,
    q: f64,
    seed: u64,
) -> Result<ProfileReport> {
    check_q(q)?;
    check_sizes(subset_sizes, 1, s.len())?;
    let big_n = s.len() as f64;
    let mut rng = rng_from_seed(seed);
    let mut entries = Vec::new();
    for &size in subset_sizes {
        let mut lhs: f64 = 0.0;
        let reps = if size == s.len() { 1 } else { SUBSETS_PER_SIZE };
        for _ in 0..reps {
            let e = random_subset(&mut rng, s.len(), size);
            for &k in &e {
                let total: f64 = e
                    .iter()
                    .filter(|&&i| i != k)
                    .map(|&i| dot(s.row(i), s.row(k)).powi(2))
                    .sum();
                lhs = lhs.max(total / size as f64);
            }
        }
        let bound = t * t * (big_n / size as f64).powf(4.0 / q) * s.n as f64;
        entries.push(ProfileEntry {
            size,
            lhs,
            bound,
            constant: lhs / bound,
        });
    }
    Ok(ProfileReport {
        entries,
        t,
        q,
        subsets_per_size: SUBSETS_PER_SIZE,
        n_directions: 0,
        seed,
    })
}

/// `E_B = {i : |<X_i, x>| ≥ B}`
pub fn large_coeff_set(s: &SampleSet, x: &[f64], b: f64) -> Result<Vec<usize>> {
    if !(b > 0.0) {
        return Err(Error::contract(format!("level B must be positive, got {b}")));
    }
    if x.len() != s.n {
        return Err(Error::contract("direction has the wrong dimension"));
    }
    Ok(s
        .rows()
        .enumerate()
        .filter(|(_, r)| dot(r, x).abs() >= b)
        .map(|(i, _)| i)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    #[serde(rename = "B")]
    pub b: f64,
    pub i1_term: f64,
    pub i2_term: f64,
    pub i3_term: f64,
    /// `B^{2-q}`, the Hölder–Markov bound on the truncated second moment
    /// for unit `q`-th moments.
    pub i3_bound: f64,
    /// `|E_B(x)|` per probe direction (index into the probe list).
    pub e_b_sizes: BTreeMap<usize, usize>,
    pub t: f64,
    pub q: f64,
    pub n_directions: usize,
    pub resamples: usize,
    pub seed: u64,
}

impl TruncationReport {
    pub fn total(&self) -> f64 {
        self.i1_term + self.i2_term + self.i3_term
    }
}

/// Fresh draws per direction for the expectation term.
pub const DEFAULT_RESAMPLES: usize = 100_000;

/// The three-term truncation split at the level `B = (N/n)^{2/q}`.
pub fn truncation_split(
    s: &SampleSet,
    q: f64,
    t: f64,
    n_directions: usize,
    seed: u64,
) -> Result<TruncationReport> {
    let b = (s.len() as f64 / s.n as f64).powf(2.0 / q);
    truncation_split_at(s, b, q, t, n_directions, DEFAULT_RESAMPLES, seed)
}

/// The truncation split at an explicit level `b`.
///
/// Probes are `n_directions` random unit vectors followed by the two extreme
/// eigenvectors of `Σ_N - I`; the expectation term uses `resamples` fresh
/// draws of the sample set's model per probe.
pub fn truncation_split_at(
    s: &SampleSet,
    b: f64,
    q: f64,
    t: f64,
    n_directions: usize,
    resamples: usize,
    seed: u64,
) -> Result<TruncationReport> {
    check_q(q)?;
    if s.n < 4 || s.len() < s.n {
        return Err(Error::contract(format!(
            "need N ≥ n ≥ 4, got n={}, N={}",
            s.n,
            s.len()
        )));
    }
    if !(b > 0.0) {
        return Err(Error::contract("level must be positive"));
    }
    let big_n = s.len() as f64;
    let mut rng = rng_from_seed(seed);
    let mut probes: Vec<Vec<f64>> = (0..n_directions).map(|_| random_unit(&mut rng, s.n)).collect();
    let centred = sample_covariance(s).shifted(-1.0);
    probes.extend(extreme_eigenvectors(&centred));

    let sampler = builtin_registry().prepare(&s.model)?;
    let fresh_seed = SeedHasher::new().u64(seed).str("resample").finish();
    let fresh = if resamples > 0 {
        crate::distributions::draw_many(sampler.as_ref(), resamples, fresh_seed)
    } else {
        Vec::new()
    };

    let mut i2: f64 = 0.0;
    let mut i3: f64 = 0.0;
    let mut sizes = BTreeMap::new();
    for (d, x) in probes.iter().enumerate() {
        let mut count = 0;
        let mut acc = 0.0;
        for r in s.rows() {
            let c = dot(r, x);
            if c.abs() >= b {
                count += 1;
                acc += c * c;
            }
        }
        sizes.insert(d, count);
        i2 = i2.max(acc / big_n);
        if !fresh.is_empty() {
            let m: f64 = fresh
                .iter()
                .map(|r| {
                    let c = dot(r, x);
                    if c.abs() >= b {
                        c * c
                    } else {
                        0.0
                    }
                })
                .sum::<f64>()
                / fresh.len() as f64;
            i3 = i3.max(m);
        }
    }
    Ok(TruncationReport {
        b,
        i1_term: b * (s.n as f64 / big_n).sqrt(),
        i2_term: i2,
        i3_term: i3,
        i3_bound: b.powf(2.0 - q),
        e_b_sizes: sizes,
        t,
        q,
        n_directions: probes.len(),
        resamples,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetNormEntry {
    pub size: usize,
    pub max_norm: f64,
    /// `(log₂ log₂ |E|)² [n + (N/|E|)^{4/p} |E|]`
    pub bound: f64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetNormReport {
    pub entries: Vec<SubsetNormEntry>,
    pub trials: usize,
    pub p: f64,
    pub q: f64,
    pub t: f64,
    pub seed: u64,
}

/// `‖Σ_{i∈E} X_i X_iᵀ‖` over random subsets of each size, exactly via the
/// operator norm, with its ratio to the subset-norm bound shape.
pub fn subset_norm_sweep(
    s: &SampleSet,
    sizes: &[usize],
    trials: usize,
    p: f64,
    q: f64,
    t: f64,
    seed: u64,
) -> Result<SubsetNormReport> {
    if !(p > 4.0 && p < q) {
        return Err(Error::contract(format!("need 4 < p < q, got p={p}, q={q}")));
    }
    check_sizes(sizes, 4, s.len())?;
    if trials == 0 {
        return Err(Error::contract("need at least one trial"));
    }
    let big_n = s.len() as f64;
    let mut rng = rng_from_seed(seed);
    let mut entries = Vec::new();
    for &size in sizes {
        let ll = (size as f64).log2().log2();
        let bound = ll * ll * (s.n as f64 + (big_n / size as f64).powf(4.0 / p) * size as f64);
        let reps = if size == s.len() { 1 } else { trials };
        let mut max_norm: f64 = 0.0;
        for _ in 0..reps {
            let e = random_subset(&mut rng, s.len(), size);
            max_norm = max_norm.max(op_norm(&s.gram_sum(&e), NORM_TOL)?);
        }
        entries.push(SubsetNormEntry {
            size,
            max_norm,
            bound,
            max_ratio: max_norm / bound,
        });
    }
    Ok(SubsetNormReport {
        entries,
        trials,
        p,
        q,
        t,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(rows: Vec<Vec<f64>>) -> SampleSet {
        let n = rows[0].len();
        SampleSet::from_rows(&rows, VectorModel::gaussian(n), 0).unwrap()
    }

    #[test]
    fn covariance_of_repeated_vector() {
        let s = set(vec![vec![2.0, 0.0, 0.0, 0.0]; 5]);
        let c = sample_covariance(&s);
        assert_eq!(c.get(0, 0), 4.0);
        assert_eq!(c.frobenius(), 4.0);
    }

    #[test]
    fn covariance_of_alternating_signs() {
        let s = set(vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![1.0, 0.0], vec![-1.0, 0.0]]);
        let c = sample_covariance(&s);
        assert_eq!(c.to_rows(), vec![vec![1.0, 0.0], vec![0.0, 0.0]]);
    }

    #[test]
    fn estimation_error_examples() {
        let i = SymMat::identity(2);
        assert_eq!(estimation_error(&i, &i).unwrap(), 0.0);
        let d = SymMat::diag(&[2.0, 1.0]);
        assert!((estimation_error(&d, &i).unwrap() - 1.0).abs() < 1e-12);
        assert!(estimation_error(&SymMat::identity(3), &i).is_err());
    }

    #[test]
    fn prediction_scaling() {
        let a = subgaussian_predicted_error(16, 64, 0.1, DEFAULT_BERNSTEIN).unwrap();
        let b = subgaussian_predicted_error(16, 256, 0.1, DEFAULT_BERNSTEIN).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
        let c = subgaussian_predicted_error(5, 5, 1.0, DEFAULT_BERNSTEIN).unwrap();
        assert!((c - 4.0).abs() < 1e-12);
        assert!(subgaussian_predicted_error(8, 4, 0.1, 0.25).is_err());
    }

    #[test]
    fn large_coefficients_extremes() {
        let s = SampleSet::draw(&VectorModel::cube(4), 50, 2).unwrap();
        let x = [1.0, 0.0, 0.0, 0.0];
        assert_eq!(large_coeff_set(&s, &x, 1e-300).unwrap().len(), 50);
        assert!(large_coeff_set(&s, &x, 2.0 * 3f64.sqrt()).unwrap().is_empty());
        assert!(large_coeff_set(&s, &x, 0.0).is_err());
    }

    #[test]
    fn identical_samples_orthogonality_closed_form() {
        let n = 4;
        let s = set(vec![vec![2.0, 0.0, 0.0, 0.0]; 16]);
        let r = orthogonality_profile(&s, &[8], 1.0, 8.0, 1).unwrap();
        let e = &r.entries[0];
        assert!((e.lhs - 7.0 / 8.0 * (n * n) as f64).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_samples() {
        let n = 4;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 2.0 } else { 0.0 }).collect())
            .collect();
        let s = set(rows);
        let r = orthogonality_profile(&s, &[4], 1.0, 8.0, 1).unwrap();
        assert_eq!(r.entries[0].lhs, 0.0);
        let r = subset_norm_sweep(&s, &[4], 3, 6.0, 8.0, 1.0, 1).unwrap();
        assert!((r.entries[0].max_norm - n as f64).abs() < 1e-9);
    }

    #[test]
    fn singleton_weak_profile_sees_the_vector() {
        let s = SampleSet::draw(&VectorModel::basis(6), 20, 3).unwrap();
        let r = weak_l2_profile(&s, &[1], 0, 1.0, 8.0, 4).unwrap();
        assert!((r.entries[0].lhs - 6.0).abs() < 1e-9);
    }

    #[test]
    fn truncation_level() {
        let s = SampleSet::draw(&VectorModel::gaussian(4), 1024, 5).unwrap();
        let r = truncation_split_at(&s, 4.0, 8.0, 1.0, 4, 1000, 1).unwrap();
        assert_eq!(r.b, 4.0);
        let r2 = truncation_split(&s, 8.0, 1.0, 4, 1).unwrap();
        assert!((r2.b - 4.0).abs() < 1e-12);
        let huge = truncation_split_at(&s, 1e6, 8.0, 1.0, 4, 100, 1).unwrap();
        assert_eq!(huge.i2_term, 0.0);
    }
}
