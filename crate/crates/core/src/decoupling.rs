//! Decoupling: from vectors with a large quadratic form in some direction,
//! extract disjoint index sets `I`, `J` and a unit `y ∈ span(X_j : j ∈ J)`
//! having large inner products with every `X_i`, `i ∈ I`.
//!
//! The pipeline locates the large coefficients with
//! [`extract_structure`](crate::structure::extract_structure), represents the
//! direction as a convex combination through a minimum-norm point, thins the
//! combination by Maurey sampling, and keeps only indices the sample never
//! touched. Every certificate is audited by [`check_decoupling`] before it is
//! returned.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::min_norm_point;
use crate::linalg::{dot, norm2};
use crate::rng::{rng_from_seed, SeedHasher};
use crate::seq::{weak_l1_norm, CoeffSeq};
use crate::structure::{
    extract_structure, refine_structure, suggest_k, StructureCertificate, StructureError,
    StructureParams, DESK_DIVERGENCE_CONST, DESK_K_FLOOR,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecouplingFailure {
    /// The input violates a stated hypothesis (e.g. `‖a‖²_{2,∞} > n̄`).
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    /// Structure extraction found no usable large coefficients.
    #[error("precondition-largeness: {0}")]
    PreconditionLargeness(StructureError),
    #[error("no separation witness: minimum-norm point has norm {norm} < 1")]
    NoWitness { norm: f64 },
    #[error("selection failed after {attempts} attempts (last: {last})")]
    SelectionFailed { attempts: usize, last: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecouplingParams {
    pub r: f64,
    pub r_prime: f64,
    pub r_double_prime: f64,
    pub delta: f64,
    pub alpha: f64,
    #[serde(rename = "C_alpha")]
    pub c_alpha: f64,
    #[serde(rename = "C_alpha_prime")]
    pub c_alpha_prime: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    #[serde(rename = "K3")]
    pub k3: f64,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub tol: f64,
    /// Accept only `‖ȳ‖² ≤ norm_multiple · l n1 / n2`.
    pub norm_multiple: f64,
    pub max_retries: usize,
    pub max_iter: usize,
    /// `K` handed to the structure step; `None` picks `max_j j B*_j`.
    pub structure_k: Option<f64>,
    pub divergence_const: f64,
    pub k_floor: f64,
    pub min_norm1: f64,
}

impl Default for DecouplingParams {
    fn default() -> Self {
        Self::new(0)
    }
}

impl DecouplingParams {
    pub fn new(big_n: usize) -> Self {
        let alpha = 0.5;
        let c_alpha = 8.0;
        Self {
            r: 1.0,
            r_prime: 2.0,
            r_double_prime: 2.0,
            delta: 0.5,
            alpha,
            c_alpha,
            c_alpha_prime: c_alpha / alpha,
            k1: 1.0,
            k2: 1.0,
            k3: 1.0,
            big_n,
            tol: 1e-9,
            norm_multiple: 16.0 / alpha,
            max_retries: 10,
            max_iter: 100_000,
            structure_k: None,
            divergence_const: DESK_DIVERGENCE_CONST,
            k_floor: DESK_K_FLOOR,
            min_norm1: 2.0,
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::contract(msg));
        if !(self.r >= 1.0 && self.r < self.r_prime.min(self.r_double_prime)) {
            return bad(format!(
                "need 1 ≤ r < min(r', r''), got r={}, r'={}, r''={}",
                self.r, self.r_prime, self.r_double_prime
            ));
        }
        for (name, v) in [("delta", self.delta), ("alpha", self.alpha)] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} must lie in (0,1), got {v}"));
            }
        }
        for (name, v) in [
            ("C_alpha", self.c_alpha),
            ("K1", self.k1),
            ("K2", self.k2),
            ("K3", self.k3),
            ("tol", self.tol),
            ("norm_multiple", self.norm_multiple),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        let expected = self.c_alpha / self.alpha;
        if (self.c_alpha_prime - expected).abs() > 1e-12 * expected {
            return bad(format!(
                "C_alpha_prime must equal C_alpha / alpha = {expected}, got {}",
                self.c_alpha_prime
            ));
        }
        if self.big_n < m {
            return bad(format!("N = {} must be at least m = {m}", self.big_n));
        }
        if self.max_retries == 0 {
            return bad("max_retries must be at least 1".into());
        }
        Ok(())
    }

    /// `n̄ = n + (N/m)^{1/r} m`
    pub fn n_bar(&self, n: usize, m: usize) -> f64 {
        n as f64 + (self.big_n as f64 / m as f64).powf(1.0 / self.r) * m as f64
    }

    /// `K3² (N / |I|)^{1/r''}`
    pub fn threshold(&self, i_size: usize) -> f64 {
        self.k3 * self.k3 * (self.big_n as f64 / i_size as f64).powf(1.0 / self.r_double_prime)
    }

    fn structure_params(&self, k: f64) -> StructureParams {
        StructureParams {
            alpha: self.alpha,
            k,
            divergence_const: self.divergence_const,
            k_floor: self.k_floor,
            min_norm1: self.min_norm1,
            enforce_precondition: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Unit vector with `<X_i/a_i, x̄> ≥ 1 - tol` on the index set.
    pub x_bar: Vec<f64>,
    /// Non-negative weights with `x̄ = Σ λ_i X_i/a_i` and `Σ λ_i ≤ 1`.
    pub lambda: Vec<f64>,
    pub hull_norm: f64,
    pub gap: f64,
}

/// Separation step over `idx`: the minimum-norm point `v` of
/// `conv(X_i/a_i)` has `‖v‖ ≥ 1` whenever some unit `x` has all
/// `<X_i/a_i, x> = 1`, and then `x̄ = v/‖v‖` works for every `i`.
pub fn separation_witness(
    xs: &[Vec<f64>],
    a: &[f64],
    idx: &[usize],
    tol: f64,
    max_iter: usize,
) -> Result<Witness> {
    if idx.is_empty() {
        return Err(Error::contract("separation needs a non-empty index set"));
    }
    if let Some(&i) = idx.iter().find(|&&i| a[i] == 0.0) {
        return Err(Error::contract(format!("coefficient a_{i} is zero")));
    }
    let pts: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| xs[i].iter().map(|v| v / a[i]).collect())
        .collect();
    let mnp = min_norm_point(&pts, tol * 0.5, max_iter)?;
    let norm = mnp.norm();
    if norm < 1.0 - tol {
        return Err(DecouplingFailure::NoWitness { norm }.into());
    }
    Ok(Witness {
        x_bar: mnp.v.iter().map(|v| v / norm).collect(),
        lambda: mnp.lambda.iter().map(|l| l / norm).collect(),
        hull_norm: norm,
        gap: mnp.gap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaureyDraw {
    pub y_bar: Vec<f64>,
    /// Index hit by each draw; `None` for the zero outcome.
    pub picks: Vec<Option<usize>>,
}

impl MaureyDraw {
    pub fn hits(&self, k: usize) -> usize {
        self.picks.iter().filter(|&&p| p == Some(k)).count()
    }

    /// `ȳ` with every draw equal to `k` replaced by zero.
    pub fn without(&self, k: usize, xs: &[Vec<f64>], a: &[f64]) -> Vec<f64> {
        let h = self.hits(k) as f64 / self.picks.len() as f64;
        self.y_bar
            .iter()
            .zip(&xs[k])
            .map(|(y, x)| y - h * x / a[k])
            .collect()
    }
}

/// Maurey's empirical method on `Σ λ_i X_i/a_i` over `support`: `draws`
/// i.i.d. picks with `P(i) = λ_i` (zero with the leftover mass), each shifted
/// by `residual`, then averaged.
pub fn maurey_select(
    xs: &[Vec<f64>],
    a: &[f64],
    support: &[usize],
    lambda: &[f64],
    draws: usize,
    residual: &[f64],
    seed: u64,
) -> Result<MaureyDraw> {
    if draws == 0 {
        return Err(Error::contract("need at least one draw"));
    }
    if support.len() != lambda.len() {
        return Err(Error::contract("support and weights differ in length"));
    }
    if lambda.iter().any(|&l| !(l >= 0.0)) {
        return Err(Error::contract("weights must be non-negative"));
    }
    if lambda.iter().sum::<f64>() > 1.0 + 1e-12 {
        return Err(Error::contract("weights sum above 1"));
    }
    let mut cumulative = Vec::with_capacity(lambda.len());
    let mut acc = 0.0;
    for &l in lambda {
        acc += l;
        cumulative.push(acc);
    }
    let mut rng = rng_from_seed(seed);
    let mut y_bar: Vec<f64> = residual.to_vec();
    let mut picks = Vec::with_capacity(draws);
    let w = 1.0 / draws as f64;
    for _ in 0..draws {
        let u: f64 = rng.random();
        let pos = cumulative.partition_point(|&c| c <= u);
        let pick = (pos < support.len()).then(|| support[pos]);
        if let Some(i) = pick {
            for (y, x) in y_bar.iter_mut().zip(&xs[i]) {
                *y += w * x / a[i];
            }
        }
        picks.push(pick);
    }
    Ok(MaureyDraw { y_bar, picks })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecouplingDiagnostics {
    pub n_bar: f64,
    pub structure_k: f64,
    pub l: usize,
    pub n1: usize,
    pub n2: usize,
    pub i1_prime: usize,
    pub i2_prime: usize,
    pub draws: usize,
    pub y_bar_norm_sq: f64,
    /// `norm_multiple · l n1 / n2`
    pub y_bar_norm_bound: f64,
    pub norm_multiple: f64,
    /// `(k, Z_k)` for `k ∈ I2'`.
    pub z: Vec<(usize, f64)>,
    pub attempts: usize,
    pub seed_used: u64,
    pub perturbed: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecouplingCertificate {
    #[serde(rename = "I")]
    pub i: Vec<usize>,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    pub y: Vec<f64>,
    pub threshold: f64,
    pub selection_record: Vec<Option<usize>>,
    pub structure: StructureCertificate,
    pub diagnostics: DecouplingDiagnostics,
}

/// Replaces exact duplicates by `1e-12`-scale index-keyed perturbations.
fn separate_duplicates(xs: &mut [Vec<f64>]) -> Vec<usize> {
    let mut changed = Vec::new();
    for i in 1..xs.len() {
        while xs[..i].iter().any(|p| *p == xs[i]) {
            let n = xs[i].len();
            let scale = norm2(&xs[i]).max(1.0) * 1e-12;
            let c = i % n;
            xs[i][c] += scale * ((i % 7) + 1) as f64;
            changed.push(i);
        }
    }
    changed.dedup();
    changed
}

pub fn decouple(
    vectors: &[Vec<f64>],
    x: &[f64],
    params: &DecouplingParams,
    seed: u64,
) -> Result<DecouplingCertificate> {
    let m = vectors.len();
    if m < 4 {
        return Err(Error::contract(format!("need at least 4 vectors, got {m}")));
    }
    let n = x.len();
    if n == 0 || vectors.iter().any(|v| v.len() != n) {
        return Err(Error::contract("vectors and x must share a positive dimension"));
    }
    if vectors.iter().flatten().chain(x).any(|v| !v.is_finite()) {
        return Err(Error::contract("inputs must be finite"));
    }
    if (norm2(x) - 1.0).abs() > 1e-8 {
        return Err(Error::contract(format!("x must be a unit vector, ‖x‖ = {}", norm2(x))));
    }
    params.validate(m)?;

    let mut xs: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().map(|c| c / params.k3).collect())
        .collect();
    let perturbed = separate_duplicates(&mut xs);

    let a: Vec<f64> = xs.iter().map(|v| dot(v, x)).collect();
    let n_bar = params.n_bar(n, m);
    let b = CoeffSeq::new(a.iter().map(|v| v * v / n_bar).collect())?;
    let weak = weak_l1_norm(&b);
    if weak > 1.0 + 1e-12 {
        return Err(DecouplingFailure::Hypothesis(format!(
            "‖a‖²_(2,∞) = {} exceeds n̄ = {n_bar}",
            weak * n_bar
        ))
        .into());
    }
    let k = match params.structure_k {
        Some(k) => k,
        None => suggest_k(&b)?,
    };
    if k <= 0.0 {
        let required = params.k_floor * crate::structure::log_log(m);
        return Err(DecouplingFailure::PreconditionLargeness(StructureError::KTooSmall { k, required }).into());
    }
    let structure_failure = |e: Error| match e {
        Error::Structure(s) => DecouplingFailure::PreconditionLargeness(s).into(),
        other => other,
    };
    let cert = extract_structure(&b, &params.structure_params(k)).map_err(structure_failure)?;
    let i1 = cert.i1.clone();
    let cert_l = cert.l;
    let witness = separation_witness(&xs, &a, &i1, params.tol, params.max_iter)?;
    let lambda = CoeffSeq::new(witness.lambda.clone())?;
    let refined = refine_structure(&cert, &lambda).map_err(structure_failure)?;
    let n1 = i1.len();
    let n2 = refined.i2.len();

    let cut = params.c_alpha / n2 as f64;
    let lam_of = |i: usize| witness.lambda[i1.binary_search(&i).unwrap()];
    let (i1_prime, i1_rest): (Vec<usize>, Vec<usize>) =
        i1.iter().partition(|&&i| lam_of(i) <= cut);
    let i2_prime: Vec<usize> = refined
        .i2
        .iter()
        .copied()
        .filter(|&i| lam_of(i) <= cut)
        .collect();
    let mut residual = vec![0.0; n];
    for &i in &i1_rest {
        let w = lam_of(i) / a[i];
        for (r, v) in residual.iter_mut().zip(&xs[i]) {
            *r += w * v;
        }
    }
    let draws = ((n2 as f64 / params.c_alpha_prime).ceil() as usize).max(1);
    let support_lambda: Vec<f64> = i1_prime.iter().map(|&i| lam_of(i)).collect();
    let norm_bound = params.norm_multiple * cert_l as f64 * n1 as f64 / n2 as f64;

    let mut last = String::new();
    for attempt in 0..params.max_retries {
        let s = SeedHasher::new().u64(seed).str("maurey").u64(attempt as u64).finish();
        let sel = maurey_select(&xs, &a, &i1_prime, &support_lambda, draws, &residual, s)?;
        let mut z = Vec::with_capacity(i2_prime.len());
        let mut accepted = Vec::new();
        for &kk in &i2_prime {
            let yk = sel.without(kk, &xs, &a);
            let zk = dot(&xs[kk], &yk) / a[kk];
            z.push((kk, zk));
            if sel.hits(kk) == 0 && zk >= 0.25 {
                accepted.push(kk);
            }
        }
        let mut j: Vec<usize> = sel.picks.iter().flatten().copied().chain(i1_rest.iter().copied()).collect();
        j.sort_unstable();
        j.dedup();
        let y_norm_sq = dot(&sel.y_bar, &sel.y_bar);

        let reason = if accepted.is_empty() {
            Some("no index passed the inner-product test".to_string())
        } else if j.is_empty() || y_norm_sq == 0.0 {
            Some("the thinned combination is zero".to_string())
        } else if j.len() as f64 > params.delta * accepted.len() as f64 {
            Some(format!("|J| = {} exceeds delta |I| = {}", j.len(), params.delta * accepted.len() as f64))
        } else if y_norm_sq > norm_bound {
            Some(format!("‖ȳ‖² = {y_norm_sq} exceeds {norm_bound}"))
        } else {
            None
        };
        if let Some(r) = reason {
            last = r;
            continue;
        }
        let y_norm = y_norm_sq.sqrt();
        let y: Vec<f64> = sel.y_bar.iter().map(|v| v / y_norm).collect();
        let threshold = params.threshold(accepted.len());
        let weakest = accepted
            .iter()
            .map(|&kk| dot(&vectors[kk], &y).powi(2))
            .fold(f64::INFINITY, f64::min);
        if weakest < threshold {
            last = format!("smallest <X_k, y>² = {weakest} is below the threshold {threshold}");
            continue;
        }
        let certificate = DecouplingCertificate {
            i: accepted,
            j,
            y,
            threshold,
            selection_record: sel.picks,
            structure: cert,
            diagnostics: DecouplingDiagnostics {
                n_bar,
                structure_k: k,
                l: cert_l,
                n1,
                n2,
                i1_prime: i1_prime.len(),
                i2_prime: i2_prime.len(),
                draws,
                y_bar_norm_sq: y_norm_sq,
                y_bar_norm_bound: norm_bound,
                norm_multiple: params.norm_multiple,
                z,
                attempts: attempt + 1,
                seed_used: s,
                perturbed,
            },
        };
        let audit = check_decoupling(&certificate, vectors, params);
        assert!(
            audit.passes(),
            "decoupling certificate failed its own audit: {:?}",
            audit.failures()
        );
        return Ok(certificate);
    }
    Err(DecouplingFailure::SelectionFailed {
        attempts: params.max_retries,
        last,
    }
    .into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecouplingCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Non-negative exactly when the check passes.
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecouplingReport {
    pub items: Vec<DecouplingCheck>,
}

impl DecouplingReport {
    pub fn passes(&self) -> bool {
        self.items.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&DecouplingCheck> {
        self.items.iter().filter(|c| !c.pass).collect()
    }

    pub fn item(&self, name: &str) -> Option<&DecouplingCheck> {
        self.items.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, lhs: f64, rhs: f64, slack: f64) {
        self.items.push(DecouplingCheck {
            name: name.into(),
            lhs,
            rhs,
            slack,
            pass: slack >= 0.0,
        });
    }

    /// Human-readable table of every check and its slack.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.items {
            s.push_str(&format!(
                "{:<4} {:<34} lhs={:<24e} rhs={:<24e} slack={:e}\n",
                if c.pass { "ok" } else { "FAIL" },
                c.name,
                c.lhs,
                c.rhs,
                c.slack
            ));
        }
        s
    }
}

/// Distance from `y` to `span(X_j : j ∈ J)`, by least squares.
pub fn span_residual(vectors: &[Vec<f64>], j: &[usize], y: &[f64]) -> f64 {
    if j.is_empty() {
        return norm2(y);
    }
    let n = y.len();
    let basis = DMatrix::from_fn(n, j.len(), |r, c| vectors[j[c]][r]);
    let target = DVector::from_column_slice(y);
    let svd = basis.clone().svd(true, true);
    let cutoff = svd.singular_values.max() * 1e-13 * n.max(j.len()) as f64;
    match svd.solve(&target, cutoff) {
        Ok(coef) => (basis * coef - target).norm(),
        Err(_) => norm2(y),
    }
}

/// Independent audit of a certificate against the original vectors.
pub fn check_decoupling(
    cert: &DecouplingCertificate,
    vectors: &[Vec<f64>],
    params: &DecouplingParams,
) -> DecouplingReport {
    let mut r = DecouplingReport { items: Vec::new() };
    let m = vectors.len();
    let in_range = cert.i.iter().chain(&cert.j).all(|&i| i < m);
    r.push("indices in range", 0.0, 0.0, if in_range { 0.0 } else { -1.0 });
    r.push("I non-empty", cert.i.len() as f64, 1.0, cert.i.len() as f64 - 1.0);
    r.push("J non-empty", cert.j.len() as f64, 1.0, cert.j.len() as f64 - 1.0);
    let overlap = cert.i.iter().filter(|i| cert.j.contains(i)).count() as f64;
    r.push("I and J disjoint", overlap, 0.0, -overlap);
    let cap = params.delta * cert.i.len() as f64;
    r.push("|J| <= delta |I|", cert.j.len() as f64, cap, cap - cert.j.len() as f64);
    let dev = (norm2(&cert.y) - 1.0).abs();
    r.push("‖y‖ = 1", dev, 1e-10, 1e-10 - dev);
    if !in_range || cert.i.is_empty() {
        return r;
    }
    let res = span_residual(vectors, &cert.j, &cert.y);
    r.push("y in span of J", res, 1e-8, 1e-8 - res);
    let threshold = params.threshold(cert.i.len());
    let weakest = cert
        .i
        .iter()
        .map(|&k| dot(&vectors[k], &cert.y).powi(2))
        .fold(f64::INFINITY, f64::min);
    r.push("<X_i, y>² >= threshold on I", weakest, threshold, weakest - threshold);
    let drift = (cert.threshold - threshold).abs();
    r.push("recorded threshold", drift, 1e-12 * threshold, 1e-12 * threshold - drift);
    r
}

/// Test instances for [`decouple`].
pub mod instances {
    use rand::seq::SliceRandom;
    use rand_distr::{Distribution, StandardNormal};
    use serde::{Deserialize, Serialize};

    use crate::distributions::random_unit;
    use crate::linalg::{dot, norm2};
    use crate::rng::rng_from_seed;

    /// Vectors plus the direction in which their quadratic form is large.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct Instance {
        pub vectors: Vec<Vec<f64>>,
        pub x: Vec<f64>,
        #[serde(rename = "N", default)]
        pub big_n: Option<usize>,
    }

    /// Near-duplicates of one direction `u` with graded lengths, padded with
    /// vectors orthogonal to `u`; returns the instance with `x = u`.
    ///
    /// The `k`-th longest near-duplicate has squared length
    /// `n · min(1, shrink · n̄/(n k))` with `n̄ = n + m` (the value for
    /// `N = m`, `r = 1`), so `b_k = <X_k,u>²/n̄` has weak ℓ₁ norm just below
    /// one while `Σ b_k` grows like a harmonic sum. Directions are `u` plus
    /// noise of relative size `noise` inside a fixed random subspace of
    /// dimension `noise_rank` orthogonal to `u`; positions are shuffled.
    pub fn near_duplicate_family(
        n: usize,
        m: usize,
        duplicates: usize,
        noise: f64,
        noise_rank: usize,
        seed: u64,
    ) -> Instance {
        assert!(n >= 2 && duplicates <= m && noise_rank >= 1 && noise_rank < n);
        const SHRINK: f64 = 0.98;
        let mut rng = rng_from_seed(seed);
        let u = random_unit(&mut rng, n);
        let n_bar = (n + m) as f64;
        let nf = n as f64;
        let orth = |rng: &mut crate::rng::SimRng| {
            let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
            let p = dot(&g, &u);
            let w: Vec<f64> = g.iter().zip(&u).map(|(g, u)| g - p * u).collect();
            let r = norm2(&w);
            w.into_iter().map(|v| v / r).collect::<Vec<f64>>()
        };
        let noise_basis: Vec<Vec<f64>> = (0..noise_rank).map(|_| orth(&mut rng)).collect();
        let mut vectors = Vec::with_capacity(m);
        for k in 1..=duplicates {
            let t2 = (SHRINK * n_bar / (nf * k as f64)).min(1.0);
            let len = (nf * t2).sqrt();
            let mut w = vec![0.0; n];
            for e in &noise_basis {
                let c: f64 = StandardNormal.sample(&mut rng);
                w.iter_mut().zip(e).for_each(|(w, e)| *w += c * e);
            }
            let r = norm2(&w);
            w.iter_mut().for_each(|v| *v /= r);
            let d: Vec<f64> = u.iter().zip(&w).map(|(u, w)| u + noise * w).collect();
            let r = norm2(&d);
            vectors.push(d.into_iter().map(|v| v * len / r).collect());
        }
        for _ in duplicates..m {
            let w = orth(&mut rng);
            vectors.push(w.into_iter().map(|v| v * nf.sqrt()).collect());
        }
        vectors.shuffle(&mut rng);
        Instance {
            vectors,
            x: u,
            big_n: Some(m),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::instances::near_duplicate_family;
    use super::*;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn orthogonal_pair_has_no_witness() {
        let xs = vec![e(2, 0), e(2, 1)];
        let err = separation_witness(&xs, &[1.0, 1.0], &[0, 1], 1e-9, 1000).unwrap_err();
        assert!(matches!(
            err,
            Error::Decoupling(DecouplingFailure::NoWitness { norm }) if (norm - 0.5f64.sqrt()).abs() < 1e-6
        ));
    }

    #[test]
    fn repeated_vector_is_its_own_witness() {
        let xs = vec![e(3, 0); 4];
        let w = separation_witness(&xs, &[1.0; 4], &[0, 1, 2, 3], 1e-9, 1000).unwrap();
        assert!((w.x_bar[0] - 1.0).abs() < 1e-12);
        assert!(w.lambda.iter().sum::<f64>() <= 1.0 + 1e-12);
    }

    #[test]
    fn planted_direction_is_recovered() {
        let mut rng = rng_from_seed(9);
        let n = 6;
        let x = crate::distributions::random_unit(&mut rng, n);
        let xs: Vec<Vec<f64>> = (0..10)
            .map(|_| {
                let g = crate::distributions::random_unit(&mut rng, n);
                let p = dot(&g, &x);
                g.iter().zip(&x).map(|(g, x)| 0.5 * (g - p * x) + 2.0 * x).collect()
            })
            .collect();
        let a: Vec<f64> = xs.iter().map(|v| dot(v, &x)).collect();
        let idx: Vec<usize> = (0..10).collect();
        let w = separation_witness(&xs, &a, &idx, 1e-9, 10_000).unwrap();
        for i in idx {
            assert!(dot(&xs[i], &w.x_bar) / a[i] >= 1.0 - 1e-6);
        }
    }

    #[test]
    fn maurey_extremes() {
        let xs = vec![e(2, 0), e(2, 1)];
        let a = [2.0, 1.0];
        let d = maurey_select(&xs, &a, &[0, 1], &[1.0, 0.0], 5, &[0.0, 0.0], 1).unwrap();
        assert_eq!(d.hits(0), 5);
        assert_eq!(d.y_bar, vec![0.5, 0.0]);
        assert_eq!(d.without(0, &xs, &a), vec![0.0, 0.0]);
        let z = maurey_select(&xs, &a, &[0, 1], &[0.0, 0.0], 5, &[0.25, 0.0], 1).unwrap();
        assert!(z.picks.iter().all(Option::is_none));
        assert_eq!(z.y_bar, vec![0.25, 0.0]);
        assert!(maurey_select(&xs, &a, &[0, 1], &[0.7, 0.7], 5, &[0.0, 0.0], 1).is_err());
    }

    #[test]
    fn maurey_mean_matches_target() {
        let xs = vec![e(2, 0), e(2, 1)];
        let a = [1.0, 1.0];
        let d = maurey_select(&xs, &a, &[0, 1], &[0.3, 0.5], 200_000, &[0.0, 0.0], 3).unwrap();
        assert!((d.y_bar[0] - 0.3).abs() < 0.01);
        assert!((d.y_bar[1] - 0.5).abs() < 0.01);
    }

    #[test]
    fn orthogonal_vectors_fail_largeness() {
        let n = 16;
        let xs: Vec<Vec<f64>> = (0..n).map(|i| e(n, i)).collect();
        let x = e(n, 0);
        let err = decouple(&xs, &x, &DecouplingParams::new(n), 1).unwrap_err();
        assert!(matches!(
            err,
            Error::Decoupling(DecouplingFailure::PreconditionLargeness(_))
        ), "{err}");
    }

    #[test]
    fn certificate_audit_and_tampering() {
        let inst = near_duplicate_family(32, 256, 200, 1e-3, 2, 4);
        let params = DecouplingParams::new(256);
        let cert = decouple(&inst.vectors, &inst.x, &params, 11).unwrap();
        let report = check_decoupling(&cert, &inst.vectors, &params);
        assert!(report.passes(), "{}", report.render());
        assert!(cert.j.len() as f64 <= params.delta * cert.i.len() as f64);

        let mut bad = cert.clone();
        bad.j.push(bad.i[0]);
        assert!(!check_decoupling(&bad, &inst.vectors, &params).item("I and J disjoint").unwrap().pass);
        let mut bad = cert.clone();
        bad.y[0] += 0.1;
        assert!(!check_decoupling(&bad, &inst.vectors, &params).passes());
        let mut bad = cert;
        bad.threshold *= 2.0;
        assert!(!check_decoupling(&bad, &inst.vectors, &params).item("recorded threshold").unwrap().pass);
    }

    #[test]
    fn same_seed_same_certificate() {
        let inst = near_duplicate_family(16, 64, 50, 1e-3, 2, 2);
        let params = DecouplingParams::new(64);
        let a = decouple(&inst.vectors, &inst.x, &params, 5);
        let b = decouple(&inst.vectors, &inst.x, &params, 5);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn hypothesis_violation_is_reported() {
        let n = 4;
        let xs = vec![vec![100.0, 0.0, 0.0, 0.0]; 8];
        let err = decouple(&xs, &e(n, 0), &DecouplingParams::new(8), 1).unwrap_err();
        assert!(matches!(err, Error::Decoupling(DecouplingFailure::Hypothesis(_))), "{err}");
    }

    #[test]
    fn params_round_trip() {
        let p = DecouplingParams::new(100);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"C_alpha\""));
        assert_eq!(serde_json::from_str::<DecouplingParams>(&s).unwrap(), p);
        let partial: DecouplingParams = serde_json::from_str(r#"{"N": 50, "delta": 0.25}"#).unwrap();
        assert_eq!(partial.big_n, 50);
        assert_eq!(partial.delta, 0.25);
    }
}
