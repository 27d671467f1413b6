//! Structure of slowly divergent series.
//!
//! Given coefficients `b` with `‖b‖_{1,∞} ≤ 1` whose sum is large, locate a
//! level `l` and an index set `I1` made of dyadic blocks on which every `b_i`
//! is large relative to `|I1|`, with `|I1|` regular in size; then, for any
//! weights `λ` on `I1` with `‖λ‖₁ ≤ 1`, a subset `I2` on which `b` also
//! dominates `2λ`. Every output is re-checked by [`check_structure`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seq::{weak_l1_norm, CoeffSeq};

/// Absolute slack for comparisons against non-integer boundary values.
pub const SLACK: f64 = 1e-12;

fn ge(a: f64, b: f64) -> bool {
    a >= b - SLACK
}

#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StructureError {
    #[error("divergence precondition unmet: ‖b‖₁ = {achieved} but {required} is required")]
    Divergence { achieved: f64, required: f64 },
    #[error("K = {k} is below the required floor {required}")]
    KTooSmall { k: f64, required: f64 },
    #[error("no dominant block: every block contribution B*_j is below K/j")]
    NoDominantBlock,
    #[error("no heavy block sits at least l/2 levels below the top, nothing to regularize")]
    NothingToRegularize,
    #[error("no block of I1 is both light enough in λ and large enough (smallest load {min_load})")]
    NoLightBlock { min_load: f64 },
}

/// Constants of the structure extraction.
///
/// The divergence precondition reads
/// `‖b‖₁ ≥ max(divergence_const · K · log log m, min_norm1)` together with
/// `K ≥ k_floor · log log m`. The absolute floor lets the coefficients below
/// `1/m`, whose total is at most 1, be discarded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureParams {
    pub alpha: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub divergence_const: f64,
    pub k_floor: f64,
    pub min_norm1: f64,
    pub enforce_precondition: bool,
}

impl StructureParams {
    /// Constants that make the asymptotic argument go through: `10/α` and 8.
    pub fn new(alpha: f64, k: f64) -> Self {
        Self {
            alpha,
            k,
            divergence_const: 10.0 / alpha,
            k_floor: 8.0,
            min_norm1: 2.0,
            enforce_precondition: true,
        }
    }

    /// Constants usable at laptop scale.
    ///
    /// Because `‖b‖₁ ≤ ln m + 1` whenever `‖b‖_{1,∞} ≤ 1`, the default
    /// precondition cannot hold for any `m` below roughly `2^500`. These
    /// relaxed constants admit genuinely divergent inputs for `m ≤ 2^16`; the
    /// conclusions are then only as good as [`check_structure`] says.
    pub fn desk(alpha: f64, k: f64) -> Self {
        Self {
            alpha,
            k,
            divergence_const: DESK_DIVERGENCE_CONST,
            k_floor: DESK_K_FLOOR,
            min_norm1: 2.0,
            enforce_precondition: true,
        }
    }

    pub fn unchecked(alpha: f64, k: f64) -> Self {
        Self {
            enforce_precondition: false,
            ..Self::new(alpha, k)
        }
    }

    pub fn required_norm1(&self, m: usize) -> f64 {
        (self.divergence_const * self.k * log_log(m)).max(self.min_norm1)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::contract(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::contract(format!("K must be positive, got {}", self.k)));
        }
        Ok(())
    }
}

pub const DESK_DIVERGENCE_CONST: f64 = 0.25;
pub const DESK_K_FLOOR: f64 = 0.5;

/// `⌊log₂ m⌋`, the number of dyadic levels above `1/m`.
pub fn log_levels(m: usize) -> usize {
    (usize::BITS - 1 - m.leading_zeros()) as usize
}

/// `log₂ log₂ m` (zero for `m ≤ 2`).
pub fn log_log(m: usize) -> f64 {
    let l = (m as f64).log2();
    if l <= 1.0 {
        0.0
    } else {
        l.log2()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub j: usize,
    pub indices: Vec<usize>,
    /// `B_j`
    pub mass: f64,
}

impl Block {
    pub fn size(&self) -> usize {
        self.indices.len()
    }
}

/// Dyadic level sets `Ω_j = {i : 2^{-j} < |b_i| ≤ 2^{-j+1}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    pub m: usize,
    /// Non-empty blocks in increasing `j`.
    pub blocks: Vec<Block>,
    /// Indices with `|b_i| ≤ 1/m`.
    pub dropped: Vec<usize>,
}

impl BlockDecomposition {
    pub fn block(&self, j: usize) -> Option<&Block> {
        self.blocks.iter().find(|b| b.j == j)
    }

    pub fn mass(&self, j: usize) -> f64 {
        self.block(j).map_or(0.0, |b| b.mass)
    }

    pub fn size(&self, j: usize) -> usize {
        self.block(j).map_or(0, Block::size)
    }

    /// Block masses in non-increasing order, padded with zeros to `len`.
    pub fn sorted_masses(&self, len: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self.blocks.iter().map(|b| b.mass).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v.resize(len.max(v.len()), 0.0);
        v
    }
}

/// Level `j ≥ 1` of a positive coefficient: the `j` with `2^{-j} < v ≤ 2^{-j+1}`.
fn dyadic_level(v: f64) -> usize {
    debug_assert!(v > 0.0 && v <= 1.0);
    let mut j = (-v.log2()).floor().max(0.0) as i32 + 1;
    // repair rounding of log2 near powers of two; powi(-j) is exact here
    while v <= 2f64.powi(-j) {
        j += 1;
    }
    while j > 1 && v > 2f64.powi(-j + 1) {
        j -= 1;
    }
    j as usize
}

pub fn block_decompose(b: &CoeffSeq) -> Result<BlockDecomposition> {
    let w = weak_l1_norm(b);
    if w > 1.0 + SLACK {
        return Err(Error::contract(format!("‖b‖_(1,∞) = {w} exceeds 1")));
    }
    let m = b.len();
    let floor = 1.0 / m as f64;
    let mut by_level: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    let mut dropped = Vec::new();
    for (i, &v) in b.values().iter().enumerate() {
        let v = v.abs().min(1.0);
        if v <= floor {
            dropped.push(i);
        } else {
            by_level.entry(dyadic_level(v)).or_default().push(i);
        }
    }
    let blocks = by_level
        .into_iter()
        .map(|(j, indices)| Block {
            j,
            mass: indices.iter().map(|&i| b.values()[i].abs()).sum(),
            indices,
        })
        .collect();
    Ok(BlockDecomposition { m, blocks, dropped })
}

/// `l = max{j ∈ [log m] : B*_j ≥ K/j}`, or 0 when no level qualifies.
pub fn dominant_level(blocks: &BlockDecomposition, k: f64) -> usize {
    let levels = log_levels(blocks.m);
    let sorted = blocks.sorted_masses(levels);
    (1..=levels)
        .rev()
        .find(|&j| ge(j as f64 * sorted[j - 1], k))
        .unwrap_or(0)
}

/// The largest `K` for which the dominant level is non-zero:
/// `max_j j · B*_j`. Used as a per-sequence choice of `K`.
pub fn suggest_k(b: &CoeffSeq) -> Result<f64> {
    let blocks = block_decompose(b)?;
    let levels = log_levels(blocks.m);
    let sorted = blocks.sorted_masses(levels);
    Ok((1..=levels)
        .map(|j| j as f64 * sorted[j - 1])
        .fold(0.0, f64::max))
}

/// Output of the regularization step on a set `J ⊆ [L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regularization {
    pub j1: usize,
    pub j2: usize,
    /// `|J ∩ [j1, j2]|`
    pub count: usize,
    /// Number of progression steps needed to pass `L`.
    pub k_steps: usize,
    /// `|J|`
    pub l: usize,
}

impl Regularization {
    /// `l / (3 K_steps)`
    pub fn density_bound(&self) -> f64 {
        self.l as f64 / (3 * self.k_steps) as f64
    }
}

/// Finds `j1 ≤ j2` in `J` with `l/2 ≤ j1`, `j2 ≤ (1+α) j1` and
/// `|J ∩ [j1, j2]| ≥ l / (3 K_steps)`.
///
/// The candidate windows are consecutive terms of `j^(k) = (1+α)^k j^(0)`,
/// where `j^(0)` is the `⌈l/2⌉`-th smallest element; the densest window wins
/// (earliest on ties) and is shrunk to its extreme members of `J`.
pub fn regularize(set: &[usize], big_l: usize, alpha: f64) -> Result<Regularization> {
    if set.is_empty() {
        return Err(Error::contract("regularize needs a non-empty set"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::contract(format!("alpha must lie in (0,1], got {alpha}")));
    }
    let mut js = set.to_vec();
    js.sort_unstable();
    js.dedup();
    if js[0] == 0 || *js.last().unwrap() > big_l {
        return Err(Error::contract(format!("set must lie in [1, {big_l}]")));
    }
    let l = js.len();
    let start = js[l.div_ceil(2) - 1] as f64;
    let factor = 1.0 + alpha;
    let mut windows = Vec::new();
    let mut lo = start;
    loop {
        let hi = lo * factor;
        windows.push((lo, hi));
        if hi >= big_l as f64 {
            break;
        }
        lo = hi;
    }
    let k_steps = windows.len();
    let mut best: Option<(usize, usize, usize)> = None;
    for &(lo, hi) in &windows {
        let members: Vec<usize> = js
            .iter()
            .copied()
            .filter(|&j| j as f64 >= lo && j as f64 <= hi)
            .collect();
        if let (Some(&a), Some(&b)) = (members.first(), members.last()) {
            if best.is_none_or(|(_, _, c)| members.len() > c) {
                best = Some((a, b, members.len()));
            }
        }
    }
    // the window starting at j^(0) always contains j^(0) itself
    let (j1, j2, count) = best.expect("first window contains its left end");
    Ok(Regularization {
        j1,
        j2,
        count,
        k_steps,
        l,
    })
}

/// Independent verification of a [`Regularization`] result.
pub fn check_regularization(set: &[usize], big_l: usize, alpha: f64, r: &Regularization) -> bool {
    let mut js = set.to_vec();
    js.sort_unstable();
    js.dedup();
    let l = js.len();
    if r.l != l || !js.contains(&r.j1) || !js.contains(&r.j2) {
        return false;
    }
    // K_steps = min{k ≥ 1 : (1+α)^k j^(0) ≥ L}
    let factor = 1.0 + alpha;
    let mut x = js[l.div_ceil(2) - 1] as f64;
    let mut k = 0;
    loop {
        x *= factor;
        k += 1;
        if x >= big_l as f64 {
            break;
        }
    }
    let count = js.iter().filter(|&&j| j >= r.j1 && j <= r.j2).count();
    k == r.k_steps
        && 2 * r.j1 >= l
        && r.j1 <= r.j2
        && r.j2 as f64 <= factor * r.j1 as f64
        && count == r.count
        && 3 * r.k_steps * count >= l
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureDiagnostics {
    pub norm1: f64,
    pub required_norm1: f64,
    pub log_log_m: f64,
    /// `K log log m / 5`, the size the level would reach under the
    /// asymptotic constants.
    pub l_guarantee: f64,
    /// `8 l / K`, the number of blocks that makes a light block certain.
    pub j_size_guarantee: f64,
    pub regularization: Regularization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureCertificate {
    pub m: usize,
    pub alpha: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub l: usize,
    pub j_bar: Vec<usize>,
    pub j: Vec<usize>,
    pub j_prime: usize,
    pub j_double_prime: usize,
    /// Sorted indices.
    pub i1: Vec<usize>,
    pub blocks: BlockDecomposition,
    pub diagnostics: StructureDiagnostics,
}

pub fn extract_structure(b: &CoeffSeq, params: &StructureParams) -> Result<StructureCertificate> {
    params.validate()?;
    let m = b.len();
    if m < 4 {
        return Err(Error::contract(format!("need m ≥ 4 coefficients, got {m}")));
    }
    let blocks = block_decompose(b)?;
    let ll = log_log(m);
    let norm1 = b.l1_norm();
    let required = params.required_norm1(m);
    if params.enforce_precondition {
        if !ge(params.k, params.k_floor * ll) {
            return Err(StructureError::KTooSmall {
                k: params.k,
                required: params.k_floor * ll,
            }
            .into());
        }
        if !ge(norm1, required) {
            return Err(StructureError::Divergence {
                achieved: norm1,
                required,
            }
            .into());
        }
    }
    let levels = log_levels(m);
    let l = dominant_level(&blocks, params.k);
    if l == 0 {
        return Err(StructureError::NoDominantBlock.into());
    }
    let threshold = params.k / l as f64;
    let j_bar: Vec<usize> = blocks
        .blocks
        .iter()
        .filter(|blk| blk.j <= levels && ge(blk.mass, threshold))
        .map(|blk| blk.j)
        .collect();
    // Only levels with `log m - j ≥ l/2` can give `2^{l/2} ≤ m/|I1|`; the
    // top block maps to 0 and falls outside the regularized range.
    let min_gap = l.div_ceil(2);
    let flipped: Vec<usize> = j_bar
        .iter()
        .filter(|&&j| j + min_gap <= levels)
        .map(|&j| levels - j)
        .collect();
    if flipped.is_empty() {
        return Err(StructureError::NothingToRegularize.into());
    }
    let reg = regularize(&flipped, levels, params.alpha / 2.0)?;
    let j_prime = levels - reg.j1;
    let j_double_prime = levels - reg.j2;
    let j: Vec<usize> = j_bar
        .iter()
        .copied()
        .filter(|&j| j >= j_double_prime && j <= j_prime)
        .collect();
    let mut i1: Vec<usize> = j
        .iter()
        .flat_map(|&j| blocks.block(j).unwrap().indices.iter().copied())
        .collect();
    i1.sort_unstable();
    Ok(StructureCertificate {
        m,
        alpha: params.alpha,
        k: params.k,
        l,
        j_bar,
        j_prime,
        j_double_prime,
        diagnostics: StructureDiagnostics {
            norm1,
            required_norm1: required,
            log_log_m: ll,
            l_guarantee: params.k * ll / 5.0,
            j_size_guarantee: 8.0 * l as f64 / params.k,
            regularization: reg,
        },
        j,
        i1,
        blocks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockChoice {
    /// The first block with `L_j ≤ K/(8l)`, as the counting argument promises,
    /// whose light part keeps `m/n2 ≤ (m/n1)^(1+α)`.
    LightLoad,
    /// No such block; the first block where at least half the indices
    /// individually pass the `λ` threshold, subject to the same size bound.
    LightMajority,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedSet {
    pub j0: usize,
    /// Sorted indices.
    pub i2: Vec<usize>,
    /// `|λ|` aligned with the certificate's `I1`.
    pub lambda: Vec<f64>,
    /// `(j, L_j)` for `j ∈ J`.
    pub loads: Vec<(usize, f64)>,
    pub choice: BlockChoice,
}

/// Builds `I2` for weights `lambda` aligned with `cert.i1`.
pub fn refine_structure(cert: &StructureCertificate, lambda: &CoeffSeq) -> Result<RefinedSet> {
    if lambda.len() != cert.i1.len() {
        return Err(Error::contract(format!(
            "λ has {} entries but I1 has {}",
            lambda.len(),
            cert.i1.len()
        )));
    }
    if lambda.l1_norm() > 1.0 + SLACK {
        return Err(Error::contract(format!("‖λ‖₁ = {} exceeds 1", lambda.l1_norm())));
    }
    let lam: Vec<f64> = lambda.values().iter().map(|v| v.abs()).collect();
    let weight_of = |i: usize| lam[cert.i1.binary_search(&i).expect("block index lies in I1")];
    let l = cert.l as f64;
    let loads: Vec<(usize, f64)> = cert
        .j
        .iter()
        .map(|&j| {
            let blk = cert.blocks.block(j).unwrap();
            (j, blk.indices.iter().map(|&i| weight_of(i)).sum())
        })
        .collect();
    let light_set = |j: usize| -> Vec<usize> {
        let blk = cert.blocks.block(j).unwrap();
        let cut = cert.k / (4.0 * l * blk.size() as f64);
        let mut v: Vec<usize> = blk
            .indices
            .iter()
            .copied()
            .filter(|&i| weight_of(i) <= cut + SLACK * cut)
            .collect();
        v.sort_unstable();
        v
    };
    // Past the pigeonhole size every light block qualifies; below it a
    // block may be too small for `m/n2 <= (m/n1)^(1+alpha)`, so candidates
    // are screened and the first one meeting the bound is used.
    let m = cert.m as f64;
    let max_ratio = (m / cert.i1.len() as f64).powf(1.0 + cert.alpha);
    let regular = |i2: &[usize]| !i2.is_empty() && m / i2.len() as f64 <= max_ratio * (1.0 + SLACK);
    let load_cut = cert.k / (8.0 * l);
    for &(j, _) in loads.iter().filter(|&&(_, lj)| ge(load_cut, lj)) {
        let i2 = light_set(j);
        if regular(&i2) {
            return Ok(RefinedSet {
                j0: j,
                i2,
                lambda: lam,
                loads,
                choice: BlockChoice::LightLoad,
            });
        }
    }
    for &(j, _) in &loads {
        let i2 = light_set(j);
        if 2 * i2.len() >= cert.blocks.size(j) && regular(&i2) {
            return Ok(RefinedSet {
                j0: j,
                i2,
                lambda: lam,
                loads,
                choice: BlockChoice::LightMajority,
            });
        }
    }
    Err(StructureError::NoLightBlock {
        min_load: loads.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
    }
    .into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Internal consistency of the certificate with `b`.
    Consistency,
    /// Conclusion (i), regularity of sizes.
    Regularity,
    /// Conclusion (ii), largeness of coefficients.
    Largeness,
    /// The literal `K/(2 l |I2|)` bound on `I2`; the size-of-block form is
    /// implied by the construction, this one only up to a factor 2.
    StrictI2,
    /// Intermediate quantities the asymptotic argument relies on; informative.
    Guarantee,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    /// Non-negative exactly when the check passes.
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub items: Vec<CheckItem>,
}

impl StructureReport {
    fn push_ge(&mut self, name: &str, kind: CheckKind, lhs: f64, rhs: f64) {
        let slack = lhs - rhs;
        self.items.push(CheckItem {
            name: name.into(),
            kind,
            lhs,
            rhs,
            slack,
            pass: slack >= -SLACK * rhs.abs().max(1.0),
        });
    }

    fn push_le(&mut self, name: &str, kind: CheckKind, lhs: f64, rhs: f64) {
        self.push_ge(name, kind, rhs, lhs);
        let it = self.items.last_mut().unwrap();
        (it.lhs, it.rhs) = (lhs, rhs);
    }

    fn push_bool(&mut self, name: &str, kind: CheckKind, ok: bool) {
        let v = if ok { 0.0 } else { -1.0 };
        self.items.push(CheckItem {
            name: name.into(),
            kind,
            lhs: v,
            rhs: 0.0,
            slack: v,
            pass: ok,
        });
    }

    pub fn item(&self, name: &str) -> Option<&CheckItem> {
        self.items.iter().find(|i| i.name == name)
    }

    /// Consistency, regularity and largeness all pass, with the block-size
    /// form of the `I2` bound.
    pub fn passes(&self) -> bool {
        self.items.iter().all(|i| {
            i.pass
                || matches!(i.kind, CheckKind::StrictI2 | CheckKind::Guarantee)
        })
    }

    /// As [`passes`](Self::passes), additionally requiring the literal `I2` bound.
    pub fn passes_strict(&self) -> bool {
        self.passes()
            && self
                .items
                .iter()
                .filter(|i| i.kind == CheckKind::StrictI2)
                .all(|i| i.pass)
    }

    pub fn failures(&self) -> Vec<&CheckItem> {
        self.items.iter().filter(|i| !i.pass).collect()
    }
}

fn min_over(idx: &[usize], f: impl Fn(usize) -> f64) -> f64 {
    idx.iter().map(|&i| f(i)).fold(f64::INFINITY, f64::min)
}

/// Re-derives every inequality of the structure conclusions from `b` and
/// `lambda` (aligned with `cert.i1`), without trusting derived fields.
pub fn check_structure(
    cert: &StructureCertificate,
    refined: &RefinedSet,
    b: &CoeffSeq,
    lambda: &CoeffSeq,
    alpha: f64,
    k: f64,
) -> StructureReport {
    use CheckKind::*;
    let mut r = StructureReport { items: Vec::new() };
    let m = b.len();
    let bv: Vec<f64> = b.values().iter().map(|v| v.abs()).collect();
    let l = cert.l as f64;
    let n1 = cert.i1.len();
    let n2 = refined.i2.len();

    let fresh = block_decompose(b).ok();
    r.push_bool("blocks match b", Consistency, fresh.as_ref() == Some(&cert.blocks) && cert.m == m);
    r.push_bool("l in [1, log m]", Consistency, cert.l >= 1 && cert.l <= log_levels(m));
    r.push_bool("J within J_bar", Consistency, cert.j.iter().all(|j| cert.j_bar.contains(j)));
    let blocks = fresh.unwrap_or_else(|| cert.blocks.clone());
    r.push_bool(
        "J_bar blocks are heavy",
        Consistency,
        cert.j_bar.iter().all(|&j| ge(blocks.mass(j), k / l)),
    );
    let mut union: Vec<usize> = cert
        .j
        .iter()
        .filter_map(|&j| blocks.block(j))
        .flat_map(|blk| blk.indices.iter().copied())
        .collect();
    union.sort_unstable();
    r.push_bool("I1 is the union of the J blocks", Consistency, union == cert.i1 && n1 > 0);
    r.push_bool(
        "I2 within I1",
        Consistency,
        refined.i2.iter().all(|i| cert.i1.binary_search(i).is_ok()),
    );
    let block0 = blocks.block(refined.j0);
    r.push_bool(
        "I2 within block j0",
        Consistency,
        cert.j.contains(&refined.j0)
            && block0.is_some_and(|blk| refined.i2.iter().all(|i| blk.indices.contains(i))),
    );
    let m_j0 = block0.map_or(0, Block::size);
    r.push_ge("|I2| >= m_j0 / 2", Consistency, n2 as f64, m_j0 as f64 / 2.0);
    r.push_bool("I2 non-empty", Consistency, n2 > 0);

    let ratio1 = m as f64 / n1.max(1) as f64;
    let ratio2 = m as f64 / n2.max(1) as f64;
    r.push_ge("2^(l/2) <= m/n1", Regularity, ratio1, 2f64.powf(l / 2.0));
    r.push_ge("m/n1 <= m/n2", Regularity, ratio2, ratio1);
    r.push_le("m/n2 <= (m/n1)^(1+alpha)", Regularity, ratio2, ratio1.powf(1.0 + alpha));

    r.push_ge(
        "b >= K/(2 l n1) on I1",
        Largeness,
        min_over(&cert.i1, |i| bv[i]),
        k / (2.0 * l * n1.max(1) as f64),
    );
    r.push_ge(
        "b >= K/(2 l m_j0) on I2",
        Largeness,
        min_over(&refined.i2, |i| bv[i]),
        k / (2.0 * l * m_j0.max(1) as f64),
    );
    let lam_at = |i: usize| {
        cert.i1
            .binary_search(&i)
            .ok()
            .and_then(|p| lambda.values().get(p))
            .map_or(f64::INFINITY, |v| v.abs())
    };
    r.push_ge(
        "b >= 2 lambda on I2",
        Largeness,
        min_over(&refined.i2, |i| bv[i] - 2.0 * lam_at(i)),
        0.0,
    );
    r.push_ge(
        "b >= K/(2 l n2) on I2",
        StrictI2,
        min_over(&refined.i2, |i| bv[i]),
        k / (2.0 * l * n2.max(1) as f64),
    );

    let ll = log_log(m);
    r.push_ge("l >= K loglog m / 5", Guarantee, l, k * ll / 5.0);
    r.push_ge("|J| >= 8 l / K", Guarantee, cert.j.len() as f64, 8.0 * l / k);
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(m: usize) -> CoeffSeq {
        CoeffSeq::new((1..=m).map(|i| 1.0 / i as f64).collect()).unwrap()
    }

    #[test]
    fn dyadic_levels_at_powers_of_two() {
        assert_eq!(dyadic_level(1.0), 1);
        assert_eq!(dyadic_level(0.5), 2);
        assert_eq!(dyadic_level(0.75), 1);
        assert_eq!(dyadic_level(0.25), 3);
        assert_eq!(dyadic_level(0.26), 2);
        assert_eq!(dyadic_level(2f64.powi(-20)), 21);
    }

    #[test]
    fn decompose_small_example() {
        let b = CoeffSeq::new(vec![1.0, 0.5, 0.25]).unwrap();
        let d = block_decompose(&b).unwrap();
        // with m = 3 the entry 1/4 sits below 1/m and is dropped
        assert_eq!(d.blocks.len(), 2);
        assert_eq!(d.block(1).unwrap().indices, vec![0]);
        assert_eq!(d.block(2).unwrap().indices, vec![1]);
        assert_eq!(d.dropped, vec![2]);
        let b = CoeffSeq::new(vec![1.0, 0.5, 0.25, 0.2, 0.1, 0.1, 0.1, 0.1]).unwrap();
        let d = block_decompose(&b).unwrap();
        assert_eq!(d.block(3).unwrap().indices, vec![2, 3]);
    }

    #[test]
    fn tiny_coefficients_all_dropped() {
        let d = block_decompose(&CoeffSeq::new(vec![0.125; 8]).unwrap()).unwrap();
        assert!(d.blocks.is_empty());
        assert_eq!(d.dropped.len(), 8);
    }

    #[test]
    fn decompose_rejects_heavy_sequences() {
        assert!(block_decompose(&CoeffSeq::new(vec![1.0, 1.0]).unwrap()).is_err());
    }

    #[test]
    fn regularize_examples() {
        let set: Vec<usize> = (1..=8).collect();
        let r = regularize(&set, 8, 1.0 - 1e-9).unwrap();
        assert!(check_regularization(&set, 8, 1.0 - 1e-9, &r));
        assert!(r.j1 >= 4 && r.j2 <= 2 * r.j1);
        let r = regularize(&[8], 8, 0.5).unwrap();
        assert_eq!((r.j1, r.j2, r.count, r.k_steps), (8, 8, 1, 1));
        assert!(check_regularization(&[8], 8, 0.5, &r));
    }

    #[test]
    fn regularize_rejects_out_of_range() {
        assert!(regularize(&[], 4, 0.5).is_err());
        assert!(regularize(&[0, 1], 4, 0.5).is_err());
        assert!(regularize(&[5], 4, 0.5).is_err());
        assert!(regularize(&[1], 4, 1.5).is_err());
    }

    #[test]
    fn harmonic_with_large_k_has_no_dominant_block() {
        let b = harmonic(1 << 16);
        let err = extract_structure(&b, &StructureParams::new(0.5, 32.0)).unwrap_err();
        assert!(matches!(err, Error::Structure(StructureError::Divergence { .. })));
        let err = extract_structure(&b, &StructureParams::unchecked(0.5, 32.0)).unwrap_err();
        assert!(matches!(err, Error::Structure(StructureError::NoDominantBlock)));
    }

    #[test]
    fn harmonic_with_desk_k_passes_checker() {
        let b = harmonic(1 << 16);
        let k = suggest_k(&b).unwrap();
        let cert = extract_structure(&b, &StructureParams::desk(0.5, k)).unwrap();
        let zero = CoeffSeq::zeros(cert.i1.len()).unwrap();
        let refined = refine_structure(&cert, &zero).unwrap();
        assert_eq!(refined.j0, cert.j[0]);
        assert_eq!(refined.i2.len(), cert.blocks.size(cert.j[0]));
        let report = check_structure(&cert, &refined, &b, &zero, 0.5, k);
        assert!(report.passes(), "{:?}", report.failures());
    }

    #[test]
    fn one_hot_fails_precondition() {
        let mut v = vec![0.0; 16];
        v[0] = 1.0;
        let err = extract_structure(&CoeffSeq::new(v).unwrap(), &StructureParams::desk(0.5, 1.0));
        assert!(matches!(
            err,
            Err(Error::Structure(StructureError::Divergence { .. }))
        ));
    }

    #[test]
    fn tampering_is_detected() {
        let b = harmonic(1 << 12);
        let k = suggest_k(&b).unwrap();
        let cert = extract_structure(&b, &StructureParams::desk(0.5, k)).unwrap();
        let zero = CoeffSeq::zeros(cert.i1.len()).unwrap();
        let refined = refine_structure(&cert, &zero).unwrap();

        let mut bad = cert.clone();
        bad.i1[0] = b.len() - 1;
        bad.i1.sort_unstable();
        let report = check_structure(&bad, &refined, &b, &zero, 0.5, k);
        assert!(!report.item("b >= K/(2 l n1) on I1").unwrap().pass);

        let mut bad = refined.clone();
        bad.i2.push(b.len() - 1);
        let report = check_structure(&cert, &bad, &b, &zero, 0.5, k);
        assert!(!report.item("I2 within I1").unwrap().pass);
        assert!(!report.passes());
    }
}
