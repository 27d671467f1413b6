//! Structure extraction on fuzzed divergent sequences, and on a single
//! user-supplied sequence for the `structure` subcommand.

use covest::rng::{rng_from_seed, SeedHasher};
use covest::seq::{weak_l1_norm, CoeffSeq};
use covest::structure::{
    check_structure, extract_structure, refine_structure, suggest_k, RefinedSet,
    StructureCertificate, StructureError, StructureParams, StructureReport,
};
use covest::Error as CoreError;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{require_nonempty, ExperimentConfig, Grid};
use crate::error::{ExperimentError, Result};
use crate::output::ResultRow;
use crate::registry::{run_trials, Experiment, ExperimentOutput, Trial};

pub struct StructureDemo;

pub const DEFAULT_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeqFamily {
    /// `U[1/2, 1] / i`
    HarmonicNoise,
    /// Harmonic noise with a random fraction of entries zeroed.
    SparseHarmonic,
    /// Constant runs filling a random subset of dyadic levels.
    Blocky,
    /// `i^{-s}` with `s ∈ [0.8, 1]`.
    Power,
}

pub const SEQ_FAMILIES: [SeqFamily; 4] = [
    SeqFamily::HarmonicNoise,
    SeqFamily::SparseHarmonic,
    SeqFamily::Blocky,
    SeqFamily::Power,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFamily {
    Zero,
    Uniform,
    /// Half the mass on one index, the rest spread uniformly.
    Concentrated,
    /// Normalized exponentials.
    Dirichlet,
}

pub const WEIGHT_FAMILIES: [WeightFamily; 4] = [
    WeightFamily::Zero,
    WeightFamily::Uniform,
    WeightFamily::Concentrated,
    WeightFamily::Dirichlet,
];

impl WeightFamily {
    pub fn name(self) -> &'static str {
        match self {
            WeightFamily::Zero => "zero",
            WeightFamily::Uniform => "uniform",
            WeightFamily::Concentrated => "concentrated",
            WeightFamily::Dirichlet => "dirichlet",
        }
    }
}

/// A shuffled sequence of length `m` with weak ℓ₁ norm exactly 1.
pub fn fuzz_sequence(family: SeqFamily, m: usize, seed: u64) -> Result<CoeffSeq> {
    let mut rng = rng_from_seed(seed);
    let mut v: Vec<f64> = match family {
        SeqFamily::HarmonicNoise => (1..=m).map(|i| rng.random_range(0.5..1.0) / i as f64).collect(),
        SeqFamily::SparseHarmonic => {
            let keep = rng.random_range(0.3..0.9);
            (1..=m)
                .map(|i| {
                    if rng.random_bool(keep) {
                        rng.random_range(0.5..1.0) / i as f64
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        SeqFamily::Blocky => {
            let levels = covest::structure::log_levels(m);
            let mut v = Vec::with_capacity(m);
            for j in 1..=levels {
                if rng.random_bool(0.6) {
                    let count = ((1usize << (j - 1)) as f64 * rng.random_range(0.25..1.0)).ceil() as usize;
                    let value = 1.5 * 2f64.powi(-(j as i32));
                    v.extend(std::iter::repeat_n(value, count.min(m - v.len())));
                }
            }
            v.resize(m, 0.0);
            v
        }
        SeqFamily::Power => {
            let s = rng.random_range(0.8..1.0);
            (1..=m).map(|i| (i as f64).powf(-s)).collect()
        }
    };
    v.shuffle(&mut rng);
    let w = weak_l1_norm(&CoeffSeq::new(v.clone())?);
    if w > 0.0 {
        v.iter_mut().for_each(|x| *x /= w);
    }
    Ok(CoeffSeq::new(v)?)
}

/// Weights on `n1` indices with ℓ₁ norm at most 1.
pub fn fuzz_weights(family: WeightFamily, n1: usize, seed: u64) -> Result<CoeffSeq> {
    let mut rng = rng_from_seed(seed);
    let v = match family {
        WeightFamily::Zero => vec![0.0; n1],
        WeightFamily::Uniform => vec![1.0 / n1 as f64; n1],
        WeightFamily::Concentrated => {
            let mut v = vec![0.5 / n1 as f64; n1];
            v[rng.random_range(0..n1)] += 0.5;
            v
        }
        WeightFamily::Dirichlet => {
            let e: Vec<f64> = (0..n1).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let s: f64 = e.iter().sum();
            e.into_iter().map(|x| x / s).collect()
        }
    };
    Ok(CoeffSeq::new(v)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementOutcome {
    pub weights: WeightFamily,
    /// `None` when no block of `I1` was light enough.
    pub refined: Option<RefinedSet>,
    pub report: Option<StructureReport>,
}

impl RefinementOutcome {
    /// Emitted refinements must pass; declining to refine is allowed.
    pub fn sound(&self) -> bool {
        self.report.as_ref().is_none_or(|r| r.passes())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureCase {
    pub m: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub certificate: StructureCertificate,
    pub outcomes: Vec<RefinementOutcome>,
}

impl StructureCase {
    /// Every emitted refinement passes and the zero weights refine.
    pub fn passes(&self) -> bool {
        self.outcomes.iter().all(|o| o.sound())
            && self
                .outcomes
                .iter()
                .any(|o| o.weights == WeightFamily::Zero && o.report.is_some())
    }

    pub fn passes_strict(&self) -> bool {
        self.passes() && self.outcomes.iter().filter_map(|o| o.report.as_ref()).all(|r| r.passes_strict())
    }
}

/// Extracts structure from `b` with `K = max_j j B*_j` and refines it for
/// each weight family.
///
/// `Ok(None)` means `b` fails the divergence precondition; every other
/// extraction failure is an error.
pub fn run_case(b: &CoeffSeq, alpha: f64, weights: &[WeightFamily], seed: u64) -> Result<Option<StructureCase>> {
    let k = suggest_k(b)?;
    if k <= 0.0 {
        return Ok(None);
    }
    let cert = match extract_structure(b, &StructureParams::desk(alpha, k)) {
        Ok(c) => c,
        Err(CoreError::Structure(StructureError::Divergence { .. } | StructureError::KTooSmall { .. })) => {
            return Ok(None)
        }
        Err(e) => return Err(e.into()),
    };
    let n1 = cert.i1.len();
    let mut outcomes = Vec::with_capacity(weights.len());
    for &w in weights {
        let lambda = fuzz_weights(w, n1, SeedHasher::new().u64(seed).str(w.name()).finish())?;
        let (refined, report) = match refine_structure(&cert, &lambda) {
            Ok(r) => {
                let report = check_structure(&cert, &r, b, &lambda, alpha, k);
                (Some(r), Some(report))
            }
            Err(CoreError::Structure(StructureError::NoLightBlock { .. })) => (None, None),
            Err(e) => return Err(e.into()),
        };
        outcomes.push(RefinementOutcome {
            weights: w,
            refined,
            report,
        });
    }
    Ok(Some(StructureCase {
        m: b.len(),
        k,
        certificate: cert,
        outcomes,
    }))
}

/// Input of the `structure` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureInput {
    pub b: Vec<f64>,
    /// Weights aligned with `I1`; zeros when absent.
    #[serde(default)]
    pub lambda: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(rename = "K", default)]
    pub k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureOutput {
    pub certificate: StructureCertificate,
    pub refined: RefinedSet,
    pub report: StructureReport,
    pub passes: bool,
    pub passes_strict: bool,
}

/// Certifies one sequence.
pub fn certify(input: &StructureInput) -> Result<StructureOutput> {
    let b = CoeffSeq::new(input.b.clone()).map_err(|e| ExperimentError::config(e.to_string()))?;
    let alpha = input.alpha.unwrap_or(DEFAULT_ALPHA);
    let k = match input.k {
        Some(k) => k,
        None => suggest_k(&b).map_err(|e| ExperimentError::config(e.to_string()))?,
    };
    let cert = extract_structure(&b, &StructureParams::desk(alpha, k))?;
    let lambda = match &input.lambda {
        Some(l) => CoeffSeq::new(l.clone()).map_err(|e| ExperimentError::config(e.to_string()))?,
        None => CoeffSeq::zeros(cert.i1.len())?,
    };
    let refined = refine_structure(&cert, &lambda)?;
    let report = check_structure(&cert, &refined, &b, &lambda, alpha, k);
    Ok(StructureOutput {
        passes: report.passes(),
        passes_strict: report.passes_strict(),
        certificate: cert,
        refined,
        report,
    })
}

fn family_for(trial: usize) -> SeqFamily {
    SEQ_FAMILIES[trial % SEQ_FAMILIES.len()]
}

impl Experiment for StructureDemo {
    fn name(&self) -> &'static str {
        "structure_demo"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            grid: Grid {
                m: vec![256, 4096, 65536],
                ..Grid::default()
            },
            trials: 40,
            master_seed: 1,
            ..ExperimentConfig::new(self.name())
        }
        .with_param("alpha", DEFAULT_ALPHA)
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
        cfg.validate_common()?;
        let alpha = cfg.param_f64("alpha", DEFAULT_ALPHA)?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ExperimentError::config(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let name = self.name();
        if let Some(b) = cfg.params.get("b") {
            let input = StructureInput {
                b: serde_json::from_value(b.clone())?,
                lambda: cfg.params.get("lambda").map(|v| serde_json::from_value(v.clone())).transpose()?,
                alpha: Some(alpha),
                k: cfg.param_opt_f64("K")?,
            };
            let out = certify(&input)?;
            let m = input.b.len();
            let t = Trial {
                n: m,
                big_n: m,
                trial: 0,
                seed: cfg.master_seed,
            };
            let rows = vec![
                t.row(name, "l", out.certificate.l as f64),
                t.row(name, "n1", out.certificate.i1.len() as f64),
                t.row(name, "n2", out.refined.i2.len() as f64),
                t.row(name, "pass", out.passes as u8 as f64),
                t.row(name, "pass_strict", out.passes_strict as u8 as f64),
            ];
            return Ok(ExperimentOutput {
                experiment: name.into(),
                rows,
                summary: serde_json::to_value(&out)?,
                warnings: Vec::new(),
            });
        }

        require_nonempty(&cfg.grid.m, "M")?;
        if let Some(&m) = cfg.grid.m.iter().find(|&&m| m < 4) {
            return Err(ExperimentError::config(format!("sequence length must be at least 4, got {m}")));
        }
        let mut trials = Vec::new();
        for &m in &cfg.grid.m {
            for t in 0..cfg.trials {
                let seed = covest::rng::trial_seed(cfg.master_seed, name, m as u64, m as u64, t as u64);
                trials.push(Trial { n: m, big_n: m, trial: t, seed });
            }
        }
        let rows = run_trials(&trials, |t| {
            let b = fuzz_sequence(family_for(t.trial), t.n, t.seed)?;
            let case = run_case(&b, alpha, &WEIGHT_FAMILIES, t.seed)?;
            let mut rows = vec![t.row(name, "admissible", case.is_some() as u8 as f64)];
            let Some(case) = case else { return Ok(rows) };
            rows.push(t.row(name, "K", case.k));
            rows.push(t.row(name, "l", case.certificate.l as f64));
            rows.push(t.row(name, "n1", case.certificate.i1.len() as f64));
            for o in &case.outcomes {
                let w = o.weights.name();
                rows.push(t.row(name, &format!("refined_{w}"), o.refined.is_some() as u8 as f64));
                if let Some(r) = &o.report {
                    rows.push(t.row(name, &format!("pass_{w}"), r.passes() as u8 as f64));
                    rows.push(t.row(name, &format!("pass_strict_{w}"), r.passes_strict() as u8 as f64));
                }
            }
            rows.push(t.row(name, "pass", case.passes() as u8 as f64));
            Ok(rows)
        })?;
        Ok(ExperimentOutput {
            experiment: name.into(),
            summary: summarize(&rows),
            rows,
            warnings: Vec::new(),
        })
    }
}

fn summarize(rows: &[ResultRow]) -> serde_json::Value {
    let total = |metric: &str| -> (usize, f64) {
        let v: Vec<f64> = rows.iter().filter(|r| r.metric == metric).map(|r| r.value).collect();
        (v.len(), v.iter().sum())
    };
    let (n, admissible) = total("admissible");
    let (cases, passed) = total("pass");
    let mut per_weights = serde_json::Map::new();
    for w in WEIGHT_FAMILIES {
        let (tried, refined) = total(&format!("refined_{}", w.name()));
        let (emitted, pass) = total(&format!("pass_{}", w.name()));
        let (_, strict) = total(&format!("pass_strict_{}", w.name()));
        per_weights.insert(
            w.name().into(),
            json!({
                "refine_rate": refined / tried.max(1) as f64,
                "pass_rate": pass / emitted.max(1) as f64,
                "strict_pass_rate": strict / emitted.max(1) as f64,
            }),
        );
    }
    json!({
        "sequences": n,
        "admissible": admissible,
        "cases": cases,
        "pass_rate": passed / cases.max(1) as f64,
        "weights": per_weights,
    })
}
