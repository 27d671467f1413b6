//! Decoupling on near-duplicate instances, and on a single instance file
//! for the `decouple` subcommand.

use covest::decoupling::instances::{near_duplicate_family, Instance};
use covest::decoupling::{check_decoupling, decouple, DecouplingFailure, DecouplingReport};
use covest::{DecouplingCertificate, DecouplingParams, Error as CoreError};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{ExperimentConfig, Grid};
use crate::error::{ExperimentError, Result};
use crate::registry::{run_trials, Experiment, ExperimentOutput, Trial};

pub struct DecoupleDemo;

/// Numeric failure codes used in the `failure` metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success = 0,
    Hypothesis = 1,
    Largeness = 2,
    NoWitness = 3,
    Selection = 4,
    NonConvergence = 5,
}

impl Outcome {
    /// Classifies a failed run; errors that are not expected failure modes
    /// of the algorithm are passed through.
    fn classify(e: CoreError) -> std::result::Result<Outcome, CoreError> {
        match e {
            CoreError::Decoupling(f) => Ok(match f {
                DecouplingFailure::Hypothesis(_) => Outcome::Hypothesis,
                DecouplingFailure::PreconditionLargeness(_) => Outcome::Largeness,
                DecouplingFailure::NoWitness { .. } => Outcome::NoWitness,
                DecouplingFailure::SelectionFailed { .. } => Outcome::Selection,
            }),
            e if e.is_non_convergence() => Ok(Outcome::NonConvergence),
            e => Err(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    pub m: usize,
    pub duplicates: usize,
    pub noise: f64,
    pub noise_rank: usize,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            n: 32,
            m: 256,
            duplicates: 200,
            noise: 1e-3,
            noise_rank: 2,
        }
    }
}

impl InstanceSpec {
    fn validate(&self) -> Result<()> {
        if self.n < 2 || self.m < 4 || self.duplicates > self.m || self.noise_rank == 0 || self.noise_rank >= self.n {
            return Err(ExperimentError::config(format!(
                "instance needs n ≥ 2, m ≥ 4, duplicates ≤ m and 1 ≤ noise_rank < n, got {self:?}"
            )));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(ExperimentError::config("noise must be finite and non-negative"));
        }
        Ok(())
    }

    pub fn build(&self, seed: u64) -> Instance {
        near_duplicate_family(self.n, self.m, self.duplicates, self.noise, self.noise_rank, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoupleRun {
    pub outcome: Outcome,
    pub message: Option<String>,
    pub certificate: Option<DecouplingCertificate>,
    pub report: Option<DecouplingReport>,
}

/// Runs and independently audits one instance. An emitted certificate that
/// fails the audit is an error, never a result.
pub fn run_instance(inst: &Instance, params: &DecouplingParams, seed: u64) -> Result<DecoupleRun> {
    if inst.vectors.is_empty() {
        return Err(ExperimentError::config("instance has no vectors"));
    }
    match decouple(&inst.vectors, &inst.x, params, seed) {
        Ok(cert) => {
            let report = check_decoupling(&cert, &inst.vectors, params);
            if !report.passes() {
                return Err(ExperimentError::Audit(report.render()));
            }
            Ok(DecoupleRun {
                outcome: Outcome::Success,
                message: None,
                certificate: Some(cert),
                report: Some(report),
            })
        }
        Err(e) => {
            let message = e.to_string();
            let outcome = Outcome::classify(e)?;
            Ok(DecoupleRun {
                outcome,
                message: Some(message),
                certificate: None,
                report: None,
            })
        }
    }
}

/// Parameters for an instance: `N` from the instance when present,
/// otherwise `m`; `overrides` is merged over the defaults.
pub fn params_for(inst: &Instance, overrides: Option<&serde_json::Value>) -> Result<DecouplingParams> {
    let mut p = DecouplingParams::new(inst.big_n.unwrap_or(inst.vectors.len()));
    if let Some(o) = overrides {
        let mut base = serde_json::to_value(&p)?;
        let (Some(b), Some(o)) = (base.as_object_mut(), o.as_object()) else {
            return Err(ExperimentError::config("decoupling params must be a JSON object"));
        };
        for (k, v) in o {
            if !b.contains_key(k) {
                return Err(ExperimentError::config(format!("unknown decoupling parameter {k}")));
            }
            b.insert(k.clone(), v.clone());
        }
        p = serde_json::from_value(base).map_err(|e| ExperimentError::config(e.to_string()))?;
        if !o.contains_key("C_alpha_prime") {
            p.c_alpha_prime = p.c_alpha / p.alpha;
        }
    }
    p.validate(inst.vectors.len()).map_err(|e| ExperimentError::config(e.to_string()))?;
    Ok(p)
}

impl Experiment for DecoupleDemo {
    fn name(&self) -> &'static str {
        "decouple_demo"
    }

    fn default_config(&self) -> ExperimentConfig {
        let spec = InstanceSpec::default();
        ExperimentConfig {
            grid: Grid {
                n: vec![spec.n],
                big_n: vec![spec.m],
                ..Grid::default()
            },
            trials: 100,
            master_seed: 1,
            ..ExperimentConfig::new(self.name())
        }
        .with_param("duplicates", spec.duplicates)
        .with_param("noise", spec.noise)
        .with_param("noise_rank", spec.noise_rank)
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
        cfg.validate_common()?;
        crate::config::require_nonempty(&cfg.grid.n, "n")?;
        crate::config::require_nonempty(&cfg.grid.big_n, "N")?;
        let defaults = InstanceSpec::default();
        let duplicates = cfg.param_usize("duplicates", defaults.duplicates)?;
        let noise = cfg.param_f64("noise", defaults.noise)?;
        let noise_rank = cfg.param_usize("noise_rank", defaults.noise_rank)?;
        let overrides = cfg.params.get("decoupling");
        let name = self.name();
        let mut pairs = Vec::new();
        for &n in &cfg.grid.n {
            for &m in &cfg.grid.big_n {
                let spec = InstanceSpec {
                    n,
                    m,
                    duplicates: duplicates.min(m),
                    noise,
                    noise_rank,
                };
                spec.validate()?;
                pairs.push((n, m));
            }
        }
        let trials = crate::registry::trials_for(name, cfg.master_seed, &pairs, cfg.trials);
        let rows = run_trials(&trials, |t: &Trial| {
            let spec = InstanceSpec {
                n: t.n,
                m: t.big_n,
                duplicates: duplicates.min(t.big_n),
                noise,
                noise_rank,
            };
            let inst = spec.build(t.seed);
            let params = params_for(&inst, overrides)?;
            let run = run_instance(&inst, &params, t.seed)?;
            let mut rows = vec![
                t.row(name, "success", (run.outcome == Outcome::Success) as u8 as f64),
                t.row(name, "failure", run.outcome as u8 as f64),
            ];
            if let (Some(c), Some(r)) = (&run.certificate, &run.report) {
                rows.push(t.row(name, "attempts", c.diagnostics.attempts as f64));
                rows.push(t.row(name, "audit_pass", r.passes() as u8 as f64));
                rows.push(t.row(name, "i_size", c.i.len() as f64));
                rows.push(t.row(name, "j_size", c.j.len() as f64));
            }
            Ok(rows)
        })?;
        let mut cells = Vec::new();
        for &(n, m) in &pairs {
            let of = |metric: &str| -> Vec<f64> {
                rows.iter()
                    .filter(|r| r.n == n && r.big_n == m && r.metric == metric)
                    .map(|r| r.value)
                    .collect()
            };
            let success = of("success");
            let failures = of("failure");
            let count = |code: Outcome| failures.iter().filter(|&&f| f == code as u8 as f64).count();
            cells.push(json!({
                "n": n,
                "m": m,
                "success_rate": success.iter().sum::<f64>() / success.len() as f64,
                "audit_failures": of("audit_pass").iter().filter(|&&p| p == 0.0).count(),
                "failures": {
                    "hypothesis": count(Outcome::Hypothesis),
                    "largeness": count(Outcome::Largeness),
                    "no_witness": count(Outcome::NoWitness),
                    "selection": count(Outcome::Selection),
                    "non_convergence": count(Outcome::NonConvergence),
                },
            }));
        }
        Ok(ExperimentOutput {
            experiment: name.into(),
            rows,
            summary: json!({ "cells": cells }),
            warnings: Vec::new(),
        })
    }
}
