//! Extreme eigenvalues of the sample covariance at fixed aspect ratio.

use covest::covariance::{sample_covariance, SampleSet};
use covest::VectorModel;
use serde_json::json;

use crate::config::{require_nonempty, ExperimentConfig, Grid};
use crate::error::{ExperimentError, Result};
use crate::fit::median;
use crate::registry::{run_trials, Experiment, ExperimentOutput, Trial};

pub struct BaiYin;

/// `((1 + √β)², (1 - √β)²)`
pub fn edges(beta: f64) -> (f64, f64) {
    let s = beta.sqrt();
    ((1.0 + s).powi(2), (1.0 - s).powi(2))
}

pub fn dimension(beta: f64, big_n: usize) -> usize {
    (beta * big_n as f64).ceil() as usize
}

impl Experiment for BaiYin {
    fn name(&self) -> &'static str {
        "baiyin"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            grid: Grid {
                big_n: vec![2000],
                beta: vec![0.1, 0.25],
                ..Grid::default()
            },
            trials: 50,
            master_seed: 1,
            ..ExperimentConfig::new(self.name())
        }
        .with_model(VectorModel::gaussian(1))
        .with_param("tolerance", 0.15)
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
        cfg.validate_common()?;
        require_nonempty(&cfg.grid.beta, "beta")?;
        require_nonempty(&cfg.grid.big_n, "N")?;
        let tol = cfg.param_f64("tolerance", 0.15)?;
        if let Some(&b) = cfg.grid.beta.iter().find(|&&b| !(b > 0.0 && b <= 1.0)) {
            return Err(ExperimentError::config(format!("beta must lie in (0, 1], got {b}")));
        }
        let name = self.name();
        let mut trials = Vec::new();
        for &big_n in &cfg.grid.big_n {
            for &beta in &cfg.grid.beta {
                let n = dimension(beta, big_n);
                for t in 0..cfg.trials {
                    let seed = covest::rng::trial_seed(cfg.master_seed, name, n as u64, big_n as u64, t as u64);
                    trials.push(Trial { n, big_n, trial: t, seed });
                }
            }
        }
        let rows = run_trials(&trials, |t| {
            let s = SampleSet::draw(&cfg.model_in_dim(t.n)?, t.big_n, t.seed)?;
            let eig = sample_covariance(&s).eigenvalues();
            let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(vec![t.row(name, "lambda_max", hi), t.row(name, "lambda_min", lo)])
        })?;

        let q = cfg.model()?.q.filter(|&q| q > 4.0);
        let mut cells = Vec::new();
        for &big_n in &cfg.grid.big_n {
            for &beta in &cfg.grid.beta {
                let n = dimension(beta, big_n);
                let (e_hi, e_lo) = edges(beta);
                let of = |metric: &str| -> Vec<f64> {
                    rows.iter()
                        .filter(|r| r.n == n && r.big_n == big_n && r.metric == metric)
                        .map(|r| r.value)
                        .collect()
                };
                let (mut his, mut los) = (of("lambda_max"), of("lambda_min"));
                let within = his
                    .iter()
                    .zip(&los)
                    .filter(|(h, l)| (*h - e_hi).abs() <= tol && (*l - e_lo).abs() <= tol)
                    .count() as f64
                    / his.len() as f64;
                // Heavy tails: fit `C` in `1 ± C loglog n β^{1/2-2/q}` on the
                // first half of the seeds and test coverage on the rest.
                let envelope = q.filter(|_| n >= 4).map(|q| {
                    let shape = (n as f64).log2().log2() * beta.powf(0.5 - 2.0 / q);
                    let dev: Vec<f64> = his
                        .iter()
                        .zip(&los)
                        .map(|(h, l)| (h - 1.0).max(1.0 - l) / shape)
                        .collect();
                    let half = dev.len().div_ceil(2);
                    let c = dev[..half].iter().cloned().fold(0.0, f64::max);
                    let held_out = &dev[half..];
                    let covered = if held_out.is_empty() {
                        1.0
                    } else {
                        held_out.iter().filter(|&&d| d <= c).count() as f64 / held_out.len() as f64
                    };
                    json!({"q": q, "fitted_constant": c, "held_out_coverage": covered})
                });
                cells.push(json!({
                    "beta": beta,
                    "n": n,
                    "N": big_n,
                    "edge_max": e_hi,
                    "edge_min": e_lo,
                    "median_lambda_max": median(&mut his),
                    "median_lambda_min": median(&mut los),
                    "fraction_within_tolerance": within,
                    "tolerance": tol,
                    "heavy_tail_envelope": envelope,
                }));
            }
        }
        Ok(ExperimentOutput {
            experiment: name.into(),
            rows,
            summary: json!({ "cells": cells }),
            warnings: Vec::new(),
        })
    }
}
