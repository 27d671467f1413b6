//! Undersampling a discrete distribution: below `n log n` samples some
//! basis direction is usually never drawn and the error is at least 1.

use covest::covariance::{estimation_error, sample_covariance, SampleSet};
use covest::{extreme_eigs, SymMat, VectorModel};
use serde_json::json;

use crate::config::{require_nonempty, ExperimentConfig, Grid};
use crate::error::Result;
use crate::fit::median;
use crate::registry::{run_trials, trials_for, Experiment, ExperimentOutput};

pub struct Coupon;

/// Errors within this distance of 1 count as "at least 1": a missing
/// direction gives exactly 1 up to rounding.
pub const ERROR_ONE_SLACK: f64 = 1e-9;

pub fn coupon_threshold(n: usize) -> usize {
    (4.0 * n as f64 * (n as f64).ln()).ceil() as usize
}

impl Experiment for Coupon {
    fn name(&self) -> &'static str {
        "coupon"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            grid: Grid {
                n: vec![64],
                big_n: vec![64, coupon_threshold(64)],
                ..Grid::default()
            },
            trials: 200,
            master_seed: 1,
            ..ExperimentConfig::new(self.name())
        }
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
        cfg.validate_common()?;
        require_nonempty(&cfg.grid.n, "n")?;
        require_nonempty(&cfg.grid.big_n, "N")?;
        let pairs: Vec<(usize, usize)> = cfg
            .grid
            .n
            .iter()
            .flat_map(|&n| cfg.grid.big_n.iter().map(move |&m| (n, m)))
            .collect();
        if pairs.iter().any(|&(n, m)| n == 0 || m == 0) {
            return Err(crate::ExperimentError::config("n and N must be positive"));
        }
        let name = self.name();
        let trials = trials_for(name, cfg.master_seed, &pairs, cfg.trials);
        let rows = run_trials(&trials, |t| {
            let s = SampleSet::draw(&VectorModel::basis(t.n), t.big_n, t.seed)?;
            let cov = sample_covariance(&s);
            let err = estimation_error(&cov, &SymMat::identity(t.n))?;
            let (_, lo) = extreme_eigs(&cov, 1e-12)?;
            Ok(vec![
                t.row(name, "error", err),
                t.row(name, "missing", if lo < 1e-9 { 1.0 } else { 0.0 }),
            ])
        })?;
        let summary: Vec<_> = pairs
            .iter()
            .map(|&(n, big_n)| {
                let of = |metric: &str| -> Vec<f64> {
                    rows.iter()
                        .filter(|r| r.n == n && r.big_n == big_n && r.metric == metric)
                        .map(|r| r.value)
                        .collect()
                };
                let mut errors = of("error");
                let k = errors.len() as f64;
                let ge1 = errors.iter().filter(|&&e| e >= 1.0 - ERROR_ONE_SLACK).count() as f64 / k;
                let missing = of("missing").iter().sum::<f64>() / k;
                json!({
                    "n": n,
                    "N": big_n,
                    "p_error_ge_1": ge1,
                    "p_missing": missing,
                    "median_error": median(&mut errors),
                    "union_bound_missing": (n as f64 * (1.0 - 1.0 / n as f64).powi(big_n as i32)).min(1.0),
                })
            })
            .collect();
        Ok(ExperimentOutput {
            experiment: name.into(),
            rows,
            summary: json!({ "cells": summary }),
            warnings: Vec::new(),
        })
    }
}
