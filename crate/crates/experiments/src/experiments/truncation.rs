//! The three-term truncation split against the measured error.

use covest::covariance::{estimation_error, sample_covariance, truncation_split_at, SampleSet};
use covest::{SymMat, VectorModel};
use serde_json::json;

use super::size_pairs;
use crate::config::{ExperimentConfig, Grid};
use crate::error::{ExperimentError, Result};
use crate::fit::{median, quantile};
use crate::registry::{run_trials, trials_for, Experiment, ExperimentOutput};

pub struct Truncation;

impl Experiment for Truncation {
    fn name(&self) -> &'static str {
        "truncation"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            grid: Grid {
                n: vec![8],
                big_n: vec![512, 2048],
                ..Grid::default()
            },
            trials: 20,
            master_seed: 1,
            ..ExperimentConfig::new(self.name())
        }
        .with_model(VectorModel::gaussian(8))
        .with_param("q", 8.0)
        .with_param("t", 1.0)
        .with_param("n_directions", 16)
        .with_param("resamples", 20_000)
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
        cfg.validate_common()?;
        let q = match cfg.param_opt_f64("q")? {
            Some(q) => q,
            None => cfg.model()?.q.unwrap_or(8.0),
        };
        if !(q > 4.0 && q.is_finite()) {
            return Err(ExperimentError::config(format!("truncation needs finite q > 4, got {q}")));
        }
        let t_param = cfg.param_f64("t", 1.0)?;
        let n_directions = cfg.param_usize("n_directions", 16)?;
        let resamples = cfg.param_usize("resamples", 20_000)?;
        let level = cfg.param_opt_f64("B")?;
        let mut warnings = Vec::new();
        let pairs = size_pairs(cfg, &mut warnings)?;
        if let Some(&(n, _)) = pairs.iter().find(|p| p.0 < 4) {
            return Err(ExperimentError::config(format!("truncation needs n ≥ 4, got {n}")));
        }
        let name = self.name();
        let trials = trials_for(name, cfg.master_seed, &pairs, cfg.trials);
        let rows = run_trials(&trials, |t| {
            let s = SampleSet::draw(&cfg.model_in_dim(t.n)?, t.big_n, t.seed)?;
            let b = level.unwrap_or_else(|| (t.big_n as f64 / t.n as f64).powf(2.0 / q));
            let rep = truncation_split_at(&s, b, q, t_param, n_directions, resamples, t.seed)?;
            let err = estimation_error(&sample_covariance(&s), &SymMat::identity(t.n))?;
            Ok(vec![
                t.row(name, "B", rep.b),
                t.row(name, "I1", rep.i1_term),
                t.row(name, "I2", rep.i2_term),
                t.row(name, "I3", rep.i3_term),
                t.row(name, "I3_bound", rep.i3_bound),
                t.row(name, "total", rep.total()),
                t.row(name, "error", err),
                t.row(name, "ratio", err / rep.total()),
            ])
        })?;
        let cells: Vec<_> = pairs
            .iter()
            .map(|&(n, big_n)| {
                let of = |metric: &str| -> Vec<f64> {
                    rows.iter()
                        .filter(|r| r.n == n && r.big_n == big_n && r.metric == metric)
                        .map(|r| r.value)
                        .collect()
                };
                let mut ratio = of("ratio");
                json!({
                    "n": n,
                    "N": big_n,
                    "median_error": median(&mut of("error")),
                    "median_total": median(&mut of("total")),
                    "median_I3_over_bound": median(
                        &mut of("I3").iter().zip(of("I3_bound")).map(|(a, b)| a / b).collect::<Vec<_>>()
                    ),
                    "constant_p90": quantile(&mut ratio, 0.9),
                })
            })
            .collect();
        Ok(ExperimentOutput {
            experiment: name.into(),
            rows,
            summary: json!({ "q": q, "cells": cells }),
            warnings,
        })
    }
}
