//! Random subsets of a tight frame stay nearly tight, whatever the frame size.

use covest::distributions::{parseval_defect, sample};
use covest::rng::SeedHasher;
use covest::VectorModel;
use serde_json::json;

use crate::config::{require_nonempty, ExperimentConfig, Grid};
use crate::error::{ExperimentError, Result};
use crate::fit::median;
use crate::output::ResultRow;
use crate::registry::{run_trials, Experiment, ExperimentOutput, Trial};

pub struct FrameSubsample;

pub fn metric_name(m: usize) -> String {
    format!("defect_M{m}")
}

impl Experiment for FrameSubsample {
    fn name(&self) -> &'static str {
        "frame"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            grid: Grid {
                n: vec![16],
                big_n: vec![256],
                m: vec![32, 128, 512],
                ..Grid::default()
            },
            trials: 100,
            master_seed: 1,
            ..ExperimentConfig::new(self.name())
        }
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
        cfg.validate_common()?;
        require_nonempty(&cfg.grid.n, "n")?;
        require_nonempty(&cfg.grid.big_n, "N")?;
        require_nonempty(&cfg.grid.m, "M")?;
        let name = self.name();
        let mut jobs = Vec::new();
        for &n in &cfg.grid.n {
            for &m in &cfg.grid.m {
                if m < n {
                    return Err(ExperimentError::config(format!("frame size M={m} is below n={n}")));
                }
                let frame_seed = SeedHasher::new().u64(cfg.master_seed).str("frame").u64(n as u64).u64(m as u64).finish();
                let model = VectorModel::gaussian_frame(n, m, frame_seed);
                for &big_n in &cfg.grid.big_n {
                    for t in 0..cfg.trials {
                        let tag = format!("{name}/M{m}");
                        let seed = covest::rng::trial_seed(cfg.master_seed, &tag, n as u64, big_n as u64, t as u64);
                        jobs.push((m, model.clone(), Trial { n, big_n, trial: t, seed }));
                    }
                }
            }
        }
        let trials: Vec<Trial> = jobs.iter().map(|j| j.2).collect();
        let rows = run_trials(&trials, |t| {
            let (m, model, _) = jobs.iter().find(|j| j.2 == *t).expect("trial comes from the job list");
            let sub = sample(model, t.big_n, t.seed)?;
            let d = parseval_defect(&sub, t.big_n)?;
            Ok(vec![ResultRow::new(name, t.n, t.big_n, t.trial, t.seed, &metric_name(*m), d)])
        })?;
        let mut cells = Vec::new();
        for &n in &cfg.grid.n {
            for &big_n in &cfg.grid.big_n {
                let mut meds = Vec::new();
                for &m in &cfg.grid.m {
                    let metric = metric_name(m);
                    let mut v: Vec<f64> = rows
                        .iter()
                        .filter(|r| r.n == n && r.big_n == big_n && r.metric == metric)
                        .map(|r| r.value)
                        .collect();
                    meds.push(json!({"M": m, "median_defect": median(&mut v)}));
                }
                let vals: Vec<f64> = meds.iter().map(|v| v["median_defect"].as_f64().unwrap()).collect();
                let spread = vals.iter().cloned().fold(0.0, f64::max) / vals.iter().cloned().fold(f64::INFINITY, f64::min);
                cells.push(json!({"n": n, "N": big_n, "medians": meds, "max_over_min": spread}));
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
