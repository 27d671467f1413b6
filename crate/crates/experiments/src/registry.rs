//! Named experiments behind a common trait.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::{ExperimentError, Result};
use crate::experiments;
use crate::output::ResultRow;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub experiment: String,
    pub rows: Vec<ResultRow>,
    pub summary: Value,
    pub warnings: Vec<String>,
}

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    /// The configuration used when none is supplied.
    fn default_config(&self) -> ExperimentConfig;
    fn run(&self, cfg: &ExperimentConfig) -> Result<ExperimentOutput>;
}

pub struct Registry {
    experiments: BTreeMap<&'static str, Box<dyn Experiment>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            experiments: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(experiments::scaling::Scaling));
        r.register(Box::new(experiments::frame::FrameSubsample));
        r.register(Box::new(experiments::coupon::Coupon));
        r.register(Box::new(experiments::baiyin::BaiYin));
        r.register(Box::new(experiments::structure_demo::StructureDemo));
        r.register(Box::new(experiments::decouple_demo::DecoupleDemo));
        r.register(Box::new(experiments::truncation::Truncation));
        r
    }

    pub fn register(&mut self, e: Box<dyn Experiment>) {
        self.experiments.insert(e.name(), e);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.experiments.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn Experiment> {
        self.experiments
            .get(name)
            .map(|e| e.as_ref())
            .ok_or_else(|| ExperimentError::config(format!("unknown experiment {name}")))
    }

    /// Runs `cfg` with the experiment it names (or `default`).
    pub fn run(&self, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
        let name = cfg
            .experiment
            .as_deref()
            .ok_or_else(|| ExperimentError::config("config does not name an experiment"))?;
        self.get(name)?.run(cfg)
    }
}

/// One independent unit of work in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trial {
    pub n: usize,
    pub big_n: usize,
    pub trial: usize,
    pub seed: u64,
}

impl Trial {
    pub fn row(&self, experiment: &str, metric: &str, value: f64) -> ResultRow {
        ResultRow::new(experiment, self.n, self.big_n, self.trial, self.seed, metric, value)
    }
}

/// Trials for every `(n, N)` pair, seeded by `hash(master, experiment, n, N, trial)`.
pub fn trials_for(experiment: &str, master: u64, pairs: &[(usize, usize)], trials: usize) -> Vec<Trial> {
    pairs
        .iter()
        .flat_map(|&(n, big_n)| {
            (0..trials).map(move |t| Trial {
                n,
                big_n,
                trial: t,
                seed: covest::rng::trial_seed(master, experiment, n as u64, big_n as u64, t as u64),
            })
        })
        .collect()
}

/// Runs trials in parallel; rows come back sorted by `(n, N, trial)` with
/// each trial's metrics in emission order.
pub fn run_trials<F>(trials: &[Trial], f: F) -> Result<Vec<ResultRow>>
where
    F: Fn(&Trial) -> Result<Vec<ResultRow>> + Sync,
{
    let chunks: Vec<Vec<ResultRow>> = trials.par_iter().map(&f).collect::<Result<_>>()?;
    let mut rows: Vec<ResultRow> = chunks.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.n, r.big_n, r.trial));
    Ok(rows)
}
