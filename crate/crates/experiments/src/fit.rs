//! Power-law fits on log-log scale.

use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, Result};
use crate::output::ResultRow;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(x, median y)` per distinct `x`.
    pub points: Vec<(f64, f64)>,
    /// Rows dropped for non-positive `y`.
    pub excluded: usize,
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

/// `q`-quantile by linear interpolation between order statistics.
pub fn quantile(values: &mut [f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of nothing");
    values.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    values[lo] + (pos - lo as f64) * (values[hi] - values[lo])
}

/// Least squares of `log₂ y` on `log₂ x` over per-`x` medians.
pub fn fit_log2(samples: &[(f64, f64)]) -> Result<Fit> {
    let mut excluded = 0;
    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for &(x, y) in samples {
        if !(y > 0.0) || !(x > 0.0) {
            excluded += 1;
            continue;
        }
        match groups.iter_mut().find(|g| g.0 == x) {
            Some(g) => g.1.push(y),
            None => groups.push((x, vec![y])),
        }
    }
    if groups.len() < 2 {
        return Err(ExperimentError::config(format!(
            "an exponent fit needs at least 2 distinct x values with positive y, got {}",
            groups.len()
        )));
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    let points: Vec<(f64, f64)> = groups.into_iter().map(|(x, mut ys)| (x, median(&mut ys))).collect();
    let lx: Vec<f64> = points.iter().map(|p| p.0.log2()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.log2()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(Fit {
        slope,
        intercept,
        r_squared,
        points,
        excluded,
    })
}

/// Fits `metric` against a row field: `n`, `N`, `n/N` or `N/n`.
pub fn fit_exponent(rows: &[ResultRow], x_field: &str, metric: &str) -> Result<Fit> {
    let x_of = |r: &ResultRow| -> Result<f64> {
        let (n, big_n) = (r.n as f64, r.big_n as f64);
        Ok(match x_field {
            "n" => n,
            "N" => big_n,
            "n/N" => n / big_n,
            "N/n" => big_n / n,
            other => return Err(ExperimentError::config(format!("unknown fit field {other}"))),
        })
    };
    let samples = rows
        .iter()
        .filter(|r| r.metric == metric)
        .map(|r| Ok((x_of(r)?, r.value)))
        .collect::<Result<Vec<_>>>()?;
    fit_log2(&samples)
}
