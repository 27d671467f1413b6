pub mod baiyin;
pub mod coupon;
pub mod decouple_demo;
pub mod frame;
pub mod scaling;
pub mod structure_demo;
pub mod truncation;

use crate::config::ExperimentConfig;
use crate::error::Result;

/// `(n, N)` pairs from `grid.N` and `grid.ratio`; pairs with `N < n` are
/// dropped with a warning.
pub(crate) fn size_pairs(cfg: &ExperimentConfig, warnings: &mut Vec<String>) -> Result<Vec<(usize, usize)>> {
    crate::config::require_nonempty(&cfg.grid.n, "n")?;
    if cfg.grid.big_n.is_empty() && cfg.grid.ratio.is_empty() {
        return Err(crate::ExperimentError::config("grid needs N or ratio values"));
    }
    let mut pairs = Vec::new();
    for &n in &cfg.grid.n {
        if n == 0 {
            return Err(crate::ExperimentError::config("dimensions must be positive"));
        }
        let sizes = cfg.grid.big_n.iter().copied().chain(cfg.grid.ratio.iter().map(|r| r * n));
        for big_n in sizes {
            if big_n < n {
                warnings.push(format!("skipping n={n}, N={big_n}: need N ≥ n"));
            } else if !pairs.contains(&(n, big_n)) {
                pairs.push((n, big_n));
            }
        }
    }
    Ok(pairs)
}
