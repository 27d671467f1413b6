//! ε-nets of the unit sphere built by greedy maximal packing, and the
//! net-based two-sided estimate of a symmetric operator norm.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist2, SymMat};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetStop {
    /// The rejection streak reached its target: the packing is very likely maximal.
    RejectionStreak,
    /// `max_points` were kept.
    MaxPoints,
    /// The candidate budget ran out before the streak target.
    Budget,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsNet {
    pub eps: f64,
    pub ambient_dim: usize,
    pub points: Vec<Vec<f64>>,
    /// Consecutive rejected candidates when construction stopped.
    pub final_streak: usize,
    pub candidates_drawn: usize,
    pub stop: NetStop,
}

impl EpsNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True unless the rejection streak target was reached.
    pub fn incomplete(&self) -> bool {
        self.stop != NetStop::RejectionStreak
    }

    /// Smallest pairwise distance (infinite for fewer than two points).
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                best = best.min(dist2(&self.points[i], &self.points[j]));
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NetConfig {
    /// Stop once this many consecutive candidates per kept point were rejected.
    pub streak_factor: usize,
    /// Hard cap on candidates drawn.
    pub max_candidates: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            streak_factor: 50,
            max_candidates: 20_000_000,
        }
    }
}

pub fn epsilon_net(n: usize, eps: f64, seed: u64, max_points: usize) -> Result<EpsNet> {
    epsilon_net_with(n, eps, seed, max_points, NetConfig::default())
}

/// Greedy packing: uniform candidates on `S^{n-1}`, each kept iff it is
/// farther than `eps` from every kept point.
pub fn epsilon_net_with(
    n: usize,
    eps: f64,
    seed: u64,
    max_points: usize,
    cfg: NetConfig,
) -> Result<EpsNet> {
    if n == 0 {
        return Err(Error::contract("net dimension must be at least 1"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::contract(format!("eps must lie in (0,1), got {eps}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut streak = 0usize;
    let mut drawn = 0usize;
    let stop = loop {
        if points.len() >= max_points {
            break NetStop::MaxPoints;
        }
        if !points.is_empty() && streak >= cfg.streak_factor * points.len() {
            break NetStop::RejectionStreak;
        }
        if drawn >= cfg.max_candidates {
            break NetStop::Budget;
        }
        drawn += 1;
        let cand = loop {
            let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let r = crate::linalg::norm2(&v);
            if r > 1e-12 {
                break v.into_iter().map(|x| x / r).collect::<Vec<_>>();
            }
        };
        if points.iter().all(|p| dist2(p, &cand) > eps) {
            points.push(cand);
            streak = 0;
        } else {
            streak += 1;
        }
    };
    Ok(EpsNet {
        eps,
        ambient_dim: n,
        points,
        final_streak: streak,
        candidates_drawn: drawn,
        stop,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetNormEstimate {
    /// `max_{x ∈ net} |<Ax, x>|`, always a lower bound on `‖A‖`.
    pub lower: f64,
    /// `(1 - 2ε)^{-1} · lower`; an upper bound when the net covers the sphere.
    pub certified_upper: f64,
    /// False when coverage was not established (incomplete net or dimension
    /// above 3, where covering is not grid-checked); the upper value is then
    /// only heuristic.
    pub upper_is_certified: bool,
}

pub fn net_norm_estimate(a: &SymMat, net: &EpsNet) -> Result<NetNormEstimate> {
    if !(net.eps < 0.5) {
        return Err(Error::contract(format!(
            "net eps must be below 1/2, got {}",
            net.eps
        )));
    }
    if net.ambient_dim != a.dim() {
        return Err(Error::contract("net and matrix dimensions differ"));
    }
    let lower = net
        .points
        .iter()
        .map(|x| a.quadratic_form(x).abs())
        .fold(0.0, f64::max);
    Ok(NetNormEstimate {
        lower,
        certified_upper: lower / (1.0 - 2.0 * net.eps),
        upper_is_certified: !net.incomplete() && net.ambient_dim <= 3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sphere_net_is_both_signs() {
        let net = epsilon_net(1, 0.5, 3, 100).unwrap();
        let mut pts: Vec<f64> = net.points.iter().map(|p| p[0]).collect();
        pts.sort_by(f64::total_cmp);
        assert_eq!(pts, vec![-1.0, 1.0]);
        assert!(!net.incomplete());
    }

    #[test]
    fn identity_estimate() {
        let net = epsilon_net(3, 0.25, 1, 10_000).unwrap();
        let est = net_norm_estimate(&SymMat::identity(3), &net).unwrap();
        assert!((est.lower - 1.0).abs() < 1e-12);
        assert!((est.certified_upper - 2.0 * est.lower).abs() < 1e-12);
    }

    #[test]
    fn rejects_coarse_nets() {
        let net = epsilon_net(2, 0.6, 1, 100).unwrap();
        assert!(net_norm_estimate(&SymMat::identity(2), &net).is_err());
        assert!(epsilon_net(2, 1.0, 1, 10).is_err());
    }

    #[test]
    fn max_points_and_budget_flag_incomplete() {
        let net = epsilon_net(5, 0.1, 1, 7).unwrap();
        assert_eq!(net.len(), 7);
        assert!(net.incomplete());
        let cfg = NetConfig {
            streak_factor: 50,
            max_candidates: 100,
        };
        let net = epsilon_net_with(12, 0.2, 1, usize::MAX, cfg).unwrap();
        assert_eq!(net.stop, NetStop::Budget);
    }
}
