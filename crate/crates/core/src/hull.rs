//! Minimum-norm point of the convex hull of finitely many points.
//!
//! The solver is Wolfe's active-set refinement of Gilbert's descent: each
//! major step adds the vertex minimizing `<u_i, v>` (the Frank–Wolfe vertex),
//! and minor steps project onto the affine hull of the active set, dropping
//! vertices whose weight would turn negative. It stops on the duality gap
//! `‖v‖² - min_i <u_i, v>`, which is exactly the first-order certificate of
//! optimality over the hull.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinNormPoint {
    pub v: Vec<f64>,
    /// Convex weights, one per input point.
    pub lambda: Vec<f64>,
    /// `‖v‖² - min_i <u_i, v>` at the returned iterate.
    pub gap: f64,
    pub iterations: usize,
}

impl MinNormPoint {
    pub fn norm(&self) -> f64 {
        dot(&self.v, &self.v).sqrt()
    }
}

/// Weights below this are treated as leaving the active set.
const WEIGHT_EPS: f64 = 1e-14;

pub fn min_norm_point(points: &[Vec<f64>], tol: f64, max_iter: usize) -> Result<MinNormPoint> {
    if points.is_empty() {
        return Err(Error::contract("min_norm_point needs at least one point"));
    }
    if !(tol > 0.0) {
        return Err(Error::contract(format!("tol must be positive, got {tol}")));
    }
    let dim = points[0].len();
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(Error::contract("points must share a positive dimension"));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::contract("points must be finite"));
    }

    let start = (0..points.len())
        .min_by(|&i, &j| dot(&points[i], &points[i]).total_cmp(&dot(&points[j], &points[j])))
        .unwrap();
    let mut active: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut v = points[start].clone();
    let mut best: Option<MinNormPoint> = None;

    for it in 1..=max_iter {
        let (j, gap) = fw_vertex(points, &v);
        let candidate = assemble(points.len(), &active, &weights, &v, gap, it);
        let improved = best.as_ref().is_none_or(|b| gap < b.gap);
        if gap <= tol {
            return Ok(candidate);
        }
        if improved {
            best = Some(candidate);
        }
        if active.contains(&j) {
            // Affine minimizer already optimal over its face yet the gap is
            // not closed: numerical stall. Restart the face from the best
            // single vertex and the violating vertex.
            active = vec![j];
            weights = vec![1.0];
            v = points[j].clone();
            continue;
        }
        active.push(j);
        weights.push(0.0);

        // minor cycle
        loop {
            let alpha = affine_minimizer(points, &active);
            if alpha.iter().all(|&a| a > WEIGHT_EPS) {
                weights = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (w, a) in weights.iter().zip(&alpha) {
                if *a <= WEIGHT_EPS && w - a > 0.0 {
                    theta = theta.min(w / (w - a));
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w += theta * (a - *w);
            }
            // drop at least the vertex that hit zero
            let drop = (0..weights.len())
                .min_by(|&a, &b| weights[a].total_cmp(&weights[b]))
                .unwrap();
            let keep: Vec<bool> = (0..weights.len())
                .map(|k| k != drop && weights[k] > WEIGHT_EPS)
                .collect();
            let mut it_keep = keep.iter();
            active.retain(|_| *it_keep.next().unwrap());
            let mut it_keep = keep.iter();
            weights.retain(|_| *it_keep.next().unwrap());
            if active.is_empty() {
                active = vec![j];
                weights = vec![1.0];
                break;
            }
            let s: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= s);
            if active.len() == 1 {
                break;
            }
        }
        v = combine(points, &active, &weights, dim);
    }

    let (_, gap) = fw_vertex(points, &v);
    let last = assemble(points.len(), &active, &weights, &v, gap, max_iter);
    let best = match best {
        Some(b) if b.gap < last.gap => b,
        _ => last,
    };
    Err(Error::MinNormNonConvergence {
        gap: best.gap,
        iterations: max_iter,
        best: Box::new(best),
    })
}

fn fw_vertex(points: &[Vec<f64>], v: &[f64]) -> (usize, f64) {
    let vv = dot(v, v);
    let (j, m) = points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, dot(p, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    (j, vv - m)
}

fn combine(points: &[Vec<f64>], active: &[usize], weights: &[f64], dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for (&i, &w) in active.iter().zip(weights) {
        for (vk, pk) in v.iter_mut().zip(&points[i]) {
            *vk += w * pk;
        }
    }
    v
}

fn assemble(
    m: usize,
    active: &[usize],
    weights: &[f64],
    v: &[f64],
    gap: f64,
    iterations: usize,
) -> MinNormPoint {
    let mut lambda = vec![0.0; m];
    for (&i, &w) in active.iter().zip(weights) {
        lambda[i] += w;
    }
    MinNormPoint {
        v: v.to_vec(),
        lambda,
        gap,
        iterations,
    }
}

/// Weights (summing to one) of the minimum-norm point of the affine hull of
/// the active points, via least squares on differences to the first point.
fn affine_minimizer(points: &[Vec<f64>], active: &[usize]) -> Vec<f64> {
    let k = active.len();
    if k == 1 {
        return vec![1.0];
    }
    let dim = points[0].len();
    let p0 = &points[active[0]];
    let d = DMatrix::from_fn(dim, k - 1, |r, c| points[active[c + 1]][r] - p0[r]);
    let rhs = DVector::from_fn(dim, |r, _| -p0[r]);
    let svd = d.svd(true, true);
    let cutoff = svd.singular_values.max() * 1e-13 * (dim.max(k) as f64);
    let beta = svd
        .solve(&rhs, cutoff)
        .unwrap_or_else(|_| DVector::zeros(k - 1));
    let mut alpha = Vec::with_capacity(k);
    alpha.push(1.0 - beta.sum());
    alpha.extend(beta.iter());
    alpha
}
