use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{op_norm, SymMat};

/// Points `x_1..x_M` in `R^n` with `(1/M) Σ x_j x_jᵀ = I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub points: Vec<Vec<f64>>,
}

impl Frame {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// `{√n e_i}`, tight by construction and with exact norms.
    pub fn scaled_basis(n: usize) -> Frame {
        let s = (n as f64).sqrt();
        Frame {
            points: (0..n)
                .map(|i| {
                    let mut v = vec![0.0; n];
                    v[i] = s;
                    v
                })
                .collect(),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.points
            .iter()
            .map(|p| crate::linalg::norm2(p))
            .fold(0.0, f64::max)
    }
}

/// `(1/M) Σ x xᵀ` for a list of points of common dimension.
pub fn second_moment(points: &[Vec<f64>], m_effective: f64) -> Result<SymMat> {
    let n = points
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::contract("empty point list"))?;
    if n == 0 || points.iter().any(|p| p.len() != n) {
        return Err(Error::contract("points must share a positive dimension"));
    }
    let x = nalgebra::DMatrix::from_fn(points.len(), n, |i, j| points[i][j]);
    Ok(SymMat::symmetrize(x.tr_mul(&x) / m_effective))
}

/// Whitens `raw` into a tight frame: `x ↦ S^{-1/2} x` with `S = (1/M) Σ x xᵀ`.
pub fn make_tight_frame(raw: &[Vec<f64>]) -> Result<Frame> {
    let s = second_moment(raw, raw.len() as f64)?;
    let n = s.dim();
    if raw.len() < n {
        return Err(Error::RankDeficient {
            rank: raw.len(),
            dim: n,
        });
    }
    let mut points = whiten(raw, &s.inverse_sqrt(1e-12)?);
    // One polishing pass removes the rounding left by the eigensolver.
    let s2 = second_moment(&points, points.len() as f64)?;
    points = whiten(&points, &s2.inverse_sqrt(1e-12)?);
    Ok(Frame { points })
}

fn whiten(points: &[Vec<f64>], w: &SymMat) -> Vec<Vec<f64>> {
    let n = w.dim();
    points
        .iter()
        .map(|p| {
            (0..n)
                .map(|i| (0..n).map(|j| w.get(i, j) * p[j]).sum())
                .collect()
        })
        .collect()
}

/// `‖(1/M_eff) Σ x xᵀ - I‖` over the given subset.
pub fn parseval_defect(subset: &[Vec<f64>], m_effective: usize) -> Result<f64> {
    if m_effective == 0 {
        return Err(Error::contract("effective frame size must be positive"));
    }
    let s = second_moment(subset, m_effective as f64)?;
    op_norm(&s.shifted(-1.0), 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_tight() {
        let raw: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let f = make_tight_frame(&raw).unwrap();
        assert!(parseval_defect(&f.points, 3).unwrap() < 1e-12);
        assert!((f.points[0][0] - 3f64.sqrt()).abs() < 1e-12);
        assert!(parseval_defect(&Frame::scaled_basis(5).points, 5).unwrap() < 1e-15);
    }

    #[test]
    fn rank_deficient_reports_rank() {
        let raw = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]];
        match make_tight_frame(&raw) {
            Err(Error::RankDeficient { rank, dim }) => assert_eq!((rank, dim), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_direction_has_defect_at_least_one() {
        let f = Frame::scaled_basis(4);
        assert!(parseval_defect(&f.points[1..], 4).unwrap() >= 1.0 - 1e-12);
    }
}
