//! Dense symmetric matrices and their extreme spectrum.
//!
//! The hot path is power iteration: sweeps evaluate operator norms thousands
//! of times and only ever need the extreme pair of eigenvalues.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Relative tolerance on `|a_ij - a_ji|` accepted as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

const MAX_POWER_ITERATIONS: usize = 200_000;

/// A real symmetric matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat(DMatrix<f64>);

impl SymMat {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::contract(format!(
                "matrix is {}x{}, not square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::contract("matrix has dimension 0"));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("matrix has non-finite entries"));
        }
        let scale = m.amax().max(1.0);
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::contract(format!(
                        "matrix is not symmetric at ({i},{j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        Ok(SymMat(m))
    }

    /// Symmetrizes `m` as `(m + m^T)/2` without checking.
    pub fn symmetrize(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        SymMat((m + t) * 0.5)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::contract("rows do not form a square matrix"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        SymMat(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        SymMat(DMatrix::zeros(n, n))
    }

    pub fn diag(d: &[f64]) -> Self {
        SymMat(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.0.row(i).iter().copied().collect())
            .collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    pub fn sub(&self, other: &SymMat) -> Result<SymMat> {
        if self.dim() != other.dim() {
            return Err(Error::contract(format!(
                "shape mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(SymMat(&self.0 - &other.0))
    }

    pub fn scaled(&self, s: f64) -> SymMat {
        SymMat(&self.0 * s)
    }

    /// `self + c I`
    pub fn shifted(&self, c: f64) -> SymMat {
        let mut m = self.0.clone();
        for i in 0..self.dim() {
            m[(i, i)] += c;
        }
        SymMat(m)
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        v.dot(&(&self.0 * &v))
    }

    /// All eigenvalues, ascending, from a full decomposition.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `self^{-1/2}` for a positive definite matrix.
    ///
    /// Fails with [`Error::RankDeficient`] when some eigenvalue is below
    /// `rel_tol` times the largest.
    pub fn inverse_sqrt(&self, rel_tol: f64) -> Result<SymMat> {
        let eig = SymmetricEigen::new(self.0.clone());
        let top = eig.eigenvalues.amax();
        let rank = eig
            .eigenvalues
            .iter()
            .filter(|&&v| v > rel_tol * top)
            .count();
        if top <= 0.0 || rank < self.dim() {
            return Err(Error::RankDeficient {
                rank,
                dim: self.dim(),
            });
        }
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()));
        let q = &eig.eigenvectors;
        Ok(SymMat::symmetrize(q * d * q.transpose()))
    }
}

#[derive(Debug, Clone, Copy)]
struct PowerOutcome {
    value: f64,
    iterations: usize,
    converged: bool,
    gap: f64,
}

/// Power iteration estimating the largest `|eigenvalue|` of `a` as `|A x_k|`.
///
/// `|A x_k|` is the Rayleigh quotient of `A^2` at `x_k`; it increases
/// monotonically and its increments shrink geometrically, so the remaining
/// error is extrapolated from two consecutive increments.
fn power_magnitude(a: &DMatrix<f64>, tol: f64, max_iter: usize, seed: u64) -> PowerOutcome {
    let n = a.nrows();
    let mut rng = rng_from_seed(seed);
    let mut x = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
    x /= x.norm();
    let mut y = a * &x;
    let mut mu = y.norm();
    let mut prev_delta = f64::INFINITY;
    let mut confirmations = 0;
    let mut gap = f64::INFINITY;
    for it in 1..=max_iter {
        if mu == 0.0 {
            return PowerOutcome {
                value: 0.0,
                iterations: it,
                converged: true,
                gap: 0.0,
            };
        }
        x = &y / mu;
        y = a * &x;
        let next = y.norm();
        let delta = (next - mu).abs();
        mu = next;
        let ratio = delta / prev_delta;
        gap = if delta == 0.0 {
            0.0
        } else if ratio < 1.0 {
            delta * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        prev_delta = delta;
        if gap <= tol * mu || delta <= 4.0 * f64::EPSILON * mu {
            confirmations += 1;
            if confirmations >= 3 {
                return PowerOutcome {
                    value: mu,
                    iterations: it,
                    converged: true,
                    gap,
                };
            }
        } else {
            confirmations = 0;
        }
    }
    PowerOutcome {
        value: mu,
        iterations: max_iter,
        converged: false,
        gap,
    }
}

fn start_seed(n: usize, salt: u64) -> u64 {
    0x5eed_0000_0000_0000 ^ ((n as u64) << 8) ^ salt
}

/// Operator norm `max |eigenvalue|` to relative accuracy `tol`.
///
/// Plain power iteration first; if it stagnates, falls back to two shifted
/// runs that isolate the top and bottom of the spectrum separately.
pub fn op_norm(a: &SymMat, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::contract("tol must be positive"));
    }
    if a.dim() == 1 {
        return Ok(a.get(0, 0).abs());
    }
    if a.frobenius() == 0.0 {
        return Ok(0.0);
    }
    let out = power_magnitude(a.matrix(), tol, MAX_POWER_ITERATIONS, start_seed(a.dim(), 0));
    if out.converged {
        return Ok(out.value);
    }
    // Shift-and-restart: a fresh start on each end of the spectrum.
    let c = a.frobenius();
    let top = power_magnitude(a.shifted(c).matrix(), tol / 2.0, MAX_POWER_ITERATIONS, start_seed(a.dim(), 1));
    let bottom = power_magnitude(
        a.scaled(-1.0).shifted(c).matrix(),
        tol / 2.0,
        MAX_POWER_ITERATIONS,
        start_seed(a.dim(), 2),
    );
    let best = (top.value - c).abs().max((c - bottom.value).abs()).max(out.value);
    if top.converged && bottom.converged {
        Ok(best)
    } else {
        Err(Error::NonConvergence {
            best,
            gap: out.gap,
            iterations: out.iterations + top.iterations + bottom.iterations,
        })
    }
}

/// Algebraically largest and smallest eigenvalues `(λ_max, λ_min)`, each to
/// absolute accuracy `tol · ‖A‖`.
pub fn extreme_eigs(a: &SymMat, tol: f64) -> Result<(f64, f64)> {
    if a.dim() == 1 {
        let v = a.get(0, 0);
        return Ok((v, v));
    }
    let norm = op_norm(a, tol)?;
    if norm == 0.0 {
        return Ok((0.0, 0.0));
    }
    // Slightly over-shift: the norm estimate approaches from below.
    let c = norm * (1.0 + 1e-3);
    let upper = a.shifted(c);
    let lower = a.scaled(-1.0).shifted(c);
    let mut results = [0.0; 2];
    for (slot, (m, salt)) in [(&upper, 3u64), (&lower, 4u64)].into_iter().enumerate() {
        let out = power_magnitude(m.matrix(), tol / 2.0, MAX_POWER_ITERATIONS, start_seed(a.dim(), salt));
        if !out.converged {
            return Err(Error::NonConvergence {
                best: out.value - c,
                gap: out.gap,
                iterations: out.iterations,
            });
        }
        results[slot] = out.value;
    }
    Ok((results[0] - c, c - results[1]))
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn dist2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_norm_is_one() {
        assert!((op_norm(&SymMat::identity(5), 1e-12).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_norm_picks_largest_magnitude() {
        let a = SymMat::diag(&[3.0, -5.0]);
        assert!((op_norm(&a, 1e-12).unwrap() - 5.0).abs() < 1e-10);
    }

    #[test]
    fn plus_minus_pair_is_resolved() {
        let a = SymMat::diag(&[3.0, -3.0, 1.0]);
        assert!((op_norm(&a, 1e-12).unwrap() - 3.0).abs() < 1e-10);
        let (hi, lo) = extreme_eigs(&a, 1e-12).unwrap();
        assert!((hi - 3.0).abs() < 1e-9 && (lo + 3.0).abs() < 1e-9);
    }

    #[test]
    fn extreme_eigs_on_diagonals() {
        let (hi, lo) = extreme_eigs(&SymMat::diag(&[1.0, 2.0, 3.0]), 1e-12).unwrap();
        assert!((hi - 3.0).abs() < 1e-9 && (lo - 1.0).abs() < 1e-9);
        let (hi, lo) = extreme_eigs(&SymMat::identity(4).scaled(-1.0), 1e-12).unwrap();
        assert!((hi + 1.0).abs() < 1e-9 && (lo + 1.0).abs() < 1e-9);
    }

    #[test]
    fn one_by_one_is_analytic() {
        let a = SymMat::diag(&[-2.5]);
        assert_eq!(op_norm(&a, 1e-9).unwrap(), 2.5);
        assert_eq!(extreme_eigs(&a, 1e-9).unwrap(), (-2.5, -2.5));
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(SymMat::new(m), Err(Error::Contract(_))));
    }

    #[test]
    fn inverse_sqrt_reports_rank() {
        let a = SymMat::diag(&[1.0, 0.0, 4.0]);
        match a.inverse_sqrt(1e-12) {
            Err(Error::RankDeficient { rank, dim }) => assert_eq!((rank, dim), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        let s = SymMat::diag(&[4.0, 9.0]).inverse_sqrt(1e-12).unwrap();
        assert!((s.get(0, 0) - 0.5).abs() < 1e-14 && (s.get(1, 1) - 1.0 / 3.0).abs() < 1e-14);
    }
}
