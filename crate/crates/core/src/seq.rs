//! Finite coefficient sequences, their non-increasing rearrangement and
//! (weak) ℓp norms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-empty finite sequence of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CoeffSeq(Vec<f64>);

impl TryFrom<Vec<f64>> for CoeffSeq {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        CoeffSeq::new(v)
    }
}

impl From<CoeffSeq> for Vec<f64> {
    fn from(c: CoeffSeq) -> Self {
        c.0
    }
}

impl CoeffSeq {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::contract("coefficient sequence is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!("coefficient {i} is not finite")));
        }
        Ok(CoeffSeq(values))
    }

    pub fn zeros(m: usize) -> Result<Self> {
        Self::new(vec![0.0; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn abs(&self) -> CoeffSeq {
        CoeffSeq(self.0.iter().map(|v| v.abs()).collect())
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.linf_norm();
        }
        self.0.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn linf_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Non-increasing rearrangement of `|a|`.
///
/// Returns the sorted magnitudes together with the permutation: `perm[k]` is
/// the original index of the `k`-th largest magnitude. Ties keep their
/// original order.
pub fn rearrange_desc(a: &CoeffSeq) -> (CoeffSeq, Vec<usize>) {
    let mut perm: Vec<usize> = (0..a.len()).collect();
    let v = a.values();
    perm.sort_by(|&i, &j| v[j].abs().total_cmp(&v[i].abs()));
    let sorted = perm.iter().map(|&i| v[i].abs()).collect();
    (CoeffSeq(sorted), perm)
}

/// Weak ℓp norm `max_i a*_i · i^{1/p}`; for a finite sequence this is the
/// exact infimum of admissible constants.
pub fn weak_lp_norm(a: &CoeffSeq, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::contract(format!("weak lp norm needs p >= 1, got {p}")));
    }
    let (sorted, _) = rearrange_desc(a);
    Ok(sorted
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| v * ((k + 1) as f64).powf(1.0 / p))
        .fold(0.0, f64::max))
}

/// `‖a‖_{1,∞} = max_i i · a*_i`
pub fn weak_l1_norm(a: &CoeffSeq) -> f64 {
    weak_lp_norm(a, 1.0).expect("p = 1 is valid")
}

/// Both sides of the order-statistics inequality
/// `Σ λ_i a_i ≤ (1/K) Σ_{i≤K} |a|*_i`, valid whenever `‖λ‖₁ ≤ 1` and
/// `‖λ‖_∞ ≤ 1/K`.
pub fn order_stat_bound(lambda: &CoeffSeq, a: &CoeffSeq, k: usize) -> Result<(f64, f64)> {
    const SLACK: f64 = 1e-12;
    if k == 0 {
        return Err(Error::contract("K must be at least 1"));
    }
    if lambda.len() != a.len() {
        return Err(Error::contract(format!(
            "length mismatch: lambda has {}, a has {}",
            lambda.len(),
            a.len()
        )));
    }
    if lambda.l1_norm() > 1.0 + SLACK {
        return Err(Error::contract(format!(
            "‖λ‖₁ = {} exceeds 1",
            lambda.l1_norm()
        )));
    }
    if lambda.linf_norm() > 1.0 / k as f64 + SLACK {
        return Err(Error::contract(format!(
            "‖λ‖_∞ = {} exceeds 1/K = {}",
            lambda.linf_norm(),
            1.0 / k as f64
        )));
    }
    let lhs = lambda
        .values()
        .iter()
        .zip(a.values())
        .map(|(l, x)| l * x)
        .sum();
    let (sorted, _) = rearrange_desc(a);
    let rhs = sorted.values().iter().take(k).sum::<f64>() / k as f64;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(v: &[f64]) -> CoeffSeq {
        CoeffSeq::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rearrangement_examples() {
        let (s, perm) = rearrange_desc(&seq(&[1.0, -3.0, 2.0]));
        assert_eq!(s.values(), &[3.0, 2.0, 1.0]);
        assert_eq!(perm, vec![1, 2, 0]);
        let (s, perm) = rearrange_desc(&seq(&[0.0, 0.0, 0.0]));
        assert_eq!(s.values(), &[0.0, 0.0, 0.0]);
        assert_eq!(perm, vec![0, 1, 2]);
    }

    #[test]
    fn weak_norm_examples() {
        let h = seq(&[1.0, 0.5, 1.0 / 3.0, 0.25]);
        assert!((weak_lp_norm(&h, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((weak_lp_norm(&seq(&[1.0; 4]), 2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(weak_lp_norm(&h, 0.5).is_err());
    }

    #[test]
    fn order_stat_examples() {
        let (l, r) =
            order_stat_bound(&seq(&[0.5, 0.5, 0.0]), &seq(&[4.0, 3.0, 1.0]), 2).unwrap();
        assert_eq!((l, r), (3.5, 3.5));
        let t = 1.0 / 3.0;
        let (l, r) = order_stat_bound(&seq(&[t, t, t]), &seq(&[1.0, 1.0, 1.0]), 3).unwrap();
        assert!((l - 1.0).abs() < 1e-15 && (r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn order_stat_rejects_bad_lambda() {
        assert!(order_stat_bound(&seq(&[0.6, 0.6]), &seq(&[1.0, 1.0]), 1).is_err());
        assert!(order_stat_bound(&seq(&[0.6, 0.1]), &seq(&[1.0, 1.0]), 2).is_err());
        assert!(order_stat_bound(&seq(&[0.1]), &seq(&[1.0, 1.0]), 1).is_err());
    }

    #[test]
    fn empty_and_nonfinite_rejected() {
        assert!(CoeffSeq::new(vec![]).is_err());
        assert!(CoeffSeq::new(vec![f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn rearrangement_is_sorted_permutation(v in prop::collection::vec(-1e3f64..1e3, 1..40)) {
            let a = seq(&v);
            let (s, perm) = rearrange_desc(&a);
            prop_assert!(s.values().windows(2).all(|w| w[0] >= w[1]));
            let mut p = perm.clone();
            p.sort();
            prop_assert_eq!(p, (0..v.len()).collect::<Vec<_>>());
            for (k, &i) in perm.iter().enumerate() {
                prop_assert_eq!(s.values()[k], v[i].abs());
            }
        }

        #[test]
        fn weak_lp_below_lp(v in prop::collection::vec(-1e3f64..1e3, 1..40), p in 1.0f64..6.0) {
            let a = seq(&v);
            prop_assert!(weak_lp_norm(&a, p).unwrap() <= a.lp_norm(p) * (1.0 + 1e-12) + 1e-300);
        }
    }
}
