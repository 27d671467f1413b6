use covest::seq::weak_l1_norm;
use covest::structure::{
    block_decompose, check_structure, extract_structure, refine_structure, regularize, suggest_k,
    StructureParams,
};
use covest::CoeffSeq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Postconditions of the regularization step, checked from scratch.
fn regularization_holds(set: &[usize], big_l: usize, alpha: f64, j1: usize, j2: usize) -> bool {
    let l = set.len();
    let j0 = set[l.div_ceil(2) - 1] as f64;
    let mut k_steps = 1;
    while j0 * (1.0 + alpha).powi(k_steps as i32) < big_l as f64 {
        k_steps += 1;
    }
    let count = set.iter().filter(|&&j| j >= j1 && j <= j2).count();
    set.contains(&j1)
        && set.contains(&j2)
        && 2 * j1 >= l
        && j1 <= j2
        && j2 as f64 <= (1.0 + alpha) * j1 as f64 + 1e-12
        && 3 * k_steps * count >= l
}

#[test]
fn regularization_exhaustive_small() {
    for big_l in 1..=10usize {
        for mask in 1u32..(1 << big_l) {
            let set: Vec<usize> = (1..=big_l).filter(|j| mask & (1 << (j - 1)) != 0).collect();
            for alpha in [0.1, 0.5, 0.9, 1.0] {
                let r = regularize(&set, big_l, alpha).unwrap();
                assert!(
                    regularization_holds(&set, big_l, alpha, r.j1, r.j2),
                    "L={big_l} J={set:?} alpha={alpha}: {r:?}"
                );
            }
        }
    }
}

#[test]
fn regularization_examples() {
    let set: Vec<usize> = (1..=8).collect();
    let r = regularize(&set, 8, 1.0).unwrap();
    assert!(r.j1 >= 4 && r.j2 <= 2 * r.j1);
    let r = regularize(&[8], 8, 0.5).unwrap();
    assert_eq!((r.j1, r.j2, r.count), (8, 8, 1));
}

fn fuzzed(seed: u64) -> CoeffSeq {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 1usize << rng.random_range(6..=14);
    let mut v: Vec<f64> = (1..=m)
        .map(|i| rng.random_range(0.5..1.0) / i as f64)
        .collect();
    let w = weak_l1_norm(&CoeffSeq::new(v.clone()).unwrap());
    v.iter_mut().for_each(|x| *x /= w);
    CoeffSeq::new(v).unwrap()
}

#[test]
fn fuzzed_certificates_pass_the_checker() {
    for seed in 0..60 {
        let b = fuzzed(seed);
        let k = suggest_k(&b).unwrap();
        let params = StructureParams::desk(0.5, k);
        let cert = extract_structure(&b, &params).unwrap();
        let n1 = cert.i1.len();
        let zero = CoeffSeq::zeros(n1).unwrap();
        let refined = refine_structure(&cert, &zero).unwrap();
        assert_eq!(refined.i2.len(), cert.blocks.size(refined.j0));
        let report = check_structure(&cert, &refined, &b, &zero, 0.5, k);
        assert!(report.passes(), "seed {seed}: {:?}", report.failures());

        // Any refinement that is emitted for other weights must also pass.
        let uniform = CoeffSeq::new(vec![1.0 / n1 as f64; n1]).unwrap();
        if let Ok(refined) = refine_structure(&cert, &uniform) {
            let report = check_structure(&cert, &refined, &b, &uniform, 0.5, k);
            assert!(report.passes(), "seed {seed}: {:?}", report.failures());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn blocks_partition_the_kept_indices(v in prop::collection::vec(0.0f64..1.0, 4..300)) {
        let m = v.len();
        let mut b = v;
        let w = weak_l1_norm(&CoeffSeq::new(b.clone()).unwrap()).max(1e-300);
        b.iter_mut().for_each(|x| *x /= w);
        let seq = CoeffSeq::new(b.clone()).unwrap();
        let d = block_decompose(&seq).unwrap();
        let mut seen = vec![false; m];
        for blk in &d.blocks {
            for &i in &blk.indices {
                prop_assert!(!seen[i]);
                seen[i] = true;
                let lo = 2f64.powi(-(blk.j as i32));
                prop_assert!(b[i] > lo && b[i] <= 2.0 * lo);
            }
        }
        for i in 0..m {
            prop_assert!(seen[i] || b[i] <= 1.0 / m as f64 || d.dropped.contains(&i));
        }
    }
}
