use covest::covariance::{
    large_coeff_set, orthogonality_profile, sample_covariance, subset_norm_sweep, truncation_split_at,
    weak_l2_profile, SampleSet,
};
use covest::distributions::random_unit;
use covest::rng::rng_from_seed;
use covest::sampleio;
use covest::{extreme_eigs, op_norm, SymMat, VectorModel};
use proptest::prelude::*;

#[test]
fn gaussian_covariance_converges() {
    let s = SampleSet::draw(&VectorModel::gaussian(8), 100_000, 3).unwrap();
    let err = op_norm(&sample_covariance(&s).sub(&SymMat::identity(8)).unwrap(), 1e-12).unwrap();
    assert!(err < 0.05, "{err}");
}

#[test]
fn basis_weak_profile_is_bounded_by_multiplicity() {
    let n = 8;
    let s = SampleSet::draw(&VectorModel::basis(n), 64, 5).unwrap();
    let mut counts = vec![0usize; n];
    for r in s.rows() {
        counts[r.iter().position(|v| *v != 0.0).unwrap()] += 1;
    }
    let max_mult = *counts.iter().max().unwrap();
    let r = weak_l2_profile(&s, &[64], 32, 1.0, 8.0, 7).unwrap();
    assert!(r.entries[0].lhs <= (n * max_mult) as f64 + 1e-9);
    assert!(r.entries[0].lhs > 0.0);
}

#[test]
fn weak_profile_constant_is_seed_stable() {
    let c: Vec<f64> = (0..4)
        .map(|seed| {
            let s = SampleSet::draw(&VectorModel::gaussian(16), 256, seed).unwrap();
            weak_l2_profile(&s, &[16, 64, 256], 16, 1.0, 8.0, seed).unwrap().max_constant()
        })
        .collect();
    let mean = c.iter().sum::<f64>() / c.len() as f64;
    assert!(c.iter().all(|x| (x - mean).abs() <= 0.5 * mean), "{c:?}");
}

#[test]
fn gaussian_orthogonality_constant_is_finite() {
    let s = SampleSet::draw(&VectorModel::gaussian(16), 256, 2).unwrap();
    let r = orthogonality_profile(&s, &[8, 64, 256], 1.0, 8.0, 4).unwrap();
    assert!(r.max_constant().is_finite() && r.max_constant() > 0.0);
}

#[test]
fn full_gram_matches_covariance_scale() {
    let s = SampleSet::draw(&VectorModel::gaussian(16), 256, 8).unwrap();
    let r = subset_norm_sweep(&s, &[256], 1, 6.0, 8.0, 1.0, 1).unwrap();
    let scaled = r.entries[0].max_norm / 256.0;
    assert!((0.5..=2.0).contains(&scaled), "{scaled}");
    let direct = op_norm(&sample_covariance(&s), 1e-12).unwrap();
    assert!((scaled - direct).abs() < 1e-7 * direct);
}

#[test]
fn large_coefficient_count_is_consistent_with_the_lemma_shape() {
    let (n, big_n, q, t) = (8usize, 1024usize, 8.0f64, 2.0f64);
    let s = SampleSet::draw(&VectorModel::gaussian(n), big_n, 12).unwrap();
    let b = (big_n as f64 / n as f64).powf(2.0 / q);
    let shape = n as f64 / (b * b) + big_n as f64 * (t / b).powf(q / 2.0);
    let mut rng = rng_from_seed(1);
    let worst = (0..100)
        .map(|_| large_coeff_set(&s, &random_unit(&mut rng, n), b).unwrap().len() as f64 / shape)
        .fold(0.0, f64::max);
    assert!(worst.is_finite() && worst < 1.0, "fitted constant {worst}");
}

#[test]
fn truncated_mass_decreases_with_the_level() {
    let s = SampleSet::draw(&VectorModel::pareto(8, 6.0), 512, 4).unwrap();
    let mut last = f64::INFINITY;
    for b in [0.5, 1.0, 2.0, 3.0, 4.0, 8.0, 16.0] {
        let r = truncation_split_at(&s, b, 8.0, 1.0, 16, 0, 9).unwrap();
        assert!(r.i2_term <= last);
        assert!(r.i1_term >= 0.0 && r.i3_term == 0.0);
        last = r.i2_term;
    }
}

#[test]
fn sample_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.bin");
    let s = SampleSet::draw(&VectorModel::new("simplex", 5), 33, 6).unwrap();
    sampleio::save(&path, &s).unwrap();
    assert_eq!(sampleio::load(&path).unwrap(), s);
    let len = std::fs::metadata(&path).unwrap().len() as usize;
    assert!(len > 33 * 5 * 8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sample_covariance_is_psd(seed in any::<u64>(), n in 1usize..12, big_n in 1usize..40) {
        let s = SampleSet::draw(&VectorModel::pareto(n, 4.5), big_n, seed).unwrap();
        let (_, lo) = extreme_eigs(&sample_covariance(&s), 1e-12).unwrap();
        prop_assert!(lo >= -1e-10);
    }

    #[test]
    fn large_coefficient_sets_are_nested(seed in any::<u64>(), b1 in 0.01f64..5.0, b2 in 0.01f64..5.0) {
        let s = SampleSet::draw(&VectorModel::gaussian(4), 64, seed).unwrap();
        let x = random_unit(&mut rng_from_seed(seed ^ 1), 4);
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let small = large_coeff_set(&s, &x, hi).unwrap();
        let big = large_coeff_set(&s, &x, lo).unwrap();
        prop_assert!(small.iter().all(|i| big.contains(i)));
    }
}
