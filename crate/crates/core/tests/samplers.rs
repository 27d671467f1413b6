use covest::covariance::{estimation_error, sample_covariance, SampleSet};
use covest::distributions::{frame_of, second_moment, make_tight_frame, parseval_defect, sample, Frame};
use covest::linalg::norm2;
use covest::{certify_moments, extreme_eigs, SymMat, VectorModel};
use covest_oracles::missing_coupon_probability;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn cov_error(model: &VectorModel, big_n: usize, seed: u64) -> f64 {
    let s = SampleSet::draw(model, big_n, seed).unwrap();
    estimation_error(&sample_covariance(&s), &SymMat::identity(model.n)).unwrap()
}

#[test]
fn cube_coordinate_variance() {
    let xs = sample(&VectorModel::cube(4), 100_000, 7).unwrap();
    for c in 0..4 {
        let var = xs.iter().map(|x| x[c] * x[c]).sum::<f64>() / xs.len() as f64;
        assert!((var - 1.0).abs() < 0.02, "coordinate {c}: {var}");
    }
    let r = 3f64.sqrt();
    assert!(xs.iter().flatten().all(|v| v.abs() <= r));
}

#[test]
fn every_builtin_kind_is_isotropic() {
    let models = [
        VectorModel::gaussian(8),
        VectorModel::cube(8),
        VectorModel::new("cross_polytope", 8),
        VectorModel::new("simplex", 8),
        VectorModel::basis(8),
        VectorModel::gaussian_frame(8, 40, 3),
        VectorModel::pareto(8, 12.0),
    ];
    for m in &models {
        let err = cov_error(m, 100_000, 11);
        assert!(err < 0.05, "{}: {err}", m.kind);
    }
}

#[test]
fn samples_are_reproducible() {
    for m in [VectorModel::gaussian(2), VectorModel::new("simplex", 3), VectorModel::pareto(3, 6.0)] {
        assert_eq!(sample(&m, 3, 1).unwrap(), sample(&m, 3, 1).unwrap());
        assert_ne!(sample(&m, 3, 1).unwrap(), sample(&m, 3, 2).unwrap());
    }
}

#[test]
fn gaussian_fourth_moment() {
    let c = certify_moments(&VectorModel::gaussian(4), 4.0, 200_000, 8, 5).unwrap();
    assert!((c.l_hat - 3f64.powf(0.25)).abs() < 0.05, "{}", c.l_hat);
}

#[test]
fn pareto_moment_stability() {
    let m = VectorModel::pareto(4, 6.0);
    let a = certify_moments(&m, 4.0, 100_000, 8, 9).unwrap().l_hat;
    let b = certify_moments(&m, 4.0, 200_000, 8, 9).unwrap().l_hat;
    assert!(a.is_finite() && (a / b - 1.0).abs() < 0.1, "{a} vs {b}");
}

#[test]
fn pareto_moment_beyond_the_tail_is_unstable() {
    // For q above the tail exponent the empirical moment keeps growing
    // with the sample size.
    let m = VectorModel::pareto(1, 3.0);
    let small = certify_moments(&m, 8.0, 10_000, 1, 2).unwrap().l_hat;
    let large = certify_moments(&m, 8.0, 1_000_000, 1, 2).unwrap().l_hat;
    assert!(large > 1.5 * small, "{small} -> {large}");
}

#[test]
fn truncated_samples_respect_the_radius() {
    let k = 1.5;
    let m = VectorModel::pareto(6, 4.5).with_param("truncate", true.into()).with_radius(k);
    let bound = k * 6f64.sqrt();
    for x in sample(&m, 50_000, 3).unwrap() {
        assert!(norm2(&x) <= bound);
    }
    assert!(certify_moments(&m, 4.0, 1000, 2, 1).unwrap().truncated);
}

#[test]
fn basis_frame_and_tight_frames() {
    let f = frame_of(&VectorModel::basis(3)).unwrap();
    assert!(parseval_defect(&f.points, 3).unwrap() < 1e-12);
    let scaled = Frame::scaled_basis(3);
    let doubled: Vec<Vec<f64>> = scaled.points.iter().chain(&scaled.points).cloned().collect();
    let t = make_tight_frame(&doubled).unwrap();
    assert!(parseval_defect(&t.points, 6).unwrap() < 1e-10);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let raw: Vec<Vec<f64>> = (0..50)
        .map(|_| (0..5).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let t = make_tight_frame(&raw).unwrap();
    assert!(parseval_defect(&t.points, 50).unwrap() < 1e-10);

    let flat: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 1.0, 0.0]).collect();
    assert!(make_tight_frame(&flat).is_err());
}

#[test]
fn subset_missing_a_direction_has_unit_defect() {
    let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![0.0, 3f64.sqrt() * (i % 2) as f64, 3f64.sqrt() * ((i + 1) % 2) as f64]).collect();
    assert!((parseval_defect(&pts, 6).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn basis_undersampling_matches_coupon_law() {
    let n = 6;
    let f = Frame::scaled_basis(n);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let trials = 4000;
    let draws = 12;
    let mut hits = 0;
    for _ in 0..trials {
        let sub: Vec<Vec<f64>> = (0..draws).map(|_| f.points[rng.random_range(0..n)].clone()).collect();
        let (_, lo) = extreme_eigs(&second_moment(&sub, draws as f64).unwrap(), 1e-12).unwrap();
        if lo < 1e-9 {
            hits += 1;
        }
    }
    let p = missing_coupon_probability(n, draws);
    let freq = hits as f64 / trials as f64;
    let sd = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((freq - p).abs() < 4.0 * sd, "{freq} vs {p}");
}

#[test]
fn subsampled_frame_is_nearly_tight() {
    let n = 32;
    let model = VectorModel::gaussian_frame(n, 20 * n, 5);
    let big_n = 4 * n * 5;
    let mut defects: Vec<f64> = (0..100)
        .map(|t| parseval_defect(&sample(&model, big_n, 100 + t).unwrap(), big_n).unwrap())
        .collect();
    defects.sort_by(f64::total_cmp);
    let median = 0.5 * (defects[49] + defects[50]);
    assert!(median < 0.5, "median defect {median}");
}
