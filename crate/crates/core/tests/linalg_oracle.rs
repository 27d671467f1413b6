use covest::{extreme_eigs, op_norm, SymMat};
use covest_oracles::{jacobi_eigenvalues, spectral_radius};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = rng.random_range(-1.0..1.0);
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    a
}

#[test]
fn op_norm_matches_jacobi_on_fuzzed_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for case in 0..200 {
        let n = rng.random_range(1..=50);
        let rows = random_sym(&mut rng, n);
        let a = SymMat::from_rows(&rows).unwrap();
        let want = spectral_radius(&rows);
        let got = op_norm(&a, 1e-12).unwrap();
        assert!((got - want).abs() <= 1e-8 * want, "case {case}: {got} vs {want}");
        let eig = jacobi_eigenvalues(&rows);
        let (hi, lo) = extreme_eigs(&a, 1e-12).unwrap();
        let scale = want.max(1e-300);
        assert!((hi - eig[eig.len() - 1]).abs() <= 1e-8 * scale, "case {case}: max");
        assert!((lo - eig[0]).abs() <= 1e-8 * scale, "case {case}: min");
    }
}

#[test]
fn degenerate_spectra() {
    let a = SymMat::diag(&[3.0, -3.0, 1.0]);
    assert!((op_norm(&a, 1e-12).unwrap() - 3.0).abs() < 1e-10);
    let (hi, lo) = extreme_eigs(&a, 1e-12).unwrap();
    assert!((hi - 3.0).abs() < 1e-10 && (lo + 3.0).abs() < 1e-10);
    assert_eq!(op_norm(&SymMat::zeros(4), 1e-12).unwrap(), 0.0);
    let a = SymMat::diag(&[-2.0, -5.0]);
    let (hi, lo) = extreme_eigs(&a, 1e-12).unwrap();
    assert!((hi + 2.0).abs() < 1e-10 && (lo + 5.0).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn difference_norm_is_a_metric(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = SymMat::from_rows(&random_sym(&mut rng, n)).unwrap();
        let b = SymMat::from_rows(&random_sym(&mut rng, n)).unwrap();
        let c = SymMat::from_rows(&random_sym(&mut rng, n)).unwrap();
        let d = |x: &SymMat, y: &SymMat| covest::estimation_error(x, y).unwrap();
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() <= 1e-9 * (1.0 + d(&a, &b)));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
        prop_assert!(d(&a, &a) == 0.0);
    }

    #[test]
    fn op_norm_is_homogeneous(seed in any::<u64>(), n in 1usize..10, s in -5.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = SymMat::from_rows(&random_sym(&mut rng, n)).unwrap();
        let base = op_norm(&a, 1e-12).unwrap();
        let scaled = op_norm(&a.scaled(s), 1e-12).unwrap();
        prop_assert!((scaled - s.abs() * base).abs() <= 1e-8 * (1.0 + s.abs() * base));
    }
}
