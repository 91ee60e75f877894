use hfcast_core::linalg::Matrix;
use hfcast_core::ssa::{
    delay_matrix, lag_covariance, select_components, ssa_decompose, ssa_denoise, ssa_reconstruct,
    CovarianceEstimator, SsaDecomposition, SsaError, SsaOptions, DEFAULT_THRESHOLD,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn sine(n: usize, period: f64) -> Vec<f64> {
    (0..n)
        .map(|t| (2.0 * std::f64::consts::PI * t as f64 / period).sin())
        .collect()
}

fn msd(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

#[test]
fn hankel_layout_by_enumeration() {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
    let d = delay_matrix(&x, 3).unwrap();
    assert_eq!(d.shape(), (3, 5));
    let expected = [
        [1.0, 2.0, 3.0, 4.0, 5.0],
        [2.0, 3.0, 4.0, 5.0, 6.0],
        [3.0, 4.0, 5.0, 6.0, 7.0],
    ];
    for (r, row) in expected.iter().enumerate() {
        assert_eq!(d.row(r), row);
    }
}

#[test]
fn covariance_estimators() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x: Vec<f64> = (0..120).map(|_| rng.random_range(-3.0..3.0)).collect();
    let m = 7;
    let xm = delay_matrix(&x, m).unwrap();
    let direct = xm.matmul(&xm.transpose());
    let k = (x.len() - m + 1) as f64;
    let d = ssa_decompose(&x, m, SsaOptions::default()).unwrap();
    let scaled: Vec<f64> = direct.as_slice().iter().map(|v| v / k).collect();
    assert!(max_abs_diff(d.covariance.as_slice(), &scaled) < 1e-12);

    let toeplitz = SsaOptions {
        covariance: CovarianceEstimator::Toeplitz,
        ..Default::default()
    };
    let t = ssa_decompose(&x, m, toeplitz).unwrap();
    assert_eq!(t.covariance, lag_covariance(&x, m));
    assert!(t.eigenvalues.iter().all(|&l| l >= -1e-10));
    let full: Vec<usize> = (1..=m).collect();
    assert!(max_abs_diff(&ssa_reconstruct(&t, &full).unwrap(), &x) < 1e-8);
}

#[test]
fn pure_sine_occupies_two_components() {
    let x = sine(1000, 20.0);
    let d = ssa_decompose(&x, 10, SsaOptions::default()).unwrap();
    let top2 = d.eigenvalue_shares[0] + d.eigenvalue_shares[1];
    assert!(top2 > 0.999, "top-2 share {top2}");
}

#[test]
fn white_noise_spreads_energy() {
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..10_000)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let d = ssa_decompose(&x, 10, SsaOptions::default()).unwrap();
        assert!(
            d.eigenvalue_shares[0] < 0.25,
            "seed {seed}: {}",
            d.eigenvalue_shares[0]
        );
    }
}

#[test]
fn two_components_denoise_sine() {
    let clean = sine(1000, 20.0);
    let noise = Normal::new(0.0, 0.2).unwrap();
    let mut wins = 0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noisy: Vec<f64> = clean.iter().map(|c| c + noise.sample(&mut rng)).collect();
        let d = ssa_decompose(&noisy, 10, SsaOptions::default()).unwrap();
        let smooth = ssa_reconstruct(&d, &[1, 2]).unwrap();
        if msd(&smooth, &clean) < msd(&noisy, &clean) {
            wins += 1;
        }
    }
    assert_eq!(wins, 10);
}

#[test]
fn identity_residual_and_shares_on_random_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..50 {
        let m = [5, 10, 20][i % 3];
        let n = rng.random_range(4 * m..600);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d = ssa_decompose(&x, m, SsaOptions::default()).unwrap();

        let full: Vec<usize> = (1..=m).collect();
        assert!(max_abs_diff(&ssa_reconstruct(&d, &full).unwrap(), &x) < 1e-8);

        let shares: f64 = d.eigenvalue_shares.iter().sum();
        assert!((shares - 1.0).abs() < 1e-10);
        assert!((d.eigenvalues.iter().sum::<f64>() - d.covariance.trace()).abs() < 1e-8);
        assert!(d.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert!(d.eigenvalues.iter().all(|&l| l >= -1e-10));

        for k in 0..m {
            let e = d.eigenvectors.column(k);
            let se = d.covariance.matvec(&e);
            let residual = se
                .iter()
                .zip(&e)
                .map(|(a, b)| (a - d.eigenvalues[k] * b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(residual < 1e-8, "series {i}, k {k}: {residual}");
        }
        let ete = d.eigenvectors.transpose().matmul(&d.eigenvectors);
        assert!(max_abs_diff(ete.as_slice(), Matrix::identity(m).as_slice()) < 1e-8);
        let ese = d
            .eigenvectors
            .transpose()
            .matmul(&d.covariance)
            .matmul(&d.eigenvectors);
        assert!(ese.off_diagonal_norm() < 1e-8);
    }
}

#[test]
fn constant_series_survives_first_component() {
    let x = vec![3.25; 60];
    for center in [false, true] {
        let d = ssa_decompose(
            &x,
            10,
            SsaOptions {
                center,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(d.degenerate);
        assert_eq!(d.eigenvalue_shares[0], 1.0);
        let y = ssa_reconstruct(&d, &[1]).unwrap();
        assert!(max_abs_diff(&x, &y) < 1e-8);
    }
    let x = vec![100.0; 400];
    let (smooth, _, selected) = ssa_denoise(&x, 10, DEFAULT_THRESHOLD, SsaOptions::default()).unwrap();
    assert_eq!(selected, [1]);
    assert_eq!(smooth, x);
}

fn profile(shares: &[f64]) -> SsaDecomposition {
    let m = shares.len();
    SsaDecomposition {
        embedding_dim: m,
        eigenvalues: shares.to_vec(),
        eigenvalue_shares: shares.to_vec(),
        eigenvectors: Matrix::identity(m),
        principal_components: Matrix::zeros(m + 2, m),
        covariance: Matrix::identity(m),
        original_length: 2 * m + 1,
        mean: 0.0,
        degenerate: false,
    }
}

#[test]
fn selection_on_published_share_profile() {
    let shares = [
        0.999991285112503,
        5.18930589813891e-06,
        1.42616024536684e-06,
        6.95916781349973e-07,
        4.21779000682764e-07,
        2.87333215462852e-07,
        2.15658198719760e-07,
        1.77801416057950e-07,
        1.55528979155002e-07,
        1.45403762506482e-07,
    ];
    assert_eq!(
        select_components(&profile(&shares), DEFAULT_THRESHOLD).unwrap(),
        vec![1]
    );
    assert_eq!(
        select_components(&profile(&[0.1; 10]), 0.95).unwrap(),
        (1..=10).collect::<Vec<_>>()
    );
    let mut tail = vec![0.6, 0.35];
    tail.extend(std::iter::repeat_n(0.05 / 8.0, 8));
    assert_eq!(select_components(&profile(&tail), 0.9).unwrap(), vec![1, 2]);
}

#[test]
fn denoise_of_trending_level_keeps_first_component() {
    // Uncentred, a positive price level dominates the spectrum.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<f64> = (0..2000)
        .map(|t| 26_000.0 + 0.01 * t as f64 + rng.random_range(-2.0..2.0))
        .collect();
    let (smooth, d, selected) =
        ssa_denoise(&x, 10, DEFAULT_THRESHOLD, SsaOptions::default()).unwrap();
    assert_eq!(selected, vec![1]);
    assert!(d.eigenvalue_shares[0] > 0.9999);
    assert_eq!(smooth.len(), x.len());
    assert!(msd(&smooth, &x) < 2.0);
}

#[test]
fn errors() {
    let x: Vec<f64> = (0..20).map(f64::from).collect();
    assert_eq!(
        ssa_decompose(&x, 10, SsaOptions::default()).unwrap_err(),
        SsaError::EmbeddingTooLarge { m: 10, n: 20 }
    );
    assert!(delay_matrix(&x, 0).is_err());
    let d = ssa_decompose(&x, 5, SsaOptions::default()).unwrap();
    assert_eq!(
        ssa_reconstruct(&d, &[]).unwrap_err(),
        SsaError::EmptySelection
    );
    assert_eq!(
        ssa_reconstruct(&d, &[2, 6]).unwrap_err(),
        SsaError::IndexOutOfRange { index: 6, m: 5 }
    );
    assert!(select_components(&d, 0.0).is_err());
    assert!(select_components(&d, 1.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reconstruction_is_additive_over_disjoint_sets(
        x in prop::collection::vec(-50.0f64..50.0, 40..300),
        split in prop::collection::vec(any::<bool>(), 8),
    ) {
        let m = 8;
        let d = ssa_decompose(&x, m, SsaOptions::default()).unwrap();
        let a: Vec<usize> = (1..=m).filter(|k| split[k - 1]).collect();
        let b: Vec<usize> = (1..=m).filter(|k| !split[k - 1]).collect();
        prop_assume!(!a.is_empty() && !b.is_empty());
        let ra = ssa_reconstruct(&d, &a).unwrap();
        let rb = ssa_reconstruct(&d, &b).unwrap();
        let sum: Vec<f64> = ra.iter().zip(&rb).map(|(u, v)| u + v).collect();
        prop_assert!(max_abs_diff(&sum, &x) < 1e-8);
    }

    #[test]
    fn centred_full_reconstruction_is_identity(
        x in prop::collection::vec(-50.0f64..50.0, 30..200),
        m in 2usize..12,
    ) {
        prop_assume!(2 * m < x.len());
        let d = ssa_decompose(&x, m, SsaOptions { center: true, ..Default::default() }).unwrap();
        let full: Vec<usize> = (1..=m).collect();
        prop_assert!(max_abs_diff(&ssa_reconstruct(&d, &full).unwrap(), &x) < 1e-8);
    }
}
