use std::time::Instant;

use hfcast_core::wavelet::{
    dwt_decompose, dwt_reconstruct, wavelet_denoise, Padding, WaveletError, WaveletFilter,
    DEFAULT_LEVELS,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const ONE_TO_EIGHT: [f64; 8] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn full_convolution(signal: &[f64], taps: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; signal.len() + taps.len() - 1];
    for (i, s) in signal.iter().enumerate() {
        for (j, t) in taps.iter().enumerate() {
            out[i + j] += s * t;
        }
    }
    out
}

/// One periodic analysis step by explicit wrap-around extension, full
/// convolution and downsampling (keeps samples at odd offsets).
fn periodic_oracle(x: &[f64], taps: &[f64]) -> Vec<f64> {
    let n = x.len() as isize;
    let f = taps.len() as isize;
    let ext: Vec<f64> = (0..n + f - 1)
        .map(|k| x[(k - (f - 1)).rem_euclid(n) as usize])
        .collect();
    let y = full_convolution(&ext, taps);
    (0..x.len().div_ceil(2))
        .map(|o| y[2 * o + f as usize])
        .collect()
}

fn random_series(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-10.0..10.0)).collect()
}

#[test]
fn periodic_step_matches_convolution_oracle() {
    let w = WaveletFilter::sym4();
    let d = dwt_decompose(&ONE_TO_EIGHT, 1, &w, Padding::Periodic).unwrap();
    let ca = periodic_oracle(&ONE_TO_EIGHT, &w.lowpass_dec);
    let cd = periodic_oracle(&ONE_TO_EIGHT, &w.highpass_dec);
    assert!(max_abs_diff(&d.approximation, &ca) < 1e-12);
    assert!(max_abs_diff(&d.details[0], &cd) < 1e-12);

    // the same coefficients evaluated independently in float64
    let frozen_a = [
        10.763256134985816,
        3.180823904228749,
        4.420145012745559,
        7.091619070755589,
    ];
    let frozen_d = [
        0.3586165429286619,
        -2.8180021705268548,
        -0.36904149714799783,
        0.0,
    ];
    assert!(max_abs_diff(&d.approximation, &frozen_a) < 1e-12);
    assert!(max_abs_diff(&d.details[0], &frozen_d) < 1e-12);
}

#[test]
fn symmetric_step_matches_reference_values() {
    let w = WaveletFilter::sym4();
    let d = dwt_decompose(&ONE_TO_EIGHT, 1, &w, Padding::Symmetric).unwrap();
    let frozen_a = [
        2.550943193841569,
        1.5975058540568168,
        4.34725728055952,
        7.091619070755589,
        10.176978867516286,
        11.130416207301039,
        8.380664780798336,
    ];
    let frozen_d = [
        -0.10927326907418583,
        0.30693488579668987,
        -0.1976616167225042,
        0.0,
        0.10927326907418583,
        -0.3069348857966898,
        0.19766161672250404,
    ];
    assert!(max_abs_diff(&d.approximation, &frozen_a) < 1e-12);
    assert!(max_abs_diff(&d.details[0], &frozen_d) < 1e-12);
}

#[test]
fn lowpass_only_reconstruction_matches_reference() {
    let w = WaveletFilter::sym4();
    let periodic = [
        2.027525843802784,
        1.9945436738166757,
        3.101574718436061,
        3.9351835709922636,
        4.603386378040048,
        6.35985533253163,
        8.267513059721109,
        5.710417422659433,
    ];
    let symmetric = [
        1.0055598851717984,
        1.8071566360764655,
        3.071022818023694,
        4.026263918111129,
        4.919877119873076,
        6.090554068023694,
        7.135164607552574,
        7.736604687814717,
    ];
    for (padding, expected) in [
        (Padding::Periodic, &periodic),
        (Padding::Symmetric, &symmetric),
    ] {
        let zeroed = dwt_decompose(&ONE_TO_EIGHT, 1, &w, padding)
            .unwrap()
            .with_zeroed_details();
        let out = dwt_reconstruct(&zeroed, &w).unwrap();
        assert!(max_abs_diff(&out, expected) < 1e-12, "{padding}: {out:?}");
        let denoised = wavelet_denoise(&ONE_TO_EIGHT, 1, &w, padding).unwrap();
        assert_eq!(out, denoised);
    }
}

#[test]
fn constant_series_lives_in_approximation() {
    let w = WaveletFilter::sym4();
    let x = vec![5.0; 32];
    for padding in [Padding::Symmetric, Padding::Periodic] {
        let d = dwt_decompose(&x, 3, &w, padding).unwrap();
        assert!(d.details.iter().flatten().all(|v| v.abs() < 1e-10));
        let expected = 5.0 * 2f64.powf(1.5);
        assert!(d.approximation.iter().all(|v| (v - expected).abs() < 1e-10));
        let y = wavelet_denoise(&x, 3, &w, padding).unwrap();
        assert!(max_abs_diff(&x, &y) < 1e-10);
    }
}

#[test]
fn zero_bands_reconstruct_to_zero() {
    let w = WaveletFilter::sym4();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = random_series(&mut rng, 100);
    for padding in [Padding::Symmetric, Padding::Periodic] {
        let mut d = dwt_decompose(&x, 4, &w, padding)
            .unwrap()
            .with_zeroed_details();
        d.approximation.iter_mut().for_each(|v| *v = 0.0);
        assert!(dwt_reconstruct(&d, &w).unwrap().iter().all(|&v| v == 0.0));
    }
}

#[test]
fn round_trip_on_one_hundred_random_series() {
    let w = WaveletFilter::sym4();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = rng.random_range(64..=1000);
        let padding = if i % 2 == 0 {
            Padding::Symmetric
        } else {
            Padding::Periodic
        };
        let x = random_series(&mut rng, n);
        let d = dwt_decompose(&x, 4, &w, padding).unwrap();
        assert_eq!(d.details.len(), 4);
        assert!(d.coefficient_count() >= n);
        let y = dwt_reconstruct(&d, &w).unwrap();
        worst = worst.max(max_abs_diff(&x, &y));
    }
    assert!(worst < 1e-10, "max error {worst}");
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn denoising_reduces_noise_on_sine() {
    let w = WaveletFilter::sym4();
    let noise = Normal::new(0.0, 0.1).unwrap();
    let clean: Vec<f64> = (0..512)
        .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 64.0).sin())
        .collect();
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noisy: Vec<f64> = clean.iter().map(|c| c + noise.sample(&mut rng)).collect();
        let smooth = wavelet_denoise(&noisy, DEFAULT_LEVELS, &w, Padding::Symmetric).unwrap();
        let msd = |v: &[f64]| {
            v.iter()
                .zip(&clean)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                / 512.0
        };
        assert!(msd(&smooth) < msd(&noisy), "seed {seed}");
    }
}

#[test]
fn ramp_passes_through_away_from_edges() {
    let w = WaveletFilter::sym4();
    let x: Vec<f64> = (0..256).map(|v| v as f64).collect();
    let y = wavelet_denoise(&x, 4, &w, Padding::Symmetric).unwrap();
    let interior = max_abs_diff(&x[16..240], &y[16..240]);
    assert!(interior < 0.05 * 255.0, "interior error {interior}");
}

#[test]
fn input_validation() {
    let w = WaveletFilter::sym4();
    assert_eq!(
        dwt_decompose(&[1.0; 7], 1, &w, Padding::Periodic).unwrap_err(),
        WaveletError::SeriesTooShort {
            len: 7,
            required: 8
        }
    );
    assert!(matches!(
        dwt_decompose(&[1.0; 12], 4, &w, Padding::Periodic),
        Err(WaveletError::SeriesTooShort { required: 16, .. })
    ));
    assert_eq!(
        dwt_decompose(&[1.0; 64], 0, &w, Padding::Periodic).unwrap_err(),
        WaveletError::InvalidLevels(0)
    );
    let mut bad = vec![1.0; 64];
    bad[3] = f64::INFINITY;
    assert_eq!(
        dwt_decompose(&bad, 2, &w, Padding::Periodic).unwrap_err(),
        WaveletError::NonFinite
    );

    let mut d = dwt_decompose(&[1.0; 64], 2, &w, Padding::Symmetric).unwrap();
    d.details[1].pop();
    assert!(matches!(
        dwt_reconstruct(&d, &w),
        Err(WaveletError::ShapeMismatch { .. })
    ));
    let mut d = dwt_decompose(&[1.0; 64], 2, &w, Padding::Symmetric).unwrap();
    d.details.pop();
    assert!(matches!(
        dwt_reconstruct(&d, &w),
        Err(WaveletError::ShapeMismatch { .. })
    ));
}

/// Index range `[lo, hi]` of each level's approximation that only depends on
/// interior input samples of an affine signal.
fn interior_ranges(n: usize, levels: usize, taps: usize) -> Vec<(usize, usize)> {
    let mut ranges = Vec::new();
    let (mut lo, mut hi) = (0usize, n - 1);
    for _ in 0..levels {
        // output o reads inputs 2o+1-(taps-1) ..= 2o+1
        let new_lo = (lo + taps - 2).div_ceil(2);
        let new_hi = (hi - 1) / 2;
        ranges.push((new_lo, new_hi));
        lo = new_lo;
        hi = new_hi;
    }
    ranges
}

fn series_strategy(min: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, min..=max)
}

fn dyadic_series(blocks: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    blocks.prop_flat_map(|b| prop::collection::vec(-100.0f64..100.0, 16 * b))
}

fn padding_strategy() -> impl Strategy<Value = Padding> {
    prop_oneof![Just(Padding::Symmetric), Just(Padding::Periodic)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perfect_reconstruction(x in series_strategy(16, 600), padding in padding_strategy(), levels in 1usize..=4) {
        let w = WaveletFilter::sym4();
        let d = dwt_decompose(&x, levels, &w, padding).unwrap();
        let y = dwt_reconstruct(&d, &w).unwrap();
        prop_assert_eq!(y.len(), x.len());
        prop_assert!(max_abs_diff(&x, &y) < 1e-10);
    }

    #[test]
    fn periodic_energy_is_preserved(x in dyadic_series(1..=40)) {
        let w = WaveletFilter::sym4();
        let d = dwt_decompose(&x, 4, &w, Padding::Periodic).unwrap();
        let ex: f64 = x.iter().map(|v| v * v).sum();
        prop_assert!((d.energy() - ex).abs() <= 1e-8 * ex.max(1e-300));
        prop_assert_eq!(d.coefficient_count(), x.len());
    }

    #[test]
    fn decomposition_is_linear(
        pair in (16usize..300).prop_flat_map(|n| (prop::collection::vec(-10.0f64..10.0, n), prop::collection::vec(-10.0f64..10.0, n))),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        padding in padding_strategy(),
    ) {
        let (x, y) = pair;
        let w = WaveletFilter::sym4();
        let z: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let dx = dwt_decompose(&x, 3, &w, padding).unwrap();
        let dy = dwt_decompose(&y, 3, &w, padding).unwrap();
        let dz = dwt_decompose(&z, 3, &w, padding).unwrap();
        let combine = |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(u, v)| a * u + b * v).collect() };
        prop_assert!(max_abs_diff(&dz.approximation, &combine(&dx.approximation, &dy.approximation)) < 1e-10);
        for k in 0..3 {
            prop_assert!(max_abs_diff(&dz.details[k], &combine(&dx.details[k], &dy.details[k])) < 1e-10);
        }
    }

    #[test]
    fn periodic_denoising_is_idempotent(x in dyadic_series(1..=40)) {
        let w = WaveletFilter::sym4();
        let once = wavelet_denoise(&x, 4, &w, Padding::Periodic).unwrap();
        let twice = wavelet_denoise(&once, 4, &w, Padding::Periodic).unwrap();
        prop_assert!(max_abs_diff(&once, &twice) < 1e-8);
    }

    #[test]
    fn affine_inputs_have_no_interior_detail(
        n in 64usize..500,
        slope in -5.0f64..5.0,
        intercept in -100.0f64..100.0,
        padding in padding_strategy(),
    ) {
        let w = WaveletFilter::sym4();
        let x: Vec<f64> = (0..n).map(|t| intercept + slope * t as f64).collect();
        let d = dwt_decompose(&x, 4, &w, padding).unwrap();
        for (k, (lo, hi)) in interior_ranges(n, 4, w.len()).into_iter().enumerate() {
            for o in lo..=hi.min(d.details[k].len() - 1) {
                prop_assert!(d.details[k][o].abs() < 1e-8, "D{} [{}] = {}", k + 1, o, d.details[k][o]);
            }
        }
    }
}
