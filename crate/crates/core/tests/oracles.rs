//! Deterministic-math checks against independent reference computations.

use std::f64::consts::PI;

use mmlink::channel::{free_space_channel, steering_vector, LosGeometry};
use mmlink::combining::compute_weight;
use mmlink::metrics::{error_covariance, gain_matrix, sinr_per_stream, spectral_efficiency, SinrGrid};
use mmlink::transceiver::{design_subcarrier, water_filling, SubcarrierDesign};
use mmlink::{BandConfig, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-8;

fn crandn(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<C64> {
    DMatrix::from_fn(r, c, |_, _| crandn(rng))
}

/// Water level by bisection on `Σ max(0, μ − n/σ²) = P`.
fn bisection_water_filling(sigma: &[f64], noise: f64, p: f64) -> Vec<f64> {
    let inv: Vec<f64> = sigma
        .iter()
        .map(|s| if *s > 0.0 { noise / (s * s) } else { f64::INFINITY })
        .collect();
    let finite_max = inv.iter().cloned().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, p + finite_max);
    let fill = |mu: f64| inv.iter().map(|v| (mu - v).max(0.0)).sum::<f64>();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fill(mid) > p {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    inv.iter().map(|v| (mu - v).max(0.0)).collect()
}

#[test]
fn steering_entries_match_direct_evaluation() {
    for &(m, d, theta) in &[(4usize, 0.5, 0.0), (2, 0.5, PI / 2.0), (8, 0.5, PI / 6.0), (16, 0.37, -1.1)] {
        let a = steering_vector(m, d, theta);
        for i in 0..m {
            let phase = -2.0 * PI * i as f64 * d * theta.sin();
            assert!((a[i] - C64::new(phase.cos(), phase.sin())).norm() < TOL);
        }
        assert!((a.norm_squared() - m as f64).abs() < TOL);
    }
}

#[test]
fn doppler_phasor_after_two_symbols() {
    let band = BandConfig::mmw_table1();
    let mut g = LosGeometry::new(0.3, -0.2);
    g.set_doppler(mmlink::BandId::MmWave, band.subcarrier_spacing_hz / 4.0);
    let h1 = free_space_channel(&g, &band, 1);
    let h3 = free_space_channel(&g, &band, 3);
    for (a, b) in h3.iter().zip(h1.iter()) {
        assert!((a / b - C64::new(-1.0, 0.0)).norm() < TOL);
    }
}

#[test]
fn weight_values() {
    assert!((compute_weight(8, 8, 1.0, 1.0).w_hat - 64.0 / 97.0).abs() < TOL);
    assert!((compute_weight(8, 8, 0.3, f64::INFINITY).w_hat - 64.0 / 65.0).abs() < TOL);
    assert_eq!(compute_weight(8, 8, 0.0, 5.0).w_hat, 0.0);
    // 4x2, σ² = 0.5, κ = 3: 4 / (8/4 + 9·0.5)
    assert!((compute_weight(2, 4, 0.5, 3.0).w_hat - 4.0 / 6.5).abs() < TOL);
}

#[test]
fn gain_matrix_matches_explicit_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = random_matrix(&mut rng, 2, 2);
    let q = random_matrix(&mut rng, 2, 2);
    let f = random_matrix(&mut rng, 2, 2);
    let power = vec![0.7, 0.3];
    let d = SubcarrierDesign::from_parts(q.clone(), f.clone(), vec![1.0, 1.0], power.clone());
    let g = gain_matrix(h.as_view(), &d);
    for mu in 0..2 {
        for nu in 0..2 {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..2 {
                for t in 0..2 {
                    acc += q[(r, mu)].conj() * h[(r, t)] * f[(t, nu)] * power[nu].sqrt();
                }
            }
            assert!((g[(mu, nu)] - acc).norm() < TOL);
        }
    }
}

#[test]
fn perfect_design_diagonalizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = random_matrix(&mut rng, 4, 4);
    let d = design_subcarrier(h.as_view(), 1.0, 0.1);
    let g = gain_matrix(h.as_view(), &d);
    for mu in 0..4 {
        for nu in 0..4 {
            let expected = if mu == nu { d.sigma[mu] * d.power[mu].sqrt() } else { 0.0 };
            assert!((g[(mu, nu)] - C64::new(expected, 0.0)).norm() < TOL);
        }
    }
    let zero = SubcarrierDesign::from_parts(d.q.clone(), d.f.clone(), d.sigma.clone(), vec![0.0; 4]);
    assert!(gain_matrix(h.as_view(), &zero).iter().all(|c| c.norm() == 0.0));
}

#[test]
fn error_covariance_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let gp = random_matrix(&mut rng, 3, 3);
    let ge = random_matrix(&mut rng, 3, 3);
    let eps = &gp - &ge;
    let c = &eps * eps.adjoint() / C64::new(3.0, 0.0);
    let got = error_covariance(&gp, &ge).unwrap();
    for mu in 0..3 {
        assert!((got[mu] - c[(mu, mu)].re).abs() < TOL);
        assert!(c[(mu, mu)].im.abs() < TOL);
    }
}

#[test]
fn sinr_and_se_hand_cases() {
    let g = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(2.0, 0.0), C64::new(0.0, 1.0)]));
    let q = DMatrix::<C64>::identity(2, 2);
    let s = sinr_per_stream(&g, &q, &[0.0, 0.0], 0.5);
    assert!((s[0] - 8.0).abs() < TOL && (s[1] - 2.0).abs() < TOL);

    // Interference plus estimation error: 4 / (1 + (0.5 + 0.5)·1)
    let g = DMatrix::from_row_slice(2, 2, &[C64::new(2.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
    let s = sinr_per_stream(&g, &q, &[0.5, 0.0], 0.5);
    assert!((s[0] - 2.0).abs() < TOL && (s[1] - 2.0).abs() < TOL);

    let grid = SinrGrid::from_vec(2, 2, 2, vec![3.0, 1.0, 0.0, 0.0, 1.0, 1.0, 7.0, 0.0]).unwrap();
    // (3 + 0 + 2 + 3) / (2·2)
    assert!((spectral_efficiency(&grid).unwrap().se_bits_per_s_per_hz - 2.0).abs() < TOL);
    let zeros = SinrGrid::from_vec(8, 3, 2, vec![0.0; 48]).unwrap();
    assert_eq!(spectral_efficiency(&zeros).unwrap().se_bits_per_s_per_hz, 0.0);
}

#[test]
fn water_filling_matches_bisection_on_1000_profiles() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let l = rng.random_range(1..=8);
        let mut sigma: Vec<f64> = (0..l).map(|_| rng.random_range(0.0..5.0f64)).collect();
        if rng.random_bool(0.2) {
            sigma[l - 1] = 0.0;
        }
        sigma.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let noise = 10f64.powf(rng.random_range(-2.0..1.5));
        let p = 10f64.powf(rng.random_range(-1.0..1.0));
        let got = water_filling(&sigma, noise, p);
        let want = bisection_water_filling(&sigma, noise, p);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < TOL, "sigma {sigma:?} noise {noise} p {p}: {got:?} vs {want:?}");
        }
        if sigma[0] > 0.0 {
            assert!((got.iter().sum::<f64>() - p).abs() < TOL);
        }
    }
}

#[test]
fn water_filling_two_one_profile() {
    // Thresholds 0.25 and 1: with P = 1 the level 1.125 covers both.
    let p = water_filling(&[2.0, 1.0], 1.0, 1.0);
    assert!((p[0] - 0.875).abs() < TOL && (p[1] - 0.125).abs() < TOL);
    let p = water_filling(&[2.0, 1.0, 0.0], 1.0, 0.5);
    assert!((p[0] - 0.5).abs() < TOL && p[1] == 0.0 && p[2] == 0.0);
}
