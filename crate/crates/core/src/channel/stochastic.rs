use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::jakes::{JakesConfig, JakesProcess};
use super::tdl::TdlProfile;
use crate::config::BandConfig;
use crate::error::{Error, Result};
use crate::tensor::ChannelTensor;
use crate::C64;

/// Absolute time of 1-based OFDM symbol `k`.
pub fn symbol_time_s(band: &BandConfig, k: usize) -> f64 {
    k as f64 / band.subcarrier_spacing_hz
}

/// Stochastic part H_sp for symbols `1..=n_symbols`.
///
/// Every antenna pair and tap owns an independent unit-power Jakes process;
/// the frequency response at baseband subcarrier frequency `f_n = n Δf` is
/// `Σ_ℓ g_ℓ[k] √p_ℓ e^{-j2π f_n τ_ℓ}`, so `E|H_sp|² = 1`.
pub fn stochastic_channel(
    profile: &TdlProfile,
    band: &BandConfig,
    n_symbols: usize,
    jakes: JakesConfig,
    seed: u64,
) -> ChannelTensor {
    let (m_rx, m_tx, n_sub) = (band.m_rx, band.m_tx, band.n_subcarriers);
    let n_taps = profile.n_taps();
    let n_pairs = m_rx * m_tx;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // gains[(k * n_pairs + pair) * n_taps + tap], pair = tx * m_rx + rx
    let mut gains = vec![C64::new(0.0, 0.0); n_symbols * n_pairs * n_taps];
    let dt = band.symbol_duration_s();
    let mut series = vec![C64::new(0.0, 0.0); n_symbols];
    for pair in 0..n_pairs {
        for tap in 0..n_taps {
            let process = JakesProcess::new(jakes, &mut rng);
            process.sample_uniform(symbol_time_s(band, 1), dt, &mut series);
            for (k, g) in series.iter().enumerate() {
                gains[(k * n_pairs + pair) * n_taps + tap] = *g;
            }
        }
    }

    // response[n * n_taps + tap] = √p e^{-j2π f_n τ}
    let mut response = Vec::with_capacity(n_sub * n_taps);
    for n in 0..n_sub {
        let f = n as f64 * band.subcarrier_spacing_hz;
        for (tau, p) in profile.delays_s.iter().zip(&profile.powers) {
            response.push(C64::from_polar(p.sqrt(), -2.0 * PI * f * tau));
        }
    }

    let mut h = ChannelTensor::zeros(band.band_id, m_rx, m_tx, n_sub, n_symbols);
    for k in 0..n_symbols {
        let g_k = &gains[k * n_pairs * n_taps..(k + 1) * n_pairs * n_taps];
        for n in 0..n_sub {
            let r_n = &response[n * n_taps..(n + 1) * n_taps];
            let out = h.slice_mut(n, k);
            for (pair, o) in out.iter_mut().enumerate() {
                let g = &g_k[pair * n_taps..(pair + 1) * n_taps];
                *o = g.iter().zip(r_n).map(|(a, b)| a * b).sum();
            }
        }
    }
    h
}

/// Rician composition `√η √(κ/(1+κ)) H_fs[k] + √η √(1/(1+κ)) H_sp[n,k]`.
///
/// `los` holds one matrix per symbol. `κ = ∞` yields the LOS-only channel.
pub fn compose_channel(
    los: &[DMatrix<C64>],
    sp: &ChannelTensor,
    k_factor_linear: f64,
    eta: f64,
) -> Result<ChannelTensor> {
    if k_factor_linear.is_nan() || k_factor_linear < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "K-factor must be >= 0 (got {k_factor_linear})"
        )));
    }
    if eta.is_nan() || eta < 0.0 {
        return Err(Error::InvalidArgument(format!("η must be >= 0 (got {eta})")));
    }
    let (m_rx, m_tx, n_sub, n_sym) = sp.dims();
    if los.len() != n_sym || los.iter().any(|m| m.shape() != (m_rx, m_tx)) {
        return Err(Error::Shape(format!(
            "LOS sequence must hold {n_sym} matrices of {m_rx}x{m_tx}"
        )));
    }
    let (w_los, w_sp) = if k_factor_linear.is_infinite() {
        (eta.sqrt(), 0.0)
    } else {
        (
            (eta * k_factor_linear / (1.0 + k_factor_linear)).sqrt(),
            (eta / (1.0 + k_factor_linear)).sqrt(),
        )
    };
    let mut h = sp.clone();
    for (k, los_k) in los.iter().enumerate() {
        let l = los_k.as_slice();
        for n in 0..n_sub {
            for (o, a) in h.slice_mut(n, k).iter_mut().zip(l) {
                *o = a * w_los + *o * w_sp;
            }
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{free_space_sequence, make_tdl_profile, LosGeometry};
    use crate::config::{BandConfig, BandId};

    fn small_band(n_sub: usize) -> BandConfig {
        BandConfig::mmw_table1().with_subcarriers(n_sub)
    }

    fn jakes(v: f64) -> JakesConfig {
        JakesConfig { n_sinusoids: 32, max_doppler_hz: v }
    }

    #[test]
    fn static_channel_constant_in_time() {
        let band = small_band(24);
        let p = make_tdl_profile(841e-9, 12).unwrap();
        let h = stochastic_channel(&p, &band, 5, jakes(0.0), 1);
        for k in 1..5 {
            assert_eq!(h.slice(7, k), h.slice(7, 0));
        }
    }

    #[test]
    fn single_tap_is_flat() {
        let band = small_band(24);
        let h = stochastic_channel(&TdlProfile::flat(), &band, 3, jakes(0.0), 2);
        for n in 1..24 {
            for (a, b) in h.slice(n, 1).iter().zip(h.slice(0, 1)) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn brute_force_two_tap_response() {
        let band = small_band(16);
        let profile = TdlProfile {
            delays_s: vec![0.0, 700e-9],
            powers: vec![0.6, 0.4],
        };
        let jc = jakes(2000.0);
        let seed = 77;
        let h = stochastic_channel(&profile, &band, 4, jc, seed);
        // Rebuild the same processes in the same draw order.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut procs = Vec::new();
        for _pair in 0..64 {
            procs.push([JakesProcess::new(jc, &mut rng), JakesProcess::new(jc, &mut rng)]);
        }
        for k in 0..4 {
            let t = symbol_time_s(&band, k + 1);
            for n in 0..16 {
                let f = n as f64 * band.subcarrier_spacing_hz;
                for tx in 0..8 {
                    for rx in 0..8 {
                        let pr = &procs[tx * 8 + rx];
                        let mut expected = C64::new(0.0, 0.0);
                        for tap in 0..2 {
                            expected += pr[tap].sample(t)
                                * profile.powers[tap].sqrt()
                                * C64::from_polar(1.0, -2.0 * PI * f * profile.delays_s[tap]);
                        }
                        let got = h.get(rx, tx, n, k);
                        assert!((got - expected).norm() <= 1e-10 * expected.norm().max(1e-3));
                    }
                }
            }
        }
    }

    #[test]
    fn compose_limits() {
        let band = small_band(8);
        let p = make_tdl_profile(841e-9, 12).unwrap();
        let sp = stochastic_channel(&p, &band, 2, jakes(0.0), 4);
        let los = free_space_sequence(&LosGeometry::new(0.2, -0.3), &band, 2);

        let nlos = compose_channel(&los, &sp, 0.0, 1.0).unwrap();
        assert_eq!(nlos, sp);

        let los_only = compose_channel(&los, &sp, 1e12, 1.0).unwrap();
        for (a, b) in los_only.slice(3, 1).iter().zip(los[1].as_slice()) {
            assert!((a - b).norm() < 1e-5);
        }

        let half = compose_channel(&los, &sp, 1.0, 1.0).unwrap();
        let mut err = 0.0;
        for n in 0..8 {
            for k in 0..2 {
                for (i, v) in half.slice(n, k).iter().enumerate() {
                    let e = (los[k].as_slice()[i] + sp.slice(n, k)[i]) / 2f64.sqrt();
                    err += (v - e).norm_sqr();
                }
            }
        }
        assert!(err.sqrt() < 1e-12);
        assert!(compose_channel(&los, &sp, -1.0, 1.0).is_err());
        assert_eq!(half.band, BandId::MmWave);
    }

    #[test]
    fn unit_average_power() {
        let band = small_band(32);
        let p = make_tdl_profile(841e-9, 12).unwrap();
        let mut total = 0.0;
        let mut count = 0;
        for seed in 0..640u64 {
            let h = stochastic_channel(&p, &band, 1, jakes(0.0), seed);
            // one subcarrier per draw keeps samples close to independent
            for v in h.slice((seed as usize) % 32, 0) {
                total += v.norm_sqr();
                count += 1;
            }
        }
        let mean = total / count as f64;
        assert!((0.98..=1.02).contains(&mean), "mean power {mean} over {count}");
    }
}
