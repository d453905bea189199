use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::config::{BandConfig, BandId};
use crate::C64;

/// ULA steering vector; entry `m` is `exp(-j 2π m d sin(angle))` with `d` in
/// wavelengths.
pub fn steering_vector(n_elements: usize, spacing_wavelengths: f64, angle_rad: f64) -> DVector<C64> {
    let step = -2.0 * PI * spacing_wavelengths * angle_rad.sin();
    DVector::from_iterator(n_elements, (0..n_elements).map(|m| C64::from_polar(1.0, step * m as f64)))
}

/// LOS geometry shared by both co-located arrays. Phase offsets and Doppler
/// shifts are per band, indexed by [`BandId`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosGeometry {
    pub aod_rad: f64,
    pub aoa_rad: f64,
    pub phase_offset_rad: [f64; 2],
    pub doppler_hz: [f64; 2],
}

fn idx(band: BandId) -> usize {
    match band {
        BandId::Sub6 => 0,
        BandId::MmWave => 1,
    }
}

impl LosGeometry {
    pub fn new(aod_rad: f64, aoa_rad: f64) -> Self {
        LosGeometry {
            aod_rad,
            aoa_rad,
            phase_offset_rad: [0.0; 2],
            doppler_hz: [0.0; 2],
        }
    }

    pub fn phase_offset(&self, band: BandId) -> f64 {
        self.phase_offset_rad[idx(band)]
    }

    pub fn doppler(&self, band: BandId) -> f64 {
        self.doppler_hz[idx(band)]
    }

    pub fn set_phase_offset(&mut self, band: BandId, v: f64) {
        self.phase_offset_rad[idx(band)] = v;
    }

    pub fn set_doppler(&mut self, band: BandId, v: f64) {
        self.doppler_hz[idx(band)] = v;
    }
}

/// Free-space LOS matrix at 1-based symbol `k`:
/// `e^{jχ} e^{j2πνk/Δf} a_Rx(φ) a_Tx(ϑ)^H`.
pub fn free_space_channel(geom: &LosGeometry, band: &BandConfig, symbol_k: usize) -> DMatrix<C64> {
    let a_rx = steering_vector(band.m_rx, band.element_spacing_wavelengths, geom.aoa_rad);
    let a_tx = steering_vector(band.m_tx, band.element_spacing_wavelengths, geom.aod_rad);
    let phase = geom.phase_offset(band.band_id)
        + 2.0 * PI * geom.doppler(band.band_id) * symbol_k as f64 / band.subcarrier_spacing_hz;
    (a_rx * a_tx.adjoint()) * C64::from_polar(1.0, phase)
}

/// LOS matrices for symbols `1..=n_symbols`.
pub fn free_space_sequence(geom: &LosGeometry, band: &BandConfig, n_symbols: usize) -> Vec<DMatrix<C64>> {
    let a_rx = steering_vector(band.m_rx, band.element_spacing_wavelengths, geom.aoa_rad);
    let a_tx = steering_vector(band.m_tx, band.element_spacing_wavelengths, geom.aod_rad);
    let base = a_rx * a_tx.adjoint();
    (1..=n_symbols)
        .map(|k| {
            let phase = geom.phase_offset(band.band_id)
                + 2.0 * PI * geom.doppler(band.band_id) * k as f64 / band.subcarrier_spacing_hz;
            &base * C64::from_polar(1.0, phase)
        })
        .collect()
}

/// Draws AoD/AoA uniformly in [-π/2, π/2] and independent per-band phase
/// offsets in [-π, π). The LOS Doppler is `(v/λ) cos(φ)` in each band.
pub fn sample_geometry<R: Rng + ?Sized>(
    rng: &mut R,
    velocity_mps: f64,
    sub6: &BandConfig,
    mmw: &BandConfig,
) -> LosGeometry {
    let aod = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
    let aoa = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
    let chi_s = rng.random_range(-PI..PI);
    let chi_m = rng.random_range(-PI..PI);
    let mut g = LosGeometry::new(aod, aoa);
    g.set_phase_offset(BandId::Sub6, chi_s);
    g.set_phase_offset(BandId::MmWave, chi_m);
    g.set_doppler(BandId::Sub6, sub6.max_doppler_hz(velocity_mps) * aoa.cos());
    g.set_doppler(BandId::MmWave, mmw.max_doppler_hz(velocity_mps) * aoa.cos());
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::singular_values;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn steering_broadside_and_endfire() {
        let a = steering_vector(4, 0.5, 0.0);
        assert!(a.iter().all(|c| (c - C64::new(1.0, 0.0)).norm() < 1e-15));
        let b = steering_vector(2, 0.5, FRAC_PI_2);
        assert!((b[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((b[1] - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn steering_norm() {
        let a = steering_vector(8, 0.5, PI / 6.0);
        for m in 0..8 {
            let expected = C64::from_polar(1.0, -PI * m as f64 * 0.5);
            assert!((a[m] - expected).norm() < 1e-12);
        }
        assert!((a.norm_squared() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn free_space_is_rank_one() {
        let band = BandConfig::mmw_table1();
        let mut g = LosGeometry::new(0.3, -0.8);
        g.set_phase_offset(BandId::MmWave, 1.1);
        let h = free_space_channel(&g, &band, 3);
        assert!((h.norm_squared() - 64.0).abs() < 1e-9);
        let s = singular_values(h.as_view());
        assert!((s[0] - 8.0).abs() < 1e-9);
        assert!(s[1..].iter().all(|&v| v < 1e-9));
    }

    #[test]
    fn free_space_zero_angles_all_ones() {
        let band = BandConfig::mmw_table1();
        let h = free_space_channel(&LosGeometry::new(0.0, 0.0), &band, 1);
        assert!(h.iter().all(|c| (c - C64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn doppler_phasor_half_turn() {
        let band = BandConfig::mmw_table1();
        let mut g = LosGeometry::new(0.2, 0.4);
        g.set_doppler(BandId::MmWave, band.subcarrier_spacing_hz / 4.0);
        let h1 = free_space_channel(&g, &band, 1);
        let h3 = free_space_channel(&g, &band, 3);
        for (a, b) in h3.iter().zip(h1.iter()) {
            assert!((a / b - C64::new(-1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn geometry_doppler() {
        let sub6 = BandConfig::sub6_table1();
        let mmw = BandConfig::mmw_table1();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g0 = sample_geometry(&mut rng, 0.0, &sub6, &mmw);
        assert_eq!(g0.doppler(BandId::Sub6), 0.0);
        assert_eq!(g0.doppler(BandId::MmWave), 0.0);
        let g = sample_geometry(&mut rng, 30.0, &sub6, &mmw);
        let nu_max = 30.0 / mmw.wavelength_m();
        assert!((nu_max - 2551.0).abs() < 1.0);
        assert!((g.doppler(BandId::MmWave) - nu_max * g.aoa_rad.cos()).abs() < 1e-9);
    }

    #[test]
    fn geometry_mean_aod_near_zero() {
        let sub6 = BandConfig::sub6_table1();
        let mmw = BandConfig::mmw_table1();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 10_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let g = sample_geometry(&mut rng, 0.0, &sub6, &mmw);
            assert!(g.aod_rad.abs() <= FRAC_PI_2 && g.aoa_rad.abs() <= FRAC_PI_2);
            assert!((-PI..PI).contains(&g.phase_offset(BandId::MmWave)));
            sum += g.aod_rad;
        }
        assert!((sum / n as f64).to_degrees().abs() < 3.0);
    }
}
