//! Gain matrix, estimation-error variance, per-stream SINR and spectral
//! efficiency.

use nalgebra::{DMatrix, DMatrixView};

use crate::error::{Error, Result};
use crate::tensor::ChannelTensor;
use crate::transceiver::{LinkDesign, SubcarrierDesign};
use crate::C64;

/// `Ḡ = Q̄^H H F̄ P̄^{1/2}` (`ℓ_max × ℓ_max`).
pub fn gain_matrix(h: DMatrixView<'_, C64>, design: &SubcarrierDesign) -> DMatrix<C64> {
    design.combiner_adjoint() * h * design.loaded_precoder()
}

/// Gain matrix of the design matched to the channel itself: `diag(σ_ℓ √p_ℓ)`.
pub fn perfect_gain(sigma: &[f64], power: &[f64]) -> DMatrix<C64> {
    let l = sigma.len();
    DMatrix::from_fn(l, l, |i, j| {
        if i == j {
            C64::new(sigma[i] * power[i].sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Diagonal of `(1/ℓ_max) ε ε^H` with `ε = G − Ḡ`.
pub fn error_covariance(g_perfect: &DMatrix<C64>, g_est: &DMatrix<C64>) -> Result<Vec<f64>> {
    if g_perfect.shape() != g_est.shape() {
        return Err(Error::Shape(format!(
            "gain matrices differ in shape: {:?} vs {:?}",
            g_perfect.shape(),
            g_est.shape()
        )));
    }
    let l = g_perfect.ncols() as f64;
    Ok((0..g_perfect.nrows())
        .map(|mu| {
            (0..g_perfect.ncols())
                .map(|nu| (g_perfect[(mu, nu)] - g_est[(mu, nu)]).norm_sqr())
                .sum::<f64>()
                / l
        })
        .collect())
}

/// `SINR_μ = |Ḡ_μμ|² / (Σ_{ν≠μ} |Ḡ_μν|² + (σ_μ² + σ_w²) ‖q_μ‖²)`.
///
/// A zero numerator yields 0 even when the denominator vanishes.
pub fn sinr_per_stream(g: &DMatrix<C64>, q: &DMatrix<C64>, sigma_mu2: &[f64], noise_power: f64) -> Vec<f64> {
    let l = g.nrows();
    (0..l)
        .map(|mu| {
            let signal = g[(mu, mu)].norm_sqr();
            if signal == 0.0 {
                return 0.0;
            }
            let interference: f64 = (0..g.ncols()).filter(|&nu| nu != mu).map(|nu| g[(mu, nu)].norm_sqr()).sum();
            let q_norm2 = q.column(mu).norm_squared();
            let den = interference + (sigma_mu2[mu] + noise_power) * q_norm2;
            if den == 0.0 {
                f64::INFINITY
            } else {
                signal / den
            }
        })
        .collect()
}

/// Per-stream SINR over subcarriers and data symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrGrid {
    pub n_streams: usize,
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    data: Vec<f64>,
}

impl SinrGrid {
    pub fn new(n_streams: usize, n_subcarriers: usize, n_symbols: usize) -> Self {
        SinrGrid {
            n_streams,
            n_subcarriers,
            n_symbols,
            data: vec![0.0; n_streams * n_subcarriers * n_symbols],
        }
    }

    pub fn from_vec(n_streams: usize, n_subcarriers: usize, n_symbols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_streams * n_subcarriers * n_symbols {
            return Err(Error::Shape("SINR grid size mismatch".into()));
        }
        Ok(SinrGrid {
            n_streams,
            n_subcarriers,
            n_symbols,
            data,
        })
    }

    pub fn at(&self, n: usize, k: usize) -> &[f64] {
        let start = (k * self.n_subcarriers + n) * self.n_streams;
        &self.data[start..start + self.n_streams]
    }

    pub fn at_mut(&mut self, n: usize, k: usize) -> &mut [f64] {
        let start = (k * self.n_subcarriers + n) * self.n_streams;
        &mut self.data[start..start + self.n_streams]
    }

    pub fn is_empty(&self) -> bool {
        self.n_subcarriers == 0 || self.n_symbols == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeResult {
    pub se_bits_per_s_per_hz: f64,
    pub sinr: Option<SinrGrid>,
}

/// `SE = (1/(N K_D)) Σ_n Σ_k Σ_μ log2(1 + SINR)`.
pub fn spectral_efficiency(grid: &SinrGrid) -> Result<SeResult> {
    if grid.is_empty() {
        return Err(Error::InsufficientSamples("empty SINR grid".into()));
    }
    let total: f64 = grid.data.iter().map(|s| (1.0 + s).log2()).sum();
    Ok(SeResult {
        se_bits_per_s_per_hz: total / (grid.n_subcarriers * grid.n_symbols) as f64,
        sinr: None,
    })
}

/// SINR grid of a frozen design over `n_data` symbols of the true channel
/// starting at 0-based symbol `first_data_symbol`.
///
/// `perfect(n, k)` returns the perfect-design gain `diag(σ√p)` (as its
/// diagonal) of the true channel at subcarrier `n`, absolute symbol `k`.
pub fn link_sinr(
    h: &ChannelTensor,
    design: &LinkDesign,
    first_data_symbol: usize,
    n_data: usize,
    noise_power: f64,
    perfect: impl Fn(usize, usize) -> Vec<f64>,
) -> Result<SinrGrid> {
    let (m_rx, m_tx, n_sub, n_sym) = h.dims();
    if (design.m_rx, design.m_tx) != (m_rx, m_tx) || design.subcarriers.len() != n_sub {
        return Err(Error::Shape("design does not match channel dimensions".into()));
    }
    if first_data_symbol + n_data > n_sym {
        return Err(Error::Shape("data symbols exceed the channel tensor".into()));
    }
    let l = design.n_streams();
    let mut grid = SinrGrid::new(l, n_sub, n_data);
    for kd in 0..n_data {
        let k = first_data_symbol + kd;
        for n in 0..n_sub {
            let d = &design.subcarriers[n];
            let g = gain_matrix(h.matrix(n, k), d);
            let diag = perfect(n, k);
            let mut sigma_mu2 = vec![0.0; l];
            for (mu, s) in sigma_mu2.iter_mut().enumerate() {
                let row: f64 = (0..l)
                    .map(|nu| {
                        let gp = if mu == nu { C64::new(diag[mu], 0.0) } else { C64::new(0.0, 0.0) };
                        (gp - g[(mu, nu)]).norm_sqr()
                    })
                    .sum();
                *s = row / l as f64;
            }
            let sinr = sinr_per_stream(&g, &d.q, &sigma_mu2, noise_power);
            grid.at_mut(n, kd).copy_from_slice(&sinr);
        }
    }
    Ok(grid)
}

/// `(1/N) Σ_n Σ_ℓ log2(1 + p_ℓ σ_ℓ² / σ_w²)` for a design matched to the channel.
pub fn water_filling_se(design: &LinkDesign, noise_power: f64) -> f64 {
    let n = design.subcarriers.len() as f64;
    design
        .subcarriers
        .iter()
        .map(|d| {
            d.sigma
                .iter()
                .zip(&d.power)
                .map(|(s, p)| (1.0 + p * s * s / noise_power).log2())
                .sum::<f64>()
        })
        .sum::<f64>()
        / n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn sinr_hand_example() {
        let g = DMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        let q = DMatrix::<C64>::identity(2, 2);
        let s = sinr_per_stream(&g, &q, &[0.0, 0.0], 1.0);
        assert!((s[0] - 0.5).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-15);
        assert_eq!(sinr_per_stream(&DMatrix::zeros(2, 2), &q, &[0.0, 0.0], 1.0), vec![0.0, 0.0]);
    }

    #[test]
    fn error_covariance_single_row() {
        let gp = DMatrix::<C64>::zeros(3, 3);
        let mut ge = DMatrix::<C64>::zeros(3, 3);
        ge[(1, 0)] = C64::new(1.0, 1.0);
        ge[(1, 2)] = c(2.0);
        let s = error_covariance(&gp, &ge).unwrap();
        assert_eq!(s, vec![0.0, 6.0 / 3.0, 0.0]);
        assert_eq!(error_covariance(&ge, &ge).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn se_examples() {
        let g = SinrGrid::from_vec(8, 2, 3, vec![1.0; 48]).unwrap();
        assert!((spectral_efficiency(&g).unwrap().se_bits_per_s_per_hz - 8.0).abs() < 1e-15);
        let g = SinrGrid::from_vec(2, 1, 1, vec![3.0, 1.0]).unwrap();
        assert!((spectral_efficiency(&g).unwrap().se_bits_per_s_per_hz - 3.0).abs() < 1e-15);
        assert!(spectral_efficiency(&SinrGrid::new(2, 0, 1)).is_err());
    }
}
