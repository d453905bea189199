use std::f64::consts::PI;

use rand::Rng;

use crate::C64;

pub const DEFAULT_SINUSOIDS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JakesConfig {
    pub n_sinusoids: usize,
    pub max_doppler_hz: f64,
}

/// Unit-power sum-of-sinusoids fading process
/// `g(t) = S^{-1/2} Σ_s exp(j(2π ν_max cos(α_s) t + ψ_s))` with arrival
/// angles `α_s` and phases `ψ_s` drawn uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct JakesProcess {
    pub max_doppler_hz: f64,
    /// Per-sinusoid Doppler frequency `ν_max cos(α_s)`.
    frequencies_hz: Vec<f64>,
    phases_rad: Vec<f64>,
}

impl JakesProcess {
    pub fn new<R: Rng + ?Sized>(cfg: JakesConfig, rng: &mut R) -> Self {
        let n = cfg.n_sinusoids.max(1);
        let mut frequencies_hz = Vec::with_capacity(n);
        let mut phases_rad = Vec::with_capacity(n);
        for _ in 0..n {
            let alpha: f64 = rng.random_range(-PI..PI);
            let psi: f64 = rng.random_range(-PI..PI);
            frequencies_hz.push(cfg.max_doppler_hz * alpha.cos());
            phases_rad.push(psi);
        }
        JakesProcess {
            max_doppler_hz: cfg.max_doppler_hz,
            frequencies_hz,
            phases_rad,
        }
    }

    pub fn n_sinusoids(&self) -> usize {
        self.phases_rad.len()
    }

    fn scale(&self) -> f64 {
        1.0 / (self.n_sinusoids() as f64).sqrt()
    }

    pub fn sample(&self, t: f64) -> C64 {
        let s: C64 = self
            .frequencies_hz
            .iter()
            .zip(&self.phases_rad)
            .map(|(f, p)| C64::from_polar(1.0, 2.0 * PI * f * t + p))
            .sum();
        s * self.scale()
    }

    /// Samples at `t0 + i·dt` for `i in 0..n`, written into `out`.
    ///
    /// Uses a per-sinusoid phasor recurrence; error grows linearly in `n` at
    /// roughly machine precision per step.
    pub fn sample_uniform(&self, t0: f64, dt: f64, out: &mut [C64]) {
        out.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
        for (f, p) in self.frequencies_hz.iter().zip(&self.phases_rad) {
            let step = C64::from_polar(1.0, 2.0 * PI * f * dt);
            let mut z = C64::from_polar(1.0, 2.0 * PI * f * t0 + p);
            for o in out.iter_mut() {
                *o += z;
                z *= step;
            }
        }
        let s = self.scale();
        out.iter_mut().for_each(|c| *c *= s);
    }

    /// Empirical normalized autocorrelation `Re E[g(t+τ) g*(t)] / E|g|²`
    /// from `n_samples` samples spaced `dt` apart. Lags are rounded to the
    /// sample grid.
    pub fn empirical_autocorrelation(&self, lags_s: &[f64], dt: f64, n_samples: usize) -> Vec<f64> {
        let max_lag = lags_s
            .iter()
            .map(|l| (l / dt).round() as usize)
            .max()
            .unwrap_or(0);
        let mut buf = vec![C64::new(0.0, 0.0); n_samples + max_lag];
        self.sample_uniform(0.0, dt, &mut buf);
        let power: f64 = buf[..n_samples].iter().map(|c| c.norm_sqr()).sum::<f64>() / n_samples as f64;
        lags_s
            .iter()
            .map(|l| {
                let lag = (l / dt).round() as usize;
                let acc: C64 = (0..n_samples).map(|i| buf[i + lag] * buf[i].conj()).sum();
                acc.re / n_samples as f64 / power
            })
            .collect()
    }
}

/// Empirical autocorrelation of one process at the given lags (seconds),
/// using 4000 samples spaced `0.05 / ν_max` apart. A static process is
/// perfectly correlated at every lag.
pub fn jakes_autocorrelation_check(jakes: &JakesProcess, lags_s: &[f64]) -> Vec<f64> {
    if jakes.max_doppler_hz <= 0.0 {
        return vec![1.0; lags_s.len()];
    }
    let dt = 0.05 / jakes.max_doppler_hz;
    jakes.empirical_autocorrelation(lags_s, dt, 4000)
}
