use crate::error::{Error, Result};

/// Tapped-delay-line power-delay profile.
#[derive(Debug, Clone, PartialEq)]
pub struct TdlProfile {
    pub delays_s: Vec<f64>,
    /// Normalized tap powers, Σ = 1.
    pub powers: Vec<f64>,
}

/// Ratio of the last tap delay to the RMS delay spread.
const MAX_DELAY_OVER_RMS: f64 = 4.0;

impl TdlProfile {
    pub fn flat() -> Self {
        TdlProfile {
            delays_s: vec![0.0],
            powers: vec![1.0],
        }
    }

    pub fn n_taps(&self) -> usize {
        self.powers.len()
    }

    pub fn rms_delay_spread(&self) -> f64 {
        rms_spread(&self.delays_s, &self.powers)
    }

    pub fn mean_delay(&self) -> f64 {
        self.delays_s.iter().zip(&self.powers).map(|(t, p)| t * p).sum()
    }
}

fn rms_spread(delays: &[f64], powers: &[f64]) -> f64 {
    let m1: f64 = delays.iter().zip(powers).map(|(t, p)| t * p).sum();
    let m2: f64 = delays.iter().zip(powers).map(|(t, p)| t * t * p).sum();
    (m2 - m1 * m1).max(0.0).sqrt()
}

fn exp_powers(n_taps: usize, decay: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n_taps).map(|i| (-decay * i as f64).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

/// Exponential power-delay profile on a uniform delay grid.
///
/// The decay rate is chosen so that the last tap sits at four RMS delay
/// spreads; the grid spacing is then scaled so that the RMS delay spread
/// equals `rms_delay_spread_s`.
pub fn make_tdl_profile(rms_delay_spread_s: f64, n_taps: usize) -> Result<TdlProfile> {
    if !(rms_delay_spread_s.is_finite() && rms_delay_spread_s >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "RMS delay spread must be finite and >= 0 (got {rms_delay_spread_s})"
        )));
    }
    if rms_delay_spread_s == 0.0 {
        return Ok(TdlProfile::flat());
    }
    if n_taps < 2 {
        return Err(Error::InvalidArgument(
            "a dispersive profile needs at least two taps".into(),
        ));
    }
    let unit: Vec<f64> = (0..n_taps).map(|i| i as f64).collect();
    let last = (n_taps - 1) as f64;
    let ratio = |decay: f64| last / rms_spread(&unit, &exp_powers(n_taps, decay));
    // ratio is increasing in the decay rate and below 4 at zero decay.
    let (mut lo, mut hi) = (0.0, 1.0);
    while ratio(hi) < MAX_DELAY_OVER_RMS {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) < MAX_DELAY_OVER_RMS {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let powers = exp_powers(n_taps, 0.5 * (lo + hi));
    let spacing = rms_delay_spread_s / rms_spread(&unit, &powers);
    Ok(TdlProfile {
        delays_s: unit.iter().map(|i| i * spacing).collect(),
        powers,
    })
}
