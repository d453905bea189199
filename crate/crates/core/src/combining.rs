//! Convex fusion of the in-band and out-of-band aided estimates.

use crate::error::{Error, Result};
use crate::estimation::{ChannelEstimate, EstimateSource};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombiningWeight {
    pub w_hat: f64,
}

/// `ŵ = Mσ² / (M/(1+κ̃) + (1+M)σ²)` with `M = m_tx·m_rx`.
///
/// `κ̃ = ∞` is accepted and gives the limit `Mσ²/((1+M)σ²)`.
pub fn compute_weight(m_tx: usize, m_rx: usize, noise_power: f64, kappa_sub6: f64) -> CombiningWeight {
    let m = (m_tx * m_rx) as f64;
    let num = m * noise_power;
    let los_term = if kappa_sub6.is_infinite() { 0.0 } else { m / (1.0 + kappa_sub6) };
    let den = los_term + (1.0 + m) * noise_power;
    let w = if num == 0.0 { 0.0 } else { num / den };
    CombiningWeight { w_hat: w.clamp(0.0, 1.0) }
}

/// `H̄[n] = ŵ·Ĥ_oob[n] + (1−ŵ)·Ĥ_ls[n]`.
pub fn combine_mrc(oob: &ChannelEstimate, inband: &ChannelEstimate, w: CombiningWeight) -> Result<ChannelEstimate> {
    if oob.dims() != inband.dims() {
        return Err(Error::Shape(format!(
            "cannot combine estimates of shape {:?} and {:?}",
            oob.dims(),
            inband.dims()
        )));
    }
    let mut out = inband.clone().with_source(EstimateSource::Combined);
    let w_hat = w.w_hat;
    for (o, a) in out.as_mut_slice().iter_mut().zip(oob.as_slice()) {
        *o = a * w_hat + *o * (1.0 - w_hat);
    }
    Ok(out)
}

/// The conventional design uses the in-band LS estimate as is.
pub fn conventional_estimate(inband: &ChannelEstimate) -> ChannelEstimate {
    inband.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::BandId;
    use crate::C64;

    #[test]
    fn weight_values() {
        assert_eq!(compute_weight(8, 8, 0.0, 3.0).w_hat, 0.0);
        assert!((compute_weight(8, 8, 1.0, 1.0).w_hat - 64.0 / 97.0).abs() < 1e-15);
        assert!((compute_weight(8, 8, 0.5, f64::INFINITY).w_hat - 64.0 / 65.0).abs() < 1e-15);
        assert!((compute_weight(8, 8, 0.5, 1e12).w_hat - 64.0 / 65.0).abs() < 1e-9);
    }

    #[test]
    fn endpoints_and_linearity() {
        let a = ChannelEstimate::from_fn(BandId::MmWave, EstimateSource::OobAided, (2, 2, 3), |r, t, n| {
            C64::new((r + t) as f64, n as f64)
        });
        let b = ChannelEstimate::from_fn(BandId::MmWave, EstimateSource::InBandLs, (2, 2, 3), |r, t, n| {
            C64::new(-(n as f64), (r * t) as f64)
        });
        let w0 = combine_mrc(&a, &b, CombiningWeight { w_hat: 0.0 }).unwrap();
        assert_eq!(w0.as_slice(), b.as_slice());
        assert_eq!(w0.source, EstimateSource::Combined);
        let w1 = combine_mrc(&a, &b, CombiningWeight { w_hat: 1.0 }).unwrap();
        assert_eq!(w1.as_slice(), a.as_slice());

        let zero = ChannelEstimate::zeros(BandId::MmWave, EstimateSource::InBandLs, 2, 2, 3);
        let mut twice = a.clone();
        twice.as_mut_slice().iter_mut().for_each(|c| *c *= 2.0);
        let half = combine_mrc(&twice, &zero, CombiningWeight { w_hat: 0.5 }).unwrap();
        assert_eq!(half.as_slice(), a.as_slice());
    }

    #[test]
    fn shape_mismatch() {
        let a = ChannelEstimate::zeros(BandId::MmWave, EstimateSource::OobAided, 2, 2, 3);
        let b = ChannelEstimate::zeros(BandId::MmWave, EstimateSource::InBandLs, 2, 2, 4);
        assert!(combine_mrc(&a, &b, CombiningWeight { w_hat: 0.5 }).is_err());
    }
}
