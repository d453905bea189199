//! In-band LS estimation, method-of-moments K-factor estimation and the
//! out-of-band aided LOS reconstruction.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DMatrixView};

use crate::channel::steering_vector;
use crate::config::{BandConfig, BandId};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, inner};
use crate::pilots::{Direction, PilotGrid, TrainingObservations};
use crate::tensor::ChannelTensor;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateSource {
    InBandLs,
    OobAided,
    Combined,
    Perfect,
}

/// Time-invariant per-subcarrier estimate Ĥ[n] (`m_rx × m_tx`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub band: BandId,
    pub source: EstimateSource,
    m_rx: usize,
    m_tx: usize,
    n_subcarriers: usize,
    data: Vec<C64>,
}

impl ChannelEstimate {
    pub fn zeros(band: BandId, source: EstimateSource, m_rx: usize, m_tx: usize, n_subcarriers: usize) -> Self {
        ChannelEstimate {
            band,
            source,
            m_rx,
            m_tx,
            n_subcarriers,
            data: vec![C64::new(0.0, 0.0); m_rx * m_tx * n_subcarriers],
        }
    }

    /// Builds an estimate from a function of 0-based `(rx, tx, n)`.
    pub fn from_fn(
        band: BandId,
        source: EstimateSource,
        dims: (usize, usize, usize),
        mut f: impl FnMut(usize, usize, usize) -> C64,
    ) -> Self {
        let (m_rx, m_tx, n_sub) = dims;
        let mut e = Self::zeros(band, source, m_rx, m_tx, n_sub);
        for n in 0..n_sub {
            for t in 0..m_tx {
                for r in 0..m_rx {
                    *e.get_mut(r, t, n) = f(r, t, n);
                }
            }
        }
        e
    }

    /// Snapshot of the true channel at 0-based symbol `k`.
    pub fn from_tensor_symbol(h: &ChannelTensor, k: usize, source: EstimateSource) -> Self {
        let (m_rx, m_tx, n_sub, _) = h.dims();
        let mut e = Self::zeros(h.band, source, m_rx, m_tx, n_sub);
        for n in 0..n_sub {
            e.slice_mut(n).copy_from_slice(h.slice(n, k));
        }
        e
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.m_rx, self.m_tx, self.n_subcarriers)
    }

    pub fn m_rx(&self) -> usize {
        self.m_rx
    }

    pub fn m_tx(&self) -> usize {
        self.m_tx
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    #[inline]
    fn offset(&self, r: usize, t: usize, n: usize) -> usize {
        (n * self.m_tx + t) * self.m_rx + r
    }

    #[inline]
    pub fn get(&self, r: usize, t: usize, n: usize) -> C64 {
        self.data[self.offset(r, t, n)]
    }

    #[inline]
    pub fn get_mut(&mut self, r: usize, t: usize, n: usize) -> &mut C64 {
        let o = self.offset(r, t, n);
        &mut self.data[o]
    }

    pub fn slice(&self, n: usize) -> &[C64] {
        let len = self.m_rx * self.m_tx;
        &self.data[n * len..(n + 1) * len]
    }

    pub fn slice_mut(&mut self, n: usize) -> &mut [C64] {
        let len = self.m_rx * self.m_tx;
        &mut self.data[n * len..(n + 1) * len]
    }

    pub fn matrix(&self, n: usize) -> DMatrixView<'_, C64> {
        DMatrixView::from_slice(self.slice(n), self.m_rx, self.m_tx)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn with_source(mut self, source: EstimateSource) -> Self {
        self.source = source;
        self
    }

    /// Mean squared entry error against the true channel at 0-based symbol `k`.
    pub fn mse_against(&self, h: &ChannelTensor, k: usize) -> f64 {
        let mut acc = 0.0;
        for n in 0..self.n_subcarriers {
            acc += self
                .slice(n)
                .iter()
                .zip(h.slice(n, k))
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>();
        }
        acc / self.data.len() as f64
    }
}

/// Linear interpolation of samples at ascending `positions` onto `0..n_total`,
/// holding the nearest sample outside the outermost positions.
pub fn interpolate_linear(positions: &[usize], values: &[C64], n_total: usize) -> Vec<C64> {
    assert_eq!(positions.len(), values.len());
    assert!(!positions.is_empty(), "need at least one sample");
    let mut out = vec![C64::new(0.0, 0.0); n_total];
    let first = positions[0];
    let last = *positions.last().unwrap();
    for o in out.iter_mut().take(first.min(n_total)) {
        *o = values[0];
    }
    for w in 0..positions.len().saturating_sub(1) {
        let (a, b) = (positions[w], positions[w + 1]);
        let (va, vb) = (values[w], values[w + 1]);
        let span = (b - a) as f64;
        for (n, o) in out.iter_mut().enumerate().take(b).skip(a) {
            let x = (n - a) as f64 / span;
            *o = va * (1.0 - x) + vb * x;
        }
    }
    for o in out.iter_mut().skip(last) {
        *o = *values.last().unwrap();
    }
    out
}

/// LS estimate from one training direction, returned in forward orientation
/// (`m_rx × m_tx`).
///
/// At each pilot the estimate is `y/φ`; between an antenna's pilot
/// subcarriers entries are linearly interpolated, outside them the nearest
/// pilot value is held. The reverse direction estimates `H^T` and is
/// transposed back.
pub fn ls_estimate(
    obs: &TrainingObservations,
    grid: &PilotGrid,
    direction: Direction,
    band: BandId,
) -> Result<ChannelEstimate> {
    let g = grid.direction(direction);
    let o = obs.direction(direction);
    let n_sub = grid.n_subcarriers;
    if o.n_subcarriers != n_sub {
        return Err(Error::Shape("observations and pilot grid disagree on subcarriers".into()));
    }
    let (m_rx, m_tx) = match direction {
        Direction::Forward => (o.n_receive, g.n_antennas),
        Direction::Reverse => (g.n_antennas, o.n_receive),
    };
    let mut est = ChannelEstimate::zeros(band, EstimateSource::InBandLs, m_rx, m_tx, n_sub);
    let positions_buf: Vec<Vec<usize>> = (0..g.n_antennas).map(|a| g.subcarriers(a).collect()).collect();
    let mut values = vec![C64::new(0.0, 0.0); g.pilots_per_antenna()];
    for antenna in 0..g.n_antennas {
        let positions = &positions_buf[antenna];
        let s = g.symbol(antenna) - g.symbol_base - 1;
        for i in 0..o.n_receive {
            for (j, &n) in positions.iter().enumerate() {
                let phi = g.value(antenna, j);
                if phi.norm_sqr() == 0.0 {
                    return Err(Error::Config("pilot value is zero".into()));
                }
                values[j] = o.y(s, n)[i] / phi;
            }
            let full = interpolate_linear(positions, &values, n_sub);
            let (r, t) = match direction {
                Direction::Forward => (i, antenna),
                Direction::Reverse => (antenna, i),
            };
            for (n, v) in full.into_iter().enumerate() {
                *est.get_mut(r, t, n) = v;
            }
        }
    }
    Ok(est)
}

/// LS estimate of the link from both TDD directions: the forward estimate and
/// the transposed reverse estimate observe the same reciprocal channel and
/// are averaged.
pub fn two_way_ls_estimate(obs: &TrainingObservations, grid: &PilotGrid, band: BandId) -> Result<ChannelEstimate> {
    let mut fwd = ls_estimate(obs, grid, Direction::Forward, band)?;
    let rev = ls_estimate(obs, grid, Direction::Reverse, band)?;
    for (a, b) in fwd.as_mut_slice().iter_mut().zip(rev.as_slice()) {
        *a = (*a + b) * 0.5;
    }
    Ok(fwd)
}

/// Method-of-moments Rician K-factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KFactorEstimate {
    pub kappa_linear: f64,
}

pub const K_FACTOR_MAX: f64 = 1e6;

/// Per antenna pair, `G_a` and `G_v` are the mean and variance of `|Ĥ|²`
/// over subcarriers and `κ = √(G_a²−G_v) / (G_a − √(G_a²−G_v))` (zero when
/// `G_a² ≤ G_v`). The median over pairs is returned, clamped to `[0, 10⁶]`.
pub fn estimate_k_factor(est: &ChannelEstimate) -> Result<KFactorEstimate> {
    let (m_rx, m_tx, n_sub) = est.dims();
    if n_sub < 2 {
        return Err(Error::InsufficientSamples(format!(
            "K-factor estimation needs at least 2 subcarriers (got {n_sub})"
        )));
    }
    let mut per_pair = Vec::with_capacity(m_rx * m_tx);
    for t in 0..m_tx {
        for r in 0..m_rx {
            let p: Vec<f64> = (0..n_sub).map(|n| est.get(r, t, n).norm_sqr()).collect();
            let ga = p.iter().sum::<f64>() / n_sub as f64;
            let gv = p.iter().map(|x| (x - ga) * (x - ga)).sum::<f64>() / n_sub as f64;
            let disc = ga * ga - gv;
            let kappa = if disc <= 0.0 {
                0.0
            } else {
                let root = disc.sqrt();
                let denom = ga - root;
                if denom <= 0.0 {
                    K_FACTOR_MAX
                } else {
                    root / denom
                }
            };
            per_pair.push(kappa.clamp(0.0, K_FACTOR_MAX));
        }
    }
    per_pair.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let len = per_pair.len();
    let median = if len % 2 == 1 {
        per_pair[len / 2]
    } else {
        0.5 * (per_pair[len / 2 - 1] + per_pair[len / 2])
    };
    Ok(KFactorEstimate {
        kappa_linear: median.clamp(0.0, K_FACTOR_MAX),
    })
}

/// LOS angles `(aod, aoa)` in radians from the peak of the beamforming
/// spectrum `S(ϑ,φ) = Σ_n |a_Rx(φ)^H Ĥ[n] a_Tx(ϑ)|²`.
///
/// The spectrum is evaluated on a uniform grid of `grid_resolution` points
/// per axis over [-90°, 90°], then refined by one parabolic step per axis.
pub fn estimate_angles(est: &ChannelEstimate, spacing_wavelengths: f64, grid_resolution: usize) -> (f64, f64) {
    let (m_rx, m_tx, n_sub) = est.dims();
    let g = grid_resolution.max(3);
    let angles: Vec<f64> = (0..g)
        .map(|i| -FRAC_PI_2 + PI * i as f64 / (g - 1) as f64)
        .collect();

    // Gram matrix of vec(Ĥ[n]) folded into a 2-D lag autocorrelation
    // R[Δr, Δt] = Σ_n Σ Ĥ[r,t] conj(Ĥ[r',t']) over r-r' = Δr, t-t' = Δt.
    let len = m_rx * m_tx;
    let stacked = DMatrix::from_column_slice(len, n_sub, est.as_slice());
    let gram = &stacked * stacked.adjoint();
    let (lr, lt) = (2 * m_rx - 1, 2 * m_tx - 1);
    let mut lag = vec![C64::new(0.0, 0.0); lr * lt];
    for t in 0..m_tx {
        for r in 0..m_rx {
            let i = t * m_rx + r;
            for t2 in 0..m_tx {
                for r2 in 0..m_rx {
                    let j = t2 * m_rx + r2;
                    let dr = r + m_rx - 1 - r2;
                    let dt = t + m_tx - 1 - t2;
                    lag[dr * lt + dt] += gram[(i, j)];
                }
            }
        }
    }

    let c = 2.0 * PI * spacing_wavelengths;
    let sines: Vec<f64> = angles.iter().map(|a| a.sin()).collect();
    // Partial transform over Δr for every AoA grid point.
    let mut partial = vec![C64::new(0.0, 0.0); g * lt];
    for (ia, s) in sines.iter().enumerate() {
        for dr in 0..lr {
            let w = C64::from_polar(1.0, c * (dr as f64 - (m_rx - 1) as f64) * s);
            for dt in 0..lt {
                partial[ia * lt + dt] += lag[dr * lt + dt] * w;
            }
        }
    }
    let tx_phasors: Vec<C64> = sines
        .iter()
        .flat_map(|s| (0..lt).map(move |dt| C64::from_polar(1.0, -c * (dt as f64 - (m_tx - 1) as f64) * s)))
        .collect();
    let spectrum = |ia: usize, id: usize| -> f64 {
        let p = &partial[ia * lt..(ia + 1) * lt];
        let w = &tx_phasors[id * lt..(id + 1) * lt];
        p.iter().zip(w).map(|(a, b)| a * b).sum::<C64>().re
    };

    let mut best = (0usize, 0usize, f64::NEG_INFINITY);
    let mut grid_vals = vec![0.0; g * g];
    for ia in 0..g {
        for id in 0..g {
            let v = spectrum(ia, id);
            grid_vals[ia * g + id] = v;
            if v > best.2 {
                best = (ia, id, v);
            }
        }
    }
    let (ia, id, s0) = best;
    let step = PI / (g - 1) as f64;
    let refine = |minus: Option<f64>, plus: Option<f64>| -> f64 {
        match (minus, plus) {
            (Some(sm), Some(sp)) => {
                let curv = sm - 2.0 * s0 + sp;
                if (sm - sp).abs() <= 1e-12 * s0.abs() || curv >= 0.0 {
                    0.0
                } else {
                    (0.5 * (sm - sp) / curv).clamp(-0.5, 0.5)
                }
            }
            _ => 0.0,
        }
    };
    let at = |a: usize, d: usize| grid_vals[a * g + d];
    let d_aoa = refine(
        ia.checked_sub(1).map(|a| at(a, id)),
        (ia + 1 < g).then(|| at(ia + 1, id)),
    );
    let d_aod = refine(
        id.checked_sub(1).map(|d| at(ia, d)),
        (id + 1 < g).then(|| at(ia, id + 1)),
    );
    let aoa = (angles[ia] + d_aoa * step).clamp(-FRAC_PI_2, FRAC_PI_2);
    let aod = (angles[id] + d_aod * step).clamp(-FRAC_PI_2, FRAC_PI_2);
    (aod, aoa)
}

/// Frequency-flat rank-1 estimate `g·A` with `A = a_Rx(φ̂) a_Tx(ϑ̂)^H` and
/// `g = (1/N) Σ_n ⟨A, Ĥ[n]⟩ / ‖A‖_F²` projected from the in-band estimate.
pub fn oob_aided_estimate(angles: (f64, f64), inband: &ChannelEstimate, band_mmw: &BandConfig) -> Result<ChannelEstimate> {
    let (aod, aoa) = angles;
    if !(aod.is_finite() && aoa.is_finite()) {
        return Err(Error::InvalidArgument("angles must be finite".into()));
    }
    let (m_rx, m_tx, n_sub) = inband.dims();
    if (m_rx, m_tx) != (band_mmw.m_rx, band_mmw.m_tx) {
        return Err(Error::Shape(format!(
            "in-band estimate is {m_rx}x{m_tx}, band expects {}x{}",
            band_mmw.m_rx, band_mmw.m_tx
        )));
    }
    let a_rx = steering_vector(m_rx, band_mmw.element_spacing_wavelengths, aoa);
    let a_tx = steering_vector(m_tx, band_mmw.element_spacing_wavelengths, aod);
    let a = &a_rx * a_tx.adjoint();
    let a_slice = a.as_slice();
    let norm = frobenius_sq(a_slice);
    let gain = (0..n_sub).map(|n| inner(a_slice, inband.slice(n))).sum::<C64>() / (norm * n_sub as f64);
    let mut out = ChannelEstimate::zeros(inband.band, EstimateSource::OobAided, m_rx, m_tx, n_sub);
    for n in 0..n_sub {
        for (o, v) in out.slice_mut(n).iter_mut().zip(a_slice) {
            *o = v * gain;
        }
    }
    Ok(out)
}
