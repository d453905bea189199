//! Link design from a channel estimate: compact SVD per subcarrier,
//! water-filling over streams, and the data-phase input-output relation.

use nalgebra::{DMatrix, DMatrixView, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::channel::complex_normal;
use crate::config::BandId;
use crate::error::{Error, Result};
use crate::estimation::ChannelEstimate;
use crate::linalg::compact_svd;
use crate::tensor::ChannelTensor;
use crate::C64;

/// Singular values below this fraction of the largest are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Precoder/combiner pair and power loading for one subcarrier.
#[derive(Debug, Clone)]
pub struct SubcarrierDesign {
    /// Combiner `Q̄`, `m_rx × ℓ_max`.
    pub q: DMatrix<C64>,
    /// Precoder `F̄`, `m_tx × ℓ_max`.
    pub f: DMatrix<C64>,
    pub sigma: Vec<f64>,
    pub power: Vec<f64>,
    /// No stream has a nonzero singular value; all power is zero.
    pub dead: bool,
    qh: DMatrix<C64>,
    fp: DMatrix<C64>,
}

impl SubcarrierDesign {
    pub fn from_parts(q: DMatrix<C64>, f: DMatrix<C64>, sigma: Vec<f64>, power: Vec<f64>) -> Self {
        let dead = power.iter().all(|&p| p == 0.0);
        let qh = q.adjoint();
        let mut fp = f.clone();
        for (mut col, p) in fp.column_iter_mut().zip(&power) {
            col *= C64::new(p.sqrt(), 0.0);
        }
        SubcarrierDesign { q, f, sigma, power, dead, qh, fp }
    }

    pub fn n_streams(&self) -> usize {
        self.sigma.len()
    }

    /// `Q̄^H`.
    pub fn combiner_adjoint(&self) -> &DMatrix<C64> {
        &self.qh
    }

    /// `F̄ P̄^{1/2}`.
    pub fn loaded_precoder(&self) -> &DMatrix<C64> {
        &self.fp
    }
}

#[derive(Debug, Clone)]
pub struct LinkDesign {
    pub band: BandId,
    pub m_rx: usize,
    pub m_tx: usize,
    pub p_total: f64,
    pub subcarriers: Vec<SubcarrierDesign>,
}

impl LinkDesign {
    pub fn n_streams(&self) -> usize {
        self.m_rx.min(self.m_tx)
    }

    pub fn n_dead(&self) -> usize {
        self.subcarriers.iter().filter(|s| s.dead).count()
    }
}

/// Water-filling `p_ℓ = max(0, μ − σ_w²/σ_ℓ²)` with `Σ p_ℓ = p_total`.
///
/// `sigma` must be nonincreasing. Streams whose singular value is zero (or
/// below [`RANK_TOLERANCE`] relative to the largest) get no power; if none
/// remain the loading is all zeros.
pub fn water_filling(sigma: &[f64], noise_power: f64, p_total: f64) -> Vec<f64> {
    let mut power = vec![0.0; sigma.len()];
    let top = sigma.iter().cloned().fold(0.0f64, f64::max);
    if top <= 0.0 || p_total <= 0.0 {
        return power;
    }
    let usable = sigma.iter().take_while(|&&s| s > RANK_TOLERANCE * top).count();
    let inv: Vec<f64> = sigma[..usable].iter().map(|s| noise_power / (s * s)).collect();
    let mut active = usable;
    let mut mu = 0.0;
    while active > 0 {
        mu = (p_total + inv[..active].iter().sum::<f64>()) / active as f64;
        if mu > inv[active - 1] {
            break;
        }
        active -= 1;
    }
    for (p, v) in power.iter_mut().zip(&inv[..active]) {
        *p = (mu - v).max(0.0);
    }
    power
}

pub fn design_subcarrier(h: DMatrixView<'_, C64>, p_total: f64, noise_power: f64) -> SubcarrierDesign {
    let svd = compact_svd(h);
    let power = water_filling(&svd.sigma, noise_power, p_total);
    SubcarrierDesign::from_parts(svd.q, svd.f, svd.sigma, power)
}

/// Per-subcarrier SVD design with water-filling at `p_total` per subcarrier.
pub fn design_link(est: &ChannelEstimate, p_total: f64, noise_power: f64) -> Result<LinkDesign> {
    if !(p_total > 0.0) {
        return Err(Error::InvalidArgument(format!("p_total must be positive (got {p_total})")));
    }
    if !(noise_power >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise power must be nonnegative (got {noise_power})")));
    }
    if !est.as_slice().iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        return Err(Error::InvalidArgument("channel estimate has non-finite entries".into()));
    }
    let n_sub = est.n_subcarriers();
    let one = |n: usize| design_subcarrier(est.matrix(n), p_total, noise_power);
    #[cfg(feature = "parallel")]
    let subcarriers: Vec<SubcarrierDesign> = (0..n_sub).into_par_iter().map(one).collect();
    #[cfg(not(feature = "parallel"))]
    let subcarriers: Vec<SubcarrierDesign> = (0..n_sub).map(one).collect();
    Ok(LinkDesign {
        band: est.band,
        m_rx: est.m_rx(),
        m_tx: est.m_tx(),
        p_total,
        subcarriers,
    })
}

/// Data symbols `x[ℓ, n, k]` for the data phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Payload {
    pub n_streams: usize,
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    data: Vec<C64>,
}

impl Payload {
    /// Unit-modulus QPSK payload.
    pub fn qpsk(n_streams: usize, n_subcarriers: usize, n_symbols: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let data = (0..n_streams * n_subcarriers * n_symbols)
            .map(|_| {
                let b: u8 = rng.random_range(0..4);
                C64::new(if b & 1 == 0 { s } else { -s }, if b & 2 == 0 { s } else { -s })
            })
            .collect();
        Payload {
            n_streams,
            n_subcarriers,
            n_symbols,
            data,
        }
    }

    pub fn from_fn(dims: (usize, usize, usize), mut f: impl FnMut(usize, usize, usize) -> C64) -> Self {
        let (l, n_sub, n_sym) = dims;
        let mut data = Vec::with_capacity(l * n_sub * n_sym);
        for k in 0..n_sym {
            for n in 0..n_sub {
                for s in 0..l {
                    data.push(f(s, n, k));
                }
            }
        }
        Payload {
            n_streams: l,
            n_subcarriers: n_sub,
            n_symbols: n_sym,
            data,
        }
    }

    /// Stream vector `x[n, k]` (0-based data symbol).
    pub fn x(&self, n: usize, k: usize) -> &[C64] {
        let start = (k * self.n_subcarriers + n) * self.n_streams;
        &self.data[start..start + self.n_streams]
    }
}

/// Received streams `y[n, k]`, one `ℓ_max` vector per subcarrier and data symbol.
#[derive(Debug, Clone)]
pub struct DataObservations {
    pub n_streams: usize,
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    data: Vec<C64>,
}

impl DataObservations {
    pub fn y(&self, n: usize, k: usize) -> &[C64] {
        let start = (k * self.n_subcarriers + n) * self.n_streams;
        &self.data[start..start + self.n_streams]
    }
}

/// `y[n,k] = Q̄^H H[n,k] F̄ P̄^{1/2} x[n,k] + Q̄^H w[n,k]` for the symbols
/// `first_data_symbol ..` (0-based) of `h`, one per payload symbol.
pub fn transmit_data(
    h: &ChannelTensor,
    design: &LinkDesign,
    payload: &Payload,
    first_data_symbol: usize,
    noise_power: f64,
    seed: u64,
) -> Result<DataObservations> {
    let (m_rx, m_tx, n_sub, n_sym) = h.dims();
    let l = design.n_streams();
    if (design.m_rx, design.m_tx) != (m_rx, m_tx) || design.subcarriers.len() != n_sub {
        return Err(Error::Shape("design does not match channel dimensions".into()));
    }
    if payload.n_streams != l || payload.n_subcarriers != n_sub {
        return Err(Error::Shape("payload does not match design".into()));
    }
    if first_data_symbol + payload.n_symbols > n_sym {
        return Err(Error::Shape(format!(
            "data symbols {}..{} exceed the channel's {n_sym} symbols",
            first_data_symbol,
            first_data_symbol + payload.n_symbols
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(l * n_sub * payload.n_symbols);
    for kd in 0..payload.n_symbols {
        for n in 0..n_sub {
            let d = &design.subcarriers[n];
            let hk = h.matrix(n, first_data_symbol + kd);
            let x = DVector::from_column_slice(payload.x(n, kd));
            let w = DVector::from_fn(m_rx, |_, _| complex_normal(&mut rng, noise_power));
            let y = d.combiner_adjoint() * (hk * (d.loaded_precoder() * x) + w);
            data.extend(y.iter());
        }
    }
    Ok(DataObservations {
        n_streams: l,
        n_subcarriers: n_sub,
        n_symbols: payload.n_symbols,
        data,
    })
}
