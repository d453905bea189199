//! Comb pilot patterns spanning 1, 2 or 4 OFDM symbols per TDD direction.
//!
//! With `M` transmitting antennas and `K_P` pilot symbols per direction, the
//! antennas are split into `K_P` groups of `M/K_P`. Group `g` transmits in
//! symbol `g+1` (forward) and `K_P+g+1` (reverse). Inside its symbol, antenna
//! `t` (1-based) uses the comb with stride `M/K_P` and offset
//! `((t-1) mod (M/K_P)) + 1`, so no two antennas ever share a resource
//! element and every subcarrier of a training symbol carries one pilot.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::complex_normal;
use crate::config::BandConfig;
use crate::error::{Error, Result};
use crate::tensor::ChannelTensor;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Tx-to-Rx, symbols `1..=K_P`.
    Forward,
    /// Rx-to-Tx, symbols `K_P+1..=2K_P`.
    Reverse,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Reverse => "reverse",
        }
    }
}

/// Allocation for one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionGrid {
    pub n_antennas: usize,
    /// Comb stride `n_antennas / K_P`.
    pub stride: usize,
    /// 0-based symbol index of the first training symbol of this direction.
    pub symbol_base: usize,
    /// Pilot values, `[antenna][comb index]`.
    values: Vec<C64>,
    per_antenna: usize,
}

impl DirectionGrid {
    /// 1-based OFDM symbol in which `antenna` (0-based) transmits.
    pub fn symbol(&self, antenna: usize) -> usize {
        self.symbol_base + antenna / self.stride + 1
    }

    /// 0-based pilot subcarriers of `antenna`, ascending.
    pub fn subcarriers(&self, antenna: usize) -> impl Iterator<Item = usize> + '_ {
        let offset = antenna % self.stride;
        (0..self.per_antenna).map(move |j| offset + j * self.stride)
    }

    pub fn pilots_per_antenna(&self) -> usize {
        self.per_antenna
    }

    /// Pilot value of `antenna` at its `j`-th pilot subcarrier.
    pub fn value(&self, antenna: usize, j: usize) -> C64 {
        self.values[antenna * self.per_antenna + j]
    }

    /// Antenna transmitting at (1-based symbol, 0-based subcarrier), if any.
    pub fn antenna_at(&self, symbol: usize, subcarrier: usize) -> Option<usize> {
        let groups = self.n_antennas / self.stride;
        let g = symbol.checked_sub(self.symbol_base + 1)?;
        (g < groups).then(|| g * self.stride + subcarrier % self.stride)
    }

    /// Pilot value sent by `antenna` on `subcarrier`, zero when it is silent.
    pub fn value_at(&self, antenna: usize, subcarrier: usize) -> C64 {
        if subcarrier % self.stride == antenna % self.stride {
            self.value(antenna, subcarrier / self.stride)
        } else {
            C64::new(0.0, 0.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotGrid {
    pub k_p: usize,
    pub n_subcarriers: usize,
    pub forward: DirectionGrid,
    pub reverse: DirectionGrid,
}

/// One pilot resource element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotPosition {
    /// 0-based transmitting antenna.
    pub antenna: usize,
    pub direction: Direction,
    /// 1-based OFDM symbol.
    pub symbol: usize,
    /// 0-based subcarrier.
    pub subcarrier: usize,
    pub value: C64,
}

fn qpsk<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let b: u8 = rng.random_range(0..4);
    let re = if b & 1 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    let im = if b & 2 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    C64::new(re, im)
}

fn direction_grid<R: Rng + ?Sized>(
    n_antennas: usize,
    k_p: usize,
    n_subcarriers: usize,
    symbol_base: usize,
    name: &str,
    rng: &mut R,
) -> Result<DirectionGrid> {
    if n_antennas == 0 || n_antennas % k_p != 0 {
        return Err(Error::Config(format!(
            "K_P must divide {name} (K_P = {k_p}, {name} = {n_antennas})"
        )));
    }
    let stride = n_antennas / k_p;
    if n_subcarriers % stride != 0 {
        return Err(Error::Config(format!(
            "comb stride {stride} must divide the subcarrier count {n_subcarriers}"
        )));
    }
    let per_antenna = n_subcarriers / stride;
    let values = (0..n_antennas * per_antenna).map(|_| qpsk(rng)).collect();
    Ok(DirectionGrid {
        n_antennas,
        stride,
        symbol_base,
        values,
        per_antenna,
    })
}

/// Builds the forward (`m_tx` antennas) and reverse (`m_rx` antennas) comb
/// allocation with unit-modulus QPSK pilot values drawn from `seed`.
pub fn build_pilot_grid(band: &BandConfig, k_p: usize, seed: u64) -> Result<PilotGrid> {
    if !matches!(k_p, 1 | 2 | 4) {
        return Err(Error::Config(format!("K_P must be 1, 2 or 4 (got {k_p})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let forward = direction_grid(band.m_tx, k_p, band.n_subcarriers, 0, "m_tx", &mut rng)?;
    let reverse = direction_grid(band.m_rx, k_p, band.n_subcarriers, k_p, "m_rx", &mut rng)?;
    Ok(PilotGrid {
        k_p,
        n_subcarriers: band.n_subcarriers,
        forward,
        reverse,
    })
}

impl PilotGrid {
    pub fn direction(&self, d: Direction) -> &DirectionGrid {
        match d {
            Direction::Forward => &self.forward,
            Direction::Reverse => &self.reverse,
        }
    }

    pub fn training_symbols(&self) -> usize {
        2 * self.k_p
    }

    pub fn positions(&self) -> Vec<PilotPosition> {
        let mut out = Vec::new();
        for d in [Direction::Forward, Direction::Reverse] {
            let g = self.direction(d);
            for antenna in 0..g.n_antennas {
                for (j, n) in g.subcarriers(antenna).enumerate() {
                    out.push(PilotPosition {
                        antenna,
                        direction: d,
                        symbol: g.symbol(antenna),
                        subcarrier: n,
                        value: g.value(antenna, j),
                    });
                }
            }
        }
        out
    }

    /// CSV dump with 1-based `antenna,direction,symbol,subcarrier` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("antenna,direction,symbol,subcarrier\n");
        for p in self.positions() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                p.antenna + 1,
                p.direction.as_str(),
                p.symbol,
                p.subcarrier + 1
            );
        }
        s
    }
}

/// Fraction of the frame spent on training, `2 K_P / K`.
pub fn pilot_overhead(grid: &PilotGrid, n_symbols_total: usize) -> Result<f64> {
    let training = grid.training_symbols();
    if n_symbols_total <= training {
        return Err(Error::NoDataSymbols {
            total: n_symbols_total,
            training,
        });
    }
    Ok(training as f64 / n_symbols_total as f64)
}

/// Received pilots of one direction, `[local symbol][subcarrier][receive antenna]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionObservations {
    pub n_receive: usize,
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    data: Vec<C64>,
}

impl DirectionObservations {
    /// Received vector at local training symbol `s` (0-based within the
    /// direction) and subcarrier `n`.
    pub fn y(&self, s: usize, n: usize) -> &[C64] {
        let o = (s * self.n_subcarriers + n) * self.n_receive;
        &self.data[o..o + self.n_receive]
    }

    fn y_mut(&mut self, s: usize, n: usize) -> &mut [C64] {
        let o = (s * self.n_subcarriers + n) * self.n_receive;
        &mut self.data[o..o + self.n_receive]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingObservations {
    pub forward: DirectionObservations,
    pub reverse: DirectionObservations,
}

impl TrainingObservations {
    pub fn direction(&self, d: Direction) -> &DirectionObservations {
        match d {
            Direction::Forward => &self.forward,
            Direction::Reverse => &self.reverse,
        }
    }
}

/// Training phase `y[n,k] = H[n,k] φ[n,k] + w[n,k]` in both directions.
///
/// The forward link is observed at the `m_rx` receive antennas during symbols
/// `1..=K_P`; the reverse link uses the reciprocal channel `H[n,k]^T`, is
/// driven by the receive-side array and observed at the `m_tx` transmit
/// antennas during symbols `K_P+1..=2K_P`. Noise is CN(0, σ_w² I); forward
/// noise is drawn before reverse noise from one stream seeded by `seed`.
pub fn transmit_training(
    h: &ChannelTensor,
    grid: &PilotGrid,
    noise_power: f64,
    seed: u64,
) -> Result<TrainingObservations> {
    let (m_rx, m_tx, n_sub, n_sym) = h.dims();
    if n_sub != grid.n_subcarriers
        || grid.forward.n_antennas != m_tx
        || grid.reverse.n_antennas != m_rx
        || n_sym < grid.training_symbols()
    {
        return Err(Error::Shape(format!(
            "pilot grid ({} subcarriers, {}x{} antennas, {} training symbols) does not fit channel {:?}",
            grid.n_subcarriers,
            grid.reverse.n_antennas,
            grid.forward.n_antennas,
            grid.training_symbols(),
            h.dims()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut observe = |d: Direction, n_receive: usize| {
        let g = grid.direction(d);
        let mut obs = DirectionObservations {
            n_receive,
            n_subcarriers: n_sub,
            n_symbols: grid.k_p,
            data: vec![C64::new(0.0, 0.0); grid.k_p * n_sub * n_receive],
        };
        for s in 0..grid.k_p {
            let symbol = g.symbol_base + s + 1;
            for n in 0..n_sub {
                let antenna = g.antenna_at(symbol, n).expect("every training RE carries a pilot");
                let phi = g.value_at(antenna, n);
                let y = obs.y_mut(s, n);
                for (i, yi) in y.iter_mut().enumerate() {
                    let coeff = match d {
                        Direction::Forward => h.get(i, antenna, n, symbol - 1),
                        Direction::Reverse => h.get(antenna, i, n, symbol - 1),
                    };
                    *yi = coeff * phi;
                    if noise_power > 0.0 {
                        *yi += complex_normal(&mut rng, noise_power);
                    }
                }
            }
        }
        obs
    };
    let forward = observe(Direction::Forward, m_rx);
    let reverse = observe(Direction::Reverse, m_tx);
    Ok(TrainingObservations { forward, reverse })
}
