//! Monte-Carlo link-level simulator for point-to-point dual-band (sub-6 GHz +
//! mmWave) MIMO-OFDM links.
//!
//! The crate models time-varying Rician channels in both bands, comb pilot
//! training in both TDD directions, in-band least-squares estimation, an
//! out-of-band aided LOS estimate reconstructed from the sub-6 GHz link, the
//! closed-form MRC fusion of the two, SVD precoding with water-filling, and the
//! stream-wise SINR / spectral-efficiency metric used to compare estimators.
//!
//! Realizations are independent work items. With the default `parallel`
//! feature they are distributed over a rayon pool; without it every loop runs
//! sequentially and produces bit-identical results.

pub mod channel;
pub mod combining;
pub mod config;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod metrics;
pub mod montecarlo;
pub mod pilots;
pub mod seed;
pub mod tensor;
pub mod transceiver;

pub use num_complex::Complex64 as C64;

pub use config::{BandConfig, BandId, EstimationMethod, SimConfig};
pub use error::{Error, Result};
pub use seed::{Purpose, SeedTree};
pub use tensor::ChannelTensor;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
