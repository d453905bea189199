//! Dual-band Rician channel synthesis.
//!
//! H[n,k] = √η √(κ/(1+κ)) H_fs[k] + √η √(1/(1+κ)) H_sp[n,k], where the
//! free-space part is a rank-1 LOS term built from ULA steering vectors and a
//! Doppler phasor, and the stochastic part is an i.i.d.-per-antenna
//! tapped-delay line whose taps evolve in time as independent Jakes
//! sum-of-sinusoids processes.

mod jakes;
mod los;
mod stochastic;
mod tdl;

pub use jakes::{jakes_autocorrelation_check, JakesConfig, JakesProcess, DEFAULT_SINUSOIDS};
pub use los::{free_space_channel, free_space_sequence, sample_geometry, steering_vector, LosGeometry};
pub use stochastic::{compose_channel, stochastic_channel, symbol_time_s};
pub use tdl::{make_tdl_profile, TdlProfile};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::C64;

/// Draws one sample of CN(0, variance).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}
