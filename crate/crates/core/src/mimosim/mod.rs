//! Monte Carlo MIMO harness: Rayleigh channels, Gray 16-QAM, ZF
//! Tomlinson-Harashima precoding over a decomposition triple, and the MSE
//! and BER experiment drivers.
//!
//! Every random draw comes from a ChaCha stream keyed by
//! `(master seed, trial, point)`, and per-trial results are reduced in trial
//! order, so results do not depend on the rayon thread count.

mod channel;
mod experiment;
mod qam;
mod thp;

pub use channel::{gen_rayleigh, stream_rng, stream_seed, CHANNEL_STREAM};
pub use experiment::{
    mse_curves_for_channels, run_ber_experiment, run_mse_experiment, BerCurve, BerPoint,
    ChannelConfig, DecompositionLabel, MseCurve,
};
pub use qam::{qam16_demap, qam16_map, QAM16_LEVELS, QAM16_NORM};
pub use thp::{modulo_delta, zfthp_link, ZfThp, THP_DELTA};
