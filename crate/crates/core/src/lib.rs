//! Simulation of a mmWave radio that shares its band with a colocated radar.
//!
//! Radio `i` sits next to radar `r`. When `i` transmits to `j` it leaks into
//! the radar receiver through the scene; when `i` receives from `k` the radar
//! transmitter leaks into it. Both leaks are suppressed in the baseband stage
//! of `i`'s hybrid beamformer: a regularized zero-forcing precoder on
//! transmit and an LMMSE combiner on receive, designed from the interference
//! channels the radar's scene estimate provides.
//!
//! Modules, bottom up:
//! - [`array`]: ULA steering vectors and DFT codebooks
//! - [`channel`]: radar scene, clustered channels, interference channels
//! - [`beamforming`]: beamtraining, SVD/RZF/LMMSE stages, normalization
//! - [`metrics`]: spectral efficiency, radar SIR, empirical CDFs
//! - [`sim`]: seeded Monte Carlo trials and sweeps
//! - [`config`], [`report`], [`dump`]: file formats

pub mod array;
pub mod beamforming;
pub mod channel;
pub mod config;
pub mod dump;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod random;
pub mod report;
pub mod sim;

pub use error::{Error, Result};

/// Complex sample type used throughout.
pub type C64 = nalgebra::Complex<f64>;
