//! Link-level simulator for sampling-jitter impairments in an OFDM system
//! that serves communication and radar sensing from the same waveform.
//!
//! Clock phase noise of a PLL-based oscillator is synthesized from a
//! piecewise PSD mask and converted into per-sample timing deviations of the
//! DAC and ADC. The jittered conversion chain is simulated by fractional-delay
//! resampling (a cubic Farrow interpolator, with an exact sinc double-sum as
//! the reference engine), for complex baseband sampling as well as real
//! digital-IF sampling with DUC/DDC. Constellation quality is reported as
//! per-subcarrier/mean EVM and frame SIR; sensing quality as PPLR, PSLR, ISLR
//! and image SIR of range-Doppler maps.
//!
//! The [`harness`] module and the `simulate` binary drive parameter sweeps
//! over jitter RMS, oversampling factor, subcarrier count, modulation,
//! sampling mode and engine, with deterministic per-tuple seeding.

pub mod analytic;
pub mod commetrics;
pub mod error;
pub mod fft;
pub mod frontend;
pub mod harness;
pub mod io;
pub mod jitter;
pub mod ofdm;
pub mod radar;
pub mod resample;
pub mod window;

pub use error::{Result, SimError};

/// Speed of light in m/s, used to map bistatic range to delay.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;
