//! Acoustic-emission hit detection built on short-time energy (STE) and the
//! short-time zero-crossing rate (STZCR).
//!
//! The crate is `no_std` (it needs `alloc`) and holds every numerical piece of
//! the pipeline:
//!
//! - [`signal`], [`synth`], [`noise`] and [`filter`]: waveform representation,
//!   the damped-sinusoid source model, calibrated AWGN and FIR band-pass
//!   pre-conditioning.
//! - [`short_time`]: STE, STZCR, the STE first difference and background-noise
//!   statistics.
//! - [`detector`]: the STE-ZCR onset/endpoint state machine.
//! - [`baselines`]: instantaneous-amplitude, STA/LTA and two-step AIC pickers.
//! - [`eval`]: ground-truth matching, confusion counts, error statistics and
//!   detection-quality metrics.
//! - [`campaign`]: deterministic synthetic event populations.
//!
//! File formats, reports, timing and the command-line front end live in the
//! `stezcr` companion crate.

#![no_std]

extern crate alloc;

pub mod baselines;
pub mod campaign;
pub mod detector;
mod error;
pub mod eval;
pub mod fft;
pub mod filter;
pub mod noise;
pub mod short_time;
pub mod signal;
pub mod synth;
pub mod units;

pub use error::{Error, Result};

pub use baselines::{aic_detect, aic_pick, envelope, ia_detect, stalta_detect};
pub use baselines::{AicConfig, IaConfig, StaLtaConfig};
pub use detector::{adjust_itu, compute_itl, detect, AeEvent, StezcrConfig};
pub use eval::{error_stats, match_events, quality_metrics, ConfusionCounts, GroundTruth};
pub use short_time::{estimate_noise, ste, ste_derivative, stzcr, zcr_normalize};
pub use short_time::{CharacteristicSeries, NoiseStats, SeriesKind, WindowFamily, WindowSpec};
pub use signal::SampledSignal;
pub use synth::{synth_ae, AeSourceParams};
