use alloc::vec::Vec;

use super::timer::timer_hits;
use crate::fft::analytic_signal;
use crate::short_time::{CharacteristicSeries, SeriesKind};
use crate::units::seconds_to_samples;
use crate::{AeEvent, Error, Result, SampledSignal};

/// Instantaneous-amplitude detector settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IaConfig {
    /// Envelope threshold in volts.
    pub threshold: f64,
    /// Hit definition time: longest below-threshold gap inside one hit,
    /// seconds.
    pub hdt: f64,
    /// Hit lockout time: dead time after a hit closes, seconds.
    pub hlt: f64,
}

impl IaConfig {
    /// 3 mV threshold, HDT 1 ms, HLT 10 ms.
    pub fn hsu_nielsen() -> Self {
        Self {
            threshold: 3e-3,
            hdt: 1e-3,
            hlt: 10e-3,
        }
    }

    /// 2.25 mV threshold, HDT 100 µs, HLT 15 µs.
    pub fn field_data() -> Self {
        Self {
            threshold: 2.25e-3,
            hdt: 100e-6,
            hlt: 15e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::param("threshold", "must be finite and > 0"));
        }
        if !(self.hdt.is_finite() && self.hdt >= 0.0 && self.hlt.is_finite() && self.hlt >= 0.0) {
            return Err(Error::param("hdt/hlt", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Magnitude of the analytic signal (Hilbert envelope) over the full frame.
pub fn envelope(signal: &SampledSignal) -> Result<CharacteristicSeries> {
    if signal.len() < 8 {
        return Err(Error::TooShort {
            len: signal.len(),
            needed: 8,
        });
    }
    let values: Vec<f64> = analytic_signal(signal.samples())
        .iter()
        .map(|z| z.norm())
        .collect();
    Ok(CharacteristicSeries {
        values,
        kind: SeriesKind::Envelope,
        hop: 1,
        origin_offset: 0,
    })
}

/// Thresholds the Hilbert envelope with hit-definition and lockout timers.
/// The endpoint is the last above-threshold sample of each hit.
pub fn ia_detect(signal: &SampledSignal, cfg: &IaConfig) -> Result<Vec<AeEvent>> {
    cfg.validate()?;
    let env = envelope(signal)?;
    let fs = signal.sample_rate();
    let hits = timer_hits(
        &env.values,
        cfg.threshold,
        seconds_to_samples(cfg.hdt, fs),
        seconds_to_samples(cfg.hlt, fs),
    );
    Ok(hits
        .into_iter()
        .map(|h| AeEvent {
            onset: h.trigger,
            endpoint: h.last_above,
            core_end: None,
            truncated: h.truncated,
        })
        .collect())
}
