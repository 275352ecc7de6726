//! Damped-sinusoid acoustic-emission source model.
//!
//! A transduced AE burst is modelled as
//! `u(t) = A·exp(-(t - T)/γ)·sin(2π·ν₀·(t - T))` for `t ≥ T` and zero before
//! the arrival time `T`. Its envelope `A·exp(-(t - T)/γ)` reaches `e⁻¹ ≈ 36.8 %`
//! of the peak one decay constant after arrival.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Error, Result, SampledSignal};

/// Envelopes this many decay constants past arrival are below 5e-18·A; the
/// stream renderer stops there.
const RENDER_SPAN_DECAYS: f64 = 40.0;

/// Parameters of one damped-sinusoid burst.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeSourceParams {
    /// Peak amplitude `A` in volts.
    pub amplitude: f64,
    /// Arrival time `T` in seconds.
    pub arrival: f64,
    /// Decay constant `γ` in seconds.
    pub decay: f64,
    /// Resonant frequency `ν₀` in Hz.
    pub frequency: f64,
    /// Frame duration in seconds.
    pub duration: f64,
}

impl AeSourceParams {
    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(Error::param("amplitude", "must be finite"));
        }
        if !(self.arrival.is_finite() && self.arrival >= 0.0) {
            return Err(Error::param("arrival", "must be finite and >= 0"));
        }
        if !(self.decay.is_finite() && self.decay > 0.0) {
            return Err(Error::param("decay", "must be finite and > 0"));
        }
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(Error::param("frequency", "must be finite and > 0"));
        }
        if !(self.duration.is_finite() && self.duration > self.arrival) {
            return Err(Error::param("duration", "must exceed the arrival time"));
        }
        Ok(())
    }

    /// Whether the burst decays for at least five time constants inside the
    /// frame. Bursts that are not contained are still synthesized.
    pub fn is_contained(&self) -> bool {
        self.arrival + 5.0 * self.decay <= self.duration
    }

    /// Closed-form envelope `A·exp(-(t - T)/γ)` (zero before arrival).
    pub fn envelope(&self, t: f64) -> f64 {
        if t < self.arrival {
            0.0
        } else {
            self.amplitude * libm::exp(-(t - self.arrival) / self.decay)
        }
    }

    /// Instantaneous value `u(t)`.
    pub fn value(&self, t: f64) -> f64 {
        if t < self.arrival {
            0.0
        } else {
            let dt = t - self.arrival;
            self.amplitude * libm::exp(-dt / self.decay) * libm::sin(2.0 * PI * self.frequency * dt)
        }
    }

    /// Number of samples in the frame at `sample_rate`.
    pub fn frame_len(&self, sample_rate: f64) -> usize {
        crate::units::seconds_to_samples(self.duration, sample_rate)
    }

    /// Adds the burst into `buf` (sample `i` is at `i / sample_rate`),
    /// skipping the region where the envelope has decayed below 5e-18·A.
    pub fn render_into(&self, buf: &mut [f64], sample_rate: f64) {
        let first = libm::ceil(self.arrival * sample_rate).max(0.0) as usize;
        let stop = libm::ceil((self.arrival + RENDER_SPAN_DECAYS * self.decay) * sample_rate);
        let stop = (stop.max(0.0) as usize).min(buf.len());
        for (i, v) in buf.iter_mut().enumerate().take(stop).skip(first) {
            *v += self.value(i as f64 / sample_rate);
        }
    }
}

/// Samples one burst over its whole frame.
pub fn synth_ae(params: &AeSourceParams, sample_rate: f64) -> Result<SampledSignal> {
    params.validate()?;
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::InvalidSampleRate(sample_rate));
    }
    let len = params.frame_len(sample_rate).max(1);
    let samples: Vec<f64> = (0..len)
        .map(|i| params.value(i as f64 / sample_rate))
        .collect();
    SampledSignal::new(samples, sample_rate)
}

/// Sums several bursts into one frame of `duration` seconds.
pub fn synth_stream(
    sources: &[AeSourceParams],
    duration: f64,
    sample_rate: f64,
) -> Result<SampledSignal> {
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::InvalidSampleRate(sample_rate));
    }
    let len = crate::units::seconds_to_samples(duration, sample_rate);
    if len == 0 {
        return Err(Error::EmptySignal);
    }
    let mut buf = alloc::vec![0.0; len];
    for s in sources {
        s.validate()?;
        s.render_into(&mut buf, sample_rate);
    }
    SampledSignal::new(buf, sample_rate)
}
