//! Linear-phase FIR band-pass pre-conditioning.
//!
//! Taps are a Kaiser-windowed ideal band-pass. The Kaiser design maps the
//! requested transition width and stop-band attenuation directly to a filter
//! length and shape parameter, and its pass-band ripple equals the stop-band
//! ripple (`10^(-A/20)`), so any attenuation above ~20 dB keeps the pass band
//! within a fraction of a dB.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::fft;
use crate::{Error, Result, SampledSignal};

/// Above this many taps the filter runs through FFT overlap-add.
const DIRECT_TAPS_MAX: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandpassSpec {
    /// Lower pass-band edge in Hz.
    pub low_cut: f64,
    /// Upper pass-band edge in Hz.
    pub high_cut: f64,
    /// Width of each transition band in Hz.
    pub transition_width: f64,
    /// Minimum stop-band attenuation in dB.
    pub stopband_attenuation: f64,
}

impl BandpassSpec {
    /// Checks the band against the Nyquist limit of `sample_rate`. Both
    /// stop-band edges (`low_cut - transition_width` and
    /// `high_cut + transition_width`) must lie strictly inside `(0, fs/2)`.
    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        let nyquist = sample_rate / 2.0;
        if !(self.transition_width.is_finite() && self.transition_width > 0.0) {
            return Err(Error::param("transition_width", "must be > 0"));
        }
        if !(self.stopband_attenuation.is_finite() && self.stopband_attenuation > 0.0) {
            return Err(Error::param("stopband_attenuation", "must be > 0 dB"));
        }
        if !(self.low_cut > 0.0 && self.low_cut < self.high_cut && self.high_cut < nyquist) {
            return Err(Error::param(
                "band",
                "requires 0 < low_cut < high_cut < sample_rate/2",
            ));
        }
        if self.low_cut - self.transition_width <= 0.0 {
            return Err(Error::param(
                "transition_width",
                "lower stop-band edge must stay above DC",
            ));
        }
        if self.high_cut + self.transition_width >= nyquist {
            return Err(Error::param(
                "transition_width",
                "upper stop-band edge must stay below Nyquist",
            ));
        }
        Ok(())
    }

    /// Designs the odd-length, symmetric tap vector for `sample_rate`.
    pub fn design(&self, sample_rate: f64) -> Result<Vec<f64>> {
        self.validate(sample_rate)?;
        let atten = self.stopband_attenuation;
        let delta_omega = 2.0 * PI * self.transition_width / sample_rate;
        let mut len = libm::ceil((atten - 7.95) / (2.285 * delta_omega)).max(0.0) as usize + 1;
        if len.is_multiple_of(2) {
            len += 1;
        }
        let len = len.max(3);
        let beta = kaiser_beta(atten);

        // Cut-offs sit mid-transition so the pass band is [low_cut, high_cut].
        let f1 = (self.low_cut - self.transition_width / 2.0) / sample_rate;
        let f2 = (self.high_cut + self.transition_width / 2.0) / sample_rate;
        let mid = (len - 1) as f64 / 2.0;
        let i0_beta = bessel_i0(beta);
        let taps = (0..len)
            .map(|n| {
                let m = n as f64 - mid;
                let ideal = 2.0 * f2 * sinc(2.0 * f2 * m) - 2.0 * f1 * sinc(2.0 * f1 * m);
                let r = m / mid;
                let w = bessel_i0(beta * libm::sqrt((1.0 - r * r).max(0.0))) / i0_beta;
                ideal * w
            })
            .collect();
        Ok(taps)
    }
}

fn kaiser_beta(atten: f64) -> f64 {
    if atten > 50.0 {
        0.1102 * (atten - 8.7)
    } else if atten >= 21.0 {
        0.5842 * libm::pow(atten - 21.0, 0.4) + 0.07886 * (atten - 21.0)
    } else {
        0.0
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        libm::sin(PI * x) / (PI * x)
    }
}

/// Modified Bessel function of the first kind, order zero (power series).
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Filters `x` with a symmetric odd-length FIR and removes its
/// `(len - 1)/2`-sample group delay; the output has the input's length and
/// time alignment.
pub fn apply_zero_delay(x: &[f64], taps: &[f64]) -> Vec<f64> {
    let delay = (taps.len() - 1) / 2;
    if taps.len() <= DIRECT_TAPS_MAX {
        (0..x.len())
            .map(|n| {
                let center = n + delay;
                taps.iter()
                    .enumerate()
                    .filter_map(|(k, &h)| {
                        center.checked_sub(k).and_then(|i| x.get(i)).map(|&v| h * v)
                    })
                    .sum()
            })
            .collect()
    } else {
        let full = fft::convolve(x, taps);
        full[delay..delay + x.len()].to_vec()
    }
}

/// Band-pass filters `signal` with a linear-phase FIR, delay-compensated.
pub fn bandpass(signal: &SampledSignal, spec: &BandpassSpec) -> Result<SampledSignal> {
    let taps = spec.design(signal.sample_rate())?;
    signal.with_samples(apply_zero_delay(signal.samples(), &taps))
}
