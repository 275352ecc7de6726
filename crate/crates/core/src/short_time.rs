//! Short-time analysis: windowed energy, windowed zero-crossing rate, the
//! energy first difference, and background-noise statistics.
//!
//! Every series is causal. Output `k` summarizes source samples
//! `kT - N + 1 ..= kT` for window length `N` and hop `T`; samples before the
//! frame start are treated as zeros, so an `L`-sample signal yields
//! `ceil(L / T)` values and value `k` is aligned to source sample `kT`.
//!
//! Window weights are applied unnormalized: `w(j)` multiplies the sample `j`
//! steps behind the newest one. Hamming uses the 0.54/0.46 coefficients.
//! Energy values are therefore in V²·samples scaled by the window gain.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Error, Result, SampledSignal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowFamily {
    Rectangular,
    Hamming,
    Hann,
}

/// Window family, length `N` and hop `T` (both in samples).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowSpec {
    pub family: WindowFamily,
    pub length: usize,
    pub hop: usize,
}

impl WindowSpec {
    pub fn new(family: WindowFamily, length: usize, hop: usize) -> Result<Self> {
        let w = Self {
            family,
            length,
            hop,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return Err(Error::param("window.length", "must be at least 2 samples"));
        }
        if self.hop == 0 || self.hop >= self.length {
            return Err(Error::param("window.hop", "requires 1 <= hop < length"));
        }
        Ok(())
    }

    /// Checks the window against a signal of `len` samples.
    pub fn validate_for(&self, len: usize) -> Result<()> {
        self.validate()?;
        if self.length > len {
            return Err(Error::WindowTooLong {
                window: self.length,
                signal: len,
            });
        }
        Ok(())
    }

    /// Weights `w(0..N)`; `w(j)` applies to the sample `j` steps in the past.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.length;
        let denom = (n - 1) as f64;
        (0..n)
            .map(|j| {
                let c = libm::cos(2.0 * PI * j as f64 / denom);
                match self.family {
                    WindowFamily::Rectangular => 1.0,
                    WindowFamily::Hamming => 0.54 - 0.46 * c,
                    WindowFamily::Hann => 0.5 - 0.5 * c,
                }
            })
            .collect()
    }

    /// Number of series values for a signal of `len` samples.
    pub fn series_len(&self, len: usize) -> usize {
        len.div_ceil(self.hop)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    Ste,
    Stzcr,
    SteDerivative,
    Envelope,
    Ratio,
}

/// A characteristic function aligned to its source signal: `values[i]`
/// belongs to source sample `origin_offset + i·hop`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicSeries {
    pub values: Vec<f64>,
    pub kind: SeriesKind,
    pub hop: usize,
    pub origin_offset: usize,
}

impl CharacteristicSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Source sample index of series index `i`.
    pub fn sample_index(&self, i: usize) -> usize {
        self.origin_offset + i * self.hop
    }
}

/// Dot product with four independent accumulators.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Correlates a per-sample sequence with the causal window at every hop.
fn windowed_sum(per_sample: &[f64], win: &WindowSpec) -> Vec<f64> {
    let n = win.length;
    let mut padded = alloc::vec![0.0; n - 1];
    padded.extend_from_slice(per_sample);
    let mut reversed = win.weights();
    reversed.reverse();
    (0..win.series_len(per_sample.len()))
        .map(|k| {
            let at = k * win.hop;
            dot(&padded[at..at + n], &reversed)
        })
        .collect()
}

/// Short-time energy, `E[n̂] = Σ_{m=n̂-N+1}^{n̂} x(m)²·w(n̂ - m)`.
pub fn ste(signal: &SampledSignal, win: &WindowSpec) -> Result<CharacteristicSeries> {
    win.validate_for(signal.len())?;
    let energy: Vec<f64> = signal.samples().iter().map(|v| v * v).collect();
    Ok(CharacteristicSeries {
        values: windowed_sum(&energy, win),
        kind: SeriesKind::Ste,
        hop: win.hop,
        origin_offset: 0,
    })
}

/// Rectangular-window short-time energy by a running sum: O(L) instead of
/// O(L·N). Matches [`ste`] to rounding; the sum is compensated and
/// re-anchored from scratch every window length so errors cannot accumulate
/// across the frame.
pub fn ste_sliding(signal: &SampledSignal, win: &WindowSpec) -> Result<CharacteristicSeries> {
    win.validate_for(signal.len())?;
    if win.family != WindowFamily::Rectangular {
        return Err(Error::param(
            "window.family",
            "the running-sum path needs a rectangular window",
        ));
    }
    let x = signal.samples();
    let n = win.length;
    let len = x.len();
    let mut full = Vec::with_capacity(len);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let add = |sum: &mut f64, comp: &mut f64, v: f64| {
        let t = *sum + v;
        if sum.abs() >= v.abs() {
            *comp += (*sum - t) + v;
        } else {
            *comp += (v - t) + *sum;
        }
        *sum = t;
    };
    for i in 0..len {
        if i % n == 0 && i >= n {
            // Re-anchor: exact window sum in the same order as the direct form.
            let window = &x[i + 1 - n..i];
            sum = window.iter().map(|v| v * v).sum();
            comp = 0.0;
            add(&mut sum, &mut comp, x[i] * x[i]);
        } else {
            add(&mut sum, &mut comp, x[i] * x[i]);
            if i >= n {
                let old = x[i - n];
                add(&mut sum, &mut comp, -(old * old));
            }
        }
        full.push((sum + comp).max(0.0));
    }
    let values = full.into_iter().step_by(win.hop).collect();
    Ok(CharacteristicSeries {
        values,
        kind: SeriesKind::Ste,
        hop: win.hop,
        origin_offset: 0,
    })
}

/// Sign with `sgn(0) = +1`.
#[inline]
fn sgn(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Short-time zero-crossing rate per sample,
/// `Z[n̂] = 1/(2N)·Σ |sgn x(m) - sgn x(m-1)|·w(n̂ - m)`, in `[0, 1]`.
///
/// `sgn(0) = +1`, so runs of exact zeros contribute no crossings, and the
/// zero-extended history before the frame counts as positive.
pub fn stzcr(signal: &SampledSignal, win: &WindowSpec) -> Result<CharacteristicSeries> {
    win.validate_for(signal.len())?;
    let x = signal.samples();
    let mut prev = 1.0;
    // |sgn diff| is 0 or 2; store it halved and fold the 2 into 1/N.
    let crossings: Vec<f64> = x
        .iter()
        .map(|&v| {
            let s = sgn(v);
            let c = if s != prev { 1.0 } else { 0.0 };
            prev = s;
            c
        })
        .collect();
    let scale = 1.0 / win.length as f64;
    let values = windowed_sum(&crossings, win)
        .into_iter()
        .map(|v| v * scale)
        .collect();
    Ok(CharacteristicSeries {
        values,
        kind: SeriesKind::Stzcr,
        hop: win.hop,
        origin_offset: 0,
    })
}

/// First difference of an STE series, `d[i] = s[i] - s[i-1]`, `d[0] = 0`.
pub fn ste_derivative(series: &CharacteristicSeries) -> Result<CharacteristicSeries> {
    if series.kind != SeriesKind::Ste {
        return Err(Error::WrongKind {
            expected: SeriesKind::Ste,
            actual: series.kind,
        });
    }
    if series.len() < 2 {
        return Err(Error::TooShort {
            len: series.len(),
            needed: 2,
        });
    }
    let v = &series.values;
    let values = core::iter::once(0.0)
        .chain(v.windows(2).map(|w| w[1] - w[0]))
        .collect();
    Ok(CharacteristicSeries {
        values,
        kind: SeriesKind::SteDerivative,
        hop: series.hop,
        origin_offset: series.origin_offset,
    })
}

/// Crossings per `M = τ·F_s` samples for a per-sample rate `z`.
pub fn zcr_normalize(z: f64, interval: f64, sample_rate: f64) -> Result<f64> {
    if !(interval.is_finite() && interval > 0.0) {
        return Err(Error::param("interval", "must be > 0"));
    }
    Ok(interval * sample_rate * z)
}

/// Background-noise summary of a series segment: `level = mean + α·std`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub alpha: f64,
}

impl NoiseStats {
    pub fn level(&self) -> f64 {
        self.mean + self.alpha * self.std
    }
}

/// Population mean and standard deviation of `series[start..start + span]`.
pub fn estimate_noise(
    series: &CharacteristicSeries,
    start: usize,
    span: usize,
    alpha: f64,
) -> Result<NoiseStats> {
    if span < 2 || start.checked_add(span).is_none_or(|end| end > series.len()) {
        return Err(Error::SliceOutOfRange {
            start,
            span,
            len: series.len(),
        });
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::param("alpha", "must be finite and >= 0"));
    }
    let (mean, std) = mean_std(&series.values[start..start + span]);
    Ok(NoiseStats { mean, std, alpha })
}

/// Welford's running mean and population standard deviation.
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = if values.is_empty() {
        0.0
    } else {
        (m2 / values.len() as f64).max(0.0)
    };
    (mean, libm::sqrt(var))
}
