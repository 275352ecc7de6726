use alloc::vec::Vec;

use super::stalta::ratio_of;
use super::timer::timer_hits;
use crate::units::seconds_to_samples;
use crate::{AeEvent, Error, Result, SampledSignal};

const VAR_FLOOR: f64 = 1e-20;

/// Two-step AIC picker settings.
///
/// Coarse triggering runs the hit timers on the STA/LTA ratio of Allen's
/// characteristic function. Each trigger `t` is refined twice:
///
/// - window 1 spans `[t - window1_span, t + end_delay1]`;
/// - window 2 spans `[p1 - start_delay2, p1 + end_delay2]` around the first
///   pick `p1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AicConfig {
    /// Ratio level that opens a coarse hit.
    pub coarse_threshold: f64,
    pub window1_span: f64,
    pub end_delay1: f64,
    pub start_delay2: f64,
    pub end_delay2: f64,
    /// Allen's weight on the squared first difference.
    pub weighting_r: f64,
    pub hdt: f64,
    pub hlt: f64,
    /// Short average of the coarse ratio, seconds.
    pub cf_sta_span: f64,
    /// Long average of the coarse ratio, seconds.
    pub cf_lta_span: f64,
}

impl AicConfig {
    pub fn hsu_nielsen() -> Self {
        Self {
            coarse_threshold: 4.0,
            window1_span: 1.5e-3,
            end_delay1: 25e-6,
            start_delay2: 100e-6,
            end_delay2: 10e-6,
            weighting_r: 4.0,
            hdt: 100e-6,
            hlt: 10e-3,
            cf_sta_span: 75e-6,
            cf_lta_span: 1.0,
        }
    }

    pub fn field_data() -> Self {
        Self {
            coarse_threshold: 4.0,
            window1_span: 75e-6,
            end_delay1: 10e-6,
            start_delay2: 20e-6,
            end_delay2: 5e-6,
            weighting_r: 4.0,
            hdt: 100e-6,
            hlt: 15e-6,
            cf_sta_span: 25e-6,
            cf_lta_span: 10e-3,
        }
    }

    /// Length of the second window, seconds.
    pub fn window2_span(&self) -> f64 {
        self.start_delay2 + self.end_delay2
    }

    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !(self.coarse_threshold.is_finite() && self.coarse_threshold > 0.0) {
            return Err(Error::param("coarse_threshold", "must be finite and > 0"));
        }
        if !(self.window1_span.is_finite() && self.window1_span > 0.0) {
            return Err(Error::param("window1_span", "must be finite and > 0"));
        }
        if ![self.end_delay1, self.start_delay2, self.end_delay2, self.hdt, self.hlt]
            .into_iter()
            .all(finite_nonneg)
        {
            return Err(Error::param("delays/timers", "must be finite and >= 0"));
        }
        if !(self.window2_span() > 0.0 && self.window2_span() <= self.window1_span) {
            return Err(Error::param("start_delay2", "window 2 must be non-empty and no longer than window 1"));
        }
        if !finite_nonneg(self.weighting_r) {
            return Err(Error::param("weighting_r", "must be finite and >= 0"));
        }
        if !(self.cf_sta_span > 0.0 && self.cf_sta_span < self.cf_lta_span && self.cf_lta_span.is_finite()) {
            return Err(Error::param("cf_sta_span", "requires 0 < cf_sta_span < cf_lta_span"));
        }
        Ok(())
    }
}

/// Allen's characteristic function `x[i]^2 + r * (x[i] - x[i-1])^2`, with
/// the difference taken as zero at the first sample.
pub fn allen_cf(x: &[f64], r: f64) -> Vec<f64> {
    let mut prev = x.first().copied().unwrap_or(0.0);
    x.iter()
        .map(|&v| {
            let d = v - prev;
            prev = v;
            v * v + r * d * d
        })
        .collect()
}

// Population variances of every prefix x[..k] (index k) via Welford.
fn prefix_vars(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() + 1);
    out.push(0.0);
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, &v) in x.iter().enumerate() {
        let n = (i + 1) as f64;
        let d = v - mean;
        mean += d / n;
        m2 += d * (v - mean);
        out.push((m2 / n).max(0.0));
    }
    out
}

/// Maeda's variance-based AIC picker.
///
/// Minimises `k ln var(x[..k]) + (L - k - 1) ln var(x[k..])` over
/// `k in 2..=L-2` and returns the first index of the later segment.
/// Variances are floored at 1e-20.
pub fn aic_pick(x: &[f64]) -> Result<usize> {
    let len = x.len();
    if len < 8 {
        return Err(Error::TooShort { len, needed: 8 });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("window", "non-finite sample"));
    }
    let fwd = prefix_vars(x);
    if fwd[len] == 0.0 {
        return Err(Error::Degenerate("constant AIC window"));
    }
    let rev: Vec<f64> = x.iter().rev().copied().collect();
    let bwd = prefix_vars(&rev);
    let lf = len as f64;
    let mut best = (f64::INFINITY, 2);
    for k in 2..=len - 2 {
        let left = fwd[k].max(VAR_FLOOR);
        let right = bwd[len - k].max(VAR_FLOOR);
        let kf = k as f64;
        let aic = kf * libm::log(left) + (lf - kf - 1.0) * libm::log(right);
        if aic < best.0 {
            best = (aic, k);
        }
    }
    Ok(best.1)
}

/// Two-step AIC detector. Onsets come from the refined pick (never later
/// than the coarse trigger); endpoints are the last coarse-CF sample above
/// threshold. A refinement window cut by the frame start or the previous
/// event sets `truncated`.
pub fn aic_detect(signal: &SampledSignal, cfg: &AicConfig) -> Result<Vec<AeEvent>> {
    cfg.validate()?;
    let fs = signal.sample_rate();
    let x = signal.samples();
    let n = x.len();
    let sta = seconds_to_samples(cfg.cf_sta_span, fs).max(1);
    let lta = seconds_to_samples(cfg.cf_lta_span, fs).max(sta + 1);
    let cf = ratio_of(&allen_cf(x, cfg.weighting_r), sta, lta);
    let hits = timer_hits(
        &cf,
        cfg.coarse_threshold,
        seconds_to_samples(cfg.hdt, fs),
        seconds_to_samples(cfg.hlt, fs),
    );

    let w1_back = seconds_to_samples(cfg.window1_span, fs);
    let w1_ahead = seconds_to_samples(cfg.end_delay1, fs);
    let w2_back = seconds_to_samples(cfg.start_delay2, fs);
    let w2_ahead = seconds_to_samples(cfg.end_delay2, fs);

    let mut events: Vec<AeEvent> = Vec::with_capacity(hits.len());
    for hit in hits {
        let t = hit.trigger;
        let floor = events.last().map_or(0, |e| e.endpoint + 1);
        let mut truncated = hit.truncated;

        let mut refine = |center: usize, back: usize, ahead: usize| -> usize {
            let lo = match center.checked_sub(back) {
                Some(v) if v >= floor => v,
                _ => {
                    truncated = true;
                    floor
                }
            };
            let hi = (center + ahead).min(n - 1);
            if hi < center + ahead {
                truncated = true;
            }
            aic_pick(&x[lo..=hi]).map_or(center, |k| lo + k)
        };

        let p1 = refine(t, w1_back, w1_ahead);
        let p2 = refine(p1, w2_back, w2_ahead);
        events.push(AeEvent {
            onset: p2.min(t).max(floor),
            endpoint: hit.last_above,
            core_end: None,
            truncated,
        });
    }
    Ok(events)
}
