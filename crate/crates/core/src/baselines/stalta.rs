use alloc::vec::Vec;

use crate::short_time::{CharacteristicSeries, SeriesKind};
use crate::units::seconds_to_samples;
use crate::{AeEvent, Error, Result, SampledSignal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaLtaConfig {
    /// Ratio at which a hit opens.
    pub trigger: f64,
    /// Ratio at or below which a hit closes.
    pub detrigger: f64,
    /// Short-term average span, seconds.
    pub sta_span: f64,
    /// Long-term average span, seconds.
    pub lta_span: f64,
    /// Onset is placed this long before the trigger, seconds.
    pub pre_event: f64,
    /// Endpoint is placed this long after the last sample above detrigger.
    pub post_event: f64,
}

impl StaLtaConfig {
    /// STA 75 µs, LTA 1 s, pre-event 15 µs, post-event 10 ms, with ratio
    /// levels 4 (trigger) and 1.5 (detrigger).
    pub fn hsu_nielsen() -> Self {
        Self {
            trigger: 4.0,
            detrigger: 1.5,
            sta_span: 75e-6,
            lta_span: 1.0,
            pre_event: 15e-6,
            post_event: 10e-3,
        }
    }

    /// STA 25 µs, LTA 10 ms, pre-event 1 µs, post-event 0.5 µs, with ratio
    /// levels 4 and 1.5.
    pub fn field_data() -> Self {
        Self {
            trigger: 4.0,
            detrigger: 1.5,
            sta_span: 25e-6,
            lta_span: 10e-3,
            pre_event: 1e-6,
            post_event: 0.5e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.trigger.is_finite() && self.detrigger.is_finite() && self.detrigger <= self.trigger) {
            return Err(Error::param("detrigger", "requires detrigger <= trigger"));
        }
        if !(self.sta_span > 0.0 && self.sta_span < self.lta_span && self.lta_span.is_finite()) {
            return Err(Error::param("sta_span", "requires 0 < sta_span < lta_span"));
        }
        if !(self.pre_event >= 0.0 && self.post_event >= 0.0) {
            return Err(Error::param("pre_event/post_event", "must be >= 0"));
        }
        Ok(())
    }
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct RunningSum {
    sum: f64,
    comp: f64,
}

impl RunningSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        (self.sum + self.comp).max(0.0)
    }
}

/// Ratio of causal moving averages of `energy` over `sta` and `lta` samples.
/// Until a window fills, its average runs over the samples seen so far; a
/// zero long-term average gives a ratio of 0.
pub(crate) fn ratio_of(energy: &[f64], sta: usize, lta: usize) -> Vec<f64> {
    let mut short = RunningSum::default();
    let mut long = RunningSum::default();
    energy
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            short.add(v);
            long.add(v);
            if i >= sta {
                short.add(-energy[i - sta]);
            }
            if i >= lta {
                long.add(-energy[i - lta]);
            }
            let short_avg = short.value() / (i + 1).min(sta) as f64;
            let long_avg = long.value() / (i + 1).min(lta) as f64;
            if long_avg > 0.0 {
                short_avg / long_avg
            } else {
                0.0
            }
        })
        .collect()
}

/// STA/LTA ratio of the squared signal.
pub fn sta_lta_ratio(signal: &SampledSignal, sta_span: f64, lta_span: f64) -> Result<CharacteristicSeries> {
    let fs = signal.sample_rate();
    let sta = seconds_to_samples(sta_span, fs).max(1);
    let lta = seconds_to_samples(lta_span, fs).max(sta + 1);
    let energy: Vec<f64> = signal.samples().iter().map(|v| v * v).collect();
    Ok(CharacteristicSeries {
        values: ratio_of(&energy, sta, lta),
        kind: SeriesKind::Ratio,
        hop: 1,
        origin_offset: 0,
    })
}

/// Classic trigger/detrigger picker on the STA/LTA ratio.
///
/// A hit opens at the first ratio `>= trigger` with onset `trigger index -
/// pre_event`, and closes at the first later ratio `<= detrigger` with
/// endpoint `last index above detrigger + post_event`. Both ends are clamped
/// to the frame and to the previous hit; clamping sets `truncated`.
pub fn stalta_detect(signal: &SampledSignal, cfg: &StaLtaConfig) -> Result<Vec<AeEvent>> {
    cfg.validate()?;
    let fs = signal.sample_rate();
    let cf = sta_lta_ratio(signal, cfg.sta_span, cfg.lta_span)?.values;
    let pre = seconds_to_samples(cfg.pre_event, fs);
    let post = seconds_to_samples(cfg.post_event, fs);
    let n = cf.len();
    let mut events: Vec<AeEvent> = Vec::new();
    let mut i = 0;
    while i < n {
        if cf[i] < cfg.trigger {
            i += 1;
            continue;
        }
        let trigger = i;
        let floor = events.last().map_or(0, |e| e.endpoint + 1);
        let mut truncated = false;
        let onset = match trigger.checked_sub(pre) {
            Some(o) if o >= floor => o,
            _ => {
                truncated = true;
                floor
            }
        };
        let close = (trigger + 1..n).find(|&j| cf[j] <= cfg.detrigger);
        let endpoint = match close {
            Some(c) if c - 1 + post < n => c - 1 + post,
            _ => {
                truncated = true;
                n - 1
            }
        };
        events.push(AeEvent {
            onset,
            endpoint,
            core_end: None,
            truncated,
        });
        match close {
            Some(c) => i = c.max(endpoint + 1),
            None => break,
        }
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_is_one_for_constant_energy() {
        let r = ratio_of(&[2.0; 50], 5, 20);
        assert!(r.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!(ratio_of(&[0.0; 10], 2, 5).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn validation() {
        let mut c = StaLtaConfig::hsu_nielsen();
        c.detrigger = 5.0;
        assert!(c.validate().is_err());
        let mut c = StaLtaConfig::hsu_nielsen();
        c.sta_span = 2.0;
        assert!(c.validate().is_err());
    }
}
