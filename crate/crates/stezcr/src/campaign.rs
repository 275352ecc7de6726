//! Runs detectors over a synthetic campaign and scores them.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use stezcr_core::campaign::CampaignSpec;
use stezcr_core::eval::{events_to_intervals, match_events, ConfusionCounts, MatchedPair};

use crate::report::{RoundReport, Timing};
use crate::settings::{run_method, Method, Settings};
use crate::Result;

/// Serializable mirror of [`CampaignSpec`] in CLI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSettings {
    pub events: usize,
    pub sample_rate_hz: f64,
    pub frame_ms: f64,
    pub arrival_ms: f64,
    pub amplitude_v: (f64, f64),
    pub decay_ms: (f64, f64),
    pub frequency_khz: (f64, f64),
    /// `None` for a noiseless baseline round.
    pub floor_snr_db: Option<f64>,
    pub rounds_db: Vec<f64>,
}

impl Default for CampaignSettings {
    fn default() -> Self {
        Self::from_spec(&CampaignSpec::default())
    }
}

impl CampaignSettings {
    pub fn from_spec(s: &CampaignSpec) -> Self {
        Self {
            events: s.events,
            sample_rate_hz: s.sample_rate,
            frame_ms: s.frame_duration * 1e3,
            arrival_ms: s.arrival * 1e3,
            amplitude_v: s.amplitude,
            decay_ms: (s.decay.0 * 1e3, s.decay.1 * 1e3),
            frequency_khz: (s.frequency.0 * 1e-3, s.frequency.1 * 1e-3),
            floor_snr_db: Some(s.floor_snr_db).filter(|v| v.is_finite()),
            rounds_db: s.rounds_db.clone(),
        }
    }

    pub fn to_spec(&self, seed: u64) -> Result<CampaignSpec> {
        let spec = CampaignSpec {
            events: self.events,
            sample_rate: self.sample_rate_hz,
            frame_duration: self.frame_ms * 1e-3,
            arrival: self.arrival_ms * 1e-3,
            amplitude: self.amplitude_v,
            decay: (self.decay_ms.0 * 1e-3, self.decay_ms.1 * 1e-3),
            frequency: (self.frequency_khz.0 * 1e3, self.frequency_khz.1 * 1e3),
            floor_snr_db: self.floor_snr_db.unwrap_or(f64::INFINITY),
            rounds_db: self.rounds_db.clone(),
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Default)]
struct Cell {
    counts: ConfusionCounts,
    pairs: Vec<MatchedPair>,
    truths: usize,
    frames: usize,
    elapsed: Duration,
}

/// Scores every method on every round. Frames are processed in parallel on
/// the current rayon pool; results do not depend on the thread count.
pub fn run_campaign(
    spec: &CampaignSpec,
    methods: &[Method],
    settings: &Settings,
    min_overlap: f64,
) -> Result<BTreeMap<String, Vec<RoundReport>>> {
    for &m in methods {
        settings.validate(m, spec.sample_rate)?;
    }
    let population = spec.population()?;
    let mut results: BTreeMap<String, Vec<RoundReport>> = BTreeMap::new();
    for round in 0..spec.round_count() {
        let per_frame = population
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let frame = spec.render(i, p, round)?;
                let fs = frame.signal.sample_rate();
                methods
                    .iter()
                    .map(|&m| {
                        let start = Instant::now();
                        let events = run_method(m, settings, &frame.signal)?;
                        let elapsed = start.elapsed();
                        let matching = match_events(&events_to_intervals(&events, fs), &frame.truth, min_overlap);
                        Ok((matching, frame.truth.len(), elapsed))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let mut cells: Vec<Cell> = methods.iter().map(|_| Cell::default()).collect();
        for frame in per_frame {
            for (cell, (matching, truths, elapsed)) in cells.iter_mut().zip(frame) {
                cell.counts += matching.counts;
                cell.pairs.extend(matching.pairs);
                cell.truths += truths;
                cell.frames += 1;
                cell.elapsed += elapsed;
            }
        }
        for (m, cell) in methods.iter().zip(cells) {
            let mut r = RoundReport::new(Some(spec.round_snr(round)), cell.counts, &cell.pairs);
            let secs = cell.elapsed.as_secs_f64();
            r.timing = Some(Timing {
                time_per_event_s: (cell.truths > 0).then(|| secs / cell.truths as f64),
                time_per_frame_s: (cell.frames > 0).then(|| secs / cell.frames as f64),
            });
            results.entry(m.to_string()).or_default().push(r);
        }
    }
    Ok(results)
}
