//! Throughput on one long multi-event frame.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use stezcr_core::campaign::derive_seed;
use stezcr_core::noise::add_awgn;
use stezcr_core::synth::{synth_stream, AeSourceParams};
use stezcr_core::SampledSignal;

use crate::settings::{run_method, Method, Settings};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub samples: usize,
    pub sample_rate_hz: f64,
    /// Arrival spacing of the bursts; wider than five of the longest decay.
    pub spacing_ms: f64,
    pub snr_db: f64,
    pub seed: u64,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            samples: 25_000_000,
            sample_rate_hz: 5e6,
            spacing_ms: 18.0,
            snr_db: 27.1,
            seed: 0,
        }
    }
}

impl BenchSpec {
    /// Bursts drawn from the campaign ranges, one per spacing slot.
    pub fn sources(&self) -> Vec<AeSourceParams> {
        let duration = self.samples as f64 / self.sample_rate_hz;
        let spacing = self.spacing_ms * 1e-3;
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(self.seed, u64::MAX, 1));
        let mut out = Vec::new();
        let mut t = spacing / 4.0;
        while t + spacing <= duration {
            out.push(AeSourceParams {
                amplitude: rng.random_range(0.1..=1.0),
                arrival: t,
                decay: rng.random_range(0.5e-3..=3e-3),
                frequency: rng.random_range(100e3..=500e3),
                duration,
            });
            t += spacing;
        }
        out
    }

    pub fn render(&self) -> Result<SampledSignal> {
        let duration = self.samples as f64 / self.sample_rate_hz;
        let clean = synth_stream(&self.sources(), duration, self.sample_rate_hz)?;
        Ok(add_awgn(&clean, self.snr_db, derive_seed(self.seed, u64::MAX, 2))?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: Method,
    pub seconds: f64,
    pub samples_per_s: f64,
    pub detected: usize,
    pub time_per_event_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub samples: usize,
    pub events: usize,
    pub rows: Vec<BenchRow>,
}

pub fn run_bench(signal: &SampledSignal, events: usize, methods: &[Method], settings: &Settings) -> Result<BenchReport> {
    let mut rows = Vec::new();
    for &m in methods {
        settings.validate(m, signal.sample_rate())?;
        let start = Instant::now();
        let detected = run_method(m, settings, signal)?;
        let seconds = start.elapsed().as_secs_f64();
        rows.push(BenchRow {
            method: m,
            seconds,
            samples_per_s: signal.len() as f64 / seconds,
            detected: detected.len(),
            time_per_event_s: seconds / events.max(1) as f64,
        });
    }
    Ok(BenchReport {
        samples: signal.len(),
        events,
        rows,
    })
}

impl BenchReport {
    pub fn table(&self) -> String {
        let mut out = format!("{} samples, {} events\n", self.samples, self.events);
        out.push_str("method    seconds   Msamples/s  detected  s/event\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:<8} {:>8.3} {:>12.2} {:>9} {:>9.2e}\n",
                r.method.name(),
                r.seconds,
                r.samples_per_s / 1e6,
                r.detected,
                r.time_per_event_s
            ));
        }
        out
    }
}
