//! STE-ZCR activity detection.
//!
//! The detector walks the short-time energy (STE) and short-time
//! zero-crossing rate (STZCR) of a frame once, left to right:
//!
//! 1. Background noise is summarized over an early quiet segment (just past
//!    the window warm-up) on both series, and the preset thresholds are
//!    raised by it: `ITU_adjust = ITU + (mean + α·std)` on the STE and, for
//!    the zero-crossing threshold, either the same additive rule or
//!    `IZCT_adjust = IZCT·(mean + α·std)` in percent mode.
//! 2. The provisional onset is the first STE value `>= ITU_adjust`; the true
//!    onset is found by scanning the STE first difference backwards to the
//!    first value `<= 0`.
//! 3. The provisional end of core is the first STE value below the core-exit
//!    threshold. The running STE maximum inside that span sets
//!    `ITL = 0.368·STE_max`, and the end of core is the first value `<= ITL`
//!    after the maximum. Taking the running maximum keeps a second, larger
//!    hit inside the same span from absorbing the first.
//! 4. The endpoint is the first STZCR value `>= IZCT_adjust` from the end of
//!    core.
//! 5. The next onset is searched once the STE has fallen back below the
//!    re-arm level. If it lands before the pending endpoint, that endpoint
//!    is clipped to one sample before the new onset. Noise is re-estimated
//!    on the quiet gap between the last endpoint and the new onset, and the
//!    thresholds are re-adjusted before the new hit is delimited.

use alloc::vec::Vec;

use crate::short_time::{estimate_noise, ste, stzcr, NoiseStats, WindowFamily, WindowSpec};
use crate::units::{micros_to_samples, seconds_to_samples};
use crate::{Error, Result, SampledSignal};

/// Fraction of the core maximum at which the core of a hit ends (the
/// first-order time constant, `e⁻¹` rounded to three digits).
pub const ITL_RATIO: f64 = 0.368;

/// How the preset zero-crossing threshold combines with the noise level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IzctMode {
    /// `IZCT_adjust = IZCT + level`.
    Absolute,
    /// `IZCT_adjust = IZCT·level`, with `IZCT` in `(0, 1]`.
    PercentOfNoise,
}

/// Which STE threshold closes the provisional core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoreExit {
    /// The noise-adjusted `ITU_adjust`.
    Adjusted,
    /// The bare preset `ITU`. Never closes when the noise STE sits above the
    /// preset.
    Preset,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StezcrConfig {
    /// Preset identification upper threshold as a window-mean power (V²).
    /// It is compared against the STE after scaling by the window weight sum,
    /// see [`StezcrConfig::itu_energy`].
    pub itu: f64,
    pub izct_mode: IzctMode,
    /// Zero-crossing threshold: a rate in absolute mode, a fraction in
    /// percent mode.
    pub izct: f64,
    /// Weight of the noise standard deviation.
    pub alpha: f64,
    /// Early background-noise segment, seconds.
    pub early_noise_span: f64,
    pub window: WindowSpec,
    pub zcr_window: WindowSpec,
    /// Events shorter than this (seconds) are dropped.
    pub min_event_span: f64,
    pub core_exit: CoreExit,
    /// After a core, a new hit also needs the STE to reach this multiple of
    /// the noise mean plus the core's extrapolated exponential decay.
    pub retrigger_ratio: f64,
}

impl StezcrConfig {
    /// Calibration used on pencil-lead-break bursts: 20 µs Hamming window,
    /// hop 1, ITU 2e-4, ZCR threshold 70 % of the noise level, α = 4, 2 ms
    /// early-noise segment.
    pub fn hsu_nielsen(sample_rate: f64) -> Self {
        let window = hamming_us(20.0, sample_rate);
        Self {
            itu: 2e-4,
            izct_mode: IzctMode::PercentOfNoise,
            izct: 0.70,
            alpha: 4.0,
            early_noise_span: 2e-3,
            window,
            zcr_window: window,
            min_event_span: 0.0,
            core_exit: CoreExit::Adjusted,
            retrigger_ratio: 2.0,
        }
    }

    /// Calibration used on tensile-test field data: 15 µs Hamming window,
    /// hop 1, ITU 55e-6, ZCR threshold 80 %, α = 1, 5 µs early noise.
    pub fn field_data(sample_rate: f64) -> Self {
        let window = hamming_us(15.0, sample_rate);
        Self {
            itu: 55e-6,
            izct_mode: IzctMode::PercentOfNoise,
            izct: 0.80,
            alpha: 1.0,
            early_noise_span: 5e-6,
            window,
            zcr_window: window,
            min_event_span: 0.0,
            core_exit: CoreExit::Adjusted,
            retrigger_ratio: 2.0,
        }
    }

    /// `itu` in STE units: the energy of a window filled with mean square
    /// `itu`.
    pub fn itu_energy(&self) -> f64 {
        self.itu * self.window.weights().iter().sum::<f64>()
    }

    /// Early-noise segment length in series samples.
    pub fn early_noise_len(&self, sample_rate: f64) -> usize {
        seconds_to_samples(self.early_noise_span, sample_rate) / self.window.hop
    }

    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        if !(self.itu.is_finite() && self.itu > 0.0) {
            return Err(Error::param("itu", "must be finite and > 0"));
        }
        match self.izct_mode {
            IzctMode::PercentOfNoise if !(self.izct > 0.0 && self.izct <= 1.0) => {
                return Err(Error::param("izct", "percent mode requires 0 < izct <= 1"));
            }
            IzctMode::Absolute if !(self.izct.is_finite() && self.izct >= 0.0) => {
                return Err(Error::param("izct", "must be finite and >= 0"));
            }
            _ => {}
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::param("alpha", "must be finite and >= 0"));
        }
        self.window.validate()?;
        self.zcr_window.validate()?;
        if self.window.hop != self.zcr_window.hop {
            return Err(Error::param(
                "zcr_window.hop",
                "energy and zero-crossing windows must share a hop",
            ));
        }
        if self.early_noise_len(sample_rate) < 2 {
            return Err(Error::param(
                "early_noise_span",
                "must cover at least 2 series samples",
            ));
        }
        if !(self.min_event_span.is_finite() && self.min_event_span >= 0.0) {
            return Err(Error::param("min_event_span", "must be finite and >= 0"));
        }
        if !(self.retrigger_ratio.is_finite() && self.retrigger_ratio >= 1.0) {
            return Err(Error::param("retrigger_ratio", "must be finite and >= 1"));
        }
        Ok(())
    }
}

fn hamming_us(micros: f64, sample_rate: f64) -> WindowSpec {
    WindowSpec {
        family: WindowFamily::Hamming,
        length: micros_to_samples(micros, sample_rate).max(2),
        hop: 1,
    }
}

/// One detected hit, in source sample indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AeEvent {
    pub onset: usize,
    pub endpoint: usize,
    /// End of the high-energy core (STE-ZCR only).
    pub core_end: Option<usize>,
    /// The onset or endpoint was forced by the frame edge, a neighbouring
    /// hit, or a missing threshold crossing.
    pub truncated: bool,
}

impl AeEvent {
    pub fn lifespan(&self) -> usize {
        self.endpoint - self.onset
    }
}

/// `ITU + (mean + α·std)`.
pub fn adjust_itu(preset: f64, noise: &NoiseStats) -> f64 {
    preset + noise.level()
}

pub fn adjust_izct(mode: IzctMode, izct: f64, noise: &NoiseStats) -> f64 {
    match mode {
        IzctMode::Absolute => izct + noise.level(),
        IzctMode::PercentOfNoise => izct * noise.level(),
    }
}

/// `ITL = 0.368·STE_max-core`.
pub fn compute_itl(max_core: f64) -> Result<f64> {
    if !(max_core.is_finite() && max_core > 0.0) {
        return Err(Error::Degenerate("core maximum must be positive"));
    }
    Ok(ITL_RATIO * max_core)
}

/// Thresholds and noise summaries in force for one search iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub noise_ste: NoiseStats,
    pub noise_zcr: NoiseStats,
    pub itu_adjust: f64,
    pub izct_adjust: f64,
}

impl Thresholds {
    fn new(itu_energy: f64, cfg: &StezcrConfig, noise_ste: NoiseStats, noise_zcr: NoiseStats) -> Self {
        Self {
            noise_ste,
            noise_zcr,
            itu_adjust: adjust_itu(itu_energy, &noise_ste),
            izct_adjust: adjust_izct(cfg.izct_mode, cfg.izct, &noise_zcr),
        }
    }
}

/// What happened while delimiting one hit (series indices).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationTrace {
    pub thresholds: Thresholds,
    pub provisional_onset: usize,
    pub onset: usize,
    pub core_max: usize,
    pub itl: f64,
    pub core_end: usize,
    pub endpoint: usize,
    /// Whether the noise was re-estimated before this hit was delimited.
    pub noise_updated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub events: Vec<AeEvent>,
    pub trace: Vec<IterationTrace>,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    provisional: usize,
    onset: usize,
    floored: bool,
}

/// First STE index `>= itu_adjust` from `from`, refined backwards along the
/// first difference to the first index where it is `<= 0`, never below
/// `floor`.
fn find_onset(e: &[f64], from: usize, itu_adjust: f64, floor: usize) -> Option<Candidate> {
    let provisional = (from..e.len()).find(|&i| e[i] >= itu_adjust)?;
    let mut j = provisional;
    while j > floor && e[j] - e[j - 1] > 0.0 {
        j -= 1;
    }
    let floored = j == 0 || (j == floor && j > 0 && e[j] - e[j - 1] > 0.0);
    Some(Candidate {
        provisional,
        onset: j,
        floored,
    })
}

/// Next hit after a core that peaked at `core_max` and decayed to the lower
/// threshold at `core_end`. Past the core the STE is modelled as the noise
/// mean plus an exponential tail with the core's own time constant; a new
/// hit must reach `itu_adjust` and `ratio` times that model. The onset is
/// refined back no further than `core_end + 1`.
fn find_retrigger(
    e: &[f64],
    core_max: usize,
    core_end: usize,
    noise_mean: f64,
    itu_adjust: f64,
    ratio: f64,
) -> Option<Candidate> {
    let peak = e[core_max];
    let tau = (core_end - core_max).max(1) as f64;
    let provisional = (core_end + 1..e.len()).find(|&i| {
        let tail = peak * libm::exp(-((i - core_max) as f64) / tau);
        e[i] >= itu_adjust && e[i] >= ratio * (tail + noise_mean)
    })?;
    find_onset(e, provisional, itu_adjust, core_end + 1)
}

/// Runs the detector and returns the ordered, non-overlapping hits.
pub fn detect(signal: &SampledSignal, cfg: &StezcrConfig) -> Result<Vec<AeEvent>> {
    Ok(detect_traced(signal, cfg)?.events)
}

/// [`detect`] plus a per-hit record of thresholds and intermediate indices.
pub fn detect_traced(signal: &SampledSignal, cfg: &StezcrConfig) -> Result<Detection> {
    let fs = signal.sample_rate();
    cfg.validate(fs)?;
    let hop = cfg.window.hop;
    let warm = (cfg.window.length.max(cfg.zcr_window.length) - 1).div_ceil(hop);
    let span = cfg.early_noise_len(fs);
    let search_start = warm + span;
    let needed = (search_start + 1) * hop;
    if signal.len() < needed {
        return Err(Error::TooShort {
            len: signal.len(),
            needed,
        });
    }
    let e_series = ste(signal, &cfg.window)?;
    let z_series = stzcr(signal, &cfg.zcr_window)?;
    let e = &e_series.values;
    let z = &z_series.values;
    let n = e.len();

    let itu_energy = cfg.itu_energy();
    let mut th = Thresholds::new(
        itu_energy,
        cfg,
        estimate_noise(&e_series, warm, span, cfg.alpha)?,
        estimate_noise(&z_series, warm, span, cfg.alpha)?,
    );
    let min_span = seconds_to_samples(cfg.min_event_span, fs);

    let mut events = Vec::new();
    let mut trace = Vec::new();
    let mut noise_updated = false;
    let mut candidate = find_onset(e, search_start, th.itu_adjust, 0);

    while let Some(c) = candidate {
        let mut truncated = c.floored;
        let core_exit = match cfg.core_exit {
            CoreExit::Adjusted => th.itu_adjust,
            CoreExit::Preset => itu_energy,
        };
        let prov_end = (c.provisional + 1..n).find(|&i| e[i] < core_exit);
        let (core_max, itl, core_end) = match core_decay(e, c.provisional, prov_end) {
            Some(core) => core,
            None => {
                truncated = true;
                let last = prov_end.unwrap_or(n - 1);
                let (imax, emax) = argmax(&e[c.provisional..=last]);
                (imax + c.provisional, compute_itl(emax)?, n - 1)
            }
        };
        if core_end <= c.onset {
            // A trigger on the very last value cannot form a hit.
            break;
        }

        let next = find_retrigger(
            e,
            core_max,
            core_end,
            th.noise_ste.mean,
            th.itu_adjust,
            cfg.retrigger_ratio,
        );
        let limit = next.map_or(n, |nc| nc.onset);
        let (endpoint, endpoint_sample) = match (core_end..limit).find(|&i| z[i] >= th.izct_adjust) {
            Some(ze) => (ze, ze * hop),
            None => {
                truncated = true;
                match next {
                    Some(nc) => (nc.onset - 1, nc.onset * hop - 1),
                    None => (n - 1, (n - 1) * hop),
                }
            }
        };

        events.push(AeEvent {
            onset: c.onset * hop,
            endpoint: endpoint_sample,
            core_end: Some(core_end * hop),
            truncated,
        });
        trace.push(IterationTrace {
            thresholds: th,
            provisional_onset: c.provisional,
            onset: c.onset,
            core_max,
            itl,
            core_end,
            endpoint,
            noise_updated,
        });

        let Some(nc) = next else { break };
        let gap_start = endpoint + 1;
        noise_updated = false;
        if nc.onset >= gap_start + 2 {
            let gap = nc.onset - gap_start;
            th = Thresholds::new(
                itu_energy,
                cfg,
                estimate_noise(&e_series, gap_start, gap, cfg.alpha)?,
                estimate_noise(&z_series, gap_start, gap, cfg.alpha)?,
            );
            noise_updated = true;
        }
        candidate = Some(nc);
    }

    if min_span > 0 {
        events.retain(|ev| ev.lifespan() >= min_span);
    }
    Ok(Detection { events, trace })
}

/// Scans forward from `start` with a running maximum, frozen once the
/// provisional core closes at `prov_end`, and returns
/// `(argmax, ITL, core_end)` at the first value `<= ITL_RATIO·max`. A later,
/// larger peak inside the provisional core therefore starts a new hit
/// instead of raising the first one's maximum.
fn core_decay(e: &[f64], start: usize, prov_end: Option<usize>) -> Option<(usize, f64, usize)> {
    let freeze = prov_end.unwrap_or(e.len() - 1);
    let mut imax = start;
    for i in start + 1..e.len() {
        if i <= freeze && e[i] > e[imax] {
            imax = i;
        } else if e[i] <= ITL_RATIO * e[imax] {
            return Some((imax, ITL_RATIO * e[imax], i));
        }
    }
    None
}

/// Index and value of the first maximum.
fn argmax(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
}
