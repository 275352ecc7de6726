//! Deterministic synthetic event populations.
//!
//! A campaign is a list of damped-sinusoid bursts, one per frame, each drawn
//! uniformly from the configured ranges. Frames are rendered with a noise
//! floor ("clean" round) and again, from the noiseless waveform, at every
//! extra SNR round.

use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Uniform};

use crate::eval::{GroundTruth, Interval};
use crate::noise::add_awgn;
use crate::synth::{synth_ae, AeSourceParams};
use crate::{Error, Result, SampledSignal};

/// Truth endpoint is placed this many decay constants after arrival.
pub const TRUTH_DECAYS: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSpec {
    pub events: usize,
    pub sample_rate: f64,
    pub frame_duration: f64,
    pub arrival: f64,
    pub amplitude: (f64, f64),
    pub decay: (f64, f64),
    pub frequency: (f64, f64),
    /// SNR of the baseline round; `+inf` for noiseless frames.
    pub floor_snr_db: f64,
    /// Extra rounds, each applied to the noiseless waveform.
    pub rounds_db: Vec<f64>,
    pub seed: u64,
}

impl Default for CampaignSpec {
    /// 100 events at 5 MHz in 45 ms frames, arrival at 5 ms,
    /// A ∈ [0.1, 1] V, γ ∈ [0.5, 3] ms, ν₀ ∈ [100, 500] kHz, a 27.1 dB floor
    /// and rounds at 20, 15 and 10 dB.
    fn default() -> Self {
        Self {
            events: 100,
            sample_rate: 5e6,
            frame_duration: 45e-3,
            arrival: 5e-3,
            amplitude: (0.1, 1.0),
            decay: (0.5e-3, 3e-3),
            frequency: (100e3, 500e3),
            floor_snr_db: 27.1,
            rounds_db: alloc::vec![20.0, 15.0, 10.0],
            seed: 0,
        }
    }
}

fn check_range(name: &'static str, r: (f64, f64)) -> Result<()> {
    if r.0.is_finite() && r.1.is_finite() && r.0 > 0.0 && r.0 <= r.1 {
        Ok(())
    } else {
        Err(Error::param(name, "range must be finite, positive and ordered"))
    }
}

fn uniform(rng: &mut ChaCha20Rng, r: (f64, f64)) -> f64 {
    if r.0 == r.1 {
        return r.0;
    }
    Uniform::new_inclusive(r.0, r.1)
        .map(|u| u.sample(rng))
        .unwrap_or(r.0)
}

/// SplitMix64 finalizer over `(seed, a, b)`.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Ground truth for one burst: arrival to arrival + 5γ.
pub fn truth_of(p: &AeSourceParams) -> Interval {
    Interval::new(p.arrival, p.arrival + TRUTH_DECAYS * p.decay)
}

/// One rendered frame.
#[derive(Debug, Clone)]
pub struct Frame {
    pub index: usize,
    pub params: AeSourceParams,
    pub signal: SampledSignal,
    pub truth: GroundTruth,
}

impl CampaignSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(Error::InvalidSampleRate(self.sample_rate));
        }
        check_range("amplitude", self.amplitude)?;
        check_range("decay", self.decay)?;
        check_range("frequency", self.frequency)?;
        if self.frequency.1 >= self.sample_rate / 2.0 {
            return Err(Error::param("frequency", "must stay below Nyquist"));
        }
        if !(self.arrival.is_finite() && self.arrival >= 0.0) {
            return Err(Error::param("arrival", "must be finite and >= 0"));
        }
        if !(self.arrival + TRUTH_DECAYS * self.decay.1 <= self.frame_duration && self.frame_duration.is_finite()) {
            return Err(Error::param("frame_duration", "must contain arrival + 5 decay constants"));
        }
        for &s in core::iter::once(&self.floor_snr_db).chain(&self.rounds_db) {
            if !(s.is_finite() || s == f64::INFINITY) {
                return Err(Error::param("snr_db", "must be finite or +inf"));
            }
        }
        Ok(())
    }

    /// Number of rounds including the baseline one.
    pub fn round_count(&self) -> usize {
        1 + self.rounds_db.len()
    }

    /// SNR of round `r` (0 is the baseline).
    pub fn round_snr(&self, r: usize) -> f64 {
        if r == 0 {
            self.floor_snr_db
        } else {
            self.rounds_db[r - 1]
        }
    }

    /// Draws the burst parameters; depends only on the seed and ranges.
    pub fn population(&self) -> Result<Vec<AeSourceParams>> {
        self.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(self.seed, u64::MAX, 0));
        Ok((0..self.events)
            .map(|_| AeSourceParams {
                amplitude: uniform(&mut rng, self.amplitude),
                arrival: self.arrival,
                decay: uniform(&mut rng, self.decay),
                frequency: uniform(&mut rng, self.frequency),
                duration: self.frame_duration,
            })
            .collect())
    }

    /// Renders event `index` of the population for round `round`.
    pub fn render(&self, index: usize, params: &AeSourceParams, round: usize) -> Result<Frame> {
        let pure = synth_ae(params, self.sample_rate)?;
        let seed = derive_seed(self.seed, index as u64, round as u64);
        let signal = add_awgn(&pure, self.round_snr(round), seed)?;
        Ok(Frame {
            index,
            params: *params,
            signal,
            truth: GroundTruth::new(alloc::vec![truth_of(params)])?,
        })
    }
}
