//! Additive white Gaussian noise at a calibrated signal-to-noise ratio.

use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result, SampledSignal};

/// Noise standard deviation that puts `power` at `snr_db` above the noise.
pub fn noise_std_for(power: f64, snr_db: f64) -> f64 {
    libm::sqrt(power / libm::pow(10.0, snr_db / 10.0))
}

/// Returns `signal` plus white Gaussian noise whose variance makes
/// `10·log10(P_signal / P_noise) = snr_db`, with `P_signal` the mean power
/// of the whole frame.
///
/// `snr_db = +∞` disables the noise and returns the input unchanged. The
/// noise sequence depends only on `seed` and the frame length.
pub fn add_awgn(signal: &SampledSignal, snr_db: f64, seed: u64) -> Result<SampledSignal> {
    if snr_db == f64::INFINITY {
        return Ok(signal.clone());
    }
    if !snr_db.is_finite() {
        return Err(Error::param("snr_db", "must be finite or +inf"));
    }
    let power = signal.power();
    if power <= 0.0 {
        return Err(Error::ZeroPower);
    }
    let sigma = noise_std_for(power, snr_db);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let samples: Vec<f64> = signal
        .samples()
        .iter()
        .map(|&v| {
            let n: f64 = StandardNormal.sample(&mut rng);
            v + sigma * n
        })
        .collect();
    signal.with_samples(samples)
}

/// Pure white Gaussian noise of standard deviation `sigma`.
pub fn white_noise(len: usize, sigma: f64, sample_rate: f64, seed: u64) -> Result<SampledSignal> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::param("sigma", "must be finite and >= 0"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let samples: Vec<f64> = (0..len)
        .map(|_| {
            let n: f64 = StandardNormal.sample(&mut rng);
            sigma * n
        })
        .collect();
    SampledSignal::new(samples, sample_rate)
}
