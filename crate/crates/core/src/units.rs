//! Time/sample conversions.

/// Converts a duration in seconds to a sample count, rounding half up.
///
/// Negative or non-finite durations map to zero.
pub fn seconds_to_samples(seconds: f64, sample_rate: f64) -> usize {
    let exact = seconds * sample_rate;
    if !exact.is_finite() || exact <= 0.0 {
        return 0;
    }
    libm::floor(exact + 0.5) as usize
}

/// Converts microseconds to samples with the same rounding rule.
pub fn micros_to_samples(micros: f64, sample_rate: f64) -> usize {
    seconds_to_samples(micros * 1e-6, sample_rate)
}

pub fn samples_to_seconds(samples: usize, sample_rate: f64) -> f64 {
    samples as f64 / sample_rate
}
