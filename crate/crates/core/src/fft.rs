//! In-place radix-2 FFT and the analytic signal built on it.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// Smallest power of two `>= n` (1 for `n == 0`).
pub fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Forward DFT in place, `X[k] = Σ x[n]·exp(-2πi·kn/N)`. Length must be a
/// power of two.
pub fn fft(buf: &mut [Complex64]) {
    transform(buf, false);
}

/// Inverse DFT in place, including the `1/N` scale.
pub fn ifft(buf: &mut [Complex64]) {
    transform(buf, true);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

fn transform(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    // Twiddles for the largest stage; smaller stages stride through them.
    let half = n / 2;
    let twiddles: Vec<Complex64> = (0..half)
        .map(|k| {
            let angle = sign * 2.0 * PI * k as f64 / n as f64;
            Complex64::new(libm::cos(angle), libm::sin(angle))
        })
        .collect();
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        let half_len = len / 2;
        for chunk in buf.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half_len);
            for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let t = *b * twiddles[k * stride];
                *b = *a - t;
                *a += t;
            }
        }
        len <<= 1;
    }
}

/// Analytic signal `x + i·H{x}` of a real sequence, computed over the whole
/// frame zero-padded to a power of two. Samples near the frame edges carry
/// the usual circular-transform edge effects.
pub fn analytic_signal(x: &[f64]) -> Vec<Complex64> {
    let n = next_pow2(x.len());
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    fft(&mut buf);
    if n > 1 {
        for v in buf[1..n / 2].iter_mut() {
            *v *= 2.0;
        }
        for v in buf[n / 2 + 1..].iter_mut() {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    ifft(&mut buf);
    buf.truncate(x.len());
    buf
}

/// Linear convolution of `x` with `h` (length `x.len() + h.len() - 1`) by
/// overlap-add over power-of-two blocks.
pub fn convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let out_len = x.len() + h.len() - 1;
    let mut out = alloc::vec![0.0; out_len];
    let block_fft = next_pow2(4 * h.len()).max(64);
    let block = block_fft - h.len() + 1;

    let mut kernel: Vec<Complex64> = h.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    kernel.resize(block_fft, Complex64::new(0.0, 0.0));
    fft(&mut kernel);

    let mut buf = alloc::vec![Complex64::new(0.0, 0.0); block_fft];
    for (b, chunk) in x.chunks(block).enumerate() {
        for v in buf.iter_mut() {
            *v = Complex64::new(0.0, 0.0);
        }
        for (dst, &src) in buf.iter_mut().zip(chunk) {
            dst.re = src;
        }
        fft(&mut buf);
        for (v, k) in buf.iter_mut().zip(&kernel) {
            *v *= k;
        }
        ifft(&mut buf);
        let start = b * block;
        let valid = (chunk.len() + h.len() - 1).min(out_len - start);
        for (o, v) in out[start..start + valid].iter_mut().zip(&buf) {
            *o += v.re;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, &v)| {
                    let a = -2.0 * PI * (k * j) as f64 / n as f64;
                    acc + v * Complex64::new(libm::cos(a), libm::sin(a))
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let x: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new(libm::sin(i as f64 * 0.37), libm::cos(i as f64 * 1.3)))
            .collect();
        let mut y = x.clone();
        fft(&mut y);
        for (a, b) in y.iter().zip(naive_dft(&x)) {
            assert!((a - b).norm() < 1e-10);
        }
        ifft(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn convolution_matches_direct() {
        let x: Vec<f64> = (0..1000).map(|i| libm::sin(i as f64 * 0.11) + 0.3).collect();
        let h: Vec<f64> = (0..37).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let fast = convolve(&x, &h);
        assert_eq!(fast.len(), x.len() + h.len() - 1);
        for (n, &v) in fast.iter().enumerate() {
            let direct: f64 = (0..h.len())
                .filter(|&k| n >= k && n - k < x.len())
                .map(|k| h[k] * x[n - k])
                .sum();
            assert!((v - direct).abs() < 1e-10, "{n}");
        }
    }

    #[test]
    fn analytic_signal_of_cosine() {
        // Whole number of cycles in a power-of-two frame: exact quadrature.
        let n = 256;
        let x: Vec<f64> = (0..n).map(|i| libm::cos(2.0 * PI * 8.0 * i as f64 / n as f64)).collect();
        let z = analytic_signal(&x);
        for (i, v) in z.iter().enumerate() {
            let expect = libm::sin(2.0 * PI * 8.0 * i as f64 / n as f64);
            assert!((v.im - expect).abs() < 1e-10);
            assert!((v.norm() - 1.0).abs() < 1e-10);
        }
    }
}
