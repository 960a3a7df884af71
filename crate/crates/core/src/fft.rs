//! Radix-2 decimation-in-time FFT.
//!
//! Forward convention `X_k = sum_j x_j exp(-2 pi i j k / N)`; the inverse
//! carries the `1/N` factor.

use std::f64::consts::TAU;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FftError {
    #[error("length {0} is not a power of two >= 2")]
    NotPowerOfTwo(usize),
}

fn check_len(n: usize) -> Result<(), FftError> {
    if n >= 2 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(FftError::NotPowerOfTwo(n))
    }
}

fn transform(data: &mut [Complex64], sign: f64) {
    let n = data.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    // Twiddles by direct evaluation, not recurrence.
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| Complex64::from_polar(1.0, sign * TAU * k as f64 / n as f64))
        .collect();
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for chunk in data.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for k in 0..half {
                let t = hi[k] * twiddles[k * stride];
                hi[k] = lo[k] - t;
                lo[k] += t;
            }
        }
        len <<= 1;
    }
}

/// Forward transform in natural order (`k = 0..N`).
pub fn fft(signal: &[Complex64]) -> Result<Vec<Complex64>, FftError> {
    check_len(signal.len())?;
    let mut data = signal.to_vec();
    transform(&mut data, -1.0);
    Ok(data)
}

/// Inverse transform, scaled by `1/N`.
pub fn ifft(spectrum: &[Complex64]) -> Result<Vec<Complex64>, FftError> {
    check_len(spectrum.len())?;
    let mut data = spectrum.to_vec();
    transform(&mut data, 1.0);
    let scale = 1.0 / data.len() as f64;
    for v in &mut data {
        *v *= scale;
    }
    Ok(data)
}

/// Reorder natural-order bins to `k = -N/2 .. N/2`.
pub fn two_sided<T: Clone>(bins: &[T]) -> Vec<T> {
    let half = bins.len() / 2;
    bins[half..].iter().chain(&bins[..half]).cloned().collect()
}

/// Forward transform with bins in two-sided order `k = -N/2 .. N/2`.
pub fn fft_two_sided(signal: &[Complex64]) -> Result<Vec<Complex64>, FftError> {
    Ok(two_sided(&fft(signal)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        v * Complex64::from_polar(1.0, -TAU * ((j * k) % n) as f64 / n as f64)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn rejects_bad_lengths() {
        for n in [0, 1, 3, 6, 1000] {
            let x = vec![Complex64::new(1.0, 0.0); n];
            assert_eq!(fft(&x), Err(FftError::NotPowerOfTwo(n)));
        }
    }

    #[test]
    fn constant_goes_to_zero_bin() {
        let c = Complex64::new(0.5, -1.5);
        let x = vec![c; 16];
        let natural = fft(&x).unwrap();
        assert!((natural[0] - c * 16.0).norm() < 1e-12);
        let shifted = fft_two_sided(&x).unwrap();
        assert!((shifted[8] - c * 16.0).norm() < 1e-12);
        for (k, v) in shifted.iter().enumerate() {
            if k != 8 {
                assert!(v.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn pure_tone_single_bin() {
        let n = 64;
        for m in [0usize, 1, 5, 31, 63] {
            let x: Vec<Complex64> = (0..n)
                .map(|j| Complex64::from_polar(1.0, TAU * (m * j) as f64 / n as f64))
                .collect();
            let spec = fft(&x).unwrap();
            for (k, v) in spec.iter().enumerate() {
                if k == m {
                    assert!((v.norm() - n as f64).abs() < 1e-10);
                } else {
                    assert!(v.norm() < 1e-10, "m={m} k={k} {v}");
                }
            }
        }
    }

    #[test]
    fn matches_brute_force_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<Complex64> = (0..256)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let fast = fft(&x).unwrap();
        let slow = dft(&x);
        let worst = fast
            .iter()
            .zip(&slow)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut n = 2;
        while n <= 4096 {
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let back = ifft(&fft(&x).unwrap()).unwrap();
            let worst = x
                .iter()
                .zip(&back)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(worst < 1e-12, "n={n}: {worst}");
            n *= 2;
        }
    }

    #[test]
    fn modulation_shifts_bins() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 128;
        let x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let base = fft(&x).unwrap();
        for m in [1usize, 17, 64] {
            let shifted: Vec<Complex64> = x
                .iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, TAU * ((m * j) % n) as f64 / n as f64))
                .collect();
            let spec = fft(&shifted).unwrap();
            for k in 0..n {
                assert!((spec[(k + m) % n] - base[k]).norm() < 1e-10);
            }
        }
    }
}
