//! Mixed-radix complex FFT for arbitrary lengths.
//!
//! Recursive decimation in time over the prime factorisation of the length;
//! prime factors fall back to a direct butterfly, so every length works and
//! powers of small primes are fast.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    twiddles: Vec<Complex64>,
    factors: Vec<usize>,
}

impl Fft {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        let twiddles = (0..len)
            .map(|k| {
                let angle = -2.0 * PI * k as f64 / len as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        let mut factors = Vec::new();
        let mut rest = len;
        let mut p = 2;
        while rest > 1 {
            while rest % p == 0 {
                factors.push(p);
                rest /= p;
            }
            p += 1;
            if p * p > rest && rest > 1 {
                factors.push(rest);
                break;
            }
        }
        Self {
            len,
            twiddles,
            factors,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unnormalised forward transform `X_k = Σ x_j e^{-2πi jk/n}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    /// Inverse transform including the `1/n` normalisation.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, true);
        let scale = 1.0 / self.len as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.len);
        if self.len == 1 {
            return;
        }
        let input = data.to_vec();
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.factors.iter().copied().max().unwrap_or(1)];
        self.recurse(&input, 0, 1, self.len, data, 0, inverse, &mut scratch);
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &self,
        input: &[Complex64],
        offset: usize,
        stride: usize,
        n: usize,
        out: &mut [Complex64],
        depth: usize,
        inverse: bool,
        scratch: &mut [Complex64],
    ) {
        if n == 1 {
            out[0] = input[offset];
            return;
        }
        let p = self.factors[depth];
        let m = n / p;
        for r in 0..p {
            self.recurse(
                input,
                offset + r * stride,
                stride * p,
                m,
                &mut out[r * m..(r + 1) * m],
                depth + 1,
                inverse,
                scratch,
            );
        }
        // W_n^j = W_len^{j * len / n}
        let step = self.len / n;
        let tw = |j: usize| {
            let w = self.twiddles[(j % n) * step];
            if inverse {
                w.conj()
            } else {
                w
            }
        };
        for k in 0..m {
            for (r, s) in scratch.iter_mut().take(p).enumerate() {
                *s = out[r * m + k];
            }
            for q in 0..p {
                let idx = k + q * m;
                let mut acc = Complex64::new(0.0, 0.0);
                for (r, s) in scratch.iter().take(p).enumerate() {
                    acc += *s * tw(r * idx);
                }
                out[idx] = acc;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let a = -2.0 * PI * (j * k) as f64 / n as f64;
                        *v * Complex64::new(a.cos(), a.sin())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_mixed_lengths() {
        for &n in &[1usize, 2, 3, 8, 12, 30, 64, 97, 128] {
            let x: Vec<Complex64> = (0..n)
                .map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64 * 1.3).cos()))
                .collect();
            let mut y = x.clone();
            let fft = Fft::new(n);
            fft.forward(&mut y);
            let reference = naive_dft(&x);
            for (a, b) in y.iter().zip(&reference) {
                assert!((a - b).norm() < 1e-10 * n as f64, "n = {n}");
            }
            fft.inverse(&mut y);
            for (a, b) in y.iter().zip(&x) {
                assert!((a - b).norm() < 1e-13 * n as f64);
            }
        }
    }
}
