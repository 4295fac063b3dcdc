//! Pseudo-spectral differentiation on uniform periodic grids.
//!
//! First derivatives drop the Nyquist mode, so the discrete derivative is a
//! real antisymmetric circulant and summation by parts holds exactly. Every
//! higher-order operator in the crate is composed from these first
//! derivatives; Fourier multipliers exposed here use the same "derivative
//! wavenumbers" to stay consistent with that composition.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::fft::Fft;
use crate::grid::ParamGrid;

/// One Fourier mode as seen by a multiplier.
#[derive(Debug, Clone, Copy)]
pub struct Mode {
    /// Signed mode numbers per direction (`-n/2 < m ≤ n/2`).
    pub index: [i64; 2],
    /// Angular wavenumbers of the first-derivative operator (zero at Nyquist).
    pub k: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct Spectral {
    grid: ParamGrid,
    ffts: Vec<Fft>,
    deriv_k: Vec<Vec<f64>>,
    signed: Vec<Vec<i64>>,
}

impl Spectral {
    pub fn new(grid: ParamGrid) -> Self {
        let mut ffts = Vec::new();
        let mut deriv_k = Vec::new();
        let mut signed = Vec::new();
        for axis in 0..grid.dim() {
            let n = grid.size(axis);
            let scale = 2.0 * PI / grid.period(axis);
            let s: Vec<i64> = (0..n)
                .map(|m| if m <= n / 2 { m as i64 } else { m as i64 - n as i64 })
                .collect();
            let k = s
                .iter()
                .map(|&m| if m == (n / 2) as i64 { 0.0 } else { m as f64 * scale })
                .collect();
            ffts.push(Fft::new(n));
            deriv_k.push(k);
            signed.push(s);
        }
        Self {
            grid,
            ffts,
            deriv_k,
            signed,
        }
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.grid
    }

    /// Spectral first derivative along `axis`.
    pub fn derivative(&self, values: &[f64], axis: usize) -> Vec<f64> {
        let k = &self.deriv_k[axis];
        self.along_axis(values, axis, |buf| {
            for (z, &kk) in buf.iter_mut().zip(k) {
                *z *= Complex64::new(0.0, kk);
            }
        })
    }

    fn along_axis(&self, values: &[f64], axis: usize, op: impl Fn(&mut [Complex64])) -> Vec<f64> {
        let n0 = self.grid.size(0);
        let n1 = self.grid.size(1);
        let n = self.grid.size(axis);
        let fft = &self.ffts[axis];
        let mut out = vec![0.0; values.len()];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let lines = if axis == 0 { n1 } else { n0 };
        for line in 0..lines {
            let idx = |t: usize| if axis == 0 { t + n0 * line } else { line + n0 * t };
            for (t, z) in buf.iter_mut().enumerate() {
                *z = Complex64::new(values[idx(t)], 0.0);
            }
            fft.forward(&mut buf);
            op(&mut buf);
            fft.inverse(&mut buf);
            for (t, z) in buf.iter().enumerate() {
                out[idx(t)] = z.re;
            }
        }
        out
    }

    /// Full forward transform (all directions), unnormalised.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, false);
        data
    }

    /// Inverse of [`Spectral::forward`]; returns the real part.
    pub fn inverse_real(&self, mut data: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut data, true);
        data.into_iter().map(|z| z.re).collect()
    }

    pub fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let n0 = self.grid.size(0);
        let n1 = self.grid.size(1);
        for row in data.chunks_mut(n0) {
            if inverse {
                self.ffts[0].inverse(row);
            } else {
                self.ffts[0].forward(row);
            }
        }
        if self.grid.dim() == 2 {
            let mut buf = vec![Complex64::new(0.0, 0.0); n1];
            for col in 0..n0 {
                for (j, z) in buf.iter_mut().enumerate() {
                    *z = data[col + n0 * j];
                }
                if inverse {
                    self.ffts[1].inverse(&mut buf);
                } else {
                    self.ffts[1].forward(&mut buf);
                }
                for (j, z) in buf.iter().enumerate() {
                    data[col + n0 * j] = *z;
                }
            }
        }
    }

    /// Mode descriptor for the flat spectral index `idx`.
    pub fn mode(&self, idx: usize) -> Mode {
        let (i, j) = self.grid.multi_index(idx);
        let mut mode = Mode {
            index: [self.signed[0][i], 0],
            k: [self.deriv_k[0][i], 0.0],
        };
        if self.grid.dim() == 2 {
            mode.index[1] = self.signed[1][j];
            mode.k[1] = self.deriv_k[1][j];
        }
        mode
    }

    /// Removes every mode on a Nyquist line. Such modes are invisible to the
    /// first derivative, so operators composed from it cannot control them.
    pub fn drop_nyquist(&self, values: &[f64]) -> Vec<f64> {
        self.band_limit(values, 0)
    }

    /// Keeps only modes with `|m| < n/2 − margin` in every direction;
    /// `margin = 0` is [`Spectral::drop_nyquist`].
    pub fn band_limit(&self, values: &[f64], margin: i64) -> Vec<f64> {
        let sizes = [self.grid.size(0) as i64, if self.grid.dim() == 2 { self.grid.size(1) as i64 } else { 0 }];
        self.apply_multiplier(values, |m| {
            if (0..self.grid.dim()).any(|a| 2 * (m.index[a].abs() + margin) >= sizes[a]) {
                0.0
            } else {
                1.0
            }
        })
    }

    /// Applies the real Fourier multiplier `m(mode)` to a real field.
    pub fn apply_multiplier(&self, values: &[f64], m: impl Fn(Mode) -> f64) -> Vec<f64> {
        let mut spec = self.forward(values);
        for (idx, z) in spec.iter_mut().enumerate() {
            *z *= m(self.mode(idx));
        }
        self.inverse_real(spec)
    }
}
