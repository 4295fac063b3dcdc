use crate::error::{Error, Result};
use core::f64::consts::PI;

/// Uniform periodic parameter grid over the circle (`dim = 1`) or the
/// two-torus (`dim = 2`).
///
/// Nodes are stored with the first direction fastest: node `(i, j)` lives at
/// index `i + sizes[0] * j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamGrid {
    dim: usize,
    sizes: [usize; 2],
    periods: [f64; 2],
}

impl ParamGrid {
    pub fn new(sizes: &[usize], periods: &[f64]) -> Result<Self> {
        let dim = sizes.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid("only one- and two-dimensional grids are supported"));
        }
        if periods.len() != dim {
            return Err(Error::InvalidGrid("one period per direction is required"));
        }
        if sizes.iter().any(|&n| n < 8 || n % 2 != 0) {
            return Err(Error::InvalidGrid("sizes must be even and at least 8"));
        }
        if periods.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::InvalidGrid("periods must be positive and finite"));
        }
        let mut s = [1, 1];
        let mut p = [2.0 * PI, 2.0 * PI];
        s[..dim].copy_from_slice(sizes);
        p[..dim].copy_from_slice(periods);
        Ok(Self {
            dim,
            sizes: s,
            periods: p,
        })
    }

    /// Circle grid with period `2π`.
    pub fn circle(n: usize) -> Result<Self> {
        Self::new(&[n], &[2.0 * PI])
    }

    /// Torus grid with period `2π` in both directions.
    pub fn torus(n0: usize, n1: usize) -> Result<Self> {
        Self::new(&[n0, n1], &[2.0 * PI, 2.0 * PI])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes[..self.dim]
    }

    pub fn size(&self, axis: usize) -> usize {
        self.sizes[axis]
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods[..self.dim]
    }

    pub fn period(&self, axis: usize) -> f64 {
        self.periods[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.periods[axis] / self.sizes[axis] as f64
    }

    pub fn len(&self) -> usize {
        self.sizes[0] * self.sizes[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Parameter-space volume of one grid cell (quadrature weight).
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.sizes[0] * j
    }

    pub fn multi_index(&self, node: usize) -> (usize, usize) {
        (node % self.sizes[0], node / self.sizes[0])
    }

    /// Parameter coordinate of `node` along `axis`.
    pub fn coordinate(&self, node: usize, axis: usize) -> f64 {
        let (i, j) = self.multi_index(node);
        let k = if axis == 0 { i } else { j };
        k as f64 * self.spacing(axis)
    }

    pub fn coordinates(&self, axis: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |node| self.coordinate(node, axis))
    }
}
