//! Sampled fields on a parameter grid.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Real function sampled at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField(pub Vec<f64>);

impl ScalarField {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.0.iter().position(|v| !v.is_finite()) {
            Some(node) => Err(Error::NonFinite { node }),
            None => Ok(()),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

/// Field of `R^n` vectors along an immersion, stored component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField {
    pub comps: Vec<Vec<f64>>,
}

impl TangentField {
    pub fn zeros(target_dim: usize, len: usize) -> Self {
        Self {
            comps: vec![vec![0.0; len]; target_dim],
        }
    }

    pub fn from_components(comps: Vec<Vec<f64>>) -> Result<Self> {
        let len = comps.first().map_or(0, Vec::len);
        if let Some(bad) = comps.iter().find(|c| c.len() != len) {
            return Err(Error::ShapeMismatch {
                expected: len,
                found: bad.len(),
            });
        }
        Ok(Self { comps })
    }

    pub fn target_dim(&self) -> usize {
        self.comps.len()
    }

    pub fn len(&self) -> usize {
        self.comps.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn at(&self, node: usize) -> [f64; 3] {
        let mut v = [0.0; 3];
        for (c, comp) in self.comps.iter().enumerate() {
            v[c] = comp[node];
        }
        v
    }

    pub fn check_shape(&self, target_dim: usize, len: usize) -> Result<()> {
        if self.target_dim() != target_dim {
            return Err(Error::ShapeMismatch {
                expected: target_dim,
                found: self.target_dim(),
            });
        }
        if self.len() != len {
            return Err(Error::ShapeMismatch {
                expected: len,
                found: self.len(),
            });
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        for comp in &self.comps {
            if let Some(node) = comp.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { node });
            }
        }
        Ok(())
    }

    /// Pointwise `ḡ(self, other)`.
    pub fn dot(&self, other: &Self) -> ScalarField {
        let mut out = vec![0.0; self.len()];
        for (a, b) in self.comps.iter().zip(&other.comps) {
            for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                *o += x * y;
            }
        }
        ScalarField(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            comps: self.comps.iter().map(|c| c.iter().map(|&v| f(v)).collect()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + s * b)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
                .collect(),
        }
    }

    /// Pointwise product with a scalar field.
    pub fn mul_scalar(&self, s: &ScalarField) -> Self {
        Self {
            comps: self
                .comps
                .iter()
                .map(|c| c.iter().zip(&s.0).map(|(v, w)| v * w).collect())
                .collect(),
        }
    }

    /// Largest pointwise euclidean norm.
    pub fn max_norm(&self) -> f64 {
        self.dot(self).0.iter().fold(0.0f64, |m, v| m.max(v.sqrt()))
    }

    /// Cyclic shift along the first parameter direction.
    pub fn shifted(&self, sizes: &[usize], shift: usize) -> Self {
        Self {
            comps: self.comps.iter().map(|c| shift_nodes(c, sizes, shift)).collect(),
        }
    }
}

/// Vector field on the parameter manifold, components in the coordinate
/// frame `∂_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVectorField {
    pub comps: Vec<Vec<f64>>,
}

impl ParamVectorField {
    pub fn zeros(dim: usize, len: usize) -> Self {
        Self {
            comps: vec![vec![0.0; len]; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(|c| max_abs(c)).fold(0.0, f64::max)
    }
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub(crate) fn shift_nodes(values: &[f64], sizes: &[usize], shift: usize) -> Vec<f64> {
    let n0 = sizes[0];
    let mut out = vec![0.0; values.len()];
    for (node, v) in values.iter().enumerate() {
        let i = node % n0;
        let row = node - i;
        out[row + (i + shift) % n0] = *v;
    }
    out
}
