//! Dense assembly of the projection operators for small grids.
//!
//! Differentiation uses the closed-form periodic spectral matrix instead of
//! the FFT, and all solves are direct LU factorisations, so this module is an
//! independent route to the matrix-free operators of [`crate::projection`]
//! and [`crate::sobolev`]. Intended for grids with at most 64 nodes per
//! direction.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::{ScalarField, TangentField};
use crate::geometry::GeometryCache;
use crate::sobolev::SobolevOrder;

/// Largest supported number of grid nodes.
pub const MAX_NODES: usize = 64 * 64;

/// Periodic spectral differentiation matrix on `n` (even) points over one
/// period `period`: `D_ij = (π/L)(−1)^{i−j} cot(π(i−j)/n)`.
pub fn derivative_matrix(n: usize, period: f64) -> DMatrix<f64> {
    let scale = 2.0 * PI / period;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let diff = i as i64 - j as i64;
            let sign = if diff.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            0.5 * scale * sign / (PI * diff as f64 / n as f64).tan()
        }
    })
}

/// Dense operators of one geometry.
#[derive(Debug, Clone)]
pub struct DenseOperators {
    pub len: usize,
    pub target_dim: usize,
    /// Constraint operator `X ↦ div(X^⊤) − ḡ(X^⊥, Tr S)`, `len × n·len`.
    pub constraint: DMatrix<f64>,
    /// `p ↦ Tf.grad p + p.Tr S`, `n·len × len`.
    pub generator: DMatrix<f64>,
    /// Scalar Laplace–Beltrami `div ∘ grad`, `len × len`.
    pub laplacian: DMatrix<f64>,
    vol: DVector<f64>,
    minimal: bool,
}

fn kron_eye_left(eye: usize, m: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::<f64>::identity(eye, eye).kronecker(m)
}

impl DenseOperators {
    pub fn assemble(cache: &GeometryCache) -> Result<Self> {
        let len = cache.len();
        if len > MAX_NODES {
            return Err(Error::Unsupported("dense assembly is limited to 64×64 grids"));
        }
        let grid = &cache.grid;
        let d = grid.dim();
        let n = cache.target_dim;
        let mut deriv = Vec::with_capacity(d);
        let d0 = derivative_matrix(grid.size(0), grid.period(0));
        if d == 1 {
            deriv.push(d0);
        } else {
            deriv.push(kron_eye_left(grid.size(1), &d0));
            let d1 = derivative_matrix(grid.size(1), grid.period(1));
            deriv.push(d1.kronecker(&DMatrix::<f64>::identity(grid.size(0), grid.size(0))));
        }
        let sq = DVector::from_vec(cache.metric.sqrt_det.0.clone());
        let inv_sq = sq.map(|s| 1.0 / s);
        let g_inv = |a: usize, b: usize| DVector::from_iterator(len, cache.metric.g_inv.iter().map(|m| m[a][b]));
        // grad_a = Σ_b diag(g^{ab}) D_b
        let grad: Vec<DMatrix<f64>> = (0..d)
            .map(|a| {
                (0..d).fold(DMatrix::zeros(len, len), |acc, b| {
                    acc + DMatrix::from_diagonal(&g_inv(a, b)) * &deriv[b]
                })
            })
            .collect();
        // div_a = diag(1/√g) D_a diag(√g)
        let div: Vec<DMatrix<f64>> = (0..d)
            .map(|a| DMatrix::from_diagonal(&inv_sq) * &deriv[a] * DMatrix::from_diagonal(&sq))
            .collect();
        let laplacian = (0..d).fold(DMatrix::zeros(len, len), |acc, a| acc + &div[a] * &grad[a]);

        let mut constraint = DMatrix::zeros(len, n * len);
        let mut generator = DMatrix::zeros(n * len, len);
        for c in 0..n {
            let tr_s = DVector::from_vec(cache.mean_curv.comps[c].clone());
            let mut block = -DMatrix::from_diagonal(&tr_s);
            for a in 0..d {
                let mut coeff = DVector::zeros(len);
                for b in 0..d {
                    coeff += g_inv(a, b).component_mul(&DVector::from_vec(cache.frame[b].comps[c].clone()));
                }
                block += &div[a] * DMatrix::from_diagonal(&coeff);
            }
            constraint.view_mut((0, c * len), (len, len)).copy_from(&block);

            let mut gen = DMatrix::from_diagonal(&tr_s);
            for (a, grad_a) in grad.iter().enumerate() {
                let e = DVector::from_vec(cache.frame[a].comps[c].clone());
                gen += DMatrix::from_diagonal(&e) * grad_a;
            }
            generator.view_mut((c * len, 0), (len, len)).copy_from(&gen);
        }
        Ok(Self {
            len,
            target_dim: n,
            constraint,
            generator,
            laplacian,
            vol: DVector::from_vec(cache.vol_weights()),
            minimal: cache.is_minimal(),
        })
    }

    /// Scalar `(1 − div∘grad)^l`.
    pub fn sobolev_scalar(&self, l: SobolevOrder) -> DMatrix<f64> {
        let id = DMatrix::<f64>::identity(self.len, self.len);
        let step = &id - &self.laplacian;
        (0..l.get()).fold(id, |acc, _| &step * acc)
    }

    /// `L⁻¹ B` as a dense `n·len × len` matrix, applying `(1 − div∘grad)⁻¹`
    /// `l` times rather than factorising the worse-conditioned power.
    fn inverse_sobolev_generator(&self, l: SobolevOrder) -> Result<DMatrix<f64>> {
        if l.get() == 0 {
            return Ok(self.generator.clone());
        }
        let lu = self.sobolev_scalar(SobolevOrder::new(1)?).lu();
        let mut out = DMatrix::zeros(self.target_dim * self.len, self.len);
        for c in 0..self.target_dim {
            let mut block = self.generator.view((c * self.len, 0), (self.len, self.len)).clone_owned();
            for _ in 0..l.get() {
                block = lu.solve(&block).ok_or(Error::Unsupported("singular Sobolev operator"))?;
            }
            out.view_mut((c * self.len, 0), (self.len, self.len)).copy_from(&block);
        }
        Ok(out)
    }

    /// Dense `Ψ = A L⁻¹ B`.
    pub fn psi(&self, l: SobolevOrder) -> Result<DMatrix<f64>> {
        Ok(&self.constraint * self.inverse_sobolev_generator(l)?)
    }

    /// Projection for order `l` (`l = 0` is the L² projection) by direct
    /// solves. Returns `(h_μ, p)`.
    pub fn project(&self, x: &TangentField, l: SobolevOrder) -> Result<(TangentField, ScalarField)> {
        x.check_shape(self.target_dim, self.len)?;
        if self.minimal && l.get() > 0 {
            return Err(Error::MinimalImmersion);
        }
        let xv = DVector::from_iterator(self.target_dim * self.len, x.comps.iter().flatten().copied());
        let rhs = &self.constraint * &xv;
        let lg = self.inverse_sobolev_generator(l)?;
        let psi = &self.constraint * &lg;
        let p = if self.minimal {
            // The discrete Laplacian also annihilates the Nyquist modes, so
            // take the minimum-norm solution and fix the vol(g)-weighted mean.
            let eps = 1e-10 * psi.amax();
            let mut p = psi
                .svd(true, true)
                .solve(&rhs, eps)
                .map_err(|_| Error::Unsupported("SVD solve failed"))?;
            let mean = p.dot(&self.vol) / self.vol.sum();
            p.iter_mut().for_each(|v| *v -= mean);
            p
        } else {
            psi.lu().solve(&rhs).ok_or(Error::Unsupported("singular Ψ matrix"))?
        };
        let hv = xv - lg * &p;
        let comps = (0..self.target_dim)
            .map(|c| hv.rows(c * self.len, self.len).iter().copied().collect())
            .collect();
        Ok((TangentField { comps }, ScalarField(p.iter().copied().collect())))
    }
}
