//! Matrix-free preconditioned conjugate gradients.

use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Default relative tolerance of the iterative solves.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OperatorStats {
    pub iterations: usize,
    pub relative_residual: f64,
    /// Spread of the Rayleigh quotients seen by CG, a cheap lower bound on
    /// the condition number of the preconditioned operator.
    pub condition_indicator: f64,
}

impl fmt::Display for OperatorStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} iterations, relative residual {:e}, condition indicator {:.3e}",
            self.iterations, self.relative_residual, self.condition_indicator
        )
    }
}

impl OperatorStats {
    /// Combines the stats of nested or sequential solves.
    pub fn merge(self, other: Self) -> Self {
        Self {
            iterations: self.iterations + other.iterations,
            relative_residual: self.relative_residual.max(other.relative_residual),
            condition_indicator: self.condition_indicator.max(other.condition_indicator),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` for a symmetric positive (semi-)definite `A` with
/// preconditioner `M⁻¹`, both given as closures.
///
/// Converges when `‖b − A x‖₂ ≤ tol ‖b‖₂`. For a semidefinite `A` the
/// right-hand side must lie in its range and the preconditioner must map
/// into a complement of the kernel.
pub fn pcg(
    mut apply: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, OperatorStats)> {
    let b_norm = norm(b);
    let mut x = alloc::vec![0.0; b.len()];
    let mut stats = OperatorStats::default();
    if b_norm == 0.0 {
        stats.condition_indicator = 1.0;
        return Ok((x, stats));
    }
    let mut r = b.to_vec();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let (mut q_min, mut q_max) = (f64::INFINITY, 0.0f64);
    for it in 1..=max_iter {
        let ap = apply(&p)?;
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            stats.iterations = it;
            stats.relative_residual = norm(&r) / b_norm;
            return Err(Error::NoConvergence(stats));
        }
        let pp = dot(&p, &p);
        if pp > 0.0 {
            q_min = q_min.min(pap / pp);
            q_max = q_max.max(pap / pp);
        }
        let alpha = rz / pap;
        for ((xi, ri), (pi, api)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
            *xi += alpha * pi;
            *ri -= alpha * api;
        }
        let res = norm(&r) / b_norm;
        stats.iterations = it;
        stats.relative_residual = res;
        stats.condition_indicator = if q_min > 0.0 { q_max / q_min } else { f64::INFINITY };
        if res <= tol {
            return Ok((x, stats));
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(Error::NoConvergence(stats))
}
