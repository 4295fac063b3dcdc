//! Orthogonal projections onto the tangent space of the volume-preserving
//! immersions, for the L² metric and for the Sobolev metrics `G^l`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{ScalarField, TangentField};
use crate::geometry::GeometryCache;
use crate::sobolev::{self, SobolevOrder};
use crate::solver::{pcg, OperatorStats};

/// Default relative tolerance of projection solves.
pub const TOL_PROJ: f64 = 1e-8;

/// Relative size of `∫ rhs vol(g)` tolerated by the minimal branch.
pub const COMPATIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    /// Volume-preserving part `h_μ`.
    pub h_mu: TangentField,
    /// Multiplier (pressure) field; zero-mean representative in the minimal
    /// branch.
    pub p: ScalarField,
    /// `max |div(h_μ^⊤) − ḡ(h_μ^⊥, Tr S)|`.
    pub constraint_residual: f64,
    /// `|G(h_μ, X − h_μ)| / G(X, X)` for the metric that defines the projection.
    pub orthogonality_defect: f64,
    pub stats: OperatorStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `Tr S ≢ 0`; the multiplier is unique.
    NonMinimal,
    /// `Tr S ≡ 0`; Helmholtz–Hodge decomposition, multiplier up to constants.
    Minimal,
}

/// The three-term split `h = h_μ + Tf.grad p + p.Tr S`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub result: ProjectionResult,
    pub gradient_part: TangentField,
    pub curvature_part: TangentField,
    pub branch: Branch,
}

impl Decomposition {
    /// `max |h_μ + Tf.grad p + p.Tr S − h|`.
    pub fn reassembly_error(&self, h: &TangentField) -> f64 {
        self.result
            .h_mu
            .add(&self.gradient_part)
            .add(&self.curvature_part)
            .sub(h)
            .max_norm()
    }
}

fn weighted_mean(cache: &GeometryCache, s: &ScalarField) -> f64 {
    cache.integrate(s) / cache.integrate(&ScalarField::constant(s.len(), 1.0))
}

/// Solves `(Δ − ‖Tr S‖²) p = rhs`.
///
/// In the minimal branch the right-hand side must integrate to zero and the
/// zero-mean solution is returned.
pub fn solve_constraint_elliptic(
    cache: &GeometryCache,
    rhs: &ScalarField,
    tol: f64,
) -> Result<(ScalarField, OperatorStats)> {
    if rhs.len() != cache.len() {
        return Err(Error::ShapeMismatch {
            expected: cache.len(),
            found: rhs.len(),
        });
    }
    rhs.check_finite()?;
    let minimal = cache.is_minimal();
    let mut rhs = rhs.clone();
    if minimal {
        let total = cache.integrate(&rhs);
        let scale = cache.integrate(&ScalarField(rhs.0.iter().map(|v| v.abs()).collect()));
        // Right-hand sides at roundoff level (e.g. the divergence of a
        // divergence-free field) are accepted as they are.
        let floor = 1e-12 * cache.integrate(&ScalarField::constant(rhs.len(), 1.0));
        if scale > floor && total.abs() > COMPATIBILITY_TOL * scale {
            return Err(Error::MinimalIncompatibleRhs {
                relative_mean: total / scale,
            });
        }
        let mean = weighted_mean(cache, &rhs);
        rhs.0.iter_mut().for_each(|v| *v -= mean);
    }
    let gi = cache.mean_inverse_metric();
    let d = cache.dim();
    let symbol = |m: crate::spectral::Mode| {
        let mut k2 = 0.0;
        for a in 0..d {
            for c in 0..d {
                k2 += gi[a][c] * m.k[a] * m.k[c];
            }
        }
        k2 + if minimal { 0.0 } else { cache.mean_tr_s_norm_sq() }
    };
    if minimal {
        // Modes invisible to the first derivative (Nyquist lines) are not in
        // the range of the Laplacian; drop their roundoff-level content.
        rhs = ScalarField(cache.spectral.apply_multiplier(&rhs.0, |m| if symbol(m) > 0.0 { 1.0 } else { 0.0 }));
    }
    let w = &cache.metric.sqrt_det.0;
    let w_mean = w.iter().sum::<f64>() / w.len() as f64;
    let kappa2 = cache.tr_s_norm_sq.clone();
    let b: Vec<f64> = rhs.0.iter().zip(w).map(|(r, s)| -r * s).collect();
    let (x, stats) = pcg(
        |v| {
            let lap = cache.laplace_beltrami(&ScalarField(v.to_vec()));
            Ok(lap
                .0
                .iter()
                .zip(v)
                .zip(&kappa2.0)
                .zip(w)
                .map(|(((l, x), k), s)| (k * x - l) * s)
                .collect())
        },
        |r| {
            cache.spectral.apply_multiplier(r, |m| {
                let sym = symbol(m);
                if sym > 0.0 {
                    1.0 / (sym * w_mean)
                } else {
                    0.0
                }
            })
        },
        &b,
        tol,
        10 * cache.len(),
    )?;
    let mut p = ScalarField(x);
    if minimal {
        let mean = weighted_mean(cache, &p);
        p.0.iter_mut().for_each(|v| *v -= mean);
    }
    Ok((p, stats))
}

fn relative(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num.abs() / den
    } else {
        num.abs()
    }
}

/// L²-orthogonal projection `P(X) = X − Tf.grad p − p.Tr S`.
pub fn l2_project(cache: &GeometryCache, x: &TangentField, tol: f64) -> Result<ProjectionResult> {
    x.check_shape(cache.target_dim, cache.len())?;
    x.check_finite()?;
    let rhs = cache.constraint_residual(x)?;
    let (p, stats) = solve_constraint_elliptic(cache, &rhs, tol)?;
    let h_mu = x.sub(&cache.constraint_adjoint(&p));
    let constraint_residual = cache.constraint_residual(&h_mu)?.max_abs();
    let orthogonality_defect = relative(
        cache.inner_l2(&h_mu, &x.sub(&h_mu)),
        cache.inner_l2(x, x),
    );
    Ok(ProjectionResult {
        h_mu,
        p,
        constraint_residual,
        orthogonality_defect,
        stats,
    })
}

/// Decomposition `h = h_μ + Tf.grad p + p.Tr S` in either branch.
pub fn decompose(cache: &GeometryCache, h: &TangentField, tol: f64) -> Result<Decomposition> {
    let branch = if cache.is_minimal() {
        Branch::Minimal
    } else {
        Branch::NonMinimal
    };
    let result = l2_project(cache, h, tol)?;
    let gradient_part = cache.push_forward(&cache.grad(&result.p));
    let curvature_part = cache.mean_curv.mul_scalar(&result.p);
    Ok(Decomposition {
        result,
        gradient_part,
        curvature_part,
        branch,
    })
}

/// Solves `Ψ p = rhs` for the metric of order `l` (non-minimal immersions).
pub fn solve_psi(
    cache: &GeometryCache,
    rhs: &ScalarField,
    l: SobolevOrder,
    tol: f64,
) -> Result<(ScalarField, OperatorStats)> {
    if cache.is_minimal() {
        return Err(Error::MinimalImmersion);
    }
    if l.get() == 0 {
        return solve_constraint_elliptic(cache, rhs, tol);
    }
    let w = &cache.metric.sqrt_det.0;
    let w_mean = w.iter().sum::<f64>() / w.len() as f64;
    let inner_tol = (tol * 1e-2).max(1e-14);
    let mut inner = OperatorStats::default();
    let model = sobolev::neg_psi_model(cache, l);
    let b: Vec<f64> = rhs.0.iter().zip(w).map(|(r, s)| -r * s).collect();
    let (x, stats) = pcg(
        |v| {
            let (psi, st) = sobolev::apply_psi(cache, &ScalarField(v.to_vec()), l, inner_tol)?;
            inner = inner.merge(st);
            Ok(psi.0.iter().zip(w).map(|(q, s)| -q * s).collect())
        },
        |r| cache.spectral.apply_multiplier(r, |m| 1.0 / (model(m) * w_mean)),
        &b,
        tol,
        10 * cache.len(),
    )?;
    Ok((ScalarField(x), stats.merge(OperatorStats { iterations: 0, ..inner })))
}

/// `G^l`-orthogonal projection `P^L(X) = X − L⁻¹(Tf.grad p + p.Tr S)` with
/// `Ψ p = div(X^⊤) − ḡ(X^⊥, Tr S)`.
pub fn hk_project(
    cache: &GeometryCache,
    x: &TangentField,
    l: SobolevOrder,
    tol: f64,
) -> Result<ProjectionResult> {
    x.check_shape(cache.target_dim, cache.len())?;
    x.check_finite()?;
    if cache.is_minimal() {
        return Err(Error::MinimalImmersion);
    }
    let rhs = cache.constraint_residual(x)?;
    let (p, stats) = solve_psi(cache, &rhs, l, tol)?;
    let (correction, st) = sobolev::invert_l(cache, &cache.constraint_adjoint(&p), l, (tol * 1e-2).max(1e-14))?;
    let h_mu = x.sub(&correction);
    let constraint_residual = cache.constraint_residual(&h_mu)?.max_abs();
    let orthogonality_defect = relative(
        sobolev::inner_product_gl(cache, &h_mu, &correction, l)?,
        sobolev::inner_product_gl(cache, x, x, l)?,
    );
    Ok(ProjectionResult {
        h_mu,
        p,
        constraint_residual,
        orthogonality_defect,
        stats: stats.merge(st),
    })
}
