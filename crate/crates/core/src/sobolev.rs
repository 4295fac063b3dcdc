//! Operator algebra of the Sobolev metrics `G^l(h, k) = ∫ ḡ((1 + Δ)^l h, k) vol(g)`.
//!
//! `Δ` is the positive (Bochner) Laplacian `−div ∘ grad`, acting
//! componentwise on fields along immersions into flat targets.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::{ParamVectorField, ScalarField, TangentField};
use crate::geometry::GeometryCache;
use crate::solver::{pcg, OperatorStats};
use crate::spectral::Mode;

/// Largest supported metric order.
pub const MAX_ORDER: u32 = 8;

/// Relative spread of `√|g|` under which a curve counts as constant speed
/// and `L` is inverted by Fourier division.
pub const CONSTANT_SPEED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SobolevOrder(u32);

impl SobolevOrder {
    pub fn new(l: u32) -> Result<Self> {
        if l > MAX_ORDER {
            return Err(Error::InvalidConfig("Sobolev order must be at most 8"));
        }
        Ok(Self(l))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// Speed `|c'|` if `cache` describes a constant-speed curve.
pub fn constant_speed(cache: &GeometryCache) -> Option<f64> {
    if cache.dim() != 1 {
        return None;
    }
    let s = &cache.metric.sqrt_det;
    let mean = s.0.iter().sum::<f64>() / s.len() as f64;
    let spread = s.0.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    (spread <= CONSTANT_SPEED_TOL * mean).then_some(mean)
}

fn apply_l_scalar(cache: &GeometryCache, v: &[f64], l: u32) -> Vec<f64> {
    let mut out = v.to_vec();
    for _ in 0..l {
        let lap = cache.laplace_beltrami(&ScalarField(out.clone()));
        for (o, d) in out.iter_mut().zip(lap.0) {
            *o -= d;
        }
    }
    out
}

/// `(1 + Δ)^l h` by `l` repeated applications.
pub fn apply_l(cache: &GeometryCache, h: &TangentField, l: SobolevOrder) -> Result<TangentField> {
    h.check_shape(cache.target_dim, cache.len())?;
    Ok(TangentField {
        comps: h.comps.iter().map(|c| apply_l_scalar(cache, c, l.get())).collect(),
    })
}

fn mean_metric_symbol(cache: &GeometryCache, mode: &Mode) -> f64 {
    let gi = cache.mean_inverse_metric();
    let d = cache.dim();
    let mut s = 0.0;
    for a in 0..d {
        for b in 0..d {
            s += gi[a][b] * mode.k[a] * mode.k[b];
        }
    }
    s
}

/// Solves `(1 + Δ)^l x = h`.
///
/// Constant-speed curves are inverted exactly by Fourier division; all other
/// geometries use preconditioned conjugate gradients on the `vol(g)`-symmetric
/// form of the operator.
pub fn invert_l(
    cache: &GeometryCache,
    h: &TangentField,
    l: SobolevOrder,
    tol: f64,
) -> Result<(TangentField, OperatorStats)> {
    h.check_shape(cache.target_dim, cache.len())?;
    let order = l.get() as i32;
    if order == 0 {
        return Ok((h.clone(), OperatorStats::default()));
    }
    if let Some(speed) = constant_speed(cache) {
        let s2 = speed * speed;
        let comps = h
            .comps
            .iter()
            .map(|c| {
                cache
                    .spectral
                    .apply_multiplier(c, |m| (1.0 + m.k[0] * m.k[0] / s2).powi(-order))
            })
            .collect();
        return Ok((
            TangentField { comps },
            OperatorStats {
                iterations: 0,
                relative_residual: 0.0,
                condition_indicator: 1.0,
            },
        ));
    }
    let w = &cache.metric.sqrt_det.0;
    let w_mean = w.iter().sum::<f64>() / w.len() as f64;
    let max_iter = 10 * cache.len();
    let mut stats = OperatorStats::default();
    let mut comps = Vec::with_capacity(h.target_dim());
    for c in &h.comps {
        let b: Vec<f64> = c.iter().zip(w).map(|(v, s)| v * s).collect();
        let (x, st) = pcg(
            |v| Ok(apply_l_scalar(cache, v, l.get()).iter().zip(w).map(|(a, s)| a * s).collect()),
            |r| {
                cache
                    .spectral
                    .apply_multiplier(r, |m| (1.0 + mean_metric_symbol(cache, &m)).powi(-order) / w_mean)
            },
            &b,
            tol,
            max_iter,
        )?;
        stats = stats.merge(st);
        comps.push(x);
    }
    Ok((TangentField { comps }, stats))
}

/// `G^l(h, k)` in the balanced form `∫ ḡ(L^{⌊l/2⌋} h, L^{⌈l/2⌉} k) vol(g)`.
pub fn inner_product_gl(
    cache: &GeometryCache,
    h: &TangentField,
    k: &TangentField,
    l: SobolevOrder,
) -> Result<f64> {
    let lo = SobolevOrder(l.get() / 2);
    let hi = SobolevOrder(l.get() - l.get() / 2);
    Ok(cache.inner_l2(&apply_l(cache, h, lo)?, &apply_l(cache, k, hi)?))
}

/// `Ψ(p) = div((L⁻¹ B p)^⊤) − ḡ(L⁻¹ B p, Tr S)` with `B p = Tf.grad p + p.Tr S`.
///
/// `l = 0` reduces to `Δp − ‖Tr S‖² p`.
pub fn apply_psi(
    cache: &GeometryCache,
    p: &ScalarField,
    l: SobolevOrder,
    tol: f64,
) -> Result<(ScalarField, OperatorStats)> {
    if p.len() != cache.len() {
        return Err(Error::ShapeMismatch {
            expected: cache.len(),
            found: p.len(),
        });
    }
    let (y, stats) = invert_l(cache, &cache.constraint_adjoint(p), l, tol)?;
    let d = cache.dim();
    let pairings: Vec<ScalarField> = cache.frame.iter().map(|e| e.dot(&y)).collect();
    let mut top = ParamVectorField::zeros(d, cache.len());
    for node in 0..cache.len() {
        for a in 0..d {
            top.comps[a][node] = (0..d)
                .map(|b| cache.metric.g_inv[node][a][b] * pairings[b].0[node])
                .sum();
        }
    }
    let div = cache.div(&top);
    Ok((div.sub(&y.dot(&cache.mean_curv)), stats))
}

/// Constant-coefficient model of `−Ψ` used for preconditioning:
/// `(|k|²_ḡ + mean ‖Tr S‖²) / (1 + |k|²_ḡ)^l`.
pub(crate) fn neg_psi_model(cache: &GeometryCache, l: SobolevOrder) -> impl Fn(Mode) -> f64 + '_ {
    let kappa2 = cache.mean_tr_s_norm_sq();
    move |m: Mode| {
        let k2 = mean_metric_symbol(cache, &m);
        (k2 + kappa2) / (1.0 + k2).powi(l.get() as i32)
    }
}

/// Empirical Fourier multiplier of `Ψ` at mode `k` on a constant-speed curve,
/// measured as the Rayleigh quotient of `cos(kθ)`.
pub fn psi_symbol_probe(cache: &GeometryCache, l: SobolevOrder, k: usize, tol: f64) -> Result<f64> {
    if constant_speed(cache).is_none() {
        return Err(Error::Unsupported("symbol probe needs a constant-speed curve"));
    }
    if k == 0 || 2 * k >= cache.len() {
        return Err(Error::InvalidConfig("probe mode must satisfy 0 < k < N/2"));
    }
    let period = cache.grid.period(0);
    let p = ScalarField(
        cache
            .grid
            .coordinates(0)
            .map(|t| (2.0 * PI * k as f64 * t / period).cos())
            .collect(),
    );
    let (q, _) = apply_psi(cache, &p, l, tol)?;
    Ok(cache.inner_scalar(&q, &p) / cache.inner_scalar(&p, &p))
}
