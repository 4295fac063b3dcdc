//! Geodesics of the volume-preserving immersions.
//!
//! Three schemes are provided:
//!
//! * [`step_rk4_explicit`]: classical RK4 on the explicit curve equation
//!   `c_tt = (p c')'`, `p'' − ‖c''‖² p = −‖c_t'‖²` (unit speed shown),
//! * [`step_rattle`]: RATTLE for the L² metric on curves and surfaces, with
//!   the position constraint `ρ(f) ≡ 1` enforced by a multiplier field,
//! * [`step_discrete_lagrangian`]: the variational integrator of the action
//!   `½∫ G^l(f_t, f_t) dt` under the same constraint (curves, `l ≥ 1`).
//!
//! The constrained schemes share one kernel: the discrete Euler–Lagrange
//! equations of `L_d = (dt/2) G^l(Δf/dt, Δf/dt)` with a holonomic constraint
//! are SHAKE/RATTLE with mass operator `(1 + Δ)^l`, whose velocity step is
//! exactly the `G^l` projection.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::{ScalarField, TangentField};
use crate::geometry::{build_geometry, volume_density, Density, DiscreteImmersion, GeometryCache};
use crate::projection::{hk_project, l2_project, solve_psi};
use crate::sobolev::{self, SobolevOrder};
use crate::solver::pcg;

/// Newton tolerance for the multiplier solves.
pub const NEWTON_TOL: f64 = 1e-10;
/// Iteration cap of the multiplier solves.
pub const NEWTON_MAX_ITER: usize = 50;
/// Tolerated constraint violation of initial data.
pub const DRIFT_TOL: f64 = 1e-6;
/// Relative spread of `|c'|` beyond which the explicit curve equation, which
/// assumes constant speed, refuses to evaluate.
pub const SPEED_SPREAD_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicState {
    pub f: DiscreteImmersion,
    pub f_t: TangentField,
    pub t: f64,
}

impl GeodesicState {
    pub fn new(f: DiscreteImmersion, f_t: TangentField) -> Result<Self> {
        f_t.check_shape(f.target_dim(), f.grid().len())?;
        f_t.check_finite()?;
        Ok(Self { f, f_t, t: 0.0 })
    }

    /// Cyclic reparametrisation of both position and velocity.
    pub fn shifted(&self, shift: usize) -> Result<Self> {
        Ok(Self {
            f: self.f.shifted(shift)?,
            f_t: self.f_t.shifted(self.f.grid().sizes(), shift),
            t: self.t,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk4Explicit,
    Rattle,
    DiscreteLagrangian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    /// Snapshot every `output_stride` steps.
    pub output_stride: usize,
    /// Constraint / Newton tolerance.
    pub tol: f64,
    /// Relative tolerance of the linear solves.
    pub solver_tol: f64,
    /// Metric order (`0` for the L² metric).
    pub order: SobolevOrder,
    /// Re-project the velocity after every step.
    pub renormalize: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Rk4Explicit,
            dt: 1e-3,
            t_end: 1.0,
            output_stride: 100,
            tol: NEWTON_TOL,
            solver_tol: 1e-12,
            order: SobolevOrder::default(),
            renormalize: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig("dt must be positive"));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidConfig("t_end must be nonnegative"));
        }
        if self.output_stride == 0 {
            return Err(Error::InvalidConfig("output stride must be at least 1"));
        }
        if !(self.tol > 0.0 && self.solver_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive"));
        }
        match self.scheme {
            Scheme::DiscreteLagrangian if self.order.get() == 0 => {
                Err(Error::InvalidConfig("discrete-Lagrangian scheme needs l ≥ 1"))
            }
            Scheme::Rk4Explicit | Scheme::Rattle if self.order.get() != 0 => {
                Err(Error::InvalidConfig("rk4 and rattle integrate the L² metric (l = 0)"))
            }
            _ => Ok(()),
        }
    }
}

/// Per-step invariant record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantRecord {
    pub t: f64,
    /// `G^l(f_t, f_t)`.
    pub energy: f64,
    pub rho_deviation: f64,
    pub constraint_residual: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub renormalized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<GeodesicState>,
    pub log: Vec<InvariantRecord>,
    /// Background density the constraint `ρ ≡ 1` refers to.
    pub mu: Vec<f64>,
    /// Set when the run stopped early; the data up to that point is kept.
    pub failure: Option<Error>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&GeodesicState> {
        self.snapshots.last()
    }

    /// Largest relative deviation of the energy from its initial value.
    pub fn energy_drift(&self) -> f64 {
        let Some(first) = self.log.first() else {
            return 0.0;
        };
        let e0 = first.energy;
        self.log
            .iter()
            .map(|r| (r.energy - e0).abs() / e0.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    pub fn max_rho_deviation(&self) -> f64 {
        self.log.iter().map(|r| r.rho_deviation).fold(0.0, f64::max)
    }
}

/// Auxiliary output of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    /// Multiplier field of the step.
    pub p: ScalarField,
    /// Newton iterations of the position solve (0 for explicit steps).
    pub newton_iterations: usize,
}

fn check_curve(f: &DiscreteImmersion) -> Result<()> {
    if f.grid().dim() != 1 || f.target_dim() != 2 {
        return Err(Error::Unsupported("explicit curve equation needs a planar curve"));
    }
    Ok(())
}

/// Right-hand side of the explicit L² geodesic equation of constant-speed
/// planar curves: `c_tt = (p c')'/s²` with `p'' − (‖c''‖²/s²) p = −‖c_t'‖²`,
/// where `s = |c'|`.
pub fn rhs_l2_curve(state: &GeodesicState, tol: f64) -> Result<(TangentField, ScalarField)> {
    check_curve(&state.f)?;
    let grid = *state.f.grid();
    let sp = crate::spectral::Spectral::new(grid);
    let c1 = &state.f.frame(&sp)[0];
    let c2 = TangentField {
        comps: c1.comps.iter().map(|c| sp.derivative(c, 0)).collect(),
    };
    let ct1 = TangentField {
        comps: state.f_t.comps.iter().map(|c| sp.derivative(c, 0)).collect(),
    };
    let speed2 = c1.dot(c1);
    let s2 = speed2.0.iter().sum::<f64>() / speed2.len() as f64;
    let spread = speed2.0.iter().fold(0.0f64, |m, v| m.max((v - s2).abs()));
    if spread > SPEED_SPREAD_TOL * s2 {
        return Err(Error::InvalidInitialData { residual: spread / s2 });
    }
    let kappa2: Vec<f64> = c2.dot(&c2).0.iter().map(|v| v / s2).collect();
    let kappa2_mean = kappa2.iter().sum::<f64>() / kappa2.len() as f64;
    let rhs: Vec<f64> = ct1.dot(&ct1).0;
    let (p, _) = pcg(
        |v| {
            let pp = sp.derivative(&sp.derivative(v, 0), 0);
            Ok(pp.iter().zip(v).zip(&kappa2).map(|((a, x), k)| k * x - a).collect())
        },
        |r| {
            sp.apply_multiplier(r, |m| {
                let sym = m.k[0] * m.k[0] + kappa2_mean;
                if sym > 0.0 {
                    1.0 / sym
                } else {
                    0.0
                }
            })
        },
        &rhs,
        tol,
        10 * grid.len(),
    )?;
    let p = ScalarField(sp.drop_nyquist(&p));
    let pc1 = c1.mul_scalar(&p);
    let f_tt = TangentField {
        comps: pc1.comps.iter().map(|c| sp.derivative(c, 0).iter().map(|v| v / s2).collect()).collect(),
    };
    Ok((f_tt, p))
}

/// One classical RK4 step of the explicit curve equation. No constraint is
/// re-enforced; drift is left for the caller to monitor.
pub fn step_rk4_explicit(state: &GeodesicState, dt: f64, tol: f64) -> Result<(GeodesicState, StepInfo)> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidConfig("dt must be positive"));
    }
    let stage = |s: &GeodesicState| rhs_l2_curve(s, tol);
    let shift = |dx: &TangentField, dv: &TangentField, h: f64| -> Result<GeodesicState> {
        Ok(GeodesicState {
            f: state.f.displaced(h, dx)?,
            f_t: state.f_t.axpy(h, dv),
            t: state.t + h,
        })
    };
    let (a1, p) = stage(state)?;
    let v1 = state.f_t.clone();
    let s2 = shift(&v1, &a1, 0.5 * dt)?;
    let (a2, _) = stage(&s2)?;
    let v2 = s2.f_t.clone();
    let s3 = shift(&v2, &a2, 0.5 * dt)?;
    let (a3, _) = stage(&s3)?;
    let v3 = s3.f_t.clone();
    let s4 = shift(&v3, &a3, dt)?;
    let (a4, _) = stage(&s4)?;
    let v4 = s4.f_t.clone();
    let combine = |k1: &TangentField, k2: &TangentField, k3: &TangentField, k4: &TangentField| {
        k1.add(&k2.scale(2.0)).add(&k3.scale(2.0)).add(k4).scale(dt / 6.0)
    };
    let dx = combine(&v1, &v2, &v3, &v4);
    let dv = combine(&a1, &a2, &a3, &a4);
    Ok((
        GeodesicState {
            f: state.f.displaced(1.0, &dx)?,
            f_t: state.f_t.add(&dv),
            t: state.t + dt,
        },
        StepInfo {
            p,
            newton_iterations: 0,
        },
    ))
}

fn mass_inverse(cache: &GeometryCache, h: &TangentField, l: SobolevOrder, tol: f64) -> Result<TangentField> {
    Ok(sobolev::invert_l(cache, h, l, tol)?.0)
}

fn constrained_step(
    state: &GeodesicState,
    mu: &[f64],
    dt: f64,
    l: SobolevOrder,
    tol: f64,
    solver_tol: f64,
    guess: Option<&ScalarField>,
) -> Result<(GeodesicState, StepInfo)> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidConfig("dt must be positive"));
    }
    let density = Density::Weights(mu.to_vec());
    let cache = build_geometry(&state.f, &density)?;
    let len = cache.len();
    let half_dt2 = 0.5 * dt * dt;
    // Positions only ever move by band-limited increments: without this the
    // two top modes, which the constraint does not see, grow geometrically
    // through aliasing in |∂f|.
    let filtered = |h: &TangentField| TangentField {
        comps: h.comps.iter().map(|c| cache.spectral.band_limit(c, 1)).collect(),
    };
    let advance = |force: &TangentField| state.f.displaced(1.0, &filtered(&state.f_t.scale(dt).axpy(half_dt2, force)));
    let mut lambda = guess.cloned().unwrap_or_else(|| ScalarField::zeros(len));
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut force = mass_inverse(&cache, &cache.constraint_adjoint(&lambda), l, solver_tol)?;
    let mut q = advance(&force)?;
    while iterations < NEWTON_MAX_ITER {
        let rho = volume_density(&q)?;
        let r: Vec<f64> = rho.0.iter().zip(mu).map(|(s, m)| s / m - 1.0).collect();
        // The top band of ρ comes from aliasing in |∂f|. The linearised
        // operator Ψ and the actual response of ρ disagree there (the force
        // feeds the Nyquist line, which the derivative discards), so the
        // constraint is enforced below that band.
        let r = cache.spectral.band_limit(&r, 1);
        residual = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if residual <= tol {
            break;
        }
        iterations += 1;
        let rhs = ScalarField(r.iter().map(|v| -v / half_dt2).collect());
        let (delta, _) = solve_psi(&cache, &rhs, l, solver_tol)?;
        let delta = ScalarField(cache.spectral.band_limit(&delta.0, 1));
        lambda = ScalarField(lambda.0.iter().zip(&delta.0).map(|(a, b)| a + b).collect());
        force = mass_inverse(&cache, &cache.constraint_adjoint(&lambda), l, solver_tol)?;
        q = advance(&force)?;
    }
    if residual > tol {
        return Err(if l.get() == 0 {
            Error::ConstraintSolveFailed { iterations, residual }
        } else {
            Error::NewtonFailed { iterations, residual }
        });
    }
    let v_half = state.f_t.axpy(0.5 * dt, &force);
    let cache_next = build_geometry(&q, &density)?;
    let v_next = if l.get() == 0 {
        l2_project(&cache_next, &v_half, solver_tol)?.h_mu
    } else {
        hk_project(&cache_next, &v_half, l, solver_tol)?.h_mu
    };
    Ok((
        GeodesicState {
            f: q,
            f_t: v_next,
            t: state.t + dt,
        },
        StepInfo {
            p: lambda,
            newton_iterations: iterations,
        },
    ))
}

/// One RATTLE step for the L² metric: `ρ(f_{n+1}) ≡ 1` to within `tol`
/// after the position solve, then the velocity is projected onto the
/// tangent space at the new position.
pub fn step_rattle(state: &GeodesicState, mu: &[f64], dt: f64, tol: f64) -> Result<(GeodesicState, StepInfo)> {
    constrained_step(state, mu, dt, SobolevOrder::default(), tol, 1e-12, None)
}

/// One step of the constrained variational integrator for `G^l`, `l ≥ 1`,
/// on planar curves.
pub fn step_discrete_lagrangian(
    state: &GeodesicState,
    mu: &[f64],
    dt: f64,
    l: SobolevOrder,
    tol: f64,
) -> Result<(GeodesicState, StepInfo)> {
    if l.get() == 0 {
        return Err(Error::InvalidConfig("discrete-Lagrangian scheme needs l ≥ 1"));
    }
    check_curve(&state.f)?;
    constrained_step(state, mu, dt, l, tol, 1e-12, None)
}

/// Energy `G^l(f_t, f_t)` at `state`.
pub fn energy(cache: &GeometryCache, f_t: &TangentField, l: SobolevOrder) -> Result<f64> {
    sobolev::inner_product_gl(cache, f_t, f_t, l)
}

fn record(
    state: &GeodesicState,
    mu: &[f64],
    l: SobolevOrder,
    p: &ScalarField,
    renormalized: bool,
) -> Result<InvariantRecord> {
    let cache = build_geometry(&state.f, &Density::Weights(mu.to_vec()))?;
    Ok(InvariantRecord {
        t: state.t,
        energy: energy(&cache, &state.f_t, l)?,
        rho_deviation: cache.rho_deviation(),
        constraint_residual: cache.constraint_residual(&state.f_t)?.max_abs(),
        p_min: p.min(),
        p_max: p.max(),
        renormalized,
    })
}

/// Integrates a geodesic from `initial` according to `cfg`.
///
/// The background density is the volume density of the initial immersion,
/// so the run starts on the constraint manifold. Failures after the first
/// step are reported in [`Trajectory::failure`] together with the data
/// computed so far.
pub fn integrate(initial: &GeodesicState, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let l = cfg.order;
    if cfg.scheme != Scheme::Rattle {
        check_curve(&initial.f)?;
    }
    let cache0 = build_geometry(&initial.f, &Density::Induced)?;
    if l.get() > 0 && cache0.is_minimal() {
        return Err(Error::MinimalImmersion);
    }
    let mu = cache0.mu.clone();
    let residual = cache0.constraint_residual(&initial.f_t)?.max_abs();
    if residual > DRIFT_TOL * initial.f_t.max_norm().max(1.0) {
        return Err(Error::InvalidInitialData { residual });
    }

    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let mut state = initial.clone();
    let mut traj = Trajectory {
        snapshots: alloc::vec![state.clone()],
        log: Vec::with_capacity(steps + 1),
        mu: mu.clone(),
        failure: None,
    };
    let p0 = match cfg.scheme {
        Scheme::Rk4Explicit => rhs_l2_curve(&state, cfg.solver_tol).map(|(_, p)| p),
        _ => Ok(ScalarField::zeros(mu.len())),
    };
    let p0 = match p0 {
        Ok(p) => p,
        Err(e) => {
            traj.failure = Some(e);
            return Ok(traj);
        }
    };
    traj.log.push(record(&state, &mu, l, &p0, false)?);
    let mut guess: Option<ScalarField> = None;
    for step in 1..=steps {
        let result = match cfg.scheme {
            Scheme::Rk4Explicit => step_rk4_explicit(&state, cfg.dt, cfg.solver_tol),
            Scheme::Rattle | Scheme::DiscreteLagrangian => {
                constrained_step(&state, &mu, cfg.dt, l, cfg.tol, cfg.solver_tol, guess.as_ref())
            }
        };
        let (mut next, info) = match result {
            Ok(v) => v,
            Err(e) => {
                traj.failure = Some(e);
                break;
            }
        };
        // Keep the time grid exact instead of accumulating dt.
        next.t = initial.t + step as f64 * cfg.dt;
        if cfg.renormalize {
            let reprojected = build_geometry(&next.f, &Density::Weights(mu.clone())).and_then(|c| {
                if l.get() == 0 {
                    l2_project(&c, &next.f_t, cfg.solver_tol)
                } else {
                    hk_project(&c, &next.f_t, l, cfg.solver_tol)
                }
            });
            match reprojected {
                Ok(r) => next.f_t = r.h_mu,
                Err(e) => {
                    traj.failure = Some(e);
                    break;
                }
            }
        }
        match record(&next, &mu, l, &info.p, cfg.renormalize) {
            Ok(r) => traj.log.push(r),
            Err(e) => {
                traj.failure = Some(e);
                break;
            }
        }
        guess = Some(info.p);
        state = next;
        if step % cfg.output_stride == 0 || step == steps {
            traj.snapshots.push(state.clone());
        }
    }
    Ok(traj)
}
