//! Incompressible Euler flow on the flat torus `T²`.
//!
//! The vorticity–streamfunction solver here is deliberately independent of
//! the immersion machinery: it works with plain Fourier multipliers on the
//! grid. [`crosscheck_general_projection`] compares its Leray projection with
//! the minimal branch of the general decomposition at the identity map.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::{ScalarField, TangentField};
use crate::geometry::{build_geometry, volume_density, Density, DiscreteImmersion};
use crate::grid::ParamGrid;
use crate::projection::decompose;
use crate::spectral::Spectral;

/// Smallest supported grid size per direction.
pub const MIN_GRID: usize = 32;
/// Courant number of the CFL bound `dt ≤ C·Δx/‖u‖∞`.
pub const CFL: f64 = 0.5;
/// Modes with `|û| ≤ SPARSE_CUTOFF·max |û|` are skipped by point evaluation.
pub const SPARSE_CUTOFF: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField2D {
    pub grid: ParamGrid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VorticityField {
    pub grid: ParamGrid,
    pub omega: Vec<f64>,
    /// Mean velocity (harmonic part), conserved by the flow.
    pub mean_flow: [f64; 2],
}

fn check_torus(grid: &ParamGrid) -> Result<()> {
    if grid.dim() != 2 {
        return Err(Error::InvalidGrid("Euler flow lives on a two-dimensional torus grid"));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

impl VelocityField2D {
    pub fn new(grid: ParamGrid, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        check_torus(&grid)?;
        for c in [&u, &v] {
            if c.len() != grid.len() {
                return Err(Error::ShapeMismatch {
                    expected: grid.len(),
                    found: c.len(),
                });
            }
        }
        let out = Self { grid, u, v };
        out.to_tangent().check_finite()?;
        Ok(out)
    }

    pub fn zeros(grid: ParamGrid) -> Self {
        Self {
            grid,
            u: vec![0.0; grid.len()],
            v: vec![0.0; grid.len()],
        }
    }

    pub fn from_tangent(grid: ParamGrid, h: &TangentField) -> Result<Self> {
        h.check_shape(2, grid.len())?;
        Self::new(grid, h.comps[0].clone(), h.comps[1].clone())
    }

    pub fn to_tangent(&self) -> TangentField {
        TangentField {
            comps: vec![self.u.clone(), self.v.clone()],
        }
    }

    pub fn mean(&self) -> [f64; 2] {
        [mean(&self.u), mean(&self.v)]
    }

    pub fn max_speed(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(a, b)| (a * a + b * b).sqrt())
            .fold(0.0, f64::max)
    }

    /// Spectral divergence `∂_x u + ∂_y v`.
    pub fn divergence(&self) -> Vec<f64> {
        let sp = Spectral::new(self.grid);
        let ux = sp.derivative(&self.u, 0);
        let vy = sp.derivative(&self.v, 1);
        ux.iter().zip(&vy).map(|(a, b)| a + b).collect()
    }

    /// `∫ |u|² dx`.
    pub fn energy(&self) -> f64 {
        let w = self.grid.cell_volume();
        self.u.iter().zip(&self.v).map(|(a, b)| a * a + b * b).sum::<f64>() * w
    }

    pub fn sub(&self, other: &Self) -> Self {
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect();
        Self {
            grid: self.grid,
            u: diff(&self.u, &other.u),
            v: diff(&self.v, &other.v),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().chain(&self.v).fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Helmholtz–Hodge (Leray) projection onto divergence-free fields.
///
/// Uses the first-derivative wavenumbers, so the divergence of the result is
/// annihilated exactly in the discrete sense; the mean flow is preserved.
pub fn leray_project(field: &VelocityField2D) -> VelocityField2D {
    let sp = Spectral::new(field.grid);
    let mut uh = sp.forward(&field.u);
    let mut vh = sp.forward(&field.v);
    for idx in 0..uh.len() {
        let k = sp.mode(idx).k;
        let k2 = k[0] * k[0] + k[1] * k[1];
        if k2 == 0.0 {
            continue;
        }
        let dot = (uh[idx] * k[0] + vh[idx] * k[1]) / k2;
        uh[idx] -= dot * k[0];
        vh[idx] -= dot * k[1];
    }
    VelocityField2D {
        grid: field.grid,
        u: sp.inverse_real(uh),
        v: sp.inverse_real(vh),
    }
}

/// Zero-mean potential `φ` with `Δφ = div u`, so that `u − grad φ` is the
/// Leray projection.
pub fn scalar_potential(field: &VelocityField2D) -> Vec<f64> {
    let sp = Spectral::new(field.grid);
    let div = field.divergence();
    sp.apply_multiplier(&div, |m| {
        let k2 = m.k[0] * m.k[0] + m.k[1] * m.k[1];
        if k2 == 0.0 {
            0.0
        } else {
            -1.0 / k2
        }
    })
}

impl VorticityField {
    pub fn new(grid: ParamGrid, omega: Vec<f64>, mean_flow: [f64; 2]) -> Result<Self> {
        check_torus(&grid)?;
        if omega.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                found: omega.len(),
            });
        }
        ScalarField(omega.clone()).check_finite()?;
        Ok(Self { grid, omega, mean_flow })
    }

    /// Curl `∂_x v − ∂_y u` together with the mean of `u`.
    pub fn from_velocity(field: &VelocityField2D) -> Self {
        let sp = Spectral::new(field.grid);
        let vx = sp.derivative(&field.v, 0);
        let uy = sp.derivative(&field.u, 1);
        Self {
            grid: field.grid,
            omega: vx.iter().zip(&uy).map(|(a, b)| a - b).collect(),
            mean_flow: field.mean(),
        }
    }

    /// `∫ ω² dx`.
    pub fn enstrophy(&self) -> f64 {
        self.omega.iter().map(|w| w * w).sum::<f64>() * self.grid.cell_volume()
    }

    /// `∫ ω dx`.
    pub fn circulation(&self) -> f64 {
        self.omega.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.omega
            .iter()
            .zip(&other.omega)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Velocity `u = (ψ_y + U, −ψ_x + V)` with `Δψ = −ω`.
pub fn velocity_from_vorticity(w: &VorticityField) -> VelocityField2D {
    let sp = Spectral::new(w.grid);
    let psi = sp.apply_multiplier(&w.omega, |m| {
        let k2 = m.k[0] * m.k[0] + m.k[1] * m.k[1];
        if k2 == 0.0 {
            0.0
        } else {
            1.0 / k2
        }
    });
    let psi_x = sp.derivative(&psi, 0);
    let psi_y = sp.derivative(&psi, 1);
    VelocityField2D {
        grid: w.grid,
        u: psi_y.iter().map(|p| p + w.mean_flow[0]).collect(),
        v: psi_x.iter().map(|p| w.mean_flow[1] - p).collect(),
    }
}

/// Largest stable step `C·Δx/‖u‖∞` (infinite for a fluid at rest).
pub fn cfl_limit(w: &VorticityField) -> f64 {
    let speed = velocity_from_vorticity(w).max_speed();
    let dx = w.grid.spacing(0).min(w.grid.spacing(1));
    if speed > 0.0 {
        CFL * dx / speed
    } else {
        f64::INFINITY
    }
}

/// Advective tendency `−u·∇ω` with 2/3-rule dealiasing and zero mean.
fn tendency(sp: &Spectral, w: &VorticityField) -> Vec<f64> {
    let vel = velocity_from_vorticity(w);
    let wx = sp.derivative(&w.omega, 0);
    let wy = sp.derivative(&w.omega, 1);
    let adv: Vec<f64> = (0..w.omega.len())
        .map(|i| -(vel.u[i] * wx[i] + vel.v[i] * wy[i]))
        .collect();
    let sizes = [w.grid.size(0) as i64, w.grid.size(1) as i64];
    sp.apply_multiplier(&adv, |m| {
        let keep = (0..2).all(|a| 3 * m.index[a].abs() < sizes[a]);
        if keep && m.index != [0, 0] {
            1.0
        } else {
            0.0
        }
    })
}

/// One RK4 step of `ω_t + u·∇ω = 0`.
pub fn step_euler_vorticity(w: &VorticityField, dt: f64) -> Result<VorticityField> {
    if w.grid.size(0) < MIN_GRID || w.grid.size(1) < MIN_GRID {
        return Err(Error::InvalidGrid("Euler solver needs at least 32×32 nodes"));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidConfig("dt must be positive"));
    }
    let limit = cfl_limit(w);
    if dt > limit {
        return Err(Error::CflViolation { dt, limit });
    }
    let sp = Spectral::new(w.grid);
    let stage = |base: &VorticityField, k: &[f64], h: f64| VorticityField {
        grid: base.grid,
        omega: base.omega.iter().zip(k).map(|(a, b)| a + h * b).collect(),
        mean_flow: base.mean_flow,
    };
    let k1 = tendency(&sp, w);
    let k2 = tendency(&sp, &stage(w, &k1, 0.5 * dt));
    let k3 = tendency(&sp, &stage(w, &k2, 0.5 * dt));
    let k4 = tendency(&sp, &stage(w, &k3, dt));
    let omega = (0..w.omega.len())
        .map(|i| w.omega[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    VorticityField::new(w.grid, omega, w.mean_flow)
}

/// Point evaluation of the trigonometric interpolant of a velocity field,
/// summing only the significant modes. Nyquist modes are dropped, matching
/// the differentiation convention.
#[derive(Debug, Clone)]
pub struct VelocityInterpolant {
    periods: [f64; 2],
    /// `(mx, my, û/N, v̂/N)`.
    modes: Vec<(i64, i64, Complex64, Complex64)>,
    max_index: [usize; 2],
}

impl VelocityInterpolant {
    pub fn new(field: &VelocityField2D) -> Self {
        let sp = Spectral::new(field.grid);
        let uh = sp.forward(&field.u);
        let vh = sp.forward(&field.v);
        let scale = 1.0 / field.grid.len() as f64;
        let peak = uh.iter().chain(&vh).fold(0.0f64, |m, z| m.max(z.norm()));
        let sizes = [field.grid.size(0) as i64, field.grid.size(1) as i64];
        let mut modes = Vec::new();
        let mut max_index = [0usize; 2];
        for idx in 0..uh.len() {
            let m = sp.mode(idx).index;
            if 2 * m[0] == sizes[0] || 2 * m[1] == sizes[1] {
                continue;
            }
            if uh[idx].norm().max(vh[idx].norm()) <= SPARSE_CUTOFF * peak {
                continue;
            }
            max_index[0] = max_index[0].max(m[0].unsigned_abs() as usize);
            max_index[1] = max_index[1].max(m[1].unsigned_abs() as usize);
            modes.push((m[0], m[1], uh[idx] * scale, vh[idx] * scale));
        }
        Self {
            periods: [field.grid.period(0), field.grid.period(1)],
            modes,
            max_index,
        }
    }

    pub fn active_modes(&self) -> usize {
        self.modes.len()
    }

    fn powers(theta: f64, max: usize) -> Vec<Complex64> {
        let base = Complex64::new(theta.cos(), theta.sin());
        let mut out = Vec::with_capacity(max + 1);
        let mut z = Complex64::new(1.0, 0.0);
        for _ in 0..=max {
            out.push(z);
            z *= base;
        }
        out
    }

    /// Velocity at the physical point `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        let tau = 2.0 * core::f64::consts::PI;
        let px = Self::powers(tau * x / self.periods[0], self.max_index[0]);
        let py = Self::powers(tau * y / self.periods[1], self.max_index[1]);
        let pick = |p: &[Complex64], m: i64| {
            let z = p[m.unsigned_abs() as usize];
            if m < 0 {
                z.conj()
            } else {
                z
            }
        };
        let mut out = [0.0; 2];
        for &(mx, my, u, v) in &self.modes {
            let e = pick(&px, mx) * pick(&py, my);
            out[0] += (u * e).re;
            out[1] += (v * e).re;
        }
        out
    }
}

/// Advances the flow map `f` by one RK4 step along the time-dependent
/// velocity `u_of_t`, which is sampled at `t`, `t + dt/2` and `t + dt`.
pub fn advect_flowmap(
    f: &DiscreteImmersion,
    mut u_of_t: impl FnMut(f64) -> Result<VelocityField2D>,
    t: f64,
    dt: f64,
) -> Result<DiscreteImmersion> {
    if f.target_dim() != 2 || f.grid().dim() != 2 {
        return Err(Error::InvalidGrid("flow maps are maps of the two-torus"));
    }
    let u0 = VelocityInterpolant::new(&u_of_t(t)?);
    let uh = VelocityInterpolant::new(&u_of_t(t + 0.5 * dt)?);
    let u1 = VelocityInterpolant::new(&u_of_t(t + dt)?);
    let pts = f.points();
    let mut comps = vec![Vec::with_capacity(pts.len()); 2];
    for node in 0..pts.len() {
        let x = [pts.comps[0][node], pts.comps[1][node]];
        let at = |p: &VelocityInterpolant, k: [f64; 2], h: f64| p.eval(x[0] + h * k[0], x[1] + h * k[1]);
        let k1 = at(&u0, [0.0; 2], 0.0);
        let k2 = at(&uh, k1, 0.5 * dt);
        let k3 = at(&uh, k2, 0.5 * dt);
        let k4 = at(&u1, k3, dt);
        for c in 0..2 {
            comps[c].push(x[c] + dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]));
        }
    }
    f.with_points(TangentField { comps })
}

/// `max |ρ(f) − 1|` for a flow map of the flat torus whose parameter grid is
/// the torus itself.
pub fn flowmap_volume_deviation(f: &DiscreteImmersion) -> Result<f64> {
    let rho = volume_density(f)?;
    Ok(rho.0.iter().fold(0.0f64, |m, r| m.max((r - 1.0).abs())))
}

/// Per-record invariants of an Euler run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerRecord {
    pub t: f64,
    pub energy: f64,
    pub enstrophy: f64,
    pub circulation: f64,
    /// `max |ρ(f) − 1|` of the co-advected flow map (zero if none).
    pub volume_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerTrajectory {
    pub snapshots: Vec<(f64, VorticityField)>,
    pub flow_maps: Vec<DiscreteImmersion>,
    pub log: Vec<EulerRecord>,
    pub failure: Option<Error>,
}

impl EulerTrajectory {
    pub fn energy_drift(&self) -> f64 {
        relative_drift(self.log.iter().map(|r| r.energy))
    }

    pub fn enstrophy_drift(&self) -> f64 {
        relative_drift(self.log.iter().map(|r| r.enstrophy))
    }

    pub fn max_volume_deviation(&self) -> f64 {
        self.log.iter().map(|r| r.volume_deviation).fold(0.0, f64::max)
    }
}

fn relative_drift(mut it: impl Iterator<Item = f64>) -> f64 {
    let Some(first) = it.next() else {
        return 0.0;
    };
    let den = first.abs().max(f64::MIN_POSITIVE);
    it.fold(0.0, |m, v| m.max((v - first).abs() / den))
}

/// Integrates the vorticity equation for `t_end` with step `dt`, optionally
/// co-advecting the flow map starting from the identity.
pub fn integrate_euler(
    w0: &VorticityField,
    dt: f64,
    t_end: f64,
    output_stride: usize,
    track_flow_map: bool,
) -> Result<EulerTrajectory> {
    if output_stride == 0 {
        return Err(Error::InvalidConfig("output stride must be at least 1"));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidConfig("t_end must be nonnegative"));
    }
    let steps = (t_end / dt).round() as usize;
    let mut flow = if track_flow_map {
        Some(DiscreteImmersion::torus_identity(w0.grid)?)
    } else {
        None
    };
    let record = |t: f64, w: &VorticityField, flow: &Option<DiscreteImmersion>| -> Result<EulerRecord> {
        Ok(EulerRecord {
            t,
            energy: velocity_from_vorticity(w).energy(),
            enstrophy: w.enstrophy(),
            circulation: w.circulation(),
            volume_deviation: match flow {
                Some(f) => flowmap_volume_deviation(f)?,
                None => 0.0,
            },
        })
    };
    let mut traj = EulerTrajectory {
        snapshots: vec![(0.0, w0.clone())],
        flow_maps: flow.iter().cloned().collect(),
        log: vec![record(0.0, w0, &flow)?],
        failure: None,
    };
    let mut w = w0.clone();
    for step in 1..=steps {
        let t0 = (step - 1) as f64 * dt;
        let t = step as f64 * dt;
        let next = match step_euler_vorticity(&w, dt) {
            Ok(n) => n,
            Err(e) => {
                traj.failure = Some(e);
                break;
            }
        };
        if let Some(f) = &flow {
            // Midpoint velocity from the average vorticity (the map ω ↦ u is linear).
            let mid = VorticityField {
                grid: w.grid,
                omega: w.omega.iter().zip(&next.omega).map(|(a, b)| 0.5 * (a + b)).collect(),
                mean_flow: w.mean_flow,
            };
            let samples = [
                velocity_from_vorticity(&w),
                velocity_from_vorticity(&mid),
                velocity_from_vorticity(&next),
            ];
            let sampler = |s: f64| {
                let i = (((s - t0) / dt) * 2.0).round().clamp(0.0, 2.0) as usize;
                Ok(samples[i].clone())
            };
            match advect_flowmap(f, sampler, t0, dt) {
                Ok(g) => flow = Some(g),
                Err(e) => {
                    traj.failure = Some(e);
                    break;
                }
            }
        }
        w = next;
        match record(t, &w, &flow) {
            Ok(r) => traj.log.push(r),
            Err(e) => {
                traj.failure = Some(e);
                break;
            }
        }
        if step % output_stride == 0 || step == steps {
            traj.snapshots.push((t, w.clone()));
            if let Some(f) = &flow {
                traj.flow_maps.push(f.clone());
            }
        }
    }
    Ok(traj)
}

/// Agreement between the Leray projection and the minimal branch of the
/// general decomposition at the identity map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrosscheckReport {
    /// `max |h_μ(general) − h_μ(Leray)|`.
    pub h_mu_disagreement: f64,
    /// `max |p(general) − φ|` after removing means.
    pub potential_disagreement: f64,
    pub iterations: usize,
}

pub fn crosscheck_general_projection(grid: ParamGrid, h: &TangentField, tol: f64) -> Result<CrosscheckReport> {
    let f = DiscreteImmersion::torus_identity(grid)?;
    let cache = build_geometry(&f, &Density::Induced)?;
    let general = decompose(&cache, h, tol)?;
    let field = VelocityField2D::from_tangent(grid, h)?;
    let leray = leray_project(&field).to_tangent();
    let phi = scalar_potential(&field);
    let p = &general.result.p.0;
    let (pm, qm) = (mean(p), mean(&phi));
    let potential_disagreement = p
        .iter()
        .zip(&phi)
        .fold(0.0f64, |m, (a, b)| m.max(((a - pm) - (b - qm)).abs()));
    Ok(CrosscheckReport {
        h_mu_disagreement: general.result.h_mu.sub(&leray).max_norm(),
        potential_disagreement,
        iterations: general.result.stats.iterations,
    })
}
