//! The invariant suite behind `volpres check` and the acceptance test.
//!
//! Each check recomputes its numbers from scratch and compares them with a
//! fixed bound; nothing is tuned per run.

use std::fmt;
use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use volpres_core::dense::DenseOperators;
use volpres_core::euler::{crosscheck_general_projection, integrate_euler};
use volpres_core::families::circle;
use volpres_core::geodesic::{integrate, GeodesicState, IntegratorConfig, Scheme, Trajectory};
use volpres_core::geometry::{dmetric_variation, dvol_variation, pullback_metric, volume_density};
use volpres_core::projection::{hk_project, l2_project};
use volpres_core::sobolev::{apply_psi, inner_product_gl, psi_symbol_probe};
use volpres_core::{build_geometry, Density, DiscreteImmersion, GeometryCache, ParamGrid, Result, SobolevOrder};

use crate::families::{
    circle_bump, circle_rotation, random_scalar, random_tangent, random_vorticity, shear_flow, wobbly_circle,
    wobbly_torus,
};
use crate::sweep::loglog_slope;

/// Wall-clock budget of the whole suite.
pub const TIME_BUDGET_S: f64 = 300.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:>2} {} [{:.1}s] {}", self.id, self.title, self.seconds, self.detail)
    }
}

/// Accumulates measured values against their bounds.
#[derive(Default)]
struct Report {
    ok: bool,
    parts: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Self {
            ok: true,
            parts: Vec::new(),
        }
    }

    fn at_most(&mut self, label: &str, value: f64, bound: f64) -> &mut Self {
        let pass = value <= bound;
        self.ok &= pass;
        self.parts.push(format!("{label}={value:.2e}{}{bound:.0e}", if pass { "<=" } else { ">" }));
        self
    }

    fn near(&mut self, label: &str, value: f64, target: f64, tol: f64) -> &mut Self {
        let pass = (value - target).abs() <= tol;
        self.ok &= pass;
        self.parts.push(format!("{label}={value:.3}{}{target}±{tol}", if pass { "~" } else { "!~" }));
        self
    }

    fn holds(&mut self, label: &str, pass: bool) -> &mut Self {
        self.ok &= pass;
        self.parts.push(format!("{label}={pass}"));
        self
    }

    fn finish(&self) -> (bool, String) {
        (self.ok, self.parts.join(" "))
    }
}

fn order(l: u32) -> SobolevOrder {
    SobolevOrder::new(l).expect("orders used by the suite are valid")
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn config(scheme: Scheme, dt: f64, t_end: f64, l: u32) -> IntegratorConfig {
    IntegratorConfig {
        scheme,
        dt,
        t_end,
        output_stride: usize::MAX,
        order: order(l),
        ..IntegratorConfig::default()
    }
}

fn finished(traj: Trajectory) -> Result<Trajectory> {
    match traj.failure {
        Some(e) => Err(e),
        None => Ok(traj),
    }
}

fn rotation_error(state: &GeodesicState, omega: f64) -> f64 {
    let grid = state.f.grid();
    let mut worst = 0.0f64;
    for (node, th) in grid.coordinates(0).enumerate() {
        let a = th + omega * state.t;
        let p = state.f.points().at(node);
        worst = worst.max((p[0] - a.cos()).abs()).max((p[1] - a.sin()).abs());
    }
    worst
}

/// Reference resolution and step of the whip checks.
const WHIP_N: usize = 128;
const WHIP_DT: f64 = 1e-3;

/// Runs shared between checks.
#[derive(Default)]
struct Shared {
    whip_rattle: OnceLock<Result<Trajectory>>,
}

impl Shared {
    fn whip() -> Result<GeodesicState> {
        circle_bump(WHIP_N, 1.0, 0.5, 0.0, 0.35)
    }

    fn whip_rattle(&self) -> Result<&Trajectory> {
        self.whip_rattle
            .get_or_init(|| finished(integrate(&Self::whip()?, &config(Scheme::Rattle, WHIP_DT, 1.0, 0))?))
            .as_ref()
            .map_err(Clone::clone)
    }
}

fn projection_closed_forms(_: &Shared) -> Result<(bool, String)> {
    let start = Instant::now();
    let f = circle(64, 1.0)?;
    let cache = build_geometry(&f, &Density::Induced)?;
    let radial = l2_project(&cache, f.points(), 1e-13)?;
    let tangent = l2_project(&cache, &cache.frame[0], 1e-13)?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut r = Report::new();
    r.at_most("|P(c)|", radial.h_mu.max_norm(), 1e-8)
        .at_most("|p+1|", radial.p.0.iter().fold(0.0, |m, v| m.max((v + 1.0).abs())), 1e-8)
        .at_most("|P(c')-c'|", tangent.h_mu.sub(&cache.frame[0]).max_norm(), 1e-8)
        .at_most("|p|", tangent.p.max_abs(), 1e-8)
        .at_most("seconds", elapsed, 1.0);
    Ok(r.finish())
}

/// Steps of the convergence fit. Both curve integrators are conditionally
/// stable (the tension term is a wave with speed |f_t|), which caps dt near
/// 2/(N/2) = 0.03 at N = 128.
const SLOPE_DTS: [f64; 3] = [0.02, 0.01, 0.005];

fn rotation_oracle(_: &Shared) -> Result<(bool, String)> {
    let s = circle_rotation(128, 1.0, 1.0)?;
    let mut r = Report::new();
    let rk4 = finished(integrate(&s, &config(Scheme::Rk4Explicit, 1e-3, 1.0, 0))?)?;
    r.at_most("rk4", rotation_error(rk4.last().unwrap(), 1.0), 1e-6);
    let rattle = finished(integrate(&s, &config(Scheme::Rattle, 1e-3, 1.0, 0))?)?;
    r.at_most("rattle", rotation_error(rattle.last().unwrap(), 1.0), 1e-5);
    for (scheme, name, target, tol) in [(Scheme::Rk4Explicit, "rk4 slope", 4.0, 0.3), (Scheme::Rattle, "rattle slope", 2.0, 0.2)] {
        let mut pts = Vec::new();
        for dt in SLOPE_DTS {
            let t = finished(integrate(&s, &config(scheme, dt, 1.0, 0))?)?;
            pts.push((dt, rotation_error(t.last().unwrap(), 1.0)));
        }
        r.near(name, loglog_slope(&pts), target, tol);
    }
    Ok(r.finish())
}

fn constraint_preservation(sh: &Shared) -> Result<(bool, String)> {
    let mut r = Report::new();
    r.at_most("rattle |rho-1|", sh.whip_rattle()?.max_rho_deviation(), 1e-8);
    let rk4 = finished(integrate(&Shared::whip()?, &config(Scheme::Rk4Explicit, WHIP_DT, 1.0, 0))?)?;
    r.holds("rk4 drift logged", rk4.log.len() == 1001);
    r.at_most("rk4 |rho-1|", rk4.max_rho_deviation(), 1e-6);
    Ok(r.finish())
}

fn energy_conservation(sh: &Shared) -> Result<(bool, String)> {
    let mut r = Report::new();
    r.at_most("l=0 rattle", sh.whip_rattle()?.energy_drift(), 1e-6);
    let dl = finished(integrate(&Shared::whip()?, &config(Scheme::DiscreteLagrangian, WHIP_DT, 1.0, 1))?)?;
    r.at_most("l=1 variational", dl.energy_drift(), 1e-6);
    Ok(r.finish())
}

fn psi_operator(_: &Shared) -> Result<(bool, String)> {
    let mut r = Report::new();
    let wobbly = build_geometry(&wobbly_circle(64, 0.1, 5)?, &Density::Induced)?;
    let surface = build_geometry(&wobbly_torus(16, 0.05, 6)?, &Density::Induced)?;
    let mut worst_adj = 0.0f64;
    let mut negative = true;
    for cache in [&wobbly, &surface] {
        let p = random_scalar(&cache.grid, 4, 7);
        let q = random_scalar(&cache.grid, 4, 8);
        for l in 0..=2 {
            let (pp, _) = apply_psi(cache, &p, order(l), 1e-13)?;
            let (qq, _) = apply_psi(cache, &q, order(l), 1e-13)?;
            let a = cache.inner_scalar(&pp, &q);
            let b = cache.inner_scalar(&p, &qq);
            worst_adj = worst_adj.max((a - b).abs() / a.abs().max(b.abs()));
            negative &= cache.inner_scalar(&pp, &p) < 0.0 && cache.inner_scalar(&qq, &q) < 0.0;
        }
    }
    r.at_most("selfadjointness", worst_adj, 1e-9).holds("negative", negative);

    let round = build_geometry(&circle(128, 1.0)?, &Density::Induced)?;
    let k = 32;
    let mut worst_law = 0.0f64;
    for l in 0..=2 {
        let m = psi_symbol_probe(&round, order(l), k, 1e-12)?;
        let law = (k as f64).powi(2 - 2 * l as i32);
        worst_law = worst_law.max((m.abs() / law - 1.0).abs());
    }
    r.at_most("symbol law at N/4", worst_law, 0.05);

    let unit = build_geometry(&circle(64, 1.0)?, &Density::Induced)?;
    let p = random_scalar(&unit.grid, 6, 9);
    let (q, _) = apply_psi(&unit, &p, order(0), 1e-12)?;
    let lap = unit.laplace_beltrami(&p);
    let expected: Vec<f64> = lap.0.iter().zip(&p.0).map(|(a, b)| a - b).collect();
    r.at_most("|Psi p - (p''-p)|", max_diff(&q.0, &expected), 1e-10);
    Ok(r.finish())
}

fn projection_defects(cache: &GeometryCache, l: u32, seed: u64) -> Result<(f64, f64)> {
    let x = random_tangent(&cache.grid, cache.target_dim, 4, seed);
    let project = |v| if l == 0 { l2_project(cache, v, 1e-12) } else { hk_project(cache, v, order(l), 1e-12) };
    let p1 = project(&x)?;
    let p2 = project(&p1.h_mu)?;
    let d = p2.h_mu.sub(&p1.h_mu);
    let norm = |v| inner_product_gl(cache, v, v, order(l)).map(f64::sqrt);
    Ok((norm(&d)? / norm(&x)?, p1.orthogonality_defect))
}

fn projection_properties(_: &Shared) -> Result<(bool, String)> {
    let mut r = Report::new();
    let curve = build_geometry(&wobbly_circle(64, 0.1, 11)?, &Density::Induced)?;
    let surface = build_geometry(&wobbly_torus(16, 0.05, 12)?, &Density::Induced)?;
    let mut idem = 0.0f64;
    let mut orth = 0.0f64;
    for (cache, l) in [(&curve, 0), (&surface, 0), (&curve, 1), (&curve, 2)] {
        let (i, o) = projection_defects(cache, l, 13 + l as u64)?;
        idem = idem.max(i);
        orth = orth.max(o);
    }
    r.at_most("idempotency", idem, 1e-7).at_most("orthogonality", orth, 1e-7);

    let small = build_geometry(&wobbly_circle(32, 0.1, 21)?, &Density::Induced)?;
    let dense = DenseOperators::assemble(&small)?;
    let x = random_tangent(&small.grid, 2, 4, 23);
    let mut worst = 0.0f64;
    for l in 0..=2 {
        let (h, p) = dense.project(&x, order(l))?;
        let fast = if l == 0 { l2_project(&small, &x, 1e-13)? } else { hk_project(&small, &x, order(l), 1e-13)? };
        worst = worst
            .max(fast.h_mu.sub(&h).max_norm() / x.max_norm())
            .max(max_diff(&fast.p.0, &p.0) / p.max_abs());
    }
    r.at_most("dense oracle", worst, 1e-8);
    Ok(r.finish())
}

fn fd_slopes(f: &DiscreteImmersion, seed: u64) -> Result<(f64, f64)> {
    let h = random_tangent(f.grid(), f.target_dim(), 2, seed);
    let dv = dvol_variation(f, &h)?;
    let dg = dmetric_variation(f, &h)?;
    let v0 = volume_density(f)?;
    let g0 = pullback_metric(f)?;
    let d = f.grid().dim();
    let (mut vol, mut met) = (Vec::new(), Vec::new());
    for eps in [1e-3, 1e-4, 1e-5, 1e-6] {
        let fe = f.displaced(eps, &h)?;
        let ve = volume_density(&fe)?;
        let fd: Vec<f64> = ve.0.iter().zip(&v0.0).map(|(a, b)| (a - b) / eps).collect();
        vol.push((eps, max_diff(&fd, &dv.0)));
        let ge = pullback_metric(&fe)?;
        let mut worst = 0.0f64;
        for node in 0..ge.len() {
            for a in 0..d {
                for b in 0..d {
                    worst = worst.max(((ge[node][a][b] - g0[node][a][b]) / eps - dg[node][a][b]).abs());
                }
            }
        }
        met.push((eps, worst));
    }
    Ok((loglog_slope(&vol), loglog_slope(&met)))
}

fn variational_oracles(_: &Shared) -> Result<(bool, String)> {
    let mut r = Report::new();
    for (name, f, seed) in [("curve", wobbly_circle(32, 0.1, 31)?, 32), ("surface", wobbly_torus(16, 0.05, 33)?, 34)] {
        let (sv, sm) = fd_slopes(&f, seed)?;
        r.near(&format!("{name} dvol slope"), sv, 1.0, 0.1);
        r.near(&format!("{name} dmetric slope"), sm, 1.0, 0.1);
    }
    Ok(r.finish())
}

fn euler_case(_: &Shared) -> Result<(bool, String)> {
    let mut r = Report::new();
    let shear = shear_flow([64, 64], 1.0, 1)?;
    let t = integrate_euler(&shear, 1e-3, 1.0, 1000, false)?;
    let end = &t.snapshots.last().expect("initial snapshot").1;
    r.holds("shear completed", t.failure.is_none());
    r.at_most("shear |w-w0|", end.max_abs_diff(&shear), 1e-8);

    let w0 = random_vorticity([64, 64], 4, 1.0, [0.1, -0.05], 41)?;
    let t = integrate_euler(&w0, 1e-3, 1.0, 1000, false)?;
    r.holds("random completed", t.failure.is_none());
    r.at_most("energy drift", t.energy_drift(), 1e-6).at_most("enstrophy drift", t.enstrophy_drift(), 1e-6);

    let grid = ParamGrid::torus(64, 64)?;
    let h = random_tangent(&grid, 2, 6, 42);
    let rep = crosscheck_general_projection(grid, &h, 1e-13)?;
    r.at_most("leray vs general", rep.h_mu_disagreement.max(rep.potential_disagreement), 1e-9);

    let t = integrate_euler(&shear, 1e-3, 0.5, 500, true)?;
    r.holds("flow map completed", t.failure.is_none());
    r.at_most("flow map |rho-1|", t.max_volume_deviation(), 1e-6);
    Ok(r.finish())
}

fn cross_integrator(_: &Shared) -> Result<(bool, String)> {
    let s = Shared::whip()?;
    let a = finished(integrate(&s, &config(Scheme::Rk4Explicit, WHIP_DT, 0.25, 0))?)?;
    let b = finished(integrate(&s, &config(Scheme::Rattle, WHIP_DT, 0.25, 0))?)?;
    let diff = a.last().unwrap().f.points().sub(b.last().unwrap().f.points()).max_norm();
    let mut r = Report::new();
    r.at_most("rk4 vs rattle", diff, 1e-4);
    Ok(r.finish())
}

type CheckFn = fn(&Shared) -> Result<(bool, String)>;

const CHECKS: [(u8, &str, CheckFn); 9] = [
    (1, "round-circle projection closed forms", projection_closed_forms),
    (2, "rigid-rotation geodesic oracle", rotation_oracle),
    (3, "constraint preservation", constraint_preservation),
    (4, "energy conservation", energy_conservation),
    (5, "Psi operator", psi_operator),
    (6, "projection properties", projection_properties),
    (7, "variational finite-difference oracles", variational_oracles),
    (8, "Euler on the flat torus", euler_case),
    (9, "cross-integrator equivalence", cross_integrator),
];

/// Runs criteria 1–9 on `threads` workers (sequentially for 1) and appends
/// the timing criterion 10.
pub fn run_checks(threads: usize) -> Vec<CheckOutcome> {
    let start = Instant::now();
    let shared = Shared::default();
    let one = |&(id, title, check): &(u8, &'static str, CheckFn)| {
        let t0 = Instant::now();
        let (passed, detail) = check(&shared).unwrap_or_else(|e| (false, format!("error: {e}")));
        CheckOutcome {
            id,
            title,
            passed,
            detail,
            seconds: t0.elapsed().as_secs_f64(),
        }
    };
    let mut out: Vec<CheckOutcome> = if threads <= 1 {
        CHECKS.iter().map(one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        pool.install(|| CHECKS.par_iter().map(one).collect())
    };
    let total = start.elapsed().as_secs_f64();
    let mut detail = format!("suite={total:.1}s budget={TIME_BUDGET_S}s");
    if threads > 1 {
        detail.push_str(&format!(" (measured with {threads} threads; the budget refers to one)"));
    }
    out.push(CheckOutcome {
        id: 10,
        title: "suite runtime",
        passed: total < TIME_BUDGET_S,
        detail,
        seconds: total,
    });
    out
}
