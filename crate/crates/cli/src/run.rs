//! Executes one scenario and writes its run directory.
//!
//! Layout of a run directory:
//!
//! ```text
//! record.toml            run record (format "volpres-run/1")
//! invariants.csv         one row per step
//! snapshots/index.csv    index,t,file
//! snapshots/snap_NNNNN.csv
//! study.csv              projection studies only
//! ```

use std::path::Path;
use std::time::Instant;

use volpres_core::euler::{integrate_euler, EulerTrajectory, VorticityField};
use volpres_core::geodesic::{integrate, GeodesicState, IntegratorConfig, Scheme, Trajectory};
use volpres_core::projection::{hk_project, l2_project};
use volpres_core::sobolev::inner_product_gl;
use volpres_core::{build_geometry, Density, SobolevOrder};

use crate::families;
use crate::record::{
    create_dir, num, snapshot_name, write_csv, write_text, Failure, IoError, RunRecord, Summary, INDEX_FILE,
    INVARIANTS_FILE, RECORD_FILE, RUN_FORMAT, SNAPSHOT_DIR, STUDY_FILE,
};
use crate::scenario::{Case, InitialSpec, Scenario, SchemeName};

pub const GEODESIC_INVARIANTS: [&str; 6] = ["t", "energy", "max_rho_deviation", "max_constraint_residual", "p_min", "p_max"];
pub const EULER_INVARIANTS: [&str; 5] = ["t", "energy", "enstrophy", "circulation", "max_rho_deviation"];
pub const STUDY_COLUMNS: [&str; 6] = ["n", "l", "idempotency", "orthogonality", "constraint_residual", "iterations"];

/// Result of the numerical part of a run, before anything is written.
enum Outcome {
    Geodesic(Trajectory),
    Euler(VorticityField, EulerTrajectory),
    Study(Vec<StudyRow>),
    /// Setup failed before the first step.
    Nothing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub l: u32,
    pub idempotency: f64,
    pub orthogonality: f64,
    pub constraint_residual: f64,
    pub iterations: usize,
}

pub fn geodesic_initial(s: &Scenario) -> volpres_core::Result<GeodesicState> {
    let n = &s.grid.n;
    match s.initial() {
        InitialSpec::CircleRotation { radius, omega } => families::circle_rotation(n[0], radius, omega),
        InitialSpec::CircleBump { radius, amp, center, width } => families::circle_bump(n[0], radius, amp, center, width),
        InitialSpec::TorusBump { big_r, r, amp, center, width } => {
            families::torus_bump([n[0], n[1]], big_r, r, amp, center, width)
        }
        _ => Err(volpres_core::Error::Unsupported("family has no immersion")),
    }
}

pub fn euler_initial(s: &Scenario) -> volpres_core::Result<VorticityField> {
    let n = [s.grid.n[0], s.grid.n[1]];
    match s.initial() {
        InitialSpec::ShearFlow { amp, k } => families::shear_flow(n, amp, k),
        InitialSpec::RandomVorticity { kmax, amp, mean_flow } => families::random_vorticity(n, kmax, amp, mean_flow, s.seed),
        _ => Err(volpres_core::Error::Unsupported("family has no vorticity")),
    }
}

pub fn integrator_config(s: &Scenario) -> volpres_core::Result<IntegratorConfig> {
    let it = &s.integrator;
    let scheme = match s.scheme() {
        SchemeName::Rk4 => Scheme::Rk4Explicit,
        SchemeName::Rattle => Scheme::Rattle,
        SchemeName::DiscreteLagrangian => Scheme::DiscreteLagrangian,
        SchemeName::EulerRk4 => return Err(volpres_core::Error::InvalidConfig("euler_rk4 integrates the Euler case")),
    };
    Ok(IntegratorConfig {
        scheme,
        dt: it.dt,
        t_end: it.t_end,
        output_stride: it.output_stride,
        tol: it.tol,
        solver_tol: it.solver_tol,
        order: SobolevOrder::new(s.metric.order)?,
        renormalize: it.renormalize,
    })
}

/// Runs a geodesic scenario in memory.
pub fn run_geodesic(s: &Scenario) -> volpres_core::Result<Trajectory> {
    let init = geodesic_initial(s)?;
    integrate(&init, &integrator_config(s)?)
}

pub fn run_euler(s: &Scenario) -> volpres_core::Result<(VorticityField, EulerTrajectory)> {
    let w0 = euler_initial(s)?;
    let it = &s.integrator;
    let traj = integrate_euler(&w0, it.dt, it.t_end, it.output_stride, it.track_flow_map)?;
    Ok((w0, traj))
}

/// Idempotency and orthogonality defects of the projections on a seeded
/// random field, for every size and order of the study.
pub fn run_study(s: &Scenario) -> volpres_core::Result<Vec<StudyRow>> {
    let InitialSpec::RandomField { kmax, perturbation, surface } = s.initial() else {
        return Err(volpres_core::Error::Unsupported("projection studies use the random_field family"));
    };
    let study = s.study.clone().unwrap_or_default();
    let tol = s.integrator.solver_tol;
    let mut rows = Vec::new();
    for &n in &study.sizes {
        let f = if surface {
            families::wobbly_torus(n, perturbation, s.seed)?
        } else {
            families::wobbly_circle(n, perturbation, s.seed)?
        };
        let cache = build_geometry(&f, &Density::Induced)?;
        let x = families::random_tangent(f.grid(), f.target_dim(), kmax, s.seed.wrapping_add(1));
        for &l in &study.orders {
            let order = SobolevOrder::new(l)?;
            let project = |v| if l == 0 { l2_project(&cache, v, tol) } else { hk_project(&cache, v, order, tol) };
            let p1 = project(&x)?;
            let p2 = project(&p1.h_mu)?;
            let d = p2.h_mu.sub(&p1.h_mu);
            let norm = |v| inner_product_gl(&cache, v, v, order).map(f64::sqrt);
            rows.push(StudyRow {
                n,
                l,
                idempotency: norm(&d)? / norm(&x)?,
                orthogonality: p1.orthogonality_defect,
                constraint_residual: p1.constraint_residual / x.max_norm(),
                iterations: p1.stats.iterations,
            });
        }
    }
    Ok(rows)
}

/// Runs `scenario`, writes the run directory `out` and returns the record.
/// Numerical and validation failures are recorded in the failure marker;
/// only IO problems are errors.
pub fn run(scenario: &Scenario, out: &Path) -> Result<RunRecord, IoError> {
    run_capture(scenario, out).map(|(record, _)| record)
}

/// [`run`] that also hands back the final state: positions (all `x`, then
/// all `y`, ...) for geodesic runs, the vorticity for Euler runs.
pub fn run_capture(scenario: &Scenario, out: &Path) -> Result<(RunRecord, Option<Vec<f64>>), IoError> {
    let start = Instant::now();
    let (outcome, failure) = match scenario.case {
        Case::WhipCurve | Case::SurfaceL2 => match run_geodesic(scenario) {
            Ok(t) => {
                let f = t.failure.as_ref().map(Failure::during_run);
                (Outcome::Geodesic(t), f)
            }
            Err(e) => (Outcome::Nothing, Some(Failure::from_core(&e))),
        },
        Case::EulerTorus => match run_euler(scenario) {
            Ok((w0, t)) => {
                let f = t.failure.as_ref().map(Failure::during_run);
                (Outcome::Euler(w0, t), f)
            }
            Err(e) => (Outcome::Nothing, Some(Failure::from_core(&e))),
        },
        Case::ProjectionStudy => match run_study(scenario) {
            Ok(rows) => (Outcome::Study(rows), None),
            Err(e) => (Outcome::Nothing, Some(Failure::from_core(&e))),
        },
    };
    create_dir(out)?;
    let summary = match &outcome {
        Outcome::Geodesic(t) => write_geodesic(out, t)?,
        Outcome::Euler(w0, t) => write_euler(out, w0, t)?,
        Outcome::Study(rows) => write_study(out, rows)?,
        Outcome::Nothing => Summary::default(),
    };
    let record = RunRecord {
        format: RUN_FORMAT.to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        summary,
        failure,
        scenario: scenario.clone(),
    };
    write_record(out, &record)?;
    let last = match outcome {
        Outcome::Geodesic(t) => t.last().map(|s| s.f.points().comps.concat()),
        Outcome::Euler(_, t) => t.snapshots.last().map(|(_, w)| w.omega.clone()),
        _ => None,
    };
    Ok((record, last))
}

pub fn write_record(out: &Path, record: &RunRecord) -> Result<(), IoError> {
    let text = toml::to_string(record).expect("run records always serialise");
    write_text(&out.join(RECORD_FILE), &text)
}

fn write_index(dir: &Path, times: &[f64]) -> Result<(), IoError> {
    write_csv(
        &dir.join(INDEX_FILE),
        &["index", "t", "file"],
        times.iter().enumerate().map(|(i, &t)| [i.to_string(), num(t), snapshot_name(i)]),
    )
}

fn write_geodesic(out: &Path, traj: &Trajectory) -> Result<Summary, IoError> {
    let dir = out.join(SNAPSHOT_DIR);
    create_dir(&dir)?;
    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
    write_index(&dir, &times)?;
    for (i, s) in traj.snapshots.iter().enumerate() {
        let grid = s.f.grid();
        let d = grid.dim();
        let n = s.f.target_dim();
        let mut header: Vec<&str> = vec!["node"];
        header.extend(if d == 1 { &["theta"][..] } else { &["u", "v"][..] });
        header.extend(&["x", "y", "z"][..n]);
        header.extend(&["vx", "vy", "vz"][..n]);
        let pts = s.f.points();
        let rows = (0..grid.len()).map(|node| {
            let mut row = vec![node.to_string()];
            row.extend((0..d).map(|a| num(grid.coordinate(node, a))));
            row.extend((0..n).map(|c| num(pts.comps[c][node])));
            row.extend((0..n).map(|c| num(s.f_t.comps[c][node])));
            row
        });
        write_csv(&dir.join(snapshot_name(i)), &header, rows)?;
    }
    write_csv(
        &out.join(INVARIANTS_FILE),
        &GEODESIC_INVARIANTS,
        traj.log.iter().map(|r| {
            [r.t, r.energy, r.rho_deviation, r.constraint_residual, r.p_min, r.p_max].map(num)
        }),
    )?;
    let first = traj.log.first();
    let last = traj.log.last();
    Ok(Summary {
        steps: traj.log.len().saturating_sub(1),
        t_final: last.map_or(0.0, |r| r.t),
        snapshots: traj.snapshots.len(),
        energy_initial: first.map(|r| r.energy),
        energy_final: last.map(|r| r.energy),
        energy_drift: Some(traj.energy_drift()),
        max_rho_deviation: Some(traj.max_rho_deviation()),
        max_constraint_residual: Some(traj.log.iter().map(|r| r.constraint_residual).fold(0.0, f64::max)),
        ..Summary::default()
    })
}

fn write_euler(out: &Path, w0: &VorticityField, traj: &EulerTrajectory) -> Result<Summary, IoError> {
    let dir = out.join(SNAPSHOT_DIR);
    create_dir(&dir)?;
    let times: Vec<f64> = traj.snapshots.iter().map(|(t, _)| *t).collect();
    write_index(&dir, &times)?;
    let with_map = !traj.flow_maps.is_empty();
    let mut header = vec!["node", "x", "y", "omega"];
    if with_map {
        header.extend(["fx", "fy"]);
    }
    for (i, (_, w)) in traj.snapshots.iter().enumerate() {
        let grid = w.grid;
        let map = traj.flow_maps.get(i).map(|f| f.points());
        let rows = (0..grid.len()).map(|node| {
            let mut row = vec![
                node.to_string(),
                num(grid.coordinate(node, 0)),
                num(grid.coordinate(node, 1)),
                num(w.omega[node]),
            ];
            if let Some(p) = map {
                row.push(num(p.comps[0][node]));
                row.push(num(p.comps[1][node]));
            }
            row
        });
        write_csv(&dir.join(snapshot_name(i)), &header, rows)?;
    }
    write_csv(
        &out.join(INVARIANTS_FILE),
        &EULER_INVARIANTS,
        traj.log
            .iter()
            .map(|r| [r.t, r.energy, r.enstrophy, r.circulation, r.volume_deviation].map(num)),
    )?;
    let first = traj.log.first();
    let last = traj.log.last();
    Ok(Summary {
        steps: traj.log.len().saturating_sub(1),
        t_final: last.map_or(0.0, |r| r.t),
        snapshots: traj.snapshots.len(),
        energy_initial: first.map(|r| r.energy),
        energy_final: last.map(|r| r.energy),
        energy_drift: Some(traj.energy_drift()),
        max_rho_deviation: Some(traj.max_volume_deviation()),
        enstrophy_drift: Some(traj.enstrophy_drift()),
        omega_change: traj.snapshots.last().map(|(_, w)| w.max_abs_diff(w0)),
        ..Summary::default()
    })
}

fn write_study(out: &Path, rows: &[StudyRow]) -> Result<Summary, IoError> {
    write_csv(
        &out.join(STUDY_FILE),
        &STUDY_COLUMNS,
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.l.to_string(),
                num(r.idempotency),
                num(r.orthogonality),
                num(r.constraint_residual),
                r.iterations.to_string(),
            ]
        }),
    )?;
    Ok(Summary {
        max_idempotency_defect: Some(rows.iter().map(|r| r.idempotency).fold(0.0, f64::max)),
        max_orthogonality_defect: Some(rows.iter().map(|r| r.orthogonality).fold(0.0, f64::max)),
        max_constraint_residual: Some(rows.iter().map(|r| r.constraint_residual).fold(0.0, f64::max)),
        ..Summary::default()
    })
}
