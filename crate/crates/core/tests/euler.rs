mod common;

use common::{random_modes, random_scalar, random_tangent};
use proptest::prelude::*;
use volpres_core::euler::{
    advect_flowmap, cfl_limit, crosscheck_general_projection, flowmap_volume_deviation, integrate_euler, leray_project,
    step_euler_vorticity, velocity_from_vorticity, VelocityField2D, VelocityInterpolant, VorticityField,
};
use volpres_core::families::trig_scalar;
use volpres_core::{DiscreteImmersion, Error, ParamGrid, TangentField};

fn nodes(grid: &ParamGrid) -> impl Iterator<Item = (f64, f64)> + '_ {
    (0..grid.len()).map(|n| (grid.coordinate(n, 0), grid.coordinate(n, 1)))
}

fn field(grid: ParamGrid, f: impl Fn(f64, f64) -> [f64; 2]) -> VelocityField2D {
    let (u, v) = nodes(&grid).map(|(x, y)| f(x, y)).map(|[a, b]| (a, b)).unzip();
    VelocityField2D::new(grid, u, v).unwrap()
}

fn shear(n: usize) -> VorticityField {
    let grid = ParamGrid::torus(n, n).unwrap();
    // u = (sin y, 0) has ω = −cos y
    VorticityField::new(grid, nodes(&grid).map(|(_, y)| -y.cos()).collect(), [0.0, 0.0]).unwrap()
}

fn random_vorticity(n: usize, kmax: i64, seed: u64) -> VorticityField {
    let grid = ParamGrid::torus(n, n).unwrap();
    let mut omega = random_scalar(&grid, kmax, seed).0;
    let m = omega.iter().sum::<f64>() / omega.len() as f64;
    omega.iter_mut().for_each(|w| *w -= m);
    VorticityField::new(grid, omega, [0.1, -0.05]).unwrap()
}

#[test]
fn leray_examples() {
    let grid = ParamGrid::torus(32, 32).unwrap();
    let grad = field(grid, |x, y| [x.cos() * y.cos(), -x.sin() * y.sin()]);
    assert!(leray_project(&grad).max_abs() < 1e-13);

    let free = field(grid, |x, y| [y.sin() + 0.5, x.cos() - 0.25]);
    let p = leray_project(&free);
    assert!(p.sub(&free).max_abs() < 1e-13);
    assert!((p.mean()[0] - 0.5).abs() < 1e-14 && (p.mean()[1] + 0.25).abs() < 1e-14);

    let sum = field(grid, |x, y| [y.sin() + x.cos() * y.cos(), -x.sin() * y.sin()]);
    let expected = field(grid, |_, y| [y.sin(), 0.0]);
    assert!(leray_project(&sum).sub(&expected).max_abs() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn leray_output_is_divergence_free_and_idempotent(seed in 0u64..1000) {
        let grid = ParamGrid::torus(32, 32).unwrap();
        let h = random_tangent(&grid, 2, 10, seed);
        let p = leray_project(&VelocityField2D::from_tangent(grid, &h).unwrap());
        let div = p.divergence().iter().fold(0.0f64, |m, d| m.max(d.abs()));
        prop_assert!(div <= 1e-12, "{div}");
        prop_assert!(leray_project(&p).sub(&p).max_abs() <= 1e-13);
    }
}

#[test]
fn velocity_from_vorticity_inverts_the_curl() {
    let w = random_vorticity(32, 5, 3);
    let u = velocity_from_vorticity(&w);
    let back = VorticityField::from_velocity(&u);
    assert!(back.max_abs_diff(&w) < 1e-12);
    assert!((0..2).all(|a| (back.mean_flow[a] - w.mean_flow[a]).abs() < 1e-14));
    assert!(u.divergence().iter().all(|d| d.abs() < 1e-12));
}

#[test]
fn shear_flow_is_stationary() {
    let w0 = shear(64);
    let traj = integrate_euler(&w0, 1e-3, 1.0, 1000, false).unwrap();
    assert!(traj.failure.is_none());
    let (t, w) = traj.snapshots.last().unwrap();
    assert!((t - 1.0).abs() < 1e-12);
    assert!(w.max_abs_diff(&w0) <= 1e-8, "{}", w.max_abs_diff(&w0));
}

#[test]
fn constant_vorticity_is_stationary() {
    let grid = ParamGrid::torus(32, 32).unwrap();
    let w0 = VorticityField::new(grid, vec![0.7; grid.len()], [0.2, 0.1]).unwrap();
    let w = step_euler_vorticity(&w0, 1e-2).unwrap();
    assert_eq!(w, w0);
}

#[test]
fn random_smooth_flow_conserves_energy_and_enstrophy() {
    let w0 = random_vorticity(64, 4, 11);
    let dt = 1e-3;
    assert!(dt < cfl_limit(&w0));
    let traj = integrate_euler(&w0, dt, 0.5, 100, false).unwrap();
    assert!(traj.failure.is_none());
    assert!(traj.energy_drift() <= 1e-6, "{}", traj.energy_drift());
    assert!(traj.enstrophy_drift() <= 1e-6, "{}", traj.enstrophy_drift());
    let circ: Vec<f64> = traj.log.iter().map(|r| r.circulation).collect();
    assert!(circ.iter().all(|c| (c - circ[0]).abs() < 1e-12));
    assert_eq!(traj.snapshots.len(), 6);
    // the flow actually moves
    assert!(traj.snapshots.last().unwrap().1.max_abs_diff(&w0) > 1e-3);
}

#[test]
fn flow_maps_of_rest_and_uniform_translation() {
    let grid = ParamGrid::torus(32, 32).unwrap();
    let id = DiscreteImmersion::torus_identity(grid).unwrap();
    let rest = advect_flowmap(&id, |_| Ok(VelocityField2D::zeros(grid)), 0.0, 0.1).unwrap();
    assert_eq!(rest.points(), id.points());

    let c = [0.3, -0.7];
    let uniform = field(grid, |_, _| c);
    let mut f = id.clone();
    for step in 0..10 {
        f = advect_flowmap(&f, |_| Ok(uniform.clone()), step as f64 * 0.05, 0.05).unwrap();
    }
    let shift = TangentField {
        comps: vec![vec![0.5 * c[0]; grid.len()], vec![0.5 * c[1]; grid.len()]],
    };
    assert!(f.points().sub(&id.points().add(&shift)).max_norm() < 1e-13);
    assert!(flowmap_volume_deviation(&f).unwrap() < 1e-13);
}

#[test]
fn interpolant_reproduces_nodal_values_and_trig_polynomials() {
    let grid = ParamGrid::torus(32, 32).unwrap();
    let modes = random_modes(&grid, 1, 4, 5);
    let s = trig_scalar(&grid, &modes);
    let vel = VelocityField2D::new(grid, s.0.clone(), vec![0.0; grid.len()]).unwrap();
    let interp = VelocityInterpolant::new(&vel);
    assert!(interp.active_modes() <= 81);
    for (n, (x, y)) in nodes(&grid).enumerate().step_by(37) {
        assert!((interp.eval(x, y)[0] - s.0[n]).abs() < 1e-13);
    }
    // off-grid: compare with the closed form
    let (x, y) = (0.123, 4.567);
    let exact: f64 = modes
        .iter()
        .map(|m| m.amp * (m.k[0] as f64 * x + m.k[1] as f64 * y + m.phase).cos())
        .sum();
    assert!((interp.eval(x, y)[0] - exact).abs() < 1e-13);
}

#[test]
fn shear_flow_map_preserves_volume() {
    let traj = integrate_euler(&shear(32), 1e-2, 0.5, 10, true).unwrap();
    assert!(traj.failure.is_none());
    assert!(traj.max_volume_deviation() <= 1e-6, "{}", traj.max_volume_deviation());
    // particles move along x with speed sin y
    let grid = traj.flow_maps[0].grid().clone();
    let last = traj.flow_maps.last().unwrap();
    for (n, (x, y)) in nodes(&grid).enumerate().step_by(29) {
        assert!((last.points().comps[0][n] - (x + 0.5 * y.sin())).abs() < 1e-8);
        assert!((last.points().comps[1][n] - y).abs() < 1e-12);
    }
}

#[test]
fn general_projection_agrees_with_leray() {
    let grid = ParamGrid::torus(64, 64).unwrap();
    let h = random_tangent(&grid, 2, 6, 17);
    let rep = crosscheck_general_projection(grid, &h, 1e-13).unwrap();
    assert!(rep.h_mu_disagreement <= 1e-9, "{rep:?}");
    assert!(rep.potential_disagreement <= 1e-9, "{rep:?}");

    let phi = random_scalar(&grid, 5, 18);
    let sp = volpres_core::spectral::Spectral::new(grid);
    let grad = VelocityField2D::new(grid, sp.derivative(&phi.0, 0), sp.derivative(&phi.0, 1)).unwrap();
    let rep = crosscheck_general_projection(grid, &grad.to_tangent(), 1e-13).unwrap();
    assert!(rep.h_mu_disagreement <= 1e-9 && rep.potential_disagreement <= 1e-9, "{rep:?}");
    assert!(leray_project(&grad).max_abs() < 1e-12);

    let free = leray_project(&VelocityField2D::from_tangent(grid, &h).unwrap());
    let rep = crosscheck_general_projection(grid, &free.to_tangent(), 1e-13).unwrap();
    assert!(rep.h_mu_disagreement <= 1e-9 && rep.potential_disagreement <= 1e-9, "{rep:?}");
}

#[test]
fn invalid_steps_are_rejected() {
    let w = random_vorticity(32, 3, 1);
    let limit = cfl_limit(&w);
    assert!(matches!(step_euler_vorticity(&w, 2.0 * limit), Err(Error::CflViolation { .. })));
    assert!(matches!(step_euler_vorticity(&w, 0.0), Err(Error::InvalidConfig(_))));
    let small = random_vorticity(16, 3, 1);
    assert!(matches!(step_euler_vorticity(&small, 1e-3), Err(Error::InvalidGrid(_))));
    assert!(VorticityField::new(ParamGrid::circle(32).unwrap(), vec![0.0; 32], [0.0; 2]).is_err());
    // a run that hits the CFL bound stops with the data so far
    let traj = integrate_euler(&w, 2.0 * limit, 1.0, 1, false).unwrap();
    assert!(matches!(traj.failure, Some(Error::CflViolation { .. })));
    assert_eq!(traj.snapshots.len(), 1);
}
