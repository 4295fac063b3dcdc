mod common;

use volpres_core::families::{bump, circle, radial_field};
use volpres_core::geodesic::{
    integrate, rhs_l2_curve, step_discrete_lagrangian, step_rattle, step_rk4_explicit, GeodesicState,
    IntegratorConfig, Scheme,
};
use volpres_core::projection::l2_project;
use volpres_core::{build_geometry, Density, Error, SobolevOrder, TangentField};

fn rotation_state(n: usize, omega: f64) -> GeodesicState {
    let f = circle(n, 1.0).unwrap();
    let x: Vec<f64> = f.points().comps[1].iter().map(|y| -omega * y).collect();
    let y: Vec<f64> = f.points().comps[0].iter().map(|x| omega * x).collect();
    GeodesicState::new(f, TangentField { comps: vec![x, y] }).unwrap()
}

/// Sup-norm distance of `state` to the exact rigid rotation at its time.
fn rotation_error(state: &GeodesicState, omega: f64) -> f64 {
    let grid = state.f.grid();
    let mut worst = 0.0f64;
    for (node, th) in grid.coordinates(0).enumerate() {
        let a = th + omega * state.t;
        let exact = [a.cos(), a.sin()];
        let p = state.f.points().at(node);
        worst = worst.max((p[0] - exact[0]).abs()).max((p[1] - exact[1]).abs());
    }
    worst
}

fn whip_state(n: usize) -> GeodesicState {
    let f = circle(n, 1.0).unwrap();
    let cache = build_geometry(&f, &Density::Induced).unwrap();
    let b = bump(f.grid(), 0.5, 0.0, 0.35);
    let raw = radial_field(&f, &b);
    let v = l2_project(&cache, &raw, 1e-13).unwrap().h_mu;
    GeodesicState::new(f, v).unwrap()
}

fn cfg(scheme: Scheme, dt: f64, t_end: f64, l: u32) -> IntegratorConfig {
    IntegratorConfig {
        scheme,
        dt,
        t_end,
        output_stride: usize::MAX,
        order: SobolevOrder::new(l).unwrap(),
        ..IntegratorConfig::default()
    }
}

fn final_state(traj: &volpres_core::geodesic::Trajectory) -> &GeodesicState {
    assert!(traj.failure.is_none(), "{:?}", traj.failure);
    traj.last().unwrap()
}

#[test]
fn explicit_rhs_for_rotation_rest_and_translation() {
    let omega = 1.7;
    let s = rotation_state(64, omega);
    let (ftt, p) = rhs_l2_curve(&s, 1e-13).unwrap();
    assert!(p.0.iter().all(|v| (v - omega * omega).abs() < 1e-10));
    assert!(ftt.add(&s.f.points().scale(omega * omega)).max_norm() < 1e-10);

    let rest = GeodesicState::new(s.f.clone(), TangentField::zeros(2, 64)).unwrap();
    let (ftt, p) = rhs_l2_curve(&rest, 1e-13).unwrap();
    assert_eq!(p.max_abs(), 0.0);
    assert_eq!(ftt.max_norm(), 0.0);

    let shift = TangentField { comps: vec![vec![0.3; 64], vec![-0.2; 64]] };
    let moving = GeodesicState::new(s.f.clone(), shift).unwrap();
    let (ftt, p) = rhs_l2_curve(&moving, 1e-13).unwrap();
    assert!(p.max_abs() < 1e-14 && ftt.max_norm() < 1e-14);
}

#[test]
fn rk4_reproduces_rotation_at_fourth_order() {
    let s = rotation_state(32, 1.0);
    let traj = integrate(&s, &cfg(Scheme::Rk4Explicit, 1e-3, 1.0, 0)).unwrap();
    let err = rotation_error(final_state(&traj), 1.0);
    assert!(err <= 1e-6, "{err}");
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&dt| rotation_error(final_state(&integrate(&s, &cfg(Scheme::Rk4Explicit, dt, 1.0, 0)).unwrap()), 1.0))
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 4.0).abs() <= 0.3, "{errs:?}");
    }
}

#[test]
fn rattle_reproduces_rotation_at_second_order() {
    let s = rotation_state(32, 1.0);
    let traj = integrate(&s, &cfg(Scheme::Rattle, 1e-3, 1.0, 0)).unwrap();
    let end = final_state(&traj);
    assert!(rotation_error(end, 1.0) <= 1e-5, "{}", rotation_error(end, 1.0));
    assert!(traj.max_rho_deviation() <= 1e-8);
    assert!(traj.energy_drift() <= 1e-6, "{}", traj.energy_drift());
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&dt| rotation_error(final_state(&integrate(&s, &cfg(Scheme::Rattle, dt, 1.0, 0)).unwrap()), 1.0))
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() <= 0.2, "{errs:?}");
    }
}

#[test]
fn discrete_lagrangian_keeps_rotation_rigid() {
    let omega = 1.0;
    let s = rotation_state(32, omega);
    for l in 1..=2 {
        let traj = integrate(&s, &cfg(Scheme::DiscreteLagrangian, 1e-2, 1.0, l)).unwrap();
        let end = final_state(&traj);
        // rigid: every point stays on the unit circle with speed ω
        let speeds = end.f_t.dot(&end.f_t);
        assert!(speeds.0.iter().all(|v| (v.sqrt() - omega).abs() <= 1e-6), "l={l}");
        let radii = end.f.points().dot(end.f.points());
        assert!(radii.0.iter().all(|r| (r - 1.0).abs() <= 1e-8));
        assert!(traj.energy_drift() <= 1e-6);
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&dt| {
                rotation_error(final_state(&integrate(&s, &cfg(Scheme::DiscreteLagrangian, dt, 1.0, l)).unwrap()), omega)
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 2.0).abs() <= 0.2, "l={l}: {errs:?}");
        }
    }
}

#[test]
fn rest_is_a_fixed_point_of_every_scheme() {
    let f = circle(32, 1.0).unwrap();
    let mu = build_geometry(&f, &Density::Induced).unwrap().mu;
    let rest = GeodesicState::new(f, TangentField::zeros(2, 32)).unwrap();
    let (a, _) = step_rattle(&rest, &mu, 0.1, 1e-10).unwrap();
    let (b, _) = step_rk4_explicit(&rest, 0.1, 1e-12).unwrap();
    let (c, _) = step_discrete_lagrangian(&rest, &mu, 0.1, SobolevOrder::new(1).unwrap(), 1e-10).unwrap();
    for s in [a, b, c] {
        assert_eq!(s.f, rest.f);
        assert_eq!(s.f_t.max_norm(), 0.0);
        assert!((s.t - 0.1).abs() < 1e-15);
    }
}

#[test]
fn rattle_is_reversible() {
    let s = whip_state(64);
    let mu = build_geometry(&s.f, &Density::Induced).unwrap().mu;
    let (fwd, _) = step_rattle(&s, &mu, 1e-2, 1e-12).unwrap();
    let flipped = GeodesicState { f_t: fwd.f_t.scale(-1.0), ..fwd };
    let (back, _) = step_rattle(&flipped, &mu, 1e-2, 1e-12).unwrap();
    assert!(back.f.points().sub(s.f.points()).max_norm() <= 1e-10);
    assert!(back.f_t.scale(-1.0).sub(&s.f_t).max_norm() <= 1e-10);
}

#[test]
fn integration_commutes_with_cyclic_shifts() {
    let s = whip_state(64);
    let shifted = s.shifted(5).unwrap();
    for scheme in [Scheme::Rk4Explicit, Scheme::Rattle] {
        let a = integrate(&s, &cfg(scheme, 1e-2, 0.1, 0)).unwrap();
        let b = integrate(&shifted, &cfg(scheme, 1e-2, 0.1, 0)).unwrap();
        let a_end = final_state(&a).shifted(5).unwrap();
        let b_end = final_state(&b);
        assert!(a_end.f.points().sub(b_end.f.points()).max_norm() <= 1e-12);
        assert!(a_end.f_t.sub(&b_end.f_t).max_norm() <= 1e-12);
    }
}

#[test]
fn whip_runs_conserve_energy_and_integrators_agree() {
    let s = whip_state(128);
    let rk4 = integrate(&s, &cfg(Scheme::Rk4Explicit, 1e-3, 0.5, 0)).unwrap();
    assert!(rk4.failure.is_none());
    assert!(rk4.energy_drift() <= 1e-6, "{}", rk4.energy_drift());
    assert_eq!(rk4.log.len(), 501);

    let a = integrate(&s, &cfg(Scheme::Rk4Explicit, 1e-3, 0.25, 0)).unwrap();
    let b = integrate(&s, &cfg(Scheme::Rattle, 1e-3, 0.25, 0)).unwrap();
    let diff = final_state(&a).f.points().sub(final_state(&b).f.points()).max_norm();
    assert!(diff <= 1e-4, "{diff}");
    assert!(b.energy_drift() <= 1e-6 * 0.25);
}

#[test]
fn sobolev_and_l2_whips_differ_but_each_conserves_energy() {
    let s = whip_state(128);
    let l0 = integrate(&s, &cfg(Scheme::Rattle, 2e-3, 0.5, 0)).unwrap();
    let l1 = integrate(&s, &cfg(Scheme::DiscreteLagrangian, 2e-3, 0.5, 1)).unwrap();
    assert!(l0.energy_drift() <= 1e-6 && l1.energy_drift() <= 1e-6, "{} {}", l0.energy_drift(), l1.energy_drift());
    let diff = final_state(&l0).f.points().sub(final_state(&l1).f.points()).max_norm();
    assert!(diff > 1e-3, "{diff}");
}

#[test]
fn invalid_configurations_are_rejected() {
    let s = rotation_state(32, 1.0);
    let bad = integrate(&s, &cfg(Scheme::Rattle, 0.0, 1.0, 0)).unwrap_err();
    assert!(matches!(bad, Error::InvalidConfig(_)));
    assert!(integrate(&s, &cfg(Scheme::DiscreteLagrangian, 1e-2, 1.0, 0)).is_err());
    let f = circle(32, 1.0).unwrap();
    let radial = GeodesicState::new(f.clone(), f.points().clone()).unwrap();
    assert!(matches!(
        integrate(&radial, &cfg(Scheme::Rattle, 1e-2, 1.0, 0)),
        Err(Error::InvalidInitialData { .. })
    ));
}

#[test]
fn snapshots_follow_the_output_stride() {
    let s = rotation_state(32, 1.0);
    let mut c = cfg(Scheme::Rk4Explicit, 0.01, 0.1, 0);
    c.output_stride = 3;
    let traj = integrate(&s, &c).unwrap();
    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
    assert_eq!(times.len(), 5);
    assert!(times.windows(2).all(|w| w[1] > w[0]));
    assert!((times[4] - 0.1).abs() < 1e-15);
}

#[test]
fn rattle_whip_keeps_the_volume_form_over_unit_time() {
    // grid-scale modes must not accumulate where the constraint is not enforced
    let traj = integrate(&whip_state(128), &cfg(Scheme::Rattle, 1e-3, 1.0, 0)).unwrap();
    assert!(traj.failure.is_none());
    assert!(traj.max_rho_deviation() <= 1e-8, "{}", traj.max_rho_deviation());
    assert!(traj.energy_drift() <= 1e-6);
}
