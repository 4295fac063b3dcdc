//! Initial data for the scenario families and seeded random fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use volpres_core::euler::VorticityField;
use volpres_core::families::{bump, circle, radial_field, torus_of_revolution, trig_field, TrigMode};
use volpres_core::geodesic::GeodesicState;
use volpres_core::projection::l2_project;
use volpres_core::{build_geometry, Density, DiscreteImmersion, ParamGrid, Result, ScalarField, TangentField};

/// Tolerance of the projection that makes initial velocities admissible.
pub const INITIAL_PROJECTION_TOL: f64 = 1e-13;

/// Random trigonometric modes with `|k_i| ≤ kmax` and amplitudes decaying
/// like `1/(1 + |k|²)`.
pub fn random_modes(rng: &mut ChaCha8Rng, dim: usize, comps: usize, kmax: i64) -> Vec<TrigMode> {
    let ky = if dim == 2 { kmax } else { 0 };
    let mut out = Vec::new();
    for comp in 0..comps {
        for k0 in -kmax..=kmax {
            for k1 in -ky..=ky {
                let k2 = (k0 * k0 + k1 * k1) as f64;
                out.push(TrigMode {
                    comp,
                    k: [k0, k1],
                    amp: rng.gen_range(-1.0..1.0) / (1.0 + k2),
                    phase: rng.gen_range(0.0..std::f64::consts::TAU),
                });
            }
        }
    }
    out
}

pub fn random_tangent(grid: &ParamGrid, target_dim: usize, kmax: i64, seed: u64) -> TangentField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    trig_field(grid, target_dim, &random_modes(&mut rng, grid.dim(), target_dim, kmax))
}

pub fn random_scalar(grid: &ParamGrid, kmax: i64, seed: u64) -> ScalarField {
    let mut f = random_tangent(grid, 1, kmax, seed);
    ScalarField(f.comps.swap_remove(0))
}

/// Unit circle plus a smooth random perturbation of size `amp`.
pub fn wobbly_circle(n: usize, amp: f64, seed: u64) -> Result<DiscreteImmersion> {
    let c = circle(n, 1.0)?;
    let h = random_tangent(c.grid(), 2, 3, seed).scale(amp);
    c.displaced(1.0, &h)
}

/// Torus of revolution (R = 2, r = 1) plus a smooth random perturbation.
pub fn wobbly_torus(n: usize, amp: f64, seed: u64) -> Result<DiscreteImmersion> {
    let t = torus_of_revolution(n, n, 2.0, 1.0)?;
    let h = random_tangent(t.grid(), 3, 2, seed).scale(amp);
    t.displaced(1.0, &h)
}

/// Rigid rotation `f_t = ω J f` of the round circle.
pub fn circle_rotation(n: usize, radius: f64, omega: f64) -> Result<GeodesicState> {
    let f = circle(n, radius)?;
    let x = f.points().comps[1].iter().map(|y| -omega * y).collect();
    let y = f.points().comps[0].iter().map(|x| omega * x).collect();
    GeodesicState::new(f, TangentField { comps: vec![x, y] })
}

/// The whip: a radial bump velocity on the round circle, L²-projected onto
/// the volume-preserving directions.
pub fn circle_bump(n: usize, radius: f64, amp: f64, center: f64, width: f64) -> Result<GeodesicState> {
    let f = circle(n, radius)?;
    let cache = build_geometry(&f, &Density::Induced)?;
    let raw = radial_field(&f, &bump(f.grid(), amp, center, width));
    let v = l2_project(&cache, &raw, INITIAL_PROJECTION_TOL)?.h_mu;
    GeodesicState::new(f, v)
}

/// Torus of revolution with a normal bump velocity, L²-projected.
pub fn torus_bump(n: [usize; 2], big_r: f64, r: f64, amp: f64, center: f64, width: f64) -> Result<GeodesicState> {
    let f = torus_of_revolution(n[0], n[1], big_r, r)?;
    let grid = *f.grid();
    let b = bump(&grid, amp, center, width);
    let mut raw = TangentField::zeros(3, grid.len());
    for node in 0..grid.len() {
        let (u, v) = (grid.coordinate(node, 0), grid.coordinate(node, 1));
        let normal = [v.cos() * u.cos(), v.cos() * u.sin(), v.sin()];
        for c in 0..3 {
            raw.comps[c][node] = b.0[node] * normal[c];
        }
    }
    let cache = build_geometry(&f, &Density::Induced)?;
    let v = l2_project(&cache, &raw, INITIAL_PROJECTION_TOL)?.h_mu;
    GeodesicState::new(f, v)
}

/// Parallel shear `u = (amp sin(k y), 0)`, whose vorticity is
/// `−amp k cos(k y)`.
pub fn shear_flow(n: [usize; 2], amp: f64, k: i64) -> Result<VorticityField> {
    let grid = ParamGrid::torus(n[0], n[1])?;
    let k = k as f64;
    let omega = (0..grid.len()).map(|node| -amp * k * (k * grid.coordinate(node, 1)).cos()).collect();
    VorticityField::new(grid, omega, [0.0, 0.0])
}

/// Zero-mean random vorticity with the given mean flow.
pub fn random_vorticity(n: [usize; 2], kmax: i64, amp: f64, mean_flow: [f64; 2], seed: u64) -> Result<VorticityField> {
    let grid = ParamGrid::torus(n[0], n[1])?;
    let mut omega = random_scalar(&grid, kmax, seed).0;
    let m = omega.iter().sum::<f64>() / omega.len() as f64;
    omega.iter_mut().for_each(|w| *w = amp * (*w - m));
    VorticityField::new(grid, omega, mean_flow)
}
