#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use volpres_core::families::{self, trig_field, TrigMode};
use volpres_core::grid::ParamGrid;
use volpres_core::{DiscreteImmersion, ScalarField, TangentField};

pub fn random_modes(grid: &ParamGrid, comps: usize, kmax: i64, seed: u64) -> Vec<TrigMode> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let ky = if grid.dim() == 2 { kmax } else { 0 };
    let mut out = Vec::new();
    for comp in 0..comps {
        for k0 in -kmax..=kmax {
            for k1 in -ky..=ky {
                let k2 = (k0 * k0 + k1 * k1) as f64;
                out.push(TrigMode {
                    comp,
                    k: [k0, k1],
                    amp: r.gen_range(-1.0..1.0) / (1.0 + k2),
                    phase: r.gen_range(0.0..std::f64::consts::TAU),
                });
            }
        }
    }
    out
}

pub fn random_tangent(grid: &ParamGrid, target_dim: usize, kmax: i64, seed: u64) -> TangentField {
    trig_field(grid, target_dim, &random_modes(grid, target_dim, kmax, seed))
}

pub fn random_scalar(grid: &ParamGrid, kmax: i64, seed: u64) -> ScalarField {
    let mut f = random_tangent(grid, 1, kmax, seed);
    ScalarField(f.comps.swap_remove(0))
}

/// Unit circle with a small smooth random perturbation.
pub fn wobbly_circle(n: usize, amp: f64, seed: u64) -> DiscreteImmersion {
    let c = families::circle(n, 1.0).unwrap();
    let h = random_tangent(c.grid(), 2, 3, seed).scale(amp);
    c.displaced(1.0, &h).unwrap()
}

/// Torus of revolution (R = 2, r = 1) with a small smooth random perturbation.
pub fn wobbly_torus(n: usize, amp: f64, seed: u64) -> DiscreteImmersion {
    let t = families::torus_of_revolution(n, n, 2.0, 1.0).unwrap();
    let h = random_tangent(t.grid(), 3, 2, seed).scale(amp);
    t.displaced(1.0, &h).unwrap()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
