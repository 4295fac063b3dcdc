//! Closed-form immersions and fields used by scenarios and tests.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Result;
use crate::field::{ScalarField, TangentField};
use crate::geometry::DiscreteImmersion;
use crate::grid::ParamGrid;

/// Round circle of the given radius, parametrised at constant speed.
pub fn circle(n: usize, radius: f64) -> Result<DiscreteImmersion> {
    let grid = ParamGrid::circle(n)?;
    let x = grid.coordinates(0).map(|t| radius * t.cos()).collect();
    let y = grid.coordinates(0).map(|t| radius * t.sin()).collect();
    DiscreteImmersion::euclidean(grid, TangentField { comps: alloc::vec![x, y] })
}

/// Single trigonometric term `amp · cos(k·x + phase)` in component `comp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigMode {
    pub comp: usize,
    pub k: [i64; 2],
    pub amp: f64,
    pub phase: f64,
}

/// Sum of trigonometric modes sampled on `grid`.
pub fn trig_field(grid: &ParamGrid, target_dim: usize, modes: &[TrigMode]) -> TangentField {
    let mut out = TangentField::zeros(target_dim, grid.len());
    for m in modes {
        for node in 0..grid.len() {
            let mut arg = m.phase;
            for a in 0..grid.dim() {
                arg += m.k[a] as f64 * grid.coordinate(node, a) * 2.0 * core::f64::consts::PI / grid.period(a);
            }
            out.comps[m.comp][node] += m.amp * arg.cos();
        }
    }
    out
}

/// Scalar analogue of [`trig_field`].
pub fn trig_scalar(grid: &ParamGrid, modes: &[TrigMode]) -> ScalarField {
    let mut f = trig_field(grid, 1, modes);
    ScalarField(f.comps.swap_remove(0))
}

/// Circle of radius `radius` plus a trigonometric perturbation.
pub fn perturbed_circle(n: usize, radius: f64, modes: &[TrigMode]) -> Result<DiscreteImmersion> {
    let c = circle(n, radius)?;
    let pert = trig_field(c.grid(), 2, modes);
    c.displaced(1.0, &pert)
}

/// Torus of revolution with tube radius `r` around a core circle of radius
/// `big_r`: `((R + r cos v) cos u, (R + r cos v) sin u, r sin v)`.
pub fn torus_of_revolution(n_u: usize, n_v: usize, big_r: f64, r: f64) -> Result<DiscreteImmersion> {
    let grid = ParamGrid::torus(n_u, n_v)?;
    let len = grid.len();
    let mut comps = alloc::vec![Vec::with_capacity(len); 3];
    for node in 0..len {
        let (u, v) = (grid.coordinate(node, 0), grid.coordinate(node, 1));
        let rad = big_r + r * v.cos();
        comps[0].push(rad * u.cos());
        comps[1].push(rad * u.sin());
        comps[2].push(r * v.sin());
    }
    DiscreteImmersion::euclidean(grid, TangentField { comps })
}

/// Smooth periodic bump `amp · exp((cos(θ − center) − 1)/width²)` along the
/// first parameter direction.
pub fn bump(grid: &ParamGrid, amp: f64, center: f64, width: f64) -> ScalarField {
    let scale = 2.0 * core::f64::consts::PI / grid.period(0);
    ScalarField(
        grid.coordinates(0)
            .map(|t| amp * (((scale * t - center).cos() - 1.0) / (width * width)).exp())
            .collect(),
    )
}

/// Radial (outward) unit field of a curve about the origin scaled by `s`.
pub fn radial_field(f: &DiscreteImmersion, s: &ScalarField) -> TangentField {
    let pts = f.points();
    let mut out = TangentField::zeros(pts.target_dim(), pts.len());
    for node in 0..pts.len() {
        let p = pts.at(node);
        let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        for c in 0..pts.target_dim() {
            out.comps[c][node] = s.0[node] * p[c] / norm;
        }
    }
    out
}
