//! Riemannian geometry of volume-preserving immersions on periodic grids.
//!
//! The crate works with immersions of the circle or the two-torus into flat
//! targets (euclidean space or the flat torus), sampled on uniform periodic
//! grids and differentiated pseudo-spectrally. On top of the discrete
//! differential geometry it provides
//!
//! * the orthogonal projection onto volume-preserving directions for the
//!   L² metric and for the Sobolev metrics `G^l` induced by `(1 + Δ)^l`,
//! * the decomposition `h = h_μ + Tf.grad p + p.Tr S` in both the
//!   non-minimal and the minimal (Helmholtz–Hodge) branch,
//! * geodesic integrators for the constrained problem (explicit curve
//!   equation, RATTLE, and a discrete-Lagrangian scheme for `l ≥ 1`),
//! * an incompressible Euler solver on the flat torus used as the `M = N`
//!   special case.
//!
//! Everything here is `no_std` with `alloc`; file formats and the command
//! line live in the companion `volpres-cli` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dense;
pub mod error;
pub mod euler;
pub mod families;
pub mod fft;
pub mod field;
pub mod geodesic;
pub mod geometry;
pub mod grid;
pub mod projection;
pub mod sobolev;
pub mod solver;
pub mod spectral;


pub use error::{Error, Result};
pub use field::{ParamVectorField, ScalarField, TangentField};
pub use geometry::{build_geometry, Density, DiscreteImmersion, GeometryCache, Target};
pub use grid::ParamGrid;
pub use projection::ProjectionResult;
pub use sobolev::SobolevOrder;
pub use solver::OperatorStats;
