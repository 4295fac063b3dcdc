//! Discrete differential geometry of immersions into flat targets.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::{ParamVectorField, ScalarField, TangentField};
use crate::grid::ParamGrid;
use crate::spectral::Spectral;

/// Relative threshold on `det g` below which a node counts as singular.
pub const EPS_RANK: f64 = 1e-10;
/// Tolerance for pointwise orthogonality checks.
pub const TOL_ORTH: f64 = 1e-8;
/// `max |Tr S|` below this value is treated as a minimal immersion.
pub const MINIMAL_TOL: f64 = 1e-10;

pub type Sym2 = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Euclidean,
    /// Flat torus `R^n / (periods · Z^n)`.
    FlatTorus { periods: Vec<f64> },
}

/// Immersion of the parameter grid into `R^n` or a flat torus.
///
/// Points are stored as lifts to `R^n`. For torus targets `points - W·x` is
/// periodic, where `W` is the winding (`winding[c][a]` is the slope of
/// component `c` along parameter direction `a`).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteImmersion {
    grid: ParamGrid,
    target: Target,
    points: TangentField,
    winding: Vec<[f64; 2]>,
}

impl DiscreteImmersion {
    pub fn euclidean(grid: ParamGrid, points: TangentField) -> Result<Self> {
        let n = points.target_dim();
        Self::with_winding(grid, Target::Euclidean, points, vec![[0.0; 2]; n])
    }

    pub fn flat_torus(
        grid: ParamGrid,
        points: TangentField,
        periods: Vec<f64>,
        winding: Vec<[f64; 2]>,
    ) -> Result<Self> {
        if periods.len() != points.target_dim() {
            return Err(Error::ShapeMismatch {
                expected: points.target_dim(),
                found: periods.len(),
            });
        }
        Self::with_winding(grid, Target::FlatTorus { periods }, points, winding)
    }

    /// Identity map of the flat torus underlying a two-dimensional grid.
    pub fn torus_identity(grid: ParamGrid) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(Error::InvalidGrid("torus identity needs a two-dimensional grid"));
        }
        let comps = (0..2).map(|a| grid.coordinates(a).collect()).collect();
        Self::flat_torus(
            grid,
            TangentField { comps },
            grid.periods().to_vec(),
            vec![[1.0, 0.0], [0.0, 1.0]],
        )
    }

    fn with_winding(
        grid: ParamGrid,
        target: Target,
        points: TangentField,
        winding: Vec<[f64; 2]>,
    ) -> Result<Self> {
        let n = points.target_dim();
        if !(grid.dim()..=3).contains(&n) {
            return Err(Error::InvalidGrid("target dimension must satisfy d ≤ n ≤ 3"));
        }
        points.check_shape(n, grid.len())?;
        points.check_finite()?;
        if winding.len() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                found: winding.len(),
            });
        }
        Ok(Self {
            grid,
            target,
            points,
            winding,
        })
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.grid
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn target_dim(&self) -> usize {
        self.points.target_dim()
    }

    pub fn points(&self) -> &TangentField {
        &self.points
    }

    pub fn winding(&self) -> &[[f64; 2]] {
        &self.winding
    }

    /// Points reduced into the fundamental domain for torus targets.
    pub fn wrapped_points(&self) -> TangentField {
        match &self.target {
            Target::Euclidean => self.points.clone(),
            Target::FlatTorus { periods } => TangentField {
                comps: self
                    .points
                    .comps
                    .iter()
                    .zip(periods)
                    .map(|(c, &l)| c.iter().map(|&x| num_traits::Euclid::rem_euclid(&x, &l)).collect())
                    .collect(),
            },
        }
    }

    /// `f + s·h` (point arithmetic on the lift).
    pub fn displaced(&self, s: f64, h: &TangentField) -> Result<Self> {
        h.check_shape(self.target_dim(), self.grid.len())?;
        let mut out = self.clone();
        out.points = self.points.axpy(s, h);
        out.points.check_finite()?;
        Ok(out)
    }

    pub fn with_points(&self, points: TangentField) -> Result<Self> {
        points.check_shape(self.target_dim(), self.grid.len())?;
        points.check_finite()?;
        let mut out = self.clone();
        out.points = points;
        Ok(out)
    }

    /// Periodic part of component `c`.
    fn periodic_part(&self, c: usize) -> Vec<f64> {
        let w = self.winding[c];
        if w == [0.0, 0.0] {
            return self.points.comps[c].clone();
        }
        let g = &self.grid;
        self.points.comps[c]
            .iter()
            .enumerate()
            .map(|(node, &x)| {
                let mut lin = 0.0;
                for (a, &wa) in w.iter().enumerate().take(g.dim()) {
                    lin += wa * g.coordinate(node, a);
                }
                x - lin
            })
            .collect()
    }

    /// Coordinate frame `e_a = ∂_a f`.
    pub fn frame(&self, spectral: &Spectral) -> Vec<TangentField> {
        (0..self.grid.dim())
            .map(|a| TangentField {
                comps: (0..self.target_dim())
                    .map(|c| {
                        let mut d = spectral.derivative(&self.periodic_part(c), a);
                        let w = self.winding[c][a];
                        if w != 0.0 {
                            d.iter_mut().for_each(|v| *v += w);
                        }
                        d
                    })
                    .collect(),
            })
            .collect()
    }

    /// Cyclic reparametrisation `θ ↦ θ + shift·Δθ` along the first direction.
    pub fn shifted(&self, shift: usize) -> Result<Self> {
        let sizes = self.grid.sizes().to_vec();
        if self.winding.iter().any(|w| w[0] != 0.0) {
            return Err(Error::Unsupported("shifting a winding immersion"));
        }
        self.with_points(self.points.shifted(&sizes, shift))
    }
}

/// Background density `μ` as a weight relative to the parameter measure.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Density {
    /// `μ = vol(f*ḡ)` of the immersion the geometry is built for (`ρ ≡ 1`).
    #[default]
    Induced,
    Uniform(f64),
    Weights(Vec<f64>),
}

/// Pullback metric with cached inverse and `√|g|`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    pub dim: usize,
    pub g: Vec<Sym2>,
    pub g_inv: Vec<Sym2>,
    pub sqrt_det: ScalarField,
}

impl MetricField {
    fn from_frame(frame: &[TangentField]) -> Result<Self> {
        let dim = frame.len();
        let len = frame[0].len();
        let mut g = vec![[[0.0; 2]; 2]; len];
        for a in 0..dim {
            for b in a..dim {
                let gab = frame[a].dot(&frame[b]);
                for (m, v) in g.iter_mut().zip(gab.0) {
                    m[a][b] = v;
                    m[b][a] = v;
                }
            }
        }
        let det: Vec<f64> = g.iter().map(|m| det2(m, dim)).collect();
        let scale = g.iter().map(|m| (0..dim).map(|a| m[a][a]).sum::<f64>() / dim as f64).sum::<f64>()
            / len as f64;
        let threshold = EPS_RANK * scale.powi(dim as i32);
        let (worst, worst_det) = det
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &d)| if d < acc.1 || d.is_nan() { (i, d) } else { acc });
        if !(worst_det > threshold) {
            return Err(Error::RankDeficient {
                node: worst,
                det: worst_det,
            });
        }
        let g_inv = g.iter().zip(&det).map(|(m, &d)| inv2(m, d, dim)).collect();
        let sqrt_det = ScalarField(det.iter().map(|d| d.sqrt()).collect());
        Ok(Self {
            dim,
            g,
            g_inv,
            sqrt_det,
        })
    }
}

fn det2(m: &Sym2, dim: usize) -> f64 {
    if dim == 1 {
        m[0][0]
    } else {
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

fn inv2(m: &Sym2, det: f64, dim: usize) -> Sym2 {
    if dim == 1 {
        [[1.0 / m[0][0], 0.0], [0.0, 0.0]]
    } else {
        [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
    }
}

/// Derived geometry of one immersion.
#[derive(Debug, Clone)]
pub struct GeometryCache {
    pub grid: ParamGrid,
    pub target_dim: usize,
    pub spectral: Spectral,
    /// Coordinate frame `e_a = ∂_a f`.
    pub frame: Vec<TangentField>,
    pub metric: MetricField,
    /// Background density weights `μ` (relative to the parameter measure).
    pub mu: Vec<f64>,
    /// Radon–Nikodym derivative `ρ = vol(g)/μ`.
    pub rho: ScalarField,
    /// Second fundamental form, entry `(a, b)` at index `a * d + b`.
    pub second_fund: Vec<TangentField>,
    /// Mean curvature vector `Tr^g S`.
    pub mean_curv: TangentField,
    /// `‖Tr^g S‖²`.
    pub tr_s_norm_sq: ScalarField,
    /// Largest tangential component of the Christoffel-corrected second
    /// derivatives, relative to their size, before normal projection.
    pub normality_defect: f64,
}

/// Builds the geometry cache of `f` relative to the background density `mu`.
pub fn build_geometry(f: &DiscreteImmersion, mu: &Density) -> Result<GeometryCache> {
    let grid = *f.grid();
    let d = grid.dim();
    let n = f.target_dim();
    let len = grid.len();
    let spectral = Spectral::new(grid);
    let frame = f.frame(&spectral);
    let metric = MetricField::from_frame(&frame)?;

    let mu = match mu {
        Density::Induced => metric.sqrt_det.0.clone(),
        Density::Uniform(c) => vec![*c; len],
        Density::Weights(w) => {
            if w.len() != len {
                return Err(Error::ShapeMismatch {
                    expected: len,
                    found: w.len(),
                });
            }
            w.clone()
        }
    };
    if mu.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidConfig("background density must be positive"));
    }
    let rho = ScalarField(metric.sqrt_det.0.iter().zip(&mu).map(|(s, m)| s / m).collect());

    // Derivatives of the metric entries, dg[c][a][b] = ∂_c g_ab.
    let mut dg = vec![vec![vec![vec![0.0; len]; d]; d]; d];
    for a in 0..d {
        for b in a..d {
            let entry: Vec<f64> = metric.g.iter().map(|m| m[a][b]).collect();
            for (c, dgc) in dg.iter_mut().enumerate() {
                let der = spectral.derivative(&entry, c);
                dgc[a][b] = der.clone();
                dgc[b][a] = der;
            }
        }
    }

    let mut second_fund = Vec::with_capacity(d * d);
    let mut defect_num = 0.0f64;
    let mut defect_den = 0.0f64;
    for a in 0..d {
        for b in 0..d {
            // Mixed second derivative, symmetrised.
            let mut s_ab = TangentField::zeros(n, len);
            for c in 0..n {
                let x = spectral.derivative(&frame[b].comps[c], a);
                let y = spectral.derivative(&frame[a].comps[c], b);
                s_ab.comps[c] = x.iter().zip(&y).map(|(u, v)| 0.5 * (u + v)).collect();
            }
            // Subtract Γ^e_ab e_e with Γ^e_ab = ½ g^{eh}(∂_a g_bh + ∂_b g_ah − ∂_h g_ab).
            for node in 0..len {
                let gi = &metric.g_inv[node];
                for e in 0..d {
                    let mut gamma = 0.0;
                    for h in 0..d {
                        gamma += 0.5
                            * gi[e][h]
                            * (dg[a][b][h][node] + dg[b][a][h][node] - dg[h][a][b][node]);
                    }
                    for c in 0..n {
                        s_ab.comps[c][node] -= gamma * frame[e].comps[c][node];
                    }
                }
            }
            // Normal projection removes the residual tangential part.
            let projected = normal_part(&frame, &metric, &s_ab);
            let tangential = s_ab.sub(&projected);
            defect_num = defect_num.max(tangential.max_norm());
            defect_den = defect_den.max(s_ab.max_norm());
            second_fund.push(projected);
        }
    }
    let normality_defect = defect_num / defect_den.max(1.0);

    let mut mean_curv = TangentField::zeros(n, len);
    for a in 0..d {
        for b in 0..d {
            let s = &second_fund[a * d + b];
            for c in 0..n {
                for node in 0..len {
                    mean_curv.comps[c][node] += metric.g_inv[node][a][b] * s.comps[c][node];
                }
            }
        }
    }
    let tr_s_norm_sq = mean_curv.dot(&mean_curv);

    Ok(GeometryCache {
        grid,
        target_dim: n,
        spectral,
        frame,
        metric,
        mu,
        rho,
        second_fund,
        mean_curv,
        tr_s_norm_sq,
        normality_defect,
    })
}

fn normal_part(frame: &[TangentField], metric: &MetricField, v: &TangentField) -> TangentField {
    let d = frame.len();
    let coeffs: Vec<ScalarField> = frame.iter().map(|e| e.dot(v)).collect();
    let mut out = v.clone();
    for node in 0..v.len() {
        for a in 0..d {
            let mut top = 0.0;
            for b in 0..d {
                top += metric.g_inv[node][a][b] * coeffs[b].0[node];
            }
            for c in 0..v.target_dim() {
                out.comps[c][node] -= top * frame[a].comps[c][node];
            }
        }
    }
    out
}

impl GeometryCache {
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weights of `vol(g)`: `√|g|` times the cell volume.
    pub fn vol_weights(&self) -> Vec<f64> {
        let cell = self.grid.cell_volume();
        self.metric.sqrt_det.0.iter().map(|s| s * cell).collect()
    }

    /// `∫ s vol(g)`.
    pub fn integrate(&self, s: &ScalarField) -> f64 {
        let cell = self.grid.cell_volume();
        s.0.iter().zip(&self.metric.sqrt_det.0).map(|(v, w)| v * w).sum::<f64>() * cell
    }

    /// `∫ p q vol(g)`.
    pub fn inner_scalar(&self, p: &ScalarField, q: &ScalarField) -> f64 {
        let cell = self.grid.cell_volume();
        p.0.iter()
            .zip(&q.0)
            .zip(&self.metric.sqrt_det.0)
            .map(|((a, b), w)| a * b * w)
            .sum::<f64>()
            * cell
    }

    /// `∫ ḡ(h, k) vol(g)`.
    pub fn inner_l2(&self, h: &TangentField, k: &TangentField) -> f64 {
        self.integrate(&h.dot(k))
    }

    /// `∫ g(X, Y) vol(g)` for vector fields on the parameter manifold.
    pub fn inner_param(&self, x: &ParamVectorField, y: &ParamVectorField) -> f64 {
        let d = self.dim();
        let mut s = ScalarField::zeros(self.len());
        for (node, v) in s.0.iter_mut().enumerate() {
            for a in 0..d {
                for b in 0..d {
                    *v += self.metric.g[node][a][b] * x.comps[a][node] * y.comps[b][node];
                }
            }
        }
        self.integrate(&s)
    }

    pub fn is_minimal(&self) -> bool {
        self.mean_curv.max_norm() <= MINIMAL_TOL
    }

    /// `Tf·v` for a vector field `v` on the parameter manifold.
    pub fn push_forward(&self, v: &ParamVectorField) -> TangentField {
        let mut out = TangentField::zeros(self.target_dim, self.len());
        for (a, e) in self.frame.iter().enumerate() {
            for (o, ec) in out.comps.iter_mut().zip(&e.comps) {
                for ((x, &w), &va) in o.iter_mut().zip(ec).zip(&v.comps[a]) {
                    *x += w * va;
                }
            }
        }
        out
    }

    /// Unique split `h = Tf·h_top + h_perp` with `h_perp` normal.
    pub fn split_tangent(&self, h: &TangentField) -> Result<(ParamVectorField, TangentField)> {
        h.check_shape(self.target_dim, self.len())?;
        let d = self.dim();
        let coeffs: Vec<ScalarField> = self.frame.iter().map(|e| e.dot(h)).collect();
        let mut top = ParamVectorField::zeros(d, self.len());
        for node in 0..self.len() {
            for a in 0..d {
                top.comps[a][node] = (0..d)
                    .map(|b| self.metric.g_inv[node][a][b] * coeffs[b].0[node])
                    .sum();
            }
        }
        let perp = h.sub(&self.push_forward(&top));
        Ok((top, perp))
    }

    /// `grad^g p`, components `g^{ab} ∂_b p`.
    pub fn grad(&self, p: &ScalarField) -> ParamVectorField {
        let d = self.dim();
        let dp: Vec<Vec<f64>> = (0..d).map(|b| self.spectral.derivative(&p.0, b)).collect();
        let mut out = ParamVectorField::zeros(d, self.len());
        for node in 0..self.len() {
            for a in 0..d {
                out.comps[a][node] = (0..d).map(|b| self.metric.g_inv[node][a][b] * dp[b][node]).sum();
            }
        }
        out
    }

    /// `div^g X = |g|^{-1/2} ∂_a(|g|^{1/2} X^a)`.
    pub fn div(&self, x: &ParamVectorField) -> ScalarField {
        let sq = &self.metric.sqrt_det.0;
        let mut out = vec![0.0; self.len()];
        for (a, comp) in x.comps.iter().enumerate() {
            let weighted: Vec<f64> = comp.iter().zip(sq).map(|(v, s)| v * s).collect();
            let der = self.spectral.derivative(&weighted, a);
            for (o, v) in out.iter_mut().zip(der) {
                *o += v;
            }
        }
        for (o, s) in out.iter_mut().zip(sq) {
            *o /= s;
        }
        ScalarField(out)
    }

    /// Laplace–Beltrami operator `div ∘ grad` (nonpositive spectrum).
    pub fn laplace_beltrami(&self, p: &ScalarField) -> ScalarField {
        self.div(&self.grad(p))
    }

    /// `div^g(h^⊤) − ḡ(h^⊥, Tr^g S)`; vanishes exactly on volume-preserving
    /// directions when `ρ ≡ 1`.
    pub fn constraint_residual(&self, h: &TangentField) -> Result<ScalarField> {
        let (top, perp) = self.split_tangent(h)?;
        let div = self.div(&top);
        let normal = perp.dot(&self.mean_curv);
        Ok(div.sub(&normal))
    }

    /// `Tf.grad^g p + p.Tr^g S`, the generator of the normal directions to
    /// the volume-preserving submanifold. This is minus the L² adjoint of
    /// [`GeometryCache::constraint_residual`].
    pub fn constraint_adjoint(&self, p: &ScalarField) -> TangentField {
        self.push_forward(&self.grad(p)).add(&self.mean_curv.mul_scalar(p))
    }

    /// `Tr^g ḡ(∇h, Tf) = g^{ab} ḡ(∂_a h, e_b)`; equals the constraint
    /// residual in the continuum.
    pub fn trace_form(&self, h: &TangentField) -> Result<ScalarField> {
        h.check_shape(self.target_dim, self.len())?;
        let d = self.dim();
        let dh: Vec<TangentField> = (0..d)
            .map(|a| TangentField {
                comps: h.comps.iter().map(|c| self.spectral.derivative(c, a)).collect(),
            })
            .collect();
        let mut out = ScalarField::zeros(self.len());
        for a in 0..d {
            for b in 0..d {
                let pairing = dh[a].dot(&self.frame[b]);
                for (node, o) in out.0.iter_mut().enumerate() {
                    *o += self.metric.g_inv[node][a][b] * pairing.0[node];
                }
            }
        }
        Ok(out)
    }

    /// `max |ρ − 1|`.
    pub fn rho_deviation(&self) -> f64 {
        self.rho.0.iter().fold(0.0f64, |m, r| m.max((r - 1.0).abs()))
    }

    /// Mean of `|Tr S|²` with respect to `vol(g)`.
    pub fn mean_tr_s_norm_sq(&self) -> f64 {
        let total: f64 = self.metric.sqrt_det.0.iter().sum();
        self.tr_s_norm_sq
            .0
            .iter()
            .zip(&self.metric.sqrt_det.0)
            .map(|(k, w)| k * w)
            .sum::<f64>()
            / total
    }

    /// Mean inverse metric (used by spectral preconditioners).
    pub fn mean_inverse_metric(&self) -> Sym2 {
        let mut m = [[0.0; 2]; 2];
        for gi in &self.metric.g_inv {
            for a in 0..2 {
                for b in 0..2 {
                    m[a][b] += gi[a][b];
                }
            }
        }
        let n = self.len() as f64;
        m.iter_mut().flatten().for_each(|v| *v /= n);
        m
    }
}

/// Pointwise volume density `√|g|` of `f` (relative to the parameter
/// measure).
pub fn volume_density(f: &DiscreteImmersion) -> Result<ScalarField> {
    let spectral = Spectral::new(*f.grid());
    Ok(MetricField::from_frame(&f.frame(&spectral))?.sqrt_det)
}

/// Pullback metric `g = f*ḡ` at every node.
pub fn pullback_metric(f: &DiscreteImmersion) -> Result<Vec<Sym2>> {
    let spectral = Spectral::new(*f.grid());
    Ok(MetricField::from_frame(&f.frame(&spectral))?.g)
}

/// First variation of the volume density in direction `h`:
/// `Tr^g(ḡ(∇h, Tf)) · √|g|`.
pub fn dvol_variation(f: &DiscreteImmersion, h: &TangentField) -> Result<ScalarField> {
    let cache = build_geometry(f, &Density::Induced)?;
    let tr = cache.trace_form(h)?;
    Ok(ScalarField(
        tr.0.iter().zip(&cache.metric.sqrt_det.0).map(|(t, s)| t * s).collect(),
    ))
}

/// First variation of the pullback metric in direction `h`:
/// `2 Sym ḡ(∂h, Tf)`.
pub fn dmetric_variation(f: &DiscreteImmersion, h: &TangentField) -> Result<Vec<Sym2>> {
    h.check_shape(f.target_dim(), f.grid().len())?;
    let spectral = Spectral::new(*f.grid());
    let frame = f.frame(&spectral);
    let d = f.grid().dim();
    let dh: Vec<TangentField> = (0..d)
        .map(|a| TangentField {
            comps: h.comps.iter().map(|c| spectral.derivative(c, a)).collect(),
        })
        .collect();
    let mut out = vec![[[0.0; 2]; 2]; f.grid().len()];
    for a in 0..d {
        for b in 0..d {
            let x = dh[a].dot(&frame[b]);
            let y = dh[b].dot(&frame[a]);
            for (node, m) in out.iter_mut().enumerate() {
                m[a][b] = x.0[node] + y.0[node];
            }
        }
    }
    Ok(out)
}
