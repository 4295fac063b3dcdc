//! Scenario files: a TOML document describing one run.
//!
//! Parsing fills in the per-case defaults, so a parsed scenario is complete
//! and `parse_scenario(&print_scenario(&s)) == s`. The schema is documented
//! in `FORMATS.md`.

use std::fmt;

use serde::{Deserialize, Serialize};

pub const DEFAULT_N: usize = 128;
pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    WhipCurve,
    SurfaceL2,
    EulerTorus,
    ProjectionStudy,
}

impl Case {
    pub fn as_str(self) -> &'static str {
        match self {
            Case::WhipCurve => "whip_curve",
            Case::SurfaceL2 => "surface_l2",
            Case::EulerTorus => "euler_torus",
            Case::ProjectionStudy => "projection_study",
        }
    }

    /// Number of parameter directions of the case's grid.
    pub fn grid_dim(self) -> usize {
        match self {
            Case::WhipCurve => 1,
            Case::SurfaceL2 | Case::EulerTorus => 2,
            // depends on the family; see `Scenario::grid_dim`
            Case::ProjectionStudy => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Rk4,
    Rattle,
    DiscreteLagrangian,
    /// Vorticity RK4 of the Euler case.
    EulerRk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Samples per periodic direction.
    #[serde(default)]
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    /// Sobolev order `l` of `G^l`.
    #[serde(default)]
    pub order: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default)]
    pub scheme: Option<SchemeName>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    #[serde(default)]
    pub renormalize: bool,
    /// Euler case: co-advect the flow map and log its volume deviation.
    #[serde(default)]
    pub track_flow_map: bool,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_t_end() -> f64 {
    1.0
}
fn default_stride() -> usize {
    100
}
fn default_tol() -> f64 {
    volpres_core::geodesic::NEWTON_TOL
}
fn default_solver_tol() -> f64 {
    1e-12
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self {
            scheme: None,
            dt: default_dt(),
            t_end: default_t_end(),
            output_stride: default_stride(),
            tol: default_tol(),
            solver_tol: default_solver_tol(),
            renormalize: false,
            track_flow_map: false,
        }
    }
}

/// Named initial-condition families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Round circle rotating rigidly with angular speed `omega`.
    CircleRotation {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "one")]
        omega: f64,
    },
    /// Round circle with a radial bump velocity, projected onto the
    /// volume-preserving directions.
    CircleBump {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "half")]
        amp: f64,
        #[serde(default)]
        center: f64,
        #[serde(default = "bump_width")]
        width: f64,
    },
    /// Torus of revolution with a normal bump velocity in the `u` direction.
    TorusBump {
        #[serde(default = "two")]
        big_r: f64,
        #[serde(default = "one")]
        r: f64,
        #[serde(default = "fifth")]
        amp: f64,
        #[serde(default)]
        center: f64,
        #[serde(default = "half")]
        width: f64,
    },
    /// Parallel shear `u = (amp sin(k y), 0)`.
    ShearFlow {
        #[serde(default = "one")]
        amp: f64,
        #[serde(default = "one_i")]
        k: i64,
    },
    /// Seeded random smooth vorticity with modes `|k_i| ≤ kmax`.
    RandomVorticity {
        #[serde(default = "four")]
        kmax: i64,
        #[serde(default = "one")]
        amp: f64,
        #[serde(default)]
        mean_flow: [f64; 2],
    },
    /// Seeded random field on a randomly perturbed circle or torus.
    RandomField {
        #[serde(default = "four")]
        kmax: i64,
        /// Amplitude of the smooth perturbation of the base immersion.
        #[serde(default = "tenth")]
        perturbation: f64,
        #[serde(default)]
        surface: bool,
    },
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn half() -> f64 {
    0.5
}
fn fifth() -> f64 {
    0.2
}
fn tenth() -> f64 {
    0.1
}
fn bump_width() -> f64 {
    0.35
}
fn one_i() -> i64 {
    1
}
fn four() -> i64 {
    4
}

impl InitialSpec {
    pub fn name(&self) -> &'static str {
        match self {
            InitialSpec::CircleRotation { .. } => "circle_rotation",
            InitialSpec::CircleBump { .. } => "circle_bump",
            InitialSpec::TorusBump { .. } => "torus_bump",
            InitialSpec::ShearFlow { .. } => "shear_flow",
            InitialSpec::RandomVorticity { .. } => "random_vorticity",
            InitialSpec::RandomField { .. } => "random_field",
        }
    }

    fn default_for(case: Case) -> Self {
        match case {
            Case::WhipCurve => InitialSpec::CircleBump {
                radius: 1.0,
                amp: 0.5,
                center: 0.0,
                width: bump_width(),
            },
            Case::SurfaceL2 => InitialSpec::TorusBump {
                big_r: 2.0,
                r: 1.0,
                amp: 0.2,
                center: 0.0,
                width: 0.5,
            },
            Case::EulerTorus => InitialSpec::ShearFlow { amp: 1.0, k: 1 },
            Case::ProjectionStudy => InitialSpec::RandomField {
                kmax: 4,
                perturbation: 0.1,
                surface: false,
            },
        }
    }

    fn allowed_in(&self, case: Case) -> bool {
        matches!(
            (case, self),
            (Case::WhipCurve, InitialSpec::CircleRotation { .. } | InitialSpec::CircleBump { .. })
                | (Case::SurfaceL2, InitialSpec::TorusBump { .. })
                | (Case::EulerTorus, InitialSpec::ShearFlow { .. } | InitialSpec::RandomVorticity { .. })
                | (Case::ProjectionStudy, InitialSpec::RandomField { .. })
        )
    }
}

/// Parameter sweep: one run per listed `dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub dt: Vec<f64>,
}

/// Resolutions and metric orders of a projection study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    #[serde(default = "study_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "study_orders")]
    pub orders: Vec<u32>,
}

fn study_sizes() -> Vec<usize> {
    vec![32, 64, 128]
}
fn study_orders() -> Vec<u32> {
    vec![0, 1, 2]
}

impl Default for StudySpec {
    fn default() -> Self {
        Self {
            sizes: study_sizes(),
            orders: study_orders(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub case: Case,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; the CLI's `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default = "empty_grid")]
    pub grid: GridSpec,
    #[serde(default = "zero_metric")]
    pub metric: MetricSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub initial: Option<InitialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudySpec>,
}

fn empty_grid() -> GridSpec {
    GridSpec { n: Vec::new() }
}
fn zero_metric() -> MetricSpec {
    MetricSpec { order: 0 }
}

impl Scenario {
    /// Initial-condition family; always set on parsed scenarios.
    pub fn initial(&self) -> InitialSpec {
        self.initial.clone().unwrap_or_else(|| InitialSpec::default_for(self.case))
    }

    pub fn scheme(&self) -> SchemeName {
        self.integrator.scheme.unwrap_or(match self.case {
            Case::WhipCurve if self.metric.order > 0 => SchemeName::DiscreteLagrangian,
            Case::WhipCurve => SchemeName::Rk4,
            Case::SurfaceL2 => SchemeName::Rattle,
            Case::EulerTorus => SchemeName::EulerRk4,
            Case::ProjectionStudy => SchemeName::Rattle,
        })
    }

    pub fn grid_dim(&self) -> usize {
        match (self.case, self.initial()) {
            (Case::ProjectionStudy, InitialSpec::RandomField { surface: true, .. }) => 2,
            (case, _) => case.grid_dim(),
        }
    }

    /// Fills in every per-case default so the scenario prints completely.
    fn normalize(&mut self) {
        if self.initial.is_none() {
            self.initial = Some(InitialSpec::default_for(self.case));
        }
        if self.integrator.scheme.is_none() {
            self.integrator.scheme = Some(self.scheme());
        }
        if self.grid.n.is_empty() {
            self.grid.n = vec![DEFAULT_N; self.grid_dim()];
        }
        if self.case == Case::ProjectionStudy && self.study.is_none() {
            self.study = Some(StudySpec::default());
        }
    }

    fn validate(&self) -> Vec<FieldError> {
        let mut errs = Vec::new();
        let mut range = |path: &str, ok: bool, message: &str| {
            if !ok {
                errs.push(FieldError::range(path, message));
            }
        };
        range("name", !self.name.trim().is_empty(), "must not be empty");
        let dim = self.grid_dim();
        range(
            "grid.n",
            self.grid.n.len() == dim,
            &format!("expected {dim} size(s) for case {}", self.case.as_str()),
        );
        let min = if self.case == Case::EulerTorus { volpres_core::euler::MIN_GRID } else { 8 };
        for (i, &n) in self.grid.n.iter().enumerate() {
            range(
                &format!("grid.n[{i}]"),
                n % 2 == 0 && (min..=4096).contains(&n),
                &format!("must be even and within [{min}, 4096]"),
            );
        }
        range("metric.order", self.metric.order <= 8, "must be within [0, 8]");
        let it = &self.integrator;
        range("integrator.dt", it.dt.is_finite() && it.dt > 0.0, "must be positive");
        range("integrator.t_end", it.t_end.is_finite() && it.t_end >= 0.0, "must be nonnegative");
        if it.dt.is_finite() && it.dt > 0.0 && it.t_end.is_finite() {
            range("integrator.t_end", it.t_end / it.dt <= 1e7, "needs more than 1e7 steps");
        }
        range("integrator.output_stride", it.output_stride >= 1, "must be at least 1");
        range("integrator.tol", it.tol.is_finite() && it.tol > 0.0, "must be positive");
        range("integrator.solver_tol", it.solver_tol.is_finite() && it.solver_tol > 0.0, "must be positive");
        let scheme = self.scheme();
        let l = self.metric.order;
        let scheme_ok = match (self.case, scheme) {
            (Case::WhipCurve, SchemeName::Rk4 | SchemeName::Rattle) => l == 0,
            (Case::WhipCurve, SchemeName::DiscreteLagrangian) => l >= 1,
            (Case::SurfaceL2, SchemeName::Rattle) => l == 0,
            (Case::EulerTorus, SchemeName::EulerRk4) => true,
            (Case::ProjectionStudy, _) => true,
            _ => false,
        };
        range(
            "integrator.scheme",
            scheme_ok,
            "not available for this case and metric order (rk4/rattle: l = 0, discrete_lagrangian: curves with l >= 1, \
             surfaces: rattle, euler_torus: euler_rk4)",
        );
        range(
            "integrator.track_flow_map",
            !it.track_flow_map || self.case == Case::EulerTorus,
            "only the euler_torus case has a flow map",
        );
        let init = self.initial();
        range(
            "initial.family",
            init.allowed_in(self.case),
            &format!("{} is not available for case {}", init.name(), self.case.as_str()),
        );
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let fin = |v: f64| v.is_finite();
        match init {
            InitialSpec::CircleRotation { radius, omega } => {
                range("initial.radius", pos(radius), "must be positive");
                range("initial.omega", fin(omega), "must be finite");
            }
            InitialSpec::CircleBump { radius, amp, center, width } => {
                range("initial.radius", pos(radius), "must be positive");
                range("initial.amp", fin(amp), "must be finite");
                range("initial.center", fin(center), "must be finite");
                range("initial.width", pos(width), "must be positive");
            }
            InitialSpec::TorusBump { big_r, r, amp, center, width } => {
                range("initial.r", pos(r), "must be positive");
                range("initial.big_r", pos(big_r) && big_r > r, "must exceed r");
                range("initial.amp", fin(amp), "must be finite");
                range("initial.center", fin(center), "must be finite");
                range("initial.width", pos(width), "must be positive");
            }
            InitialSpec::ShearFlow { amp, k } => {
                range("initial.amp", fin(amp), "must be finite");
                let half = self.grid.n.iter().copied().min().unwrap_or(0) as i64 / 3;
                range("initial.k", (1..=half.max(1)).contains(&k), "must be within [1, n/3]");
            }
            InitialSpec::RandomVorticity { kmax, amp, mean_flow } => {
                range("initial.kmax", (1..=16).contains(&kmax), "must be within [1, 16]");
                range("initial.amp", fin(amp), "must be finite");
                range("initial.mean_flow", mean_flow.iter().all(|v| v.is_finite()), "must be finite");
            }
            InitialSpec::RandomField { kmax, perturbation, .. } => {
                range("initial.kmax", (1..=16).contains(&kmax), "must be within [1, 16]");
                range(
                    "initial.perturbation",
                    perturbation.is_finite() && (0.0..0.5).contains(&perturbation),
                    "must be within [0, 0.5)",
                );
            }
        }
        if let Some(sweep) = &self.sweep {
            range("sweep.dt", sweep.dt.len() >= 2, "needs at least two values");
            range("sweep.dt", sweep.dt.iter().all(|&d| d.is_finite() && d > 0.0), "values must be positive");
            range("sweep", self.case != Case::ProjectionStudy, "projection studies have no time step");
            let t = self.integrator.t_end;
            range(
                "sweep.dt",
                sweep.dt.iter().all(|&d| d > 0.0 && ((t / d).round() * d - t).abs() <= 1e-9 * t.max(1.0)),
                "values must divide integrator.t_end",
            );
        }
        if let Some(study) = &self.study {
            range("study", self.case == Case::ProjectionStudy, "only projection_study takes a study table");
            range("study.sizes", !study.sizes.is_empty(), "must not be empty");
            range(
                "study.sizes",
                study.sizes.iter().all(|n| n % 2 == 0 && (8..=4096).contains(n)),
                "values must be even and within [8, 4096]",
            );
            range("study.orders", !study.orders.is_empty(), "must not be empty");
            range("study.orders", study.orders.iter().all(|&l| l <= 8), "values must be within [0, 8]");
        }
        errs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Schema,
    Range,
}

/// One field-level problem of a scenario document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub kind: ErrorKind,
    /// Dotted key path, e.g. `integrator.dt`.
    pub path: String,
    pub message: String,
}

impl FieldError {
    fn range(path: &str, message: &str) -> Self {
        Self {
            kind: ErrorKind::Range,
            path: path.to_string(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ErrorKind::Schema => "SchemaError",
            ErrorKind::Range => "RangeError",
        };
        write!(f, "{kind} at `{}`: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}", .errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
pub struct ScenarioError {
    pub errors: Vec<FieldError>,
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let de = toml::Deserializer::new(text);
    let mut scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ScenarioError {
            errors: vec![FieldError {
                kind: ErrorKind::Schema,
                path: if path == "." { String::new() } else { path },
                message: inner.message().trim().to_string(),
            }],
        }
    })?;
    scenario.normalize();
    let errors = scenario.validate();
    if errors.is_empty() {
        Ok(scenario)
    } else {
        Err(ScenarioError { errors })
    }
}

pub fn print_scenario(s: &Scenario) -> String {
    toml::to_string(s).expect("scenarios always serialise")
}
