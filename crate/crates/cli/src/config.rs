//! Experiment configuration: a single TOML file drives everything. Every
//! field has a documented default (see CONFIG.md at the repository root);
//! validation is atomic and reports the full list of violations at once.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use pullback_lab::attractor::TemperedFamily;
use pullback_lab::domain::{build_grid, Grid};
use pullback_lab::energy::SlackPolicy;
use pullback_lab::model::{
    ForcingSpec, ModelSpec, NonlinearityKind, SpatialProfile, TemporalKind,
};
use pullback_lab::scenario::Scenario;
use pullback_lab::solver::{Scheme, SolverControls};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dimension: usize,
    pub radius: f64,
    pub points_per_axis: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            dimension: 1,
            radius: 8.0,
            points_per_axis: 511,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub lambda: f64,
    pub p: f64,
    /// "polynomial" (odd power with coefficient `beta`) or "linear" (`slope`).
    pub kind: String,
    pub beta: f64,
    pub slope: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
    pub alpha5: f64,
    pub psi: SpatialProfile,
    pub phi1: SpatialProfile,
    pub phi2: SpatialProfile,
    pub phi3: SpatialProfile,
    pub phi4: SpatialProfile,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            lambda: 1.0,
            p: 4.0,
            kind: "polynomial".into(),
            beta: 1.0,
            slope: 0.0,
            alpha1: 1.0,
            alpha2: 1.0,
            alpha3: 1.0,
            alpha4: 0.25,
            alpha5: 0.25,
            psi: SpatialProfile::Zero,
            phi1: SpatialProfile::Zero,
            phi2: SpatialProfile::Zero,
            phi3: SpatialProfile::Zero,
            phi4: SpatialProfile::Zero,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForcingConfig {
    /// "exponential" (`amplitude`, `rate`) or "polynomial" (`amplitude`, `degree`).
    pub temporal: String,
    pub amplitude: f64,
    pub rate: f64,
    pub degree: f64,
    pub spatial: SpatialProfile,
}

impl Default for ForcingConfig {
    fn default() -> Self {
        ForcingConfig {
            temporal: "exponential".into(),
            amplitude: 1.0,
            rate: 0.0,
            degree: 0.0,
            spatial: SpatialProfile::Gaussian,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    /// "imex" or "fully-implicit".
    pub scheme: String,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub slack_constant: f64,
    pub snapshot_stride: usize,
    pub tail_radii: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 0.01,
            scheme: "imex".into(),
            newton_tol: 1e-10,
            newton_max_iter: 25,
            slack_constant: 10.0,
            snapshot_stride: 0,
            tail_radii: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyConfig {
    pub base_radius: f64,
    pub poly_degree: f64,
    pub exp_rate: f64,
    /// Anchor time of the radius function; defaults to the task anchor `tau`.
    pub anchor: Option<f64>,
    pub ensemble: usize,
    pub seed: u64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            base_radius: 2.0,
            poly_degree: 0.0,
            exp_rate: 0.0,
            anchor: None,
            ensemble: 8,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TasksConfig {
    /// Task list executed by `run`, in order. Known names:
    /// "verify-structure", "simulate", "verify-estimates", "attractor".
    pub run: Vec<String>,
    /// Observation (anchor) time τ.
    pub tau: f64,
    /// Pullback horizons for the estimate checkers and attraction scans.
    pub horizons: Vec<f64>,
    /// Horizon ladder for the attractor approximation.
    pub ladder: Vec<f64>,
    /// Cutoff radii for the tail checker (each must stay ≤ L/√2).
    pub radii: Vec<f64>,
    /// Tail smallness threshold η.
    pub eta: f64,
    pub tol_attractor: f64,
    pub tol_invariance: f64,
    pub invariance_fraction: f64,
    pub forward_time: f64,
    pub tol_attraction: f64,
    pub structure_range: [f64; 2],
    pub structure_samples: usize,
    pub simulate_time: f64,
    /// Horizon pairs for the H¹-Cauchy comparison.
    pub cauchy_pairs: Vec<[f64; 2]>,
}

impl Default for TasksConfig {
    fn default() -> Self {
        TasksConfig {
            run: vec![
                "verify-structure".into(),
                "simulate".into(),
                "verify-estimates".into(),
                "attractor".into(),
            ],
            tau: 0.0,
            horizons: vec![5.0, 10.0, 20.0, 40.0],
            ladder: vec![5.0, 10.0, 20.0, 40.0],
            radii: vec![1.0, 2.0, 3.0, 4.0],
            eta: 1e-3,
            tol_attractor: 1e-4,
            tol_invariance: 1e-3,
            invariance_fraction: 0.05,
            forward_time: 1.0,
            tol_attraction: 1e-3,
            structure_range: [-10.0, 10.0],
            structure_samples: 10_000,
            simulate_time: 20.0,
            cauchy_pairs: vec![[20.0, 40.0]],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into() }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub model: ModelConfig,
    pub forcing: ForcingConfig,
    pub solver: SolverConfig,
    pub family: FamilyConfig,
    pub tasks: TasksConfig,
    pub output: OutputConfig,
}

/// Executable task names, in their canonical order inside `run`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskKind {
    VerifyStructure,
    Simulate,
    VerifyEstimates,
    Attractor,
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::VerifyStructure => "verify-structure",
            TaskKind::Simulate => "simulate",
            TaskKind::VerifyEstimates => "verify-estimates",
            TaskKind::Attractor => "attractor",
        }
    }

    fn parse(s: &str) -> Option<TaskKind> {
        match s {
            "verify-structure" => Some(TaskKind::VerifyStructure),
            "simulate" => Some(TaskKind::Simulate),
            "verify-estimates" => Some(TaskKind::VerifyEstimates),
            "attractor" => Some(TaskKind::Attractor),
            _ => None,
        }
    }
}

/// Validated, fully resolved experiment: core objects plus the task plan.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub scenario: Scenario,
    pub tasks: Vec<TaskKind>,
    pub plan: TasksConfig,
    pub grid: Grid,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(toml::from_str(&text)?)
    }

    /// Echo of the fully resolved configuration (defaults filled in).
    pub fn echo_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Validates every block and builds the core objects. All violations are
    /// reported together; the config is rejected atomically.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let mut violations = Vec::new();

        let grid = match build_grid(
            self.grid.dimension,
            self.grid.radius,
            self.grid.points_per_axis,
        ) {
            Ok(g) => Some(g),
            Err(e) => {
                violations.push(format!("grid: {e}"));
                None
            }
        };

        let kind = match self.model.kind.as_str() {
            "polynomial" => Some(NonlinearityKind::PolynomialOdd {
                beta: self.model.beta,
                psi: self.model.psi,
            }),
            "linear" => Some(NonlinearityKind::Linear {
                slope: self.model.slope,
            }),
            other => {
                violations.push(format!(
                    "model: unknown nonlinearity kind {other:?} (expected \"polynomial\" or \"linear\")"
                ));
                None
            }
        };
        let model = kind.map(|kind| ModelSpec {
            lambda: self.model.lambda,
            p: self.model.p,
            q: self.model.p / (self.model.p - 1.0),
            kind,
            alpha1: self.model.alpha1,
            alpha2: self.model.alpha2,
            alpha3: self.model.alpha3,
            alpha4: self.model.alpha4,
            alpha5: self.model.alpha5,
            phi1: self.model.phi1,
            phi2: self.model.phi2,
            phi3: self.model.phi3,
            phi4: self.model.phi4,
        });
        if let Some(m) = &model {
            if let Err(e) = m.validate() {
                violations.push(format!("model: {e}"));
            }
        }

        let temporal = match self.forcing.temporal.as_str() {
            "exponential" => Some(TemporalKind::Exponential {
                rate: self.forcing.rate,
            }),
            "polynomial" => Some(TemporalKind::Polynomial {
                degree: self.forcing.degree,
            }),
            other => {
                violations.push(format!(
                    "forcing: unknown temporal kind {other:?} (expected \"exponential\" or \"polynomial\")"
                ));
                None
            }
        };
        let forcing = temporal.and_then(|temporal| {
            match ForcingSpec::new(
                self.grid.dimension.clamp(1, 2),
                self.forcing.amplitude,
                temporal,
                self.forcing.spatial,
            ) {
                Ok(f) => Some(f),
                Err(e) => {
                    violations.push(format!("forcing: {e}"));
                    None
                }
            }
        });
        if let (Some(f), Some(m)) = (&forcing, &model) {
            if let Err(e) = f.validate(m.lambda) {
                violations.push(format!("forcing: {e}"));
            }
        }

        let scheme = match self.solver.scheme.as_str() {
            "imex" => Some(Scheme::Imex),
            "fully-implicit" => Some(Scheme::FullyImplicit),
            other => {
                violations.push(format!(
                    "solver: unknown scheme {other:?} (expected \"imex\" or \"fully-implicit\")"
                ));
                None
            }
        };
        let controls = scheme.map(|scheme| SolverControls {
            dt: self.solver.dt,
            scheme,
            newton_tol: self.solver.newton_tol,
            newton_max_iter: self.solver.newton_max_iter,
            snapshot_stride: self.solver.snapshot_stride,
            tail_radii: self.solver.tail_radii.clone(),
        });
        if let (Some(c), Some(m)) = (&controls, &model) {
            if let Err(e) = c.validate(m) {
                violations.push(format!("solver: {e}"));
            }
        }
        if !(self.solver.slack_constant > 0.0) {
            violations.push("solver: slack constant must be positive".into());
        }

        let family = TemperedFamily {
            base_radius: self.family.base_radius,
            poly_degree: self.family.poly_degree,
            exp_rate: self.family.exp_rate,
            anchor: self.family.anchor.unwrap_or(self.tasks.tau),
        };
        if let Some(m) = &model {
            if let Err(e) = family.validate(m.lambda) {
                violations.push(format!("family: {e}"));
            }
        }
        if self.family.ensemble < 2 {
            violations.push("family: ensemble must have at least 2 members".into());
        }

        let mut tasks = Vec::new();
        for name in &self.tasks.run {
            match TaskKind::parse(name) {
                Some(t) => tasks.push(t),
                None => violations.push(format!("tasks: unknown task {name:?}")),
            }
        }
        let t = &self.tasks;
        let increasing = |v: &[f64]| !v.is_empty() && v.windows(2).all(|w| w[1] > w[0]);
        if !increasing(&t.horizons) || t.horizons[0] <= 0.0 {
            violations.push("tasks: horizons must be positive and increasing".into());
        }
        if t.ladder.len() < 2 || !increasing(&t.ladder) || t.ladder[0] <= 0.0 {
            violations
                .push("tasks: ladder needs at least two positive increasing horizons".into());
        }
        if let Some(g) = &grid {
            let limit = g.radius() / std::f64::consts::SQRT_2;
            for &k in &t.radii {
                if k < 0.0 || k > limit {
                    violations.push(format!(
                        "tasks: tail radius {k} outside [0, L/sqrt(2)] = [0, {limit:.6}]"
                    ));
                }
            }
            for &k in &self.solver.tail_radii {
                if k < 0.0 || k > g.radius() {
                    violations.push(format!(
                        "solver: diagnostic tail radius {k} outside [0, L]"
                    ));
                }
            }
        }
        for (name, v) in [
            ("eta", t.eta),
            ("tol_attractor", t.tol_attractor),
            ("tol_invariance", t.tol_invariance),
            ("invariance_fraction", t.invariance_fraction),
            ("forward_time", t.forward_time),
            ("tol_attraction", t.tol_attraction),
            ("simulate_time", t.simulate_time),
        ] {
            if !(v > 0.0) {
                violations.push(format!("tasks: {name} must be positive, got {v}"));
            }
        }
        if !(t.structure_range[1] > t.structure_range[0]) {
            violations.push("tasks: structure_range must be a nonempty interval".into());
        }
        if t.structure_samples < 100 {
            violations.push("tasks: structure_samples must be at least 100".into());
        }
        for pair in &t.cauchy_pairs {
            if !(pair[0] > 2.0 && pair[1] > pair[0]) {
                violations.push(format!(
                    "tasks: cauchy pair [{}, {}] must be increasing with both above 2",
                    pair[0], pair[1]
                ));
            }
        }

        if !violations.is_empty() {
            return Err(ConfigError::Invalid(violations));
        }
        let grid = grid.expect("validated");
        let mut scenario = Scenario::new(
            grid,
            model.expect("validated"),
            forcing.expect("validated"),
            controls.expect("validated"),
            family,
        );
        scenario.ensemble = self.family.ensemble;
        scenario.seed = self.family.seed;
        scenario.slack = SlackPolicy {
            c: self.solver.slack_constant,
        };
        Ok(Resolved {
            scenario,
            tasks,
            plan: self.tasks.clone(),
            grid,
        })
    }
}
