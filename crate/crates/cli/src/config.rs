//! Scenario files: parsing, validation and the pieces they build.

use gauge_tomo::evolution::{EquationId, TrajectoryKind};
use gauge_tomo::fields::{FieldSpec, GaugeFunction, GaugeSpec, Potentials};
use gauge_tomo::numerics::{Axis, Grid};
use gauge_tomo::states::{gaussian_packet, oscillator_state, DensityMatrix, WaveFunction};
use gauge_tomo::tomography::{GaugeKind, ParameterGrid, TomographyParams};
use gauge_tomo::UnitsContext;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default)]
    pub units: UnitsSpec,
    pub grid: GridSpec,
    pub state: StateSpec,
    #[serde(default = "free_field")]
    pub potentials: FieldSpec,
    #[serde(default)]
    pub gauge: Option<GaugeSpec>,
    pub tasks: Vec<TaskSpec>,
    #[serde(default)]
    pub output_dir: Option<String>,
}

fn free_field() -> FieldSpec {
    FieldSpec::Free
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsSpec {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub m: f64,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default = "one")]
    pub e: f64,
    #[serde(default = "one")]
    pub c: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for UnitsSpec {
    fn default() -> Self {
        Self { hbar: 1.0, m: 1.0, omega: 1.0, e: 1.0, c: 1.0 }
    }
}

/// `points` nodes per axis, either over `[-half_width, half_width]` or centred
/// with the given `spacing`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub points: usize,
    #[serde(default)]
    pub half_width: Option<f64>,
    #[serde(default)]
    pub spacing: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Gaussian { q0: Vec<f64>, p0: Vec<f64>, sigma: f64 },
    Oscillator { n: usize },
    Mixture { components: Vec<MixtureComponent> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub q0: Vec<f64>,
    pub p0: Vec<f64>,
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskSpec {
    /// Tomograms of the state; with a gauge, also of the transformed state and
    /// potentials, reporting the largest `L^1` change.
    ComputeTomogram {
        params: Vec<TomographyParams>,
        #[serde(default = "gauge_independent")]
        kind: GaugeKind,
        #[serde(default)]
        x_half_width: Option<f64>,
        #[serde(default = "x_points")]
        x_points: usize,
        /// Pass iff the two-gauge change is at most this.
        #[serde(default)]
        max_change: Option<f64>,
        /// Pass iff the two-gauge change exceeds this.
        #[serde(default)]
        min_change: Option<f64>,
    },
    /// Gauge kernel applied to the state's tomograms against tomograms of the
    /// transformed state.
    KernelCheck {
        outputs: Vec<TomographyParams>,
        kernel: KernelKindSpec,
        #[serde(default)]
        param_grid: Option<ParameterGrid>,
        #[serde(default = "kernel_x_half_width")]
        x_half_width: f64,
        #[serde(default = "kernel_x_points")]
        x_points: usize,
        tolerance: f64,
    },
    /// Refinement studies of evolution-equation residuals.
    Residual {
        equations: Vec<EquationId>,
        trajectory: TrajectoryKind,
        #[serde(default = "half")]
        t_eval: f64,
        #[serde(default = "tenth")]
        dt0: f64,
        #[serde(default = "tenth")]
        h0: f64,
        #[serde(default = "three")]
        levels: usize,
        #[serde(default = "six")]
        x_half_width: f64,
        /// Parameter vectors; defaults to one generic point per representation.
        #[serde(default)]
        centres: Option<Vec<Vec<f64>>>,
        #[serde(default = "min_order")]
        min_order: f64,
    },
    /// Quantum against classical tomograms for decreasing hbar.
    ClassicalLimit {
        hbar_list: Vec<f64>,
        t_final: f64,
        sections: Vec<(f64, f64)>,
        #[serde(default)]
        gauges: Vec<GaugeSpec>,
        #[serde(default)]
        max_distance: Option<f64>,
        #[serde(default)]
        distance_monotone: bool,
        /// Indices into `gauges` whose measure must decrease.
        #[serde(default)]
        gauge_monotone: Vec<usize>,
    },
    /// Density matrix from a sampled tomogram family, against the state.
    Reconstruct {
        #[serde(default)]
        scalar: bool,
        #[serde(default)]
        gauge_independent: bool,
        #[serde(default)]
        param_grid: Option<ParameterGrid>,
        #[serde(default = "min_fidelity")]
        min_fidelity: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKindSpec {
    Shift,
    Trace,
}

fn gauge_independent() -> GaugeKind {
    GaugeKind::GaugeIndependent
}
fn x_points() -> usize {
    257
}
fn kernel_x_half_width() -> f64 {
    8.0
}
fn kernel_x_points() -> usize {
    161
}
fn half() -> f64 {
    0.5
}
fn tenth() -> f64 {
    0.1
}
fn three() -> usize {
    3
}
fn six() -> f64 {
    6.0
}
fn min_order() -> f64 {
    1.8
}
fn min_fidelity() -> f64 {
    0.999
}

impl TaskSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TaskSpec::ComputeTomogram { .. } => "compute_tomogram",
            TaskSpec::KernelCheck { .. } => "kernel_check",
            TaskSpec::Residual { .. } => "residual",
            TaskSpec::ClassicalLimit { .. } => "classical_limit",
            TaskSpec::Reconstruct { .. } => "reconstruct",
        }
    }
}

/// A schema or consistency problem, with a JSON-path-like pointer.
#[derive(Debug, Clone)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", if self.path.is_empty() { "." } else { &self.path }, self.message)
    }
}

fn schema(path: impl Into<String>, message: impl ToString) -> SchemaError {
    SchemaError { path: path.into(), message: message.to_string() }
}

/// Everything a run needs, built from a validated config.
pub struct Scenario {
    pub config: ScenarioConfig,
    pub units: UnitsContext,
    pub grid: Grid,
    pub potentials: Potentials,
    pub chi: Option<GaugeFunction>,
    pub state: StateData,
}

pub enum StateData {
    Pure(WaveFunction),
    Mixed(DensityMatrix),
}

impl StateData {
    pub fn density(&self) -> DensityMatrix {
        match self {
            StateData::Pure(p) => gauge_tomo::states::density_from_wavefunction(p),
            StateData::Mixed(r) => r.clone(),
        }
    }
}

pub fn parse(text: &str) -> Result<ScenarioConfig, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner())
    })
}

impl Scenario {
    pub fn build(config: ScenarioConfig) -> Result<Self, SchemaError> {
        let u = &config.units;
        let units = UnitsContext::new(u.hbar, u.m, u.omega, u.e, u.c).map_err(|e| schema("units", e))?;
        if config.tasks.is_empty() {
            return Err(schema("tasks", "at least one task is required"));
        }
        if config.name.is_empty() || config.name.contains(['/', '\\']) {
            return Err(schema("name", "name must be non-empty and contain no path separators"));
        }
        let g = &config.grid;
        if !(1..=3).contains(&g.dim) {
            return Err(schema("grid.dim", "dimension must be 1, 2 or 3"));
        }
        let axis = match (g.half_width, g.spacing) {
            (Some(h), None) => Axis::symmetric(h, g.points),
            (None, Some(s)) => Axis::centered_with_spacing(s, g.points),
            _ => return Err(schema("grid", "give exactly one of half_width and spacing")),
        }
        .map_err(|e| schema("grid", e))?;
        let grid = Grid::new(vec![axis; g.dim]).map_err(|e| schema("grid", e))?;
        let potentials = config.potentials.build(g.dim, &units).map_err(|e| schema("potentials", e))?;
        let chi = config
            .gauge
            .as_ref()
            .map(|s| GaugeFunction::from_spec(g.dim, s))
            .transpose()
            .map_err(|e| schema("gauge", e))?;
        let state = match &config.state {
            StateSpec::Gaussian { q0, p0, sigma } => {
                StateData::Pure(gaussian_packet(&grid, q0, p0, *sigma, &units).map_err(|e| schema("state", e))?)
            }
            StateSpec::Oscillator { n } => {
                StateData::Pure(oscillator_state(&grid, *n, &units).map_err(|e| schema("state.n", e))?)
            }
            StateSpec::Mixture { components } => {
                let pure = components
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        gaussian_packet(&grid, &c.q0, &c.p0, c.sigma, &units)
                            .map(|p| (c.weight, p))
                            .map_err(|e| schema(format!("state.components[{i}]"), e))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let refs: Vec<(f64, &WaveFunction)> = pure.iter().map(|(w, p)| (*w, p)).collect();
                StateData::Mixed(DensityMatrix::mixture(&refs).map_err(|e| schema("state.components", e))?)
            }
        };
        for (i, t) in config.tasks.iter().enumerate() {
            check_task(i, t, &config, g.dim)?;
        }
        Ok(Self { units, grid, potentials, chi, state, config })
    }

    /// `(q0, p0, sigma)` of a Gaussian initial state.
    pub fn packet(&self) -> Option<(Vec<f64>, Vec<f64>, f64)> {
        match &self.config.state {
            StateSpec::Gaussian { q0, p0, sigma } => Some((q0.clone(), p0.clone(), *sigma)),
            _ => None,
        }
    }
}

fn check_task(i: usize, t: &TaskSpec, c: &ScenarioConfig, dim: usize) -> Result<(), SchemaError> {
    let at = |field: &str| format!("tasks[{i}].{field}");
    let gaussian = matches!(c.state, StateSpec::Gaussian { .. });
    match t {
        TaskSpec::ComputeTomogram { params, .. } => {
            if params.is_empty() {
                return Err(schema(at("params"), "at least one section is required"));
            }
            for (k, p) in params.iter().enumerate() {
                p.validate().map_err(|e| schema(at(&format!("params[{k}]")), e))?;
                if p.dim() != dim {
                    return Err(schema(at(&format!("params[{k}]")), "section dimension differs from the grid"));
                }
            }
        }
        TaskSpec::KernelCheck { outputs, kernel, .. } => {
            if c.gauge.is_none() {
                return Err(schema("gauge", "kernel_check needs a gauge function"));
            }
            if *kernel == KernelKindSpec::Shift && !matches!(c.gauge, Some(GaugeSpec::Linear { .. })) {
                return Err(schema(at("kernel"), "the shift kernel needs a linear gauge function"));
            }
            if *kernel == KernelKindSpec::Trace && dim != 1 {
                return Err(schema(at("kernel"), "trace kernels are built for one degree of freedom"));
            }
            if outputs.is_empty() {
                return Err(schema(at("outputs"), "at least one output section is required"));
            }
        }
        TaskSpec::Residual { equations, .. } => {
            if equations.is_empty() {
                return Err(schema(at("equations"), "at least one equation is required"));
            }
            if !gaussian {
                return Err(schema("state", "residual studies start from a Gaussian packet"));
            }
        }
        TaskSpec::ClassicalLimit { hbar_list, gauge_monotone, gauges, .. } => {
            if dim != 1 || !gaussian {
                return Err(schema(at("task"), "the classical-limit study runs on a 1D Gaussian packet"));
            }
            if hbar_list.is_empty() || hbar_list.windows(2).any(|w| w[1] >= w[0]) {
                return Err(schema(at("hbar_list"), "must be non-empty and strictly decreasing"));
            }
            if let Some(k) = gauge_monotone.iter().find(|k| **k >= gauges.len()) {
                return Err(schema(at("gauge_monotone"), format!("index {k} has no gauge")));
            }
        }
        TaskSpec::Reconstruct { .. } => {}
    }
    Ok(())
}

pub fn default_centres(eq: EquationId, dim: usize) -> Vec<Vec<f64>> {
    use gauge_tomo::evolution::Representation;
    match eq.representation() {
        Representation::Optical => vec![(0..dim).map(|s| 0.6 - 0.2 * s as f64).collect()],
        _ => {
            let mu = [0.8, 0.5, 0.3];
            let nu = [0.7, -0.4, 0.6];
            vec![mu[..dim].iter().chain(&nu[..dim]).copied().collect()]
        }
    }
}
