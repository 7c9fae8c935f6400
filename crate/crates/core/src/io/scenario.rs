//! Scenario files.
//!
//! A scenario is a TOML document. An optional top-level `preset` supplies
//! every section; any section written in the file replaces the preset's
//! section, except `[sim]`, whose fields are overlaid one by one.
//!
//! ```toml
//! name = "ring"
//! algorithm = 1
//!
//! [graph]
//! n = 4
//! edges = [[1, 2], [2, 3], [3, 4], [4, 1]]
//!
//! [signals]
//! axes = [
//!   [{ kind = "sin", amplitude = 0.1, frequency = 1.0, per_agent_scale = true }],
//!   [{ kind = "cos", amplitude = 0.1, frequency = 1.0, per_agent_scale = true }],
//! ]
//!
//! [initial_conditions]
//! x0 = [[0, 0], [1, 0], [1, 1], [0, 1]]
//! v0 = [[0, 0], [0, 0], [0, 0], [0, 0]]
//!
//! [gains]
//! mode = "auto"
//! margin = 1.1
//!
//! [sim]
//! horizon = 10.0
//! match_initialization = true
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{Algorithm, SystemState};
use crate::gains::{
    synthesize_gains_alg1, synthesize_gains_alg2, verify_gains, GainError, GainReport, GainSet,
    DEFAULT_MARGIN,
};
use crate::graph::{
    build_graph, canonical_ten_node_edges, is_connected, spectrum, Graph, GraphError, Spectrum,
    EIGEN_TOL,
};
use crate::signals::{estimate_bounds, InputSignal, SignalBounds, SignalError, SignalProfile};
use crate::sim::{self, case_initial_conditions, Integrator, SimConfig, SimError, Trajectory};
use crate::Vector;

/// Inflation applied to grid-sampled signal bounds unless overridden.
pub const DEFAULT_BOUND_SAFETY: f64 = 1.1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("scenario field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("graph is disconnected; average tracking needs a connected graph")]
    Disconnected,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Gain(#[from] GainError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

fn field_err(field: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    PaperCase1,
    PaperCase2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    /// 1-based endpoint pairs.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub profile: SignalProfile,
    pub r0: Vec<Vec<f64>>,
    pub v0: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConditions {
    pub x0: Vec<Vec<f64>>,
    pub v0: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upsilon0: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum GainMode {
    Auto {
        #[serde(default = "default_margin")]
        margin: f64,
    },
    Explicit {
        alpha: f64,
        beta: f64,
        gamma: f64,
        #[serde(default)]
        kappa: Option<f64>,
    },
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

/// Sampling of the signal suprema used for gain synthesis and verification.
/// Unset horizon and grid step follow the simulation's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub grid_step: Option<f64>,
    #[serde(default = "default_safety")]
    pub safety: f64,
}

fn default_safety() -> f64 {
    DEFAULT_BOUND_SAFETY
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            horizon: None,
            grid_step: None,
            safety: DEFAULT_BOUND_SAFETY,
        }
    }
}

/// A fully concrete, validated run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub algorithm: Algorithm,
    pub graph: GraphSpec,
    pub signals: SignalSpec,
    pub initial_conditions: InitialConditions,
    pub gains: GainMode,
    pub sim: SimConfig,
    pub bounds: BoundsConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    #[serde(default)]
    preset: Option<String>,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    edges: Option<Vec<(usize, usize)>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSignals {
    #[serde(default)]
    preset: Option<Preset>,
    #[serde(default)]
    axes: Option<SignalProfile>,
    #[serde(default)]
    r0: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    v0: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    #[serde(default)]
    preset: Option<String>,
    #[serde(default)]
    x0: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    v0: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    upsilon0: Option<Vec<Vec<f64>>>,
}

/// `[sim]` fields, each optional; also the shape of command-line overrides.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimOverrides {
    pub step: Option<f64>,
    pub horizon: Option<f64>,
    pub integrator: Option<Integrator>,
    pub record_every: Option<usize>,
    pub match_initialization: Option<bool>,
    pub boundary_layer: Option<f64>,
    pub divergence_cap: Option<f64>,
}

impl SimOverrides {
    pub fn apply(&self, cfg: &mut SimConfig) {
        if let Some(v) = self.step {
            cfg.step = v;
        }
        if let Some(v) = self.horizon {
            cfg.horizon = v;
        }
        if let Some(v) = self.integrator {
            cfg.integrator = v;
        }
        if let Some(v) = self.record_every {
            cfg.record_every = v;
        }
        if let Some(v) = self.match_initialization {
            cfg.match_initialization = v;
        }
        if let Some(v) = self.boundary_layer {
            cfg.boundary_layer = v;
        }
        if let Some(v) = self.divergence_cap {
            cfg.divergence_cap = v;
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    preset: Option<Preset>,
    #[serde(default)]
    algorithm: Option<Algorithm>,
    #[serde(default)]
    graph: Option<RawGraph>,
    #[serde(default)]
    signals: Option<RawSignals>,
    #[serde(default)]
    initial_conditions: Option<RawInitial>,
    #[serde(default)]
    gains: Option<GainMode>,
    #[serde(default)]
    sim: Option<SimOverrides>,
    #[serde(default)]
    bounds: Option<BoundsConfig>,
}

fn rows(vs: &[Vector]) -> Vec<Vec<f64>> {
    vs.iter().map(|v| v.iter().copied().collect()).collect()
}

fn case_signal_spec(preset: Preset) -> SignalSpec {
    let zeros = vec![vec![0.0, 0.0]; 10];
    match preset {
        Preset::PaperCase1 => SignalSpec {
            profile: SignalProfile::case1(),
            r0: zeros.clone(),
            v0: zeros,
        },
        Preset::PaperCase2 => SignalSpec {
            profile: SignalProfile::case2(),
            r0: zeros,
            v0: (1..=10).map(|i| vec![-0.1 * i as f64; 2]).collect(),
        },
    }
}

fn case_initial() -> InitialConditions {
    let (x, v) = case_initial_conditions();
    InitialConditions {
        x0: rows(&x),
        v0: rows(&v),
        upsilon0: None,
    }
}

impl Preset {
    pub fn scenario(self) -> Scenario {
        let graph = GraphSpec {
            n: 10,
            edges: canonical_ten_node_edges(),
        };
        match self {
            Preset::PaperCase1 => Scenario {
                name: "paper_case1".into(),
                algorithm: Algorithm::Communication,
                graph,
                signals: case_signal_spec(self),
                initial_conditions: case_initial(),
                gains: GainMode::Explicit {
                    alpha: 20.0,
                    beta: 400.0,
                    gamma: 5.0,
                    kappa: None,
                },
                sim: SimConfig {
                    horizon: 20.0,
                    match_initialization: true,
                    ..SimConfig::default()
                },
                bounds: BoundsConfig::default(),
            },
            Preset::PaperCase2 => Scenario {
                name: "paper_case2".into(),
                algorithm: Algorithm::Sensing,
                graph,
                signals: case_signal_spec(self),
                initial_conditions: case_initial(),
                gains: GainMode::Explicit {
                    alpha: 10.0,
                    beta: 450.0,
                    gamma: 50.0,
                    kappa: Some(2.0),
                },
                sim: SimConfig {
                    horizon: 30.0,
                    match_initialization: false,
                    ..SimConfig::default()
                },
                bounds: BoundsConfig::default(),
            },
        }
    }
}

fn resolve_graph(raw: RawGraph) -> Result<GraphSpec, ScenarioError> {
    match raw.preset.as_deref() {
        Some("canonical") => {
            if raw.n.is_some() || raw.edges.is_some() {
                return Err(field_err("graph", "give either preset or n/edges"));
            }
            Ok(GraphSpec {
                n: 10,
                edges: canonical_ten_node_edges(),
            })
        }
        Some(other) => Err(field_err(
            "graph.preset",
            format!("unknown graph preset `{other}` (expected canonical)"),
        )),
        None => Ok(GraphSpec {
            n: raw.n.ok_or_else(|| field_err("graph.n", "missing"))?,
            edges: raw.edges.unwrap_or_default(),
        }),
    }
}

fn resolve_signals(raw: RawSignals, n: usize) -> Result<SignalSpec, ScenarioError> {
    let mut spec = match (raw.preset, raw.axes) {
        (Some(_), Some(_)) => return Err(field_err("signals", "give either preset or axes")),
        (Some(p), None) => case_signal_spec(p),
        (None, Some(profile)) => {
            let p = profile.dimension();
            SignalSpec {
                profile,
                r0: vec![vec![0.0; p]; n],
                v0: vec![vec![0.0; p]; n],
            }
        }
        (None, None) => return Err(field_err("signals", "missing preset or axes")),
    };
    if let Some(r0) = raw.r0 {
        spec.r0 = r0;
    }
    if let Some(v0) = raw.v0 {
        spec.v0 = v0;
    }
    Ok(spec)
}

fn resolve_initial(raw: RawInitial) -> Result<InitialConditions, ScenarioError> {
    let mut ic = match raw.preset.as_deref() {
        Some("replication") => case_initial(),
        Some(other) => {
            return Err(field_err(
                "initial_conditions.preset",
                format!("unknown preset `{other}` (expected replication)"),
            ))
        }
        None => InitialConditions {
            x0: raw
                .x0
                .clone()
                .ok_or_else(|| field_err("initial_conditions.x0", "missing"))?,
            v0: raw
                .v0
                .clone()
                .ok_or_else(|| field_err("initial_conditions.v0", "missing"))?,
            upsilon0: None,
        },
    };
    if raw.preset.is_some() {
        if let Some(x0) = raw.x0 {
            ic.x0 = x0;
        }
        if let Some(v0) = raw.v0 {
            ic.v0 = v0;
        }
    }
    ic.upsilon0 = raw.upsilon0;
    Ok(ic)
}

fn check_matrix(field: &str, m: &[Vec<f64>], n: usize, p: usize) -> Result<(), ScenarioError> {
    if m.len() != n {
        return Err(field_err(
            field,
            format!("expected {n} rows, got {}", m.len()),
        ));
    }
    if let Some((i, row)) = m.iter().enumerate().find(|(_, r)| r.len() != p) {
        return Err(field_err(
            field,
            format!("row {} has {} entries, expected {p}", i + 1, row.len()),
        ));
    }
    if m.iter().flatten().any(|c| !c.is_finite()) {
        return Err(field_err(field, "entries must be finite"));
    }
    Ok(())
}

impl Scenario {
    /// Check every cross-section constraint. Presets pass by construction.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let n = self.graph.n;
        if n < 2 {
            return Err(field_err(
                "graph.n",
                format!("need at least 2 agents, got {n}"),
            ));
        }
        let g = build_graph(n, &self.graph.edges)?;
        if !is_connected(&g) {
            return Err(ScenarioError::Disconnected);
        }
        let p = self.signals.profile.dimension();
        if p == 0 {
            return Err(field_err("signals.axes", "need at least one axis"));
        }
        SignalProfile::new(self.signals.profile.axes.clone())?;
        check_matrix("signals.r0", &self.signals.r0, n, p)?;
        check_matrix("signals.v0", &self.signals.v0, n, p)?;
        check_matrix("initial_conditions.x0", &self.initial_conditions.x0, n, p)?;
        check_matrix("initial_conditions.v0", &self.initial_conditions.v0, n, p)?;
        if let Some(u) = &self.initial_conditions.upsilon0 {
            check_matrix("initial_conditions.upsilon0", u, n, p)?;
        }
        match (&self.gains, self.algorithm) {
            (GainMode::Auto { margin }, _) if !(*margin > 1.0) => {
                return Err(field_err(
                    "gains.margin",
                    format!("must exceed 1, got {margin}"),
                ));
            }
            (GainMode::Explicit { kappa: None, .. }, Algorithm::Sensing) => {
                return Err(field_err("gains.kappa", "required for algorithm 2"));
            }
            (GainMode::Explicit { kappa: Some(_), .. }, Algorithm::Communication) => {
                return Err(field_err("gains.kappa", "only used by algorithm 2"));
            }
            _ => {}
        }
        if !(self.bounds.safety >= 1.0) {
            return Err(field_err("bounds.safety", "must be at least 1"));
        }
        self.sim.validate()?;
        Ok(())
    }

    pub fn input_signals(&self) -> Result<Vec<InputSignal>, ScenarioError> {
        let to_vec = |r: &Vec<f64>| Vector::from_vec(r.clone());
        let (r0, v0) = if self.sim.match_initialization {
            (&self.initial_conditions.x0, &self.initial_conditions.v0)
        } else {
            (&self.signals.r0, &self.signals.v0)
        };
        (0..self.graph.n)
            .map(|i| {
                InputSignal::new(
                    i + 1,
                    self.signals.profile.clone(),
                    to_vec(&r0[i]),
                    to_vec(&v0[i]),
                )
                .map_err(Into::into)
            })
            .collect()
    }

    /// Build the graph, estimate signal bounds, pick the gains and verify
    /// them.
    pub fn prepare(&self) -> Result<Prepared, ScenarioError> {
        self.validate()?;
        let graph = build_graph(self.graph.n, &self.graph.edges)?;
        let spec = spectrum(&graph, EIGEN_TOL)?;
        let signals = self.input_signals()?;
        let horizon = self.bounds.horizon.unwrap_or(self.sim.horizon);
        let grid_step = self.bounds.grid_step.unwrap_or(self.sim.step);
        let bounds = estimate_bounds(&signals, horizon, grid_step, self.bounds.safety)?;
        let n = self.graph.n;
        let gains = match (&self.gains, self.algorithm) {
            (GainMode::Auto { margin }, Algorithm::Communication) => {
                synthesize_gains_alg1(&spec, n, bounds.a_bar_d, *margin)?
            }
            (GainMode::Auto { margin }, Algorithm::Sensing) => {
                synthesize_gains_alg2(&spec, n, &bounds, *margin)?
            }
            (
                GainMode::Explicit {
                    alpha, beta, gamma, ..
                },
                Algorithm::Communication,
            ) => GainSet::communication(*alpha, *beta, *gamma),
            (
                GainMode::Explicit {
                    alpha,
                    beta,
                    gamma,
                    kappa,
                },
                Algorithm::Sensing,
            ) => GainSet::sensing(kappa.unwrap_or_default(), *alpha, *beta, *gamma),
        };
        let report = verify_gains(&gains, &spec, n, &bounds);
        Ok(Prepared {
            scenario: self.clone(),
            graph,
            spectrum: spec,
            signals,
            bounds,
            gains,
            report,
        })
    }
}

/// A scenario with everything derived that a run needs.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scenario: Scenario,
    pub graph: Graph,
    pub spectrum: Spectrum,
    pub signals: Vec<InputSignal>,
    pub bounds: SignalBounds,
    pub gains: GainSet,
    pub report: GainReport,
}

impl Prepared {
    pub fn initial_state(&self) -> Result<SystemState, ScenarioError> {
        let vecs = |m: &Vec<Vec<f64>>| {
            m.iter()
                .map(|r| Vector::from_vec(r.clone()))
                .collect::<Vec<_>>()
        };
        let ic = &self.scenario.initial_conditions;
        let upsilon0 = ic.upsilon0.as_ref().map(vecs);
        Ok(sim::initialize(
            &self.graph,
            &self.signals,
            &vecs(&ic.x0),
            &vecs(&ic.v0),
            upsilon0.as_deref(),
            &self.scenario.sim,
            &self.gains,
        )?)
    }

    pub fn simulate(&self) -> Result<Trajectory, ScenarioError> {
        let s0 = self.initial_state()?;
        Ok(sim::run(
            s0,
            &self.signals,
            &self.graph,
            &self.gains,
            &self.scenario.sim,
        )?)
    }
}

/// Parse and validate a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(text)?;
    let base = raw.preset.map(Preset::scenario);

    let algorithm = raw
        .algorithm
        .or(base.as_ref().map(|b| b.algorithm))
        .ok_or_else(|| field_err("algorithm", "missing (1 or 2)"))?;
    let graph = match (raw.graph, &base) {
        (Some(g), _) => resolve_graph(g)?,
        (None, Some(b)) => b.graph.clone(),
        (None, None) => return Err(field_err("graph", "missing section")),
    };
    let signals = match (raw.signals, &base) {
        (Some(s), _) => resolve_signals(s, graph.n)?,
        (None, Some(b)) => b.signals.clone(),
        (None, None) => return Err(field_err("signals", "missing section")),
    };
    let initial_conditions = match (raw.initial_conditions, &base) {
        (Some(ic), _) => resolve_initial(ic)?,
        (None, Some(b)) => b.initial_conditions.clone(),
        (None, None) => return Err(field_err("initial_conditions", "missing section")),
    };
    let gains = match (raw.gains, &base) {
        (Some(g), _) => g,
        (None, Some(b)) => b.gains.clone(),
        (None, None) => GainMode::Auto {
            margin: DEFAULT_MARGIN,
        },
    };
    let mut sim = base.as_ref().map(|b| b.sim.clone()).unwrap_or_default();
    if let Some(o) = raw.sim {
        o.apply(&mut sim);
    }
    let scenario = Scenario {
        name: raw
            .name
            .or(base.as_ref().map(|b| b.name.clone()))
            .unwrap_or_else(|| "scenario".into()),
        algorithm,
        graph,
        signals,
        initial_conditions,
        gains,
        sim,
        bounds: raw.bounds.unwrap_or_default(),
    };
    scenario.validate()?;
    Ok(scenario)
}
