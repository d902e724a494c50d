//! Experiment configuration files (TOML).
//!
//! ```toml
//! graph_file = "two_cycles.graph"      # or an inline [graph] table
//! edge_lengths = [1.0, 1.2, 1.5, 0.9, 1.1]
//! choices = [0, 0]
//! initial_state = "perturb_equilibrium 1e-3"
//! output_dir = "out"
//!
//! [law]
//! family = "proportional"
//! gain = 1.0
//!
//! [sim]
//! t_max = 50.0
//! seed = 7
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::dynamics::{ControlLaw, DualProportional, DynamicsError, FormationProblem, Proportional, SimParams};
use crate::fixtures;
use crate::framework::Framework;
use crate::graph::DirectedGraph;
use crate::henneberg::{self, HennebergError};
use crate::io::{self, ParseError};
use crate::shape_space::{self, EdgeLengthVector};

/// Environment variable that replaces every seed in a config.
pub const SEED_ENV: &str = "RIGIDKIT_SEED";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("config: {0}")]
    Invalid(String),
    #[error("{SEED_ENV} is not an unsigned integer: `{0}`")]
    BadSeedEnv(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InlineGraph {
    /// Name of a built-in graph (`two_cycles`, `triangle`, `k4`, ...).
    pub fixture: Option<String>,
    pub n: Option<usize>,
    /// 1-based `[src, tgt]` pairs.
    pub edges: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum InitialStateSpec {
    Explicit(Vec<f64>),
    Text(String),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ChoiceSpec {
    Bools(Vec<bool>),
    Bits(Vec<u8>),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    #[serde(default = "default_family")]
    pub family: String,
    pub gain: Option<f64>,
    /// One gain per edge (proportional family only).
    pub gains: Option<Vec<f64>>,
    pub beta: Option<f64>,
    /// Adds `w_offset · w` to the first gain of every two-leader agent.
    pub w_offset: Option<f64>,
}

fn default_family() -> String {
    "proportional".into()
}

impl Default for LawConfig {
    fn default() -> Self {
        Self {
            family: default_family(),
            gain: None,
            gains: None,
            beta: None,
            w_offset: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub step: Option<f64>,
    pub t_max: Option<f64>,
    pub converge_tol: Option<f64>,
    pub seed: Option<u64>,
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LinearizeConfig {
    pub threshold: Option<f64>,
}

/// The file as written.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph_file: Option<PathBuf>,
    pub graph: Option<InlineGraph>,
    pub edge_lengths: Option<Vec<f64>>,
    pub choices: Option<ChoiceSpec>,
    pub initial_state: Option<InitialStateSpec>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub law: LawConfig,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub linearize: LinearizeConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Explicit(Vec<f64>),
    /// Design equilibrium (for `choices`, or the config's) plus uniform noise
    /// of the given magnitude per coordinate.
    PerturbEquilibrium {
        magnitude: f64,
        choices: Option<Vec<bool>>,
    },
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawFamily {
    Proportional,
    AngleAware,
}

/// A validated configuration with paths resolved and seeds overridden.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub graph: DirectedGraph,
    pub edge_lengths: Option<EdgeLengthVector>,
    pub choices: Option<Vec<bool>>,
    pub initial_state: Option<InitialState>,
    pub output_dir: PathBuf,
    pub family: LawFamily,
    pub law: LawConfig,
    pub sim: SimConfig,
    pub seed: u64,
    pub threshold: Option<f64>,
}

fn parse_choice_text(s: &str) -> Result<Vec<bool>, ConfigError> {
    s.chars()
        .filter(|c| !matches!(c, ',' | ' '))
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(invalid(format!("choice string `{s}` must contain only 0 and 1"))),
        })
        .collect()
}

fn parse_initial(spec: &InitialStateSpec) -> Result<InitialState, ConfigError> {
    let text = match spec {
        InitialStateSpec::Explicit(v) => return Ok(InitialState::Explicit(v.clone())),
        InitialStateSpec::Text(t) => t,
    };
    let tokens: Vec<&str> = text.split_whitespace().collect();
    match tokens.as_slice() {
        ["perturb_equilibrium", mag, rest @ ..] => {
            let magnitude: f64 = mag
                .parse()
                .ok()
                .filter(|m: &f64| m.is_finite() && *m >= 0.0)
                .ok_or_else(|| invalid(format!("bad perturbation magnitude `{mag}`")))?;
            let choices = match rest {
                [] => None,
                parts => Some(parse_choice_text(&parts.join(""))?),
            };
            Ok(InitialState::PerturbEquilibrium { magnitude, choices })
        }
        ["random", seed] => Ok(InitialState::Random {
            seed: seed.parse().map_err(|_| invalid(format!("bad seed `{seed}`")))?,
        }),
        _ => Err(invalid(format!("unrecognized initial_state `{text}`"))),
    }
}

fn seed_override() -> Result<Option<u64>, ConfigError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| ConfigError::BadSeedEnv(v)),
        Err(_) => Ok(None),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Validates the config and loads referenced files. `RIGIDKIT_SEED`, when
    /// set, replaces every seed.
    pub fn resolve(&self, base_dir: &Path) -> Result<Experiment, ConfigError> {
        self.resolve_with_seed(base_dir, seed_override()?)
    }

    pub fn resolve_with_seed(&self, base_dir: &Path, seed_override: Option<u64>) -> Result<Experiment, ConfigError> {
        let graph = match (&self.graph_file, &self.graph) {
            (Some(_), Some(_)) => return Err(invalid("give either graph_file or [graph], not both")),
            (None, None) => return Err(invalid("no graph given")),
            (Some(path), None) => io::parse_graph(&io::read_text(&base_dir.join(path))?)?,
            (None, Some(inline)) => match (&inline.fixture, inline.n, &inline.edges) {
                (Some(name), None, None) => {
                    fixtures::by_name(name).ok_or_else(|| invalid(format!("unknown fixture `{name}`")))?
                }
                (None, Some(n), Some(edges)) => {
                    let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e[0], e[1])).collect();
                    DirectedGraph::from_one_based(n, &pairs).map_err(ParseError::from)?
                }
                _ => return Err(invalid("[graph] needs either `fixture` or both `n` and `edges`")),
            },
        };
        let edge_lengths = match &self.edge_lengths {
            None => None,
            Some(v) => Some(
                EdgeLengthVector::for_graph(&graph, v.clone()).map_err(|e| invalid(e.to_string()))?,
            ),
        };
        let choices = match &self.choices {
            None => None,
            Some(ChoiceSpec::Bools(b)) => Some(b.clone()),
            Some(ChoiceSpec::Bits(b)) => Some(
                b.iter()
                    .map(|&x| match x {
                        0 => Ok(false),
                        1 => Ok(true),
                        _ => Err(invalid("choices must be 0 or 1")),
                    })
                    .collect::<Result<_, _>>()?,
            ),
        };
        let mut initial_state = self.initial_state.as_ref().map(parse_initial).transpose()?;
        if let (Some(s), Some(InitialState::Random { seed })) = (seed_override, initial_state.as_mut()) {
            *seed = s;
        }
        if let Some(InitialState::Explicit(v)) = &initial_state {
            if v.len() != 2 * graph.n() {
                return Err(invalid(format!(
                    "initial_state has {} values, expected {}",
                    v.len(),
                    2 * graph.n()
                )));
            }
        }
        let family = match self.law.family.as_str() {
            "proportional" => LawFamily::Proportional,
            "angle_aware" => LawFamily::AngleAware,
            other => return Err(invalid(format!("unknown law family `{other}`"))),
        };
        if let Some(g) = &self.law.gains {
            if family != LawFamily::Proportional {
                return Err(invalid("per-edge gains are only supported by the proportional family"));
            }
            if g.len() != graph.m() {
                return Err(invalid(format!("law.gains has {} values, expected {}", g.len(), graph.m())));
            }
        }
        Ok(Experiment {
            graph,
            edge_lengths,
            choices,
            initial_state,
            output_dir: base_dir.join(self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))),
            family,
            law: self.law.clone(),
            sim: self.sim.clone(),
            seed: seed_override.or(self.sim.seed).unwrap_or(0),
            threshold: self.linearize.threshold,
        })
    }
}

/// Reads and resolves a config file.
pub fn load(path: &Path) -> Result<Experiment, ConfigError> {
    let text = io::read_text(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    ExperimentConfig::parse(&text)?.resolve(base)
}

#[derive(Debug, Error)]
pub enum SetupError {
    #[error("config: {0}")]
    Missing(&'static str),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Henneberg(#[from] HennebergError),
    #[error("could not realize the edge lengths")]
    NoRealization,
}

impl Experiment {
    pub fn lengths(&self) -> Result<&EdgeLengthVector, SetupError> {
        self.edge_lengths.as_ref().ok_or(SetupError::Missing("edge_lengths is required"))
    }

    pub fn gain(&self) -> f64 {
        self.law.gain.unwrap_or(1.0)
    }

    pub fn problem(&self) -> Result<FormationProblem, SetupError> {
        let d = self.lengths()?.clone();
        let g = self.graph.clone();
        let gain = self.gain();
        let problem = match self.family {
            LawFamily::AngleAware => FormationProblem::angle_aware(g, d, gain, self.law.beta.unwrap_or(0.0))?,
            LawFamily::Proportional => {
                let gains = self.law.gains.clone().unwrap_or_else(|| vec![gain; g.m()]);
                let offset = self.law.w_offset.unwrap_or(0.0);
                let laws = (0..g.n())
                    .map(|v| match g.out_edges(v).as_slice() {
                        [] => None,
                        [l] => Some(ControlLaw::Single(Arc::new(Proportional { gain: gains[*l] }))),
                        [a, b] => Some(ControlLaw::Dual(Arc::new(DualProportional {
                            gains: [gains[*a], gains[*b]],
                            w_offset: offset,
                        }))),
                        _ => None,
                    })
                    .collect();
                FormationProblem::new(g, d, laws)?
            }
        };
        Ok(problem)
    }

    /// Design equilibrium for the given (or configured, or all-`false`) choices.
    pub fn equilibrium(&self, choices: Option<&[bool]>) -> Result<Framework, SetupError> {
        let d = self.lengths()?;
        match henneberg::find_vertex_add_order(&self.graph) {
            Ok(Some(order)) => {
                let k = order.sequence.len();
                let default = vec![false; k];
                let c = choices.or(self.choices.as_deref()).unwrap_or(&default);
                Ok(henneberg::realize_graph(&self.graph, &order, d, c)?)
            }
            _ => shape_space::numerical_realization(&self.graph, d, 32, self.seed).ok_or(SetupError::NoRealization),
        }
    }

    pub fn initial_state(&self) -> Result<DVector<f64>, SetupError> {
        match self.initial_state.as_ref().ok_or(SetupError::Missing("initial_state is required"))? {
            InitialState::Explicit(v) => Ok(DVector::from_vec(v.clone())),
            InitialState::PerturbEquilibrium { magnitude, choices } => {
                let x = self.equilibrium(choices.as_deref())?.state();
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                Ok(x.map(|v| v + magnitude * rng.random_range(-1.0..=1.0)))
            }
            InitialState::Random { seed } => {
                let scale = self.edge_lengths.as_ref().map_or(1.0, |d| {
                    d.as_slice().iter().sum::<f64>() / d.len().max(1) as f64
                });
                Ok(crate::rigidity::random_placement(&self.graph, *seed, 0).state() * scale)
            }
        }
    }

    pub fn sim_params(&self, problem: &FormationProblem) -> SimParams {
        let base = SimParams::default_for(problem, self.gain());
        SimParams {
            step: self.sim.step.unwrap_or(base.step),
            t_max: self.sim.t_max.unwrap_or(base.t_max),
            converge_tol: self.sim.converge_tol.unwrap_or(base.converge_tol),
            record_every: self.sim.record_every.unwrap_or(base.record_every),
        }
    }
}
