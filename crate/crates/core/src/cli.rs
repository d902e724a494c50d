//! Command-line front end.
//!
//! Exit codes: 0 success, 1 other failure, 2 parse/config error, 3 scope
//! limit, 4 not vertex-add constructible, 5 infeasible lengths, 6 incompatible
//! law, 7 Jacobian oracle mismatch, 8 graph is not the 2-cycles graph.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::config::{self, ConfigError, Experiment, SetupError, SEED_ENV};
use crate::dynamics::{self, DynamicsError};
use crate::framework::Framework;
use crate::henneberg::{self, HennebergError};
use crate::io::{self, ParseError};
use crate::linearization::{self, LinearizationError, DEFAULT_ZERO_THRESHOLD};
use crate::numfmt::fmt_f64;
use crate::rigidity::{self, RigidityError};
use crate::shape_space::{self, ShapeError, TwoCyclesSymmetry, DEFAULT_CONGRUENCE_TOL};

#[derive(Debug, Parser)]
#[command(name = "rigidkit", version, about = "Rigidity analysis and formation control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the rigidity report of a graph file.
    Analyze {
        graph_file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Enumerate the non-congruent frameworks realizing the configured lengths.
    Enumerate {
        config: PathBuf,
        /// Output directory (overrides the config's `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: bool,
    },
    /// Integrate the formation dynamics.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: bool,
    },
    /// Spectra of the Jacobian at the configured design equilibrium.
    Linearize {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random Henneberg sequence and its graph.
    Henneberg {
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        vertex_add_only: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Write the four reflections of a 2-cycles equilibrium.
    Orbit {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: bool,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Scope(String),
    #[error("{0}")]
    NotVertexAdd(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    IncompatibleLaw(String),
    #[error("{0}")]
    OracleMismatch(String),
    #[error("{0}")]
    NotTwoCycles(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Other(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Scope(_) => 3,
            CliError::NotVertexAdd(_) => 4,
            CliError::Infeasible(_) => 5,
            CliError::IncompatibleLaw(_) => 6,
            CliError::OracleMismatch(_) => 7,
            CliError::NotTwoCycles(_) => 8,
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<RigidityError> for CliError {
    fn from(e: RigidityError) -> Self {
        match e {
            RigidityError::TooLarge { .. } | RigidityError::TooSmall { .. } => CliError::Scope(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<HennebergError> for CliError {
    fn from(e: HennebergError) -> Self {
        match e {
            HennebergError::CirclesDisjoint { .. }
            | HennebergError::CirclesTangent { .. }
            | HennebergError::CoincidentAnchors { .. } => CliError::Infeasible(e.to_string()),
            HennebergError::NotLaman | HennebergError::NotVertexAddOnly { .. } => {
                CliError::NotVertexAdd(e.to_string())
            }
            HennebergError::ChoiceCount { .. } | HennebergError::LengthCount { .. } => {
                CliError::Parse(e.to_string())
            }
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<ShapeError> for CliError {
    fn from(e: ShapeError) -> Self {
        match e {
            ShapeError::NotVertexAddConstructible => CliError::NotVertexAdd(e.to_string()),
            ShapeError::InfeasibleLengths(_) => CliError::Infeasible(e.to_string()),
            ShapeError::NotTwoCycles => CliError::NotTwoCycles(e.to_string()),
            ShapeError::LengthCount { .. } | ShapeError::InvalidLength { .. } => CliError::Parse(e.to_string()),
            ShapeError::Henneberg(h) => h.into(),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::IncompatibleLaw(_) => CliError::IncompatibleLaw(e.to_string()),
            DynamicsError::OutvalenceTooHigh { .. } => CliError::Scope(e.to_string()),
            DynamicsError::StateLength { .. } | DynamicsError::LengthCount { .. } | DynamicsError::GainCount { .. } => {
                CliError::Parse(e.to_string())
            }
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<SetupError> for CliError {
    fn from(e: SetupError) -> Self {
        match e {
            SetupError::Missing(_) => CliError::Parse(e.to_string()),
            SetupError::Dynamics(d) => d.into(),
            SetupError::Henneberg(h) => h.into(),
            SetupError::NoRealization => CliError::Infeasible(e.to_string()),
        }
    }
}

impl From<LinearizationError> for CliError {
    fn from(e: LinearizationError) -> Self {
        match e {
            LinearizationError::OracleMismatch { .. } => CliError::OracleMismatch(e.to_string()),
            LinearizationError::Dynamics(d) => d.into(),
            _ => CliError::Other(e.to_string()),
        }
    }
}

fn env_seed(default: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Parse(format!("{SEED_ENV} is not an unsigned integer: `{v}`"))),
        Err(_) => Ok(default),
    }
}

fn output_dir(exp: &Experiment, out: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    let dir = out.clone().unwrap_or_else(|| exp.output_dir.clone());
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn write_framework(dir: &Path, stem: &str, f: &Framework, svg: bool) -> Result<(), CliError> {
    write_file(dir, &format!("{stem}.txt"), &io::write_framework(f))?;
    if svg {
        write_file(dir, &format!("{stem}.svg"), &io::framework_svg(f))?;
    }
    Ok(())
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Analyze { graph_file, seed } => analyze(graph_file, env_seed(*seed)?, stdout),
        Command::Enumerate { config, out, svg } => enumerate(&config::load(config)?, out, *svg, stdout),
        Command::Simulate { config, out, svg } => simulate(&config::load(config)?, out, *svg, stdout),
        Command::Linearize { config, out } => linearize(&config::load(config)?, out, stdout),
        Command::Henneberg {
            n,
            seed,
            vertex_add_only,
            out,
        } => henneberg_cmd(*n, env_seed(*seed)?, *vertex_add_only, out, stdout),
        Command::Orbit { config, out, svg } => orbit(&config::load(config)?, out, *svg, stdout),
    }
}

fn analyze(path: &Path, seed: u64, stdout: &mut dyn Write) -> Result<(), CliError> {
    let g = io::parse_graph(&io::read_text(path)?)?;
    let report = rigidity::analyze(&g, seed)?;
    let mut s = report.to_key_value();
    let classes = g.classify_agents();
    let roles: Vec<String> = classes.roles.iter().map(|r| r.to_string()).collect();
    let _ = writeln!(s, "roles {}", roles.join(" "));
    let _ = writeln!(s, "is_leaderless {}", classes.is_leaderless);
    for w in &classes.warnings {
        let _ = writeln!(s, "warning {w}");
    }
    stdout.write_all(s.as_bytes())?;
    Ok(())
}

fn enumerate(exp: &Experiment, out: &Option<PathBuf>, svg: bool, stdout: &mut dyn Write) -> Result<(), CliError> {
    let d = exp.lengths()?;
    let frameworks = shape_space::enumerate_frameworks(&exp.graph, d, DEFAULT_CONGRUENCE_TOL)?;
    let dir = output_dir(exp, out)?;
    for (k, f) in frameworks.iter().enumerate() {
        write_framework(&dir, &format!("framework_{}", k + 1), f, svg)?;
    }
    let bound = shape_space::ls_lower_bound(exp.graph.n());
    let mut s = String::new();
    let _ = writeln!(s, "count {}", frameworks.len());
    let _ = writeln!(s, "ls_lower_bound {bound}");
    let _ = writeln!(s, "bound_satisfied {}", frameworks.len() >= bound);
    write_file(&dir, "enumerate.txt", &s)?;
    stdout.write_all(s.as_bytes())?;
    Ok(())
}

fn simulate(exp: &Experiment, out: &Option<PathBuf>, svg: bool, stdout: &mut dyn Write) -> Result<(), CliError> {
    let problem = exp.problem()?;
    let compat = dynamics::check_problem(&problem);
    if !compat.is_compatible() {
        return Err(DynamicsError::IncompatibleLaw(compat).into());
    }
    let x0 = exp.initial_state()?;
    let params = exp.sim_params(&problem);
    let traj = dynamics::simulate(&problem, &x0, &params)?;
    let dir = output_dir(exp, out)?;
    write_file(&dir, "trajectory.csv", &traj.to_csv())?;
    let last = problem.framework(traj.final_state())?;
    write_framework(&dir, "final", &last, svg)?;
    let e = traj.final_error();
    let mut s = String::new();
    let _ = writeln!(s, "termination {}", traj.termination);
    let _ = writeln!(s, "final_time {}", fmt_f64(traj.final_time()));
    let _ = writeln!(s, "steps {}", traj.steps_taken);
    let _ = writeln!(s, "step {}", fmt_f64(params.step));
    let _ = writeln!(s, "final_error_max {}", fmt_f64(e.amax()));
    let _ = writeln!(s, "final_error_norm {}", fmt_f64(e.norm()));
    s.push_str(&compat.to_string());
    write_file(&dir, "simulate.txt", &s)?;
    stdout.write_all(s.as_bytes())?;
    Ok(())
}

fn linearize(exp: &Experiment, out: &Option<PathBuf>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let problem = exp.problem()?;
    let f = exp.equilibrium(None)?;
    let report = linearization::spectrum_report(&problem, &f, exp.threshold.unwrap_or(DEFAULT_ZERO_THRESHOLD))?;
    let dir = output_dir(exp, out)?;
    write_framework(&dir, "equilibrium", &f, false)?;
    write_file(&dir, "eigenvalues.csv", &report.eigenvalue_csv())?;
    let s = report.to_key_value();
    write_file(&dir, "spectrum.txt", &s)?;
    stdout.write_all(s.as_bytes())?;
    Ok(())
}

fn henneberg_cmd(
    n: usize,
    seed: u64,
    vertex_add_only: bool,
    out: &Path,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    if n < 2 {
        return Err(CliError::Scope(format!("a Henneberg sequence needs n >= 2, got {n}")));
    }
    let seq = henneberg::random_sequence(n, seed, vertex_add_only);
    let g = henneberg::apply_sequence(&seq);
    std::fs::create_dir_all(out)?;
    write_file(out, "sequence.txt", &seq.to_text())?;
    write_file(out, "graph.txt", &io::write_graph(&g))?;
    let mut s = String::new();
    let _ = writeln!(s, "n {}", g.n());
    let _ = writeln!(s, "m {}", g.m());
    let _ = writeln!(s, "vertex_add_only {}", seq.is_vertex_add_only());
    let _ = writeln!(s, "valid {}", henneberg::validate(&seq));
    stdout.write_all(s.as_bytes())?;
    Ok(())
}

fn orbit(exp: &Experiment, out: &Option<PathBuf>, svg: bool, stdout: &mut dyn Write) -> Result<(), CliError> {
    TwoCyclesSymmetry::detect(&exp.graph)?;
    let f = exp.equilibrium(None)?;
    let orbit = shape_space::symmetry_orbit(&f)?;
    let dir = output_dir(exp, out)?;
    let base = rigidity::distance_function(&f);
    let mut worst: f64 = 0.0;
    for (k, g) in orbit.iter().enumerate() {
        write_framework(&dir, &format!("orbit_{}", k + 1), g, svg)?;
        worst = worst.max((rigidity::distance_function(g) - &base).amax());
    }
    let mut s = String::new();
    let _ = writeln!(s, "frameworks {}", orbit.len());
    let _ = writeln!(s, "max_distance_deviation {}", fmt_f64(worst));
    stdout.write_all(s.as_bytes())?;
    Ok(())
}
