//! Decentralized formation-control dynamics.
//!
//! Agent `i` with out-edges `l` moves along its edge vectors
//! `z_l = x_target − x_i`:
//!
//! * one out-edge: `ẋ_i = u(d_l; e_l) z_l`;
//! * two out-edges `a < b` (edge order): `ẋ_i = u₁ z_a + u₂ z_b`, where both
//!   gains take `(d_a, d_b; e_a, e_b, w)` with `w = z_a · z_b`.
//!
//! Errors are in squared length, `e_l = ‖z_l‖² − d_l`, and every law sees the
//! squared target `d_l`. Leaders (no out-edges) are stationary.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::framework::{Framework, Point};
use crate::graph::{kron2, to_f64, DirectedGraph};
use crate::numfmt::fmt_f64;
use crate::shape_space::EdgeLengthVector;

/// Central-difference step, relative to the magnitude of the argument.
pub const FD_REL_STEP: f64 = 1e-6;
/// Tolerance of the compatibility checks.
pub const COMPATIBILITY_TOL: f64 = 1e-6;
/// Edge endpoints closer than this stop a simulation as degenerate.
pub const DEGENERATE_DISTANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("agent {vertex} has outvalence {outvalence}; at most 2 is supported")]
    OutvalenceTooHigh { vertex: usize, outvalence: usize },
    #[error("agent {vertex} has outvalence {outvalence} but its law is {law}")]
    LawMismatch {
        vertex: usize,
        outvalence: usize,
        law: &'static str,
    },
    #[error("expected {expected} laws, got {got}")]
    LawCount { expected: usize, got: usize },
    #[error("expected {expected} edge lengths, got {got}")]
    LengthCount { expected: usize, got: usize },
    #[error("expected {expected} gains, got {got}")]
    GainCount { expected: usize, got: usize },
    #[error("state vector has length {got}, expected {expected}")]
    StateLength { expected: usize, got: usize },
    #[error("state is not finite")]
    NonFiniteState,
    #[error("step must be positive and finite")]
    InvalidStep,
    #[error("control laws are not compatible:\n{0}")]
    IncompatibleLaw(CompatibilityReport),
}

/// Arguments of a two-leader law. Targets are squared lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualArgs {
    pub d_first: f64,
    pub d_second: f64,
    pub e_first: f64,
    pub e_second: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualMode {
    /// Gains ignore `w`; the simulator passes `w = 0`.
    DistanceOnly,
    DistanceAngle,
    /// `u₂(e_a, e_b, w) = u₁(e_b, e_a, w)`: the agent treats its leaders alike.
    Symmetric,
}

pub trait SingleLaw: fmt::Debug + Send + Sync {
    fn eval(&self, d: f64, e: f64) -> f64;

    /// `∂u/∂e`, when known in closed form.
    fn partial_e(&self, _d: f64, _e: f64) -> Option<f64> {
        None
    }
}

pub trait DualLaw: fmt::Debug + Send + Sync {
    fn mode(&self) -> DualMode;

    /// `[u₁, u₂]`.
    fn eval(&self, args: &DualArgs) -> [f64; 2];

    /// `[[∂u₁/∂e_a, ∂u₁/∂e_b, ∂u₁/∂w], [∂u₂/∂e_a, ∂u₂/∂e_b, ∂u₂/∂w]]`, when known.
    fn partials(&self, _args: &DualArgs) -> Option<[[f64; 3]; 2]> {
        None
    }
}

/// Law of one agent, matched to its outvalence.
#[derive(Debug, Clone)]
pub enum ControlLaw {
    Single(Arc<dyn SingleLaw>),
    Dual(Arc<dyn DualLaw>),
}

impl ControlLaw {
    fn kind(&self) -> &'static str {
        match self {
            ControlLaw::Single(_) => "single-leader",
            ControlLaw::Dual(_) => "two-leader",
        }
    }
}

/// `u(d; e) = κ e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proportional {
    pub gain: f64,
}

impl SingleLaw for Proportional {
    fn eval(&self, _d: f64, e: f64) -> f64 {
        self.gain * e
    }

    fn partial_e(&self, _d: f64, _e: f64) -> Option<f64> {
        Some(self.gain)
    }
}

/// `u₁ = κ₁ e_a + c·w`, `u₂ = κ₂ e_b`. With `c = 0` this is the default
/// distance-only law; `c ≠ 0` plants a dependence on `w` at zero error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualProportional {
    pub gains: [f64; 2],
    pub w_offset: f64,
}

impl DualProportional {
    pub fn new(k1: f64, k2: f64) -> Self {
        Self {
            gains: [k1, k2],
            w_offset: 0.0,
        }
    }
}

impl DualLaw for DualProportional {
    fn mode(&self) -> DualMode {
        if self.w_offset == 0.0 {
            DualMode::DistanceOnly
        } else {
            DualMode::DistanceAngle
        }
    }

    fn eval(&self, a: &DualArgs) -> [f64; 2] {
        [
            self.gains[0] * a.e_first + self.w_offset * a.w,
            self.gains[1] * a.e_second,
        ]
    }

    fn partials(&self, _a: &DualArgs) -> Option<[[f64; 3]; 2]> {
        Some([
            [self.gains[0], 0.0, self.w_offset],
            [0.0, self.gains[1], 0.0],
        ])
    }
}

/// Symmetric angle-aware law `u(e_own, e_other, w) = e_own (κ + β e_other q(w))`
/// with `q(w) = w / (1 + w²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleAware {
    pub gain: f64,
    pub beta: f64,
}

impl AngleAware {
    fn q(w: f64) -> f64 {
        w / (1.0 + w * w)
    }

    fn dq(w: f64) -> f64 {
        let s = 1.0 + w * w;
        (1.0 - w * w) / (s * s)
    }

    fn u(&self, own: f64, other: f64, w: f64) -> f64 {
        own * (self.gain + self.beta * other * Self::q(w))
    }
}

impl DualLaw for AngleAware {
    fn mode(&self) -> DualMode {
        DualMode::Symmetric
    }

    fn eval(&self, a: &DualArgs) -> [f64; 2] {
        [
            self.u(a.e_first, a.e_second, a.w),
            self.u(a.e_second, a.e_first, a.w),
        ]
    }

    fn partials(&self, a: &DualArgs) -> Option<[[f64; 3]; 2]> {
        let (ea, eb, w) = (a.e_first, a.e_second, a.w);
        let q = Self::q(w);
        let dq = Self::dq(w);
        let b = self.beta;
        Some([
            [self.gain + b * eb * q, b * ea * q, b * ea * eb * dq],
            [b * eb * q, self.gain + b * ea * q, b * ea * eb * dq],
        ])
    }
}

/// Single-leader law from a closure `(d, e) -> u`.
#[derive(Clone)]
pub struct SingleFn(pub Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>);

impl fmt::Debug for SingleFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SingleFn")
    }
}

impl SingleLaw for SingleFn {
    fn eval(&self, d: f64, e: f64) -> f64 {
        (self.0)(d, e)
    }
}

/// Two-leader law from a closure returning `[u₁, u₂]`.
#[derive(Clone)]
pub struct DualFn {
    pub mode: DualMode,
    pub f: Arc<dyn Fn(&DualArgs) -> [f64; 2] + Send + Sync>,
}

impl fmt::Debug for DualFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DualFn({:?})", self.mode)
    }
}

impl DualLaw for DualFn {
    fn mode(&self) -> DualMode {
        self.mode
    }

    fn eval(&self, args: &DualArgs) -> [f64; 2] {
        (self.f)(args)
    }
}

/// Graph, target lengths and one law per non-leader agent.
#[derive(Debug, Clone)]
pub struct FormationProblem {
    graph: DirectedGraph,
    targets: EdgeLengthVector,
    squared: Vec<f64>,
    laws: Vec<Option<ControlLaw>>,
    agent_edges: Vec<Vec<usize>>,
    ae2: DMatrix<f64>,
}

impl FormationProblem {
    pub fn new(
        graph: DirectedGraph,
        targets: EdgeLengthVector,
        laws: Vec<Option<ControlLaw>>,
    ) -> Result<Self, DynamicsError> {
        if targets.len() != graph.m() {
            return Err(DynamicsError::LengthCount {
                expected: graph.m(),
                got: targets.len(),
            });
        }
        if laws.len() != graph.n() {
            return Err(DynamicsError::LawCount {
                expected: graph.n(),
                got: laws.len(),
            });
        }
        let agent_edges: Vec<Vec<usize>> = (0..graph.n()).map(|v| graph.out_edges(v)).collect();
        for (v, (edges, law)) in agent_edges.iter().zip(&laws).enumerate() {
            let outvalence = edges.len();
            if outvalence > 2 {
                return Err(DynamicsError::OutvalenceTooHigh {
                    vertex: v + 1,
                    outvalence,
                });
            }
            let ok = matches!(
                (outvalence, law),
                (0, None) | (1, Some(ControlLaw::Single(_))) | (2, Some(ControlLaw::Dual(_)))
            );
            if !ok {
                return Err(DynamicsError::LawMismatch {
                    vertex: v + 1,
                    outvalence,
                    law: law.as_ref().map_or("none", ControlLaw::kind),
                });
            }
        }
        let ae2 = kron2(&to_f64(&graph.edge_adjacency_matrix()));
        Ok(Self {
            squared: targets.squared(),
            graph,
            targets,
            laws,
            agent_edges,
            ae2,
        })
    }

    /// Default laws: `κ e` for single leaders, `κ e_a`, `κ e_b` for two.
    pub fn proportional(
        graph: DirectedGraph,
        targets: EdgeLengthVector,
        gain: f64,
    ) -> Result<Self, DynamicsError> {
        let gains = vec![gain; graph.m()];
        Self::with_edge_gains(graph, targets, &gains)
    }

    /// Proportional laws with one gain per edge (the gain of the agent's
    /// term along that edge).
    pub fn with_edge_gains(
        graph: DirectedGraph,
        targets: EdgeLengthVector,
        gains: &[f64],
    ) -> Result<Self, DynamicsError> {
        if gains.len() != graph.m() {
            return Err(DynamicsError::GainCount {
                expected: graph.m(),
                got: gains.len(),
            });
        }
        let laws = (0..graph.n())
            .map(|v| {
                let out = graph.out_edges(v);
                match out.as_slice() {
                    [] => None,
                    [l] => Some(ControlLaw::Single(Arc::new(Proportional { gain: gains[*l] }))),
                    [a, b] => Some(ControlLaw::Dual(Arc::new(DualProportional::new(
                        gains[*a], gains[*b],
                    )))),
                    _ => Some(ControlLaw::Single(Arc::new(Proportional { gain: 0.0 }))),
                }
            })
            .collect();
        Self::new(graph, targets, laws)
    }

    /// Proportional single-leader laws and [`AngleAware`] two-leader laws.
    pub fn angle_aware(
        graph: DirectedGraph,
        targets: EdgeLengthVector,
        gain: f64,
        beta: f64,
    ) -> Result<Self, DynamicsError> {
        let laws = (0..graph.n())
            .map(|v| match graph.outvalence(v) {
                0 => None,
                1 => Some(ControlLaw::Single(Arc::new(Proportional { gain }))),
                _ => Some(ControlLaw::Dual(Arc::new(AngleAware { gain, beta }))),
            })
            .collect();
        Self::new(graph, targets, laws)
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn targets(&self) -> &EdgeLengthVector {
        &self.targets
    }

    /// Squared targets `d_l`.
    pub fn squared_targets(&self) -> &[f64] {
        &self.squared
    }

    pub fn laws(&self) -> &[Option<ControlLaw>] {
        &self.laws
    }

    /// Out-edges of every agent, in edge order.
    pub fn agent_edges(&self) -> &[Vec<usize>] {
        &self.agent_edges
    }

    /// `A_e ⊗ I₂` as floating point.
    pub fn edge_adjacency2(&self) -> &DMatrix<f64> {
        &self.ae2
    }

    /// Multiplies every gain by `c` (only for the built-in proportional
    /// families; custom laws are wrapped).
    pub fn scaled(&self, c: f64) -> Self {
        let laws = self
            .laws
            .iter()
            .map(|law| {
                law.as_ref().map(|law| match law {
                    ControlLaw::Single(inner) => {
                        let inner = inner.clone();
                        ControlLaw::Single(Arc::new(SingleFn(Arc::new(move |d, e| c * inner.eval(d, e)))))
                    }
                    ControlLaw::Dual(inner) => {
                        let inner = inner.clone();
                        let mode = inner.mode();
                        ControlLaw::Dual(Arc::new(DualFn {
                            mode,
                            f: Arc::new(move |a| inner.eval(a).map(|u| c * u)),
                        }))
                    }
                })
            })
            .collect();
        Self::new(self.graph.clone(), self.targets.clone(), laws).expect("same structure")
    }

    /// Dual-law arguments of an agent from its two edge vectors.
    fn dual_args(&self, a: usize, b: usize, za: &Point, zb: &Point, mode: DualMode) -> DualArgs {
        DualArgs {
            d_first: self.squared[a],
            d_second: self.squared[b],
            e_first: za.norm_squared() - self.squared[a],
            e_second: zb.norm_squared() - self.squared[b],
            w: if mode == DualMode::DistanceOnly {
                0.0
            } else {
                za.dot(zb)
            },
        }
    }

    /// Diagonal of `D`: the scalar gain multiplying each edge vector.
    pub fn edge_gains(&self, z: &[Point]) -> Vec<f64> {
        let mut gains = vec![0.0; self.graph.m()];
        for (edges, law) in self.agent_edges.iter().zip(&self.laws) {
            match (edges.as_slice(), law) {
                ([l], Some(ControlLaw::Single(u))) => {
                    let e = z[*l].norm_squared() - self.squared[*l];
                    gains[*l] = u.eval(self.squared[*l], e);
                }
                ([a, b], Some(ControlLaw::Dual(u))) => {
                    let args = self.dual_args(*a, *b, &z[*a], &z[*b], u.mode());
                    let [u1, u2] = u.eval(&args);
                    gains[*a] = u1;
                    gains[*b] = u2;
                }
                _ => {}
            }
        }
        gains
    }

    pub fn check_state(&self, x: &DVector<f64>) -> Result<(), DynamicsError> {
        if x.len() != 2 * self.graph.n() {
            return Err(DynamicsError::StateLength {
                expected: 2 * self.graph.n(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::NonFiniteState);
        }
        Ok(())
    }

    pub fn framework(&self, x: &DVector<f64>) -> Result<Framework, DynamicsError> {
        self.check_state(x)?;
        Ok(Framework::from_state(self.graph.clone(), x).expect("length checked"))
    }
}

/// Edge vectors `z_l = x_target − x_source` of a stacked state.
pub fn edge_vectors_of_state(g: &DirectedGraph, x: &DVector<f64>) -> Vec<Point> {
    g.edges()
        .iter()
        .map(|&(s, t)| Point::new(x[2 * t] - x[2 * s], x[2 * t + 1] - x[2 * s + 1]))
        .collect()
}

/// Stacks edge vectors into the `2m` z-coordinates.
pub fn stack(z: &[Point]) -> DVector<f64> {
    DVector::from_iterator(2 * z.len(), z.iter().flat_map(|p| [p.x, p.y]))
}

pub fn unstack(z: &DVector<f64>) -> Vec<Point> {
    (0..z.len() / 2).map(|l| Point::new(z[2 * l], z[2 * l + 1])).collect()
}

/// `e_l = ‖z_l‖² − d_l²` for a framework of the problem's graph.
pub fn error_vector(problem: &FormationProblem, f: &Framework) -> DVector<f64> {
    let z = f.edge_vectors();
    DVector::from_iterator(
        z.len(),
        z.iter().zip(problem.squared_targets()).map(|(z, d)| z.norm_squared() - d),
    )
}

fn error_vector_of_state(problem: &FormationProblem, x: &DVector<f64>) -> DVector<f64> {
    let z = edge_vectors_of_state(problem.graph(), x);
    DVector::from_iterator(
        z.len(),
        z.iter().zip(problem.squared_targets()).map(|(z, d)| z.norm_squared() - d),
    )
}

/// Agent velocities `ẋ` for a stacked state `x`.
pub fn vector_field_x(problem: &FormationProblem, x: &DVector<f64>) -> Result<DVector<f64>, DynamicsError> {
    problem.check_state(x)?;
    let z = edge_vectors_of_state(problem.graph(), x);
    let gains = problem.edge_gains(&z);
    let mut v = DVector::zeros(x.len());
    for (i, edges) in problem.agent_edges().iter().enumerate() {
        let mut vi = Point::zeros();
        for &l in edges {
            vi += gains[l] * z[l];
        }
        v[2 * i] = vi.x;
        v[2 * i + 1] = vi.y;
    }
    Ok(v)
}

/// `ż = (A_e ⊗ I₂)(D ⊗ I₂) z`.
pub fn vector_field_z(problem: &FormationProblem, z: &DVector<f64>) -> Result<DVector<f64>, DynamicsError> {
    let m = problem.graph().m();
    if z.len() != 2 * m {
        return Err(DynamicsError::StateLength {
            expected: 2 * m,
            got: z.len(),
        });
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(DynamicsError::NonFiniteState);
    }
    let zs = unstack(z);
    let gains = problem.edge_gains(&zs);
    let dz = DVector::from_iterator(
        2 * m,
        zs.iter().zip(&gains).flat_map(|(z, g)| [g * z.x, g * z.y]),
    );
    Ok(problem.edge_adjacency2() * dz)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clause {
    /// A single-leader law must vanish at zero error.
    SingleZeroAtEquilibrium,
    /// A two-leader law must vanish at zero errors for every `w`.
    DualZeroAtEquilibrium,
    /// A two-leader law must not vary with `w` at zero errors.
    AngleInsensitiveAtEquilibrium,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::SingleZeroAtEquilibrium => "(i) u(d; 0) = 0",
            Clause::DualZeroAtEquilibrium => "(ii) u_k(d_a, d_b; 0, 0, w) = 0 for all w",
            Clause::AngleInsensitiveAtEquilibrium => "(iii) du_k/dw(d_a, d_b; 0, 0, w) = 0",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub clause: Clause,
    pub agent: Option<usize>,
    /// Which gain (1 or 2) of a two-leader law; 1 for single-leader laws.
    pub component: usize,
    pub d: Vec<f64>,
    pub w: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompatibilityReport {
    pub samples_checked: usize,
    pub violations: Vec<Violation>,
}

impl CompatibilityReport {
    pub fn is_compatible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, clause: Clause) -> bool {
        self.violations.iter().any(|v| v.clause == clause)
    }

    fn merge(&mut self, other: CompatibilityReport, agent: usize) {
        self.samples_checked += other.samples_checked;
        self.violations.extend(other.violations.into_iter().map(|mut v| {
            v.agent = Some(agent);
            v
        }));
    }
}

impl fmt::Display for CompatibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples_checked {}", self.samples_checked)?;
        writeln!(f, "compatible {}", self.is_compatible())?;
        for v in &self.violations {
            let mut line = format!("violation clause={} u{}", v.clause, v.component);
            if let Some(a) = v.agent {
                let _ = write!(line, " agent={}", a + 1);
            }
            let d: Vec<String> = v.d.iter().map(|&x| fmt_f64(x)).collect();
            let _ = write!(line, " d=[{}]", d.join(" "));
            if let Some(w) = v.w {
                let _ = write!(line, " w={}", fmt_f64(w));
            }
            let _ = write!(line, " value={}", fmt_f64(v.value));
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Checks the compatibility conditions of one law at the given squared
/// targets and inner products.
///
/// Single-leader laws are checked at every `d` in `d_samples`; two-leader laws
/// at every ordered pair of `d_samples` and every `w` in `w_samples`.
pub fn check_compatibility(
    law: &ControlLaw,
    d_samples: &[f64],
    w_samples: &[f64],
    tol: f64,
) -> CompatibilityReport {
    let mut report = CompatibilityReport::default();
    match law {
        ControlLaw::Single(u) => {
            for &d in d_samples {
                report.samples_checked += 1;
                let value = u.eval(d, 0.0);
                if value.abs() > tol {
                    report.violations.push(Violation {
                        clause: Clause::SingleZeroAtEquilibrium,
                        agent: None,
                        component: 1,
                        d: vec![d],
                        w: None,
                        value,
                    });
                }
            }
        }
        ControlLaw::Dual(u) => {
            for &da in d_samples {
                for &db in d_samples {
                    for &w in w_samples {
                        report.samples_checked += 1;
                        let at = |w| {
                            u.eval(&DualArgs {
                                d_first: da,
                                d_second: db,
                                e_first: 0.0,
                                e_second: 0.0,
                                w,
                            })
                        };
                        let values = at(w);
                        let h = FD_REL_STEP * w.abs().max(1.0);
                        let (plus, minus) = (at(w + h), at(w - h));
                        for k in 0..2 {
                            if values[k].abs() > tol {
                                report.violations.push(Violation {
                                    clause: Clause::DualZeroAtEquilibrium,
                                    agent: None,
                                    component: k + 1,
                                    d: vec![da, db],
                                    w: Some(w),
                                    value: values[k],
                                });
                            }
                            let slope = (plus[k] - minus[k]) / (2.0 * h);
                            if slope.abs() > tol {
                                report.violations.push(Violation {
                                    clause: Clause::AngleInsensitiveAtEquilibrium,
                                    agent: None,
                                    component: k + 1,
                                    d: vec![da, db],
                                    w: Some(w),
                                    value: slope,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    report
}

/// Runs [`check_compatibility`] for every agent at its own targets, with `w`
/// sampled across the range `[-√(d_a d_b), √(d_a d_b)]` it can take at zero error.
pub fn check_problem(problem: &FormationProblem) -> CompatibilityReport {
    let mut report = CompatibilityReport::default();
    let d = problem.squared_targets();
    for (agent, (edges, law)) in problem.agent_edges().iter().zip(problem.laws()).enumerate() {
        let Some(law) = law else { continue };
        let single = match edges.as_slice() {
            [l] => check_compatibility(law, &[d[*l]], &[], COMPATIBILITY_TOL),
            [a, b] => {
                let span = (d[*a] * d[*b]).sqrt();
                let ws: Vec<f64> = (0..=10).map(|k| span * (-1.0 + 0.2 * k as f64)).collect();
                pair_check(law, d[*a], d[*b], &ws)
            }
            _ => continue,
        };
        report.merge(single, agent);
    }
    report
}

fn pair_check(law: &ControlLaw, da: f64, db: f64, ws: &[f64]) -> CompatibilityReport {
    // Only the agent's own ordered pair matters; filter the full product.
    let full = check_compatibility(law, &[da, db], ws, COMPATIBILITY_TOL);
    let samples = ws.len();
    let violations = full
        .violations
        .into_iter()
        .filter(|v| v.d.len() == 2 && v.d[0] == da && v.d[1] == db)
        .collect();
    CompatibilityReport {
        samples_checked: samples,
        violations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub step: f64,
    pub t_max: f64,
    /// Stop once `‖e‖∞` falls below this.
    pub converge_tol: f64,
    /// Keep every `record_every`-th state (the first and last are always kept).
    pub record_every: usize,
}

impl SimParams {
    /// Step `10⁻³ / (κ L²)` with `L` the mean target length, `t_max = 10³`.
    pub fn default_for(problem: &FormationProblem, gain: f64) -> Self {
        let d = problem.targets().as_slice();
        let mean = if d.is_empty() {
            1.0
        } else {
            d.iter().sum::<f64>() / d.len() as f64
        };
        Self {
            step: 1e-3 / (gain.abs().max(f64::MIN_POSITIVE) * mean * mean),
            t_max: 1e3,
            converge_tol: 1e-10,
            record_every: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxTime,
    Degenerate,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Converged => "Converged",
            Termination::MaxTime => "MaxTime",
            Termination::Degenerate => "Degenerate",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub errors: Vec<DVector<f64>>,
    pub termination: Termination,
    pub steps_taken: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectories hold at least one sample")
    }

    pub fn final_error(&self) -> &DVector<f64> {
        self.errors.last().expect("trajectories hold at least one sample")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectories hold at least one sample")
    }

    /// CSV with header `t,x1_1,x1_2,...,xn_2,e_1,...,e_m`.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |s| s.len() / 2);
        let m = self.errors.first().map_or(0, |e| e.len());
        let mut out = String::from("t");
        for i in 1..=n {
            let _ = write!(out, ",x{i}_1,x{i}_2");
        }
        for l in 1..=m {
            let _ = write!(out, ",e_{l}");
        }
        out.push('\n');
        for ((t, x), e) in self.times.iter().zip(&self.states).zip(&self.errors) {
            out.push_str(&fmt_f64(*t));
            for v in x.iter().chain(e.iter()) {
                out.push(',');
                out.push_str(&fmt_f64(*v));
            }
            out.push('\n');
        }
        out
    }
}

fn rk4_step(problem: &FormationProblem, x: &DVector<f64>, h: f64) -> Result<DVector<f64>, DynamicsError> {
    let k1 = vector_field_x(problem, x)?;
    let k2 = vector_field_x(problem, &(x + &k1 * (0.5 * h)))?;
    let k3 = vector_field_x(problem, &(x + &k2 * (0.5 * h)))?;
    let k4 = vector_field_x(problem, &(x + &k3 * h))?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

fn is_degenerate(problem: &FormationProblem, x: &DVector<f64>) -> bool {
    edge_vectors_of_state(problem.graph(), x)
        .iter()
        .any(|z| z.norm() < DEGENERATE_DISTANCE)
}

/// Fixed-step classical Runge–Kutta integration of the agent dynamics.
///
/// Refuses to run laws that fail [`check_problem`].
pub fn simulate(
    problem: &FormationProblem,
    x0: &DVector<f64>,
    params: &SimParams,
) -> Result<Trajectory, DynamicsError> {
    problem.check_state(x0)?;
    if !(params.step > 0.0 && params.step.is_finite()) {
        return Err(DynamicsError::InvalidStep);
    }
    let compat = check_problem(problem);
    if !compat.is_compatible() {
        return Err(DynamicsError::IncompatibleLaw(compat));
    }
    let every = params.record_every.max(1);
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x0.clone()],
        errors: vec![error_vector_of_state(problem, x0)],
        termination: Termination::MaxTime,
        steps_taken: 0,
    };
    let mut x = x0.clone();
    let mut steps = 0usize;
    let max_steps = (params.t_max / params.step).round() as usize;
    loop {
        let e = error_vector_of_state(problem, &x);
        let recorded = traj.times.last() == Some(&(steps as f64 * params.step));
        let termination = if e.amax() < params.converge_tol {
            Some(Termination::Converged)
        } else if is_degenerate(problem, &x) {
            Some(Termination::Degenerate)
        } else if steps >= max_steps {
            Some(Termination::MaxTime)
        } else {
            None
        };
        if let Some(reason) = termination {
            if !recorded {
                traj.times.push(steps as f64 * params.step);
                traj.states.push(x.clone());
                traj.errors.push(e);
            }
            traj.termination = reason;
            traj.steps_taken = steps;
            return Ok(traj);
        }
        x = rk4_step(problem, &x, params.step)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::NonFiniteState);
        }
        steps += 1;
        if steps % every == 0 {
            traj.times.push(steps as f64 * params.step);
            traj.states.push(x.clone());
            traj.errors.push(error_vector_of_state(problem, &x));
        }
    }
}
