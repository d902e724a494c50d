//! Directed information-flow graphs and their adjacency operators.
//!
//! Vertices are `0..n` internally; every file format and report uses 1-based
//! labels. The order of the edge list is part of a graph's identity: it fixes
//! the row order of the edge-adjacency and mixed-adjacency matrices and of
//! every edge-indexed vector downstream.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, Scalar};
use num_traits::Zero;
use thiserror::Error;

/// Exact integer matrix used for the graph operators.
pub type IntMatrix = DMatrix<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("edge {edge} ({src} -> {tgt}) references a vertex outside 1..={n}")]
    VertexOutOfRange {
        edge: usize,
        src: usize,
        tgt: usize,
        n: usize,
    },
    #[error("edge {edge} is a self-loop at vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },
    #[error("edge {edge} duplicates the directed edge {src} -> {tgt}")]
    DuplicateEdge { edge: usize, src: usize, tgt: usize },
}

/// A directed graph with an ordered edge list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DirectedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl DirectedGraph {
    /// Builds a graph from 0-based `(source, target)` pairs.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut seen = BTreeSet::new();
        for (l, &(s, t)) in edges.iter().enumerate() {
            if s >= n || t >= n {
                return Err(GraphError::VertexOutOfRange {
                    edge: l + 1,
                    src: s + 1,
                    tgt: t + 1,
                    n,
                });
            }
            if s == t {
                return Err(GraphError::SelfLoop {
                    edge: l + 1,
                    vertex: s + 1,
                });
            }
            if !seen.insert((s, t)) {
                return Err(GraphError::DuplicateEdge {
                    edge: l + 1,
                    src: s + 1,
                    tgt: t + 1,
                });
            }
        }
        Ok(Self { n, edges })
    }

    /// Builds a graph from 1-based `(source, target)` pairs, as written in files.
    pub fn from_one_based(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut zero_based = Vec::with_capacity(edges.len());
        for (l, &(s, t)) in edges.iter().enumerate() {
            if s == 0 || t == 0 {
                return Err(GraphError::VertexOutOfRange {
                    edge: l + 1,
                    src: s,
                    tgt: t,
                    n,
                });
            }
            zero_based.push((s - 1, t - 1));
        }
        Self::new(n, zero_based)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, l: usize) -> (usize, usize) {
        self.edges[l]
    }

    pub fn outvalence(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(s, _)| s == v).count()
    }

    pub fn invalence(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(_, t)| t == v).count()
    }

    /// Indices of the edges leaving `v`, in edge order.
    pub fn out_edges(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(s, _))| s == v)
            .map(|(l, _)| l)
            .collect()
    }

    /// Same vertex set with edge `l` removed; the remaining edges keep their order.
    pub fn without_edge(&self, l: usize) -> Self {
        let mut edges = self.edges.clone();
        edges.remove(l);
        Self { n: self.n, edges }
    }

    /// Underlying simple undirected graph as sorted `(min, max)` pairs.
    ///
    /// Antiparallel pairs `i -> j`, `j -> i` collapse to one undirected edge;
    /// the collapsed pairs are returned alongside so callers can report them.
    pub fn undirected(&self) -> UndirectedView {
        let mut set = BTreeSet::new();
        let mut collapsed = Vec::new();
        for &(s, t) in &self.edges {
            let key = (s.min(t), s.max(t));
            if !set.insert(key) {
                collapsed.push(key);
            }
        }
        UndirectedView {
            n: self.n,
            edges: set.into_iter().collect(),
            collapsed,
        }
    }

    /// Undirected degree of every vertex in the collapsed simple graph.
    pub fn degrees(&self) -> Vec<usize> {
        let view = self.undirected();
        let mut deg = vec![0; self.n];
        for &(a, b) in &view.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    /// `A_d`: entry `(i, j)` is −1 iff `i -> j` is an edge.
    pub fn adjacency_matrix(&self) -> IntMatrix {
        let mut a = IntMatrix::zeros(self.n, self.n);
        for &(s, t) in &self.edges {
            a[(s, t)] = -1;
        }
        a
    }

    /// `A_e` (m×m): −1 where edges share a source (so the diagonal is −1),
    /// +1 where edge `i` ends at the source of edge `j`, 0 otherwise.
    pub fn edge_adjacency_matrix(&self) -> IntMatrix {
        let m = self.m();
        let mut a = IntMatrix::zeros(m, m);
        for (i, &(si, ti)) in self.edges.iter().enumerate() {
            for (j, &(sj, _)) in self.edges.iter().enumerate() {
                if si == sj {
                    a[(i, j)] = -1;
                } else if ti == sj {
                    a[(i, j)] = 1;
                }
            }
        }
        a
    }

    /// `A_m` (m×n, rows are edges): −1 at the source, +1 at the target.
    pub fn mixed_adjacency_matrix(&self) -> IntMatrix {
        let mut a = IntMatrix::zeros(self.m(), self.n);
        for (l, &(s, t)) in self.edges.iter().enumerate() {
            a[(l, s)] = -1;
            a[(l, t)] = 1;
        }
        a
    }

    /// Per-vertex roles plus feasibility warnings for agents that follow
    /// more than two others.
    pub fn classify_agents(&self) -> AgentClassification {
        let roles: Vec<AgentRole> = (0..self.n)
            .map(|v| AgentRole::from_valences(self.outvalence(v), self.invalence(v)))
            .collect();
        let is_leaderless = !roles.contains(&AgentRole::Leader);
        let mut warnings = Vec::new();
        for v in 0..self.n {
            let out = self.outvalence(v);
            if out <= 2 {
                continue;
            }
            let followed: Vec<usize> = self.edges.iter().filter(|e| e.0 == v).map(|e| e.1).collect();
            let onto_minimal = self
                .induced_subgraph(&followed)
                .map(|(sub, _)| crate::rigidity::pebble_game_laman(&sub))
                .unwrap_or(false);
            warnings.push(if onto_minimal {
                FeasibilityWarning::OutvalenceAboveTwoOntoMinimallyRigid { vertex: v, outvalence: out }
            } else {
                FeasibilityWarning::OutvalenceAboveTwo { vertex: v, outvalence: out }
            });
        }
        AgentClassification {
            roles,
            is_leaderless,
            warnings,
        }
    }

    /// Subgraph induced on `vertices` (relabelled `0..k` in the given order),
    /// together with the original index of every kept edge.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Option<(DirectedGraph, Vec<usize>)> {
        if vertices.is_empty() {
            return None;
        }
        let mut label = vec![usize::MAX; self.n];
        for (k, &v) in vertices.iter().enumerate() {
            label[v] = k;
        }
        let mut edges = Vec::new();
        let mut kept = Vec::new();
        for (l, &(s, t)) in self.edges.iter().enumerate() {
            if label[s] != usize::MAX && label[t] != usize::MAX {
                edges.push((label[s], label[t]));
                kept.push(l);
            }
        }
        DirectedGraph::new(vertices.len(), edges).ok().map(|g| (g, kept))
    }

    /// Edge list as 1-based pairs.
    pub fn edges_one_based(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|&(s, t)| (s + 1, t + 1)).collect()
    }
}

impl fmt::Display for DirectedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DirectedGraph(n={}, edges=[", self.n)?;
        for (k, (s, t)) in self.edges_one_based().into_iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}->{t}")?;
        }
        write!(f, "])")
    }
}

/// The simple undirected graph underlying a [`DirectedGraph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedView {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub collapsed: Vec<(usize, usize)>,
}

impl UndirectedView {
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentRole {
    /// Follows nobody.
    Leader,
    /// Follows and is followed.
    Coleader,
    /// Follows, but nobody follows it.
    Follower,
}

impl AgentRole {
    fn from_valences(out: usize, inv: usize) -> Self {
        match (out, inv) {
            (0, _) => AgentRole::Leader,
            (_, 0) => AgentRole::Follower,
            _ => AgentRole::Coleader,
        }
    }
}

impl fmt::Display for AgentRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AgentRole::Leader => "leader",
            AgentRole::Coleader => "coleader",
            AgentRole::Follower => "follower",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityWarning {
    OutvalenceAboveTwo { vertex: usize, outvalence: usize },
    /// The agent follows more than two agents that already form a minimally
    /// rigid subgraph; generically it cannot satisfy all its constraints.
    OutvalenceAboveTwoOntoMinimallyRigid { vertex: usize, outvalence: usize },
}

impl fmt::Display for FeasibilityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeasibilityWarning::OutvalenceAboveTwo { vertex, outvalence } => {
                write!(f, "agent {} has outvalence {} > 2", vertex + 1, outvalence)
            }
            FeasibilityWarning::OutvalenceAboveTwoOntoMinimallyRigid { vertex, outvalence } => write!(
                f,
                "agent {} has outvalence {} > 2 onto minimally rigid subgraph",
                vertex + 1,
                outvalence
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentClassification {
    pub roles: Vec<AgentRole>,
    pub is_leaderless: bool,
    pub warnings: Vec<FeasibilityWarning>,
}

/// `M ⊗ I₂`: every scalar `a` becomes the block `a·I₂`.
pub fn kron2<T>(m: &DMatrix<T>) -> DMatrix<T>
where
    T: Scalar + Copy + Zero,
{
    let mut out = DMatrix::from_element(2 * m.nrows(), 2 * m.ncols(), T::zero());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let a = m[(i, j)];
            out[(2 * i, 2 * j)] = a;
            out[(2 * i + 1, 2 * j + 1)] = a;
        }
    }
    out
}

/// Converts an integer operator to floating point for geometric products.
pub fn to_f64(m: &IntMatrix) -> DMatrix<f64> {
    m.map(|a| a as f64)
}
