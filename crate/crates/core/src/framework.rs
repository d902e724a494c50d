//! Planar embeddings of a directed graph.

use nalgebra::{DVector, Vector2};
use thiserror::Error;

use crate::graph::DirectedGraph;

pub type Point = Vector2<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameworkError {
    #[error("framework has {got} positions but the graph has {expected} vertices")]
    WrongLength { expected: usize, got: usize },
    #[error("position of vertex {vertex} is not finite")]
    NonFinite { vertex: usize },
    #[error("state vector has length {got}, expected {expected}")]
    WrongStateLength { expected: usize, got: usize },
}

/// A graph together with one planar point per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Framework {
    graph: DirectedGraph,
    positions: Vec<Point>,
}

impl Framework {
    pub fn new(graph: DirectedGraph, positions: Vec<Point>) -> Result<Self, FrameworkError> {
        if positions.len() != graph.n() {
            return Err(FrameworkError::WrongLength {
                expected: graph.n(),
                got: positions.len(),
            });
        }
        if let Some(v) = positions.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(FrameworkError::NonFinite { vertex: v + 1 });
        }
        Ok(Self { graph, positions })
    }

    pub fn from_xy(graph: DirectedGraph, xy: &[(f64, f64)]) -> Result<Self, FrameworkError> {
        Self::new(graph, xy.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    /// Interprets a stacked `[x1, y1, x2, y2, ...]` vector.
    pub fn from_state(graph: DirectedGraph, state: &DVector<f64>) -> Result<Self, FrameworkError> {
        if state.len() != 2 * graph.n() {
            return Err(FrameworkError::WrongStateLength {
                expected: 2 * graph.n(),
                got: state.len(),
            });
        }
        let positions = (0..graph.n())
            .map(|i| Point::new(state[2 * i], state[2 * i + 1]))
            .collect();
        Self::new(graph, positions)
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> Point {
        self.positions[v]
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn state(&self) -> DVector<f64> {
        DVector::from_iterator(
            2 * self.n(),
            self.positions.iter().flat_map(|p| [p.x, p.y]),
        )
    }

    /// `z_l = x_target − x_source` for every edge, in edge order.
    pub fn edge_vectors(&self) -> Vec<Point> {
        self.graph
            .edges()
            .iter()
            .map(|&(s, t)| self.positions[t] - self.positions[s])
            .collect()
    }

    /// Euclidean edge lengths in edge order.
    pub fn edge_lengths(&self) -> Vec<f64> {
        self.edge_vectors().iter().map(|z| z.norm()).collect()
    }

    /// Largest pairwise distance between vertices.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.positions.iter().enumerate() {
            for q in &self.positions[i + 1..] {
                d = d.max((p - q).norm());
            }
        }
        d
    }

    /// All points equal up to `1e-12` relative to the coordinate magnitude.
    pub fn is_totally_coincident(&self) -> bool {
        let scale = self
            .positions
            .iter()
            .map(|p| p.x.abs().max(p.y.abs()))
            .fold(1.0_f64, f64::max);
        self.diameter() <= 1e-12 * scale
    }

    pub fn with_positions(&self, positions: Vec<Point>) -> Self {
        assert_eq!(positions.len(), self.n());
        Self {
            graph: self.graph.clone(),
            positions,
        }
    }

    /// Maximum distance between corresponding vertices of two frameworks.
    pub fn max_vertex_distance(&self, other: &Framework) -> f64 {
        self.positions
            .iter()
            .zip(&other.positions)
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max)
    }
}
