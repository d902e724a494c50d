//! Rigidity analysis and decentralized formation control in the plane.
//!
//! Directed graphs describe who observes whom (`i -> j`: agent `i` measures
//! `x_j − x_i`). On top of them the crate provides rigidity tests, the
//! shape space of frameworks with given edge lengths, Henneberg
//! constructions, formation dynamics and their linearization.

pub mod assignment;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod fixtures;
pub mod framework;
pub mod graph;
pub mod henneberg;
pub mod io;
pub mod linearization;
pub mod numfmt;
pub mod rigidity;
pub mod shape_space;

pub use dynamics::{FormationProblem, SimParams, Termination, Trajectory};
pub use framework::{Framework, Point};
pub use graph::DirectedGraph;
pub use henneberg::{HennebergSequence, HennebergStep};
pub use shape_space::EdgeLengthVector;
