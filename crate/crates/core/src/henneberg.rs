//! Henneberg constructions of minimally rigid graphs and their realization
//! from edge lengths.
//!
//! A sequence starts from vertices 0 and 1 joined by the edge `0 -> 1`; step
//! `k` creates vertex `k + 2`. New edges always point from the new vertex to
//! the vertices it attaches to, so a new agent follows existing agents.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::framework::{Framework, Point};
use crate::graph::DirectedGraph;
use crate::rigidity;
use crate::shape_space::EdgeLengthVector;

/// Relative gap below which two placement circles count as tangent.
pub const TANGENCY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HennebergError {
    #[error("step {step}: {reason}")]
    InvalidStep { step: usize, reason: String },
    #[error("graph is not minimally rigid")]
    NotLaman,
    #[error("step {step}: the two placement circles do not intersect")]
    CirclesDisjoint { step: usize },
    #[error("step {step}: the two placement circles are tangent")]
    CirclesTangent { step: usize },
    #[error("step {step}: anchors coincide, placement is undetermined")]
    CoincidentAnchors { step: usize },
    #[error("realization needs a vertex-add-only sequence (step {step} is an edge split)")]
    NotVertexAddOnly { step: usize },
    #[error("expected {expected} placement choices, got {got}")]
    ChoiceCount { expected: usize, got: usize },
    #[error("expected {expected} edge lengths, got {got}")]
    LengthCount { expected: usize, got: usize },
    #[error("no target length for the pair ({0}, {1})")]
    MissingLength(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HennebergStep {
    /// New vertex joined to two distinct existing vertices.
    VertexAdd { anchors: (usize, usize) },
    /// Edge `edge` is removed; the new vertex joins both its endpoints and `third`.
    EdgeSplit { edge: (usize, usize), third: usize },
}

impl fmt::Display for HennebergStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            HennebergStep::VertexAdd { anchors: (i, j) } => write!(f, "va {} {}", i + 1, j + 1),
            HennebergStep::EdgeSplit {
                edge: (i, j),
                third,
            } => write!(f, "es {} {} {}", i + 1, j + 1, third + 1),
        }
    }
}

/// Validated list of Henneberg steps (0-based vertex labels).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct HennebergSequence {
    steps: Vec<HennebergStep>,
}

impl HennebergSequence {
    /// Checks the structural invariants of every step: anchors distinct and
    /// already present, split edges present at that point, and the third
    /// vertex of a split distinct from the split edge's endpoints.
    pub fn new(steps: Vec<HennebergStep>) -> Result<Self, HennebergError> {
        let mut edges: BTreeSet<(usize, usize)> = BTreeSet::from([(0, 1)]);
        for (k, step) in steps.iter().enumerate() {
            let count = k + 2;
            let bad = |reason: String| HennebergError::InvalidStep {
                step: k + 1,
                reason,
            };
            match *step {
                HennebergStep::VertexAdd { anchors: (i, j) } => {
                    if i == j {
                        return Err(bad(format!("anchors are both vertex {}", i + 1)));
                    }
                    if i >= count || j >= count {
                        return Err(bad(format!("anchor outside the {count} existing vertices")));
                    }
                    edges.insert(undirected(count, i));
                    edges.insert(undirected(count, j));
                }
                HennebergStep::EdgeSplit {
                    edge: (i, j),
                    third,
                } => {
                    if !edges.remove(&undirected(i, j)) {
                        return Err(bad(format!("edge {}-{} does not exist", i + 1, j + 1)));
                    }
                    if third == i || third == j || third >= count {
                        return Err(bad(format!("third vertex {} is not a valid choice", third + 1)));
                    }
                    for v in [i, j, third] {
                        edges.insert(undirected(count, v));
                    }
                }
            }
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[HennebergStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.steps.len() + 2
    }

    pub fn is_vertex_add_only(&self) -> bool {
        self.steps
            .iter()
            .all(|s| matches!(s, HennebergStep::VertexAdd { .. }))
    }

    /// The first `k` steps.
    pub fn prefix(&self, k: usize) -> HennebergSequence {
        HennebergSequence {
            steps: self.steps[..k].to_vec(),
        }
    }

    /// One `va i j` / `es i j k` line per step, 1-based.
    pub fn to_text(&self) -> String {
        self.steps.iter().map(|s| format!("{s}\n")).collect()
    }
}

fn undirected(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Builds the graph produced by a sequence.
pub fn apply_sequence(seq: &HennebergSequence) -> DirectedGraph {
    let mut edges = vec![(0, 1)];
    for (k, step) in seq.steps.iter().enumerate() {
        let v = k + 2;
        match *step {
            HennebergStep::VertexAdd { anchors: (i, j) } => {
                edges.push((v, i));
                edges.push((v, j));
            }
            HennebergStep::EdgeSplit {
                edge: (i, j),
                third,
            } => {
                let pos = edges
                    .iter()
                    .position(|&e| undirected(e.0, e.1) == undirected(i, j))
                    .expect("validated split edge exists");
                edges.remove(pos);
                edges.extend([(v, i), (v, j), (v, third)]);
            }
        }
    }
    DirectedGraph::new(seq.vertex_count(), edges).expect("Henneberg steps produce a simple graph")
}

/// Every prefix of the sequence yields a Laman graph.
pub fn validate(seq: &HennebergSequence) -> bool {
    (0..=seq.len()).all(|k| {
        let g = apply_sequence(&seq.prefix(k));
        rigidity::laman_check(&g).unwrap_or(false)
    })
}

/// Random sequence on `n >= 2` vertices, deterministic in `seed`.
pub fn random_sequence(n: usize, seed: u64, vertex_add_only: bool) -> HennebergSequence {
    assert!(n >= 2, "a Henneberg sequence has at least two vertices");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = vec![(0, 1)];
    let mut steps = Vec::with_capacity(n - 2);
    for count in 2..n {
        let split = !vertex_add_only && count >= 3 && rng.random_bool(0.5);
        let step = if split {
            let (i, j) = edges[rng.random_range(0..edges.len())];
            let others: Vec<usize> = (0..count).filter(|&v| v != i && v != j).collect();
            let third = others[rng.random_range(0..others.len())];
            HennebergStep::EdgeSplit {
                edge: (i, j),
                third,
            }
        } else {
            let i = rng.random_range(0..count);
            let mut j = rng.random_range(0..count - 1);
            if j >= i {
                j += 1;
            }
            HennebergStep::VertexAdd { anchors: (i, j) }
        };
        match step {
            HennebergStep::VertexAdd { anchors: (i, j) } => {
                edges.push(undirected(count, i));
                edges.push(undirected(count, j));
            }
            HennebergStep::EdgeSplit {
                edge: (i, j),
                third,
            } => {
                edges.retain(|&e| e != undirected(i, j));
                edges.extend([undirected(count, i), undirected(count, j), undirected(count, third)]);
            }
        }
        steps.push(step);
    }
    HennebergSequence::new(steps).expect("generated steps satisfy the invariants")
}

/// A vertex-add-only sequence together with the graph vertex each sequence
/// vertex stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexAddOrder {
    pub sequence: HennebergSequence,
    /// `labels[k]` is the graph vertex created as sequence vertex `k`.
    pub labels: Vec<usize>,
}

impl VertexAddOrder {
    /// Graph vertices in the order they are removed when peeling degree-2
    /// vertices (the reverse of construction order).
    pub fn removal_order(&self) -> Vec<usize> {
        self.labels[2..].iter().rev().copied().collect()
    }
}

/// Peels degree-2 vertices off a Laman graph until a single edge is left.
///
/// Ties prefer vertices of smallest degree in the original graph, then the
/// lowest index. Returns `Ok(None)` when some intermediate graph has no
/// degree-2 vertex (the graph then needs an edge split).
pub fn find_vertex_add_order(g: &DirectedGraph) -> Result<Option<VertexAddOrder>, HennebergError> {
    if g.n() < 2 || !rigidity::laman_check(g).unwrap_or(false) {
        return Err(HennebergError::NotLaman);
    }
    let view = g.undirected();
    let original = g.degrees();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); g.n()];
    for &(a, b) in &view.edges {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let mut alive: BTreeSet<usize> = (0..g.n()).collect();
    let mut removed: Vec<(usize, usize, usize)> = Vec::new();
    while alive.len() > 2 {
        let Some(&v) = alive
            .iter()
            .filter(|&&v| adj[v].len() == 2)
            .min_by_key(|&&v| (original[v], v))
        else {
            return Ok(None);
        };
        let mut it = adj[v].iter().copied();
        let (a, b) = (it.next().unwrap(), it.next().unwrap());
        removed.push((v, a, b));
        for w in [a, b] {
            adj[w].remove(&v);
        }
        adj[v].clear();
        alive.remove(&v);
    }
    let mut labels: Vec<usize> = alive.into_iter().collect();
    let mut index = vec![usize::MAX; g.n()];
    index[labels[0]] = 0;
    index[labels[1]] = 1;
    let mut steps = Vec::with_capacity(removed.len());
    for &(v, a, b) in removed.iter().rev() {
        index[v] = labels.len();
        labels.push(v);
        steps.push(HennebergStep::VertexAdd {
            anchors: (index[a], index[b]),
        });
    }
    Ok(Some(VertexAddOrder {
        sequence: HennebergSequence::new(steps)?,
        labels,
    }))
}

/// Realizes the graph of a vertex-add-only sequence with lengths `d` given in
/// the edge order of [`apply_sequence`].
///
/// The base edge runs from the origin along the positive x-axis. A `false`
/// choice places the new vertex on the side of positive signed area with
/// respect to the directed anchor segment; `true` places it on the other side.
pub fn realize(
    seq: &HennebergSequence,
    d: &EdgeLengthVector,
    choices: &[bool],
) -> Result<Framework, HennebergError> {
    let g = apply_sequence(seq);
    if d.len() != g.m() {
        return Err(HennebergError::LengthCount {
            expected: g.m(),
            got: d.len(),
        });
    }
    let lengths = length_table(&g, d, |v| v);
    let positions = place(seq, &lengths, choices)?;
    Ok(Framework::new(g, positions).expect("placement yields finite points"))
}

/// Realizes an arbitrary vertex-add-constructible graph `g` (lengths in `g`'s
/// edge order) along a vertex-add order of it.
pub fn realize_graph(
    g: &DirectedGraph,
    order: &VertexAddOrder,
    d: &EdgeLengthVector,
    choices: &[bool],
) -> Result<Framework, HennebergError> {
    if d.len() != g.m() {
        return Err(HennebergError::LengthCount {
            expected: g.m(),
            got: d.len(),
        });
    }
    let mut seq_index = vec![usize::MAX; g.n()];
    for (k, &v) in order.labels.iter().enumerate() {
        seq_index[v] = k;
    }
    let lengths = length_table(g, d, |v| seq_index[v]);
    let seq_positions = place(&order.sequence, &lengths, choices)?;
    let mut positions = vec![Point::zeros(); g.n()];
    for (k, &v) in order.labels.iter().enumerate() {
        positions[v] = seq_positions[k];
    }
    Ok(Framework::new(g.clone(), positions).expect("placement yields finite points"))
}

fn length_table(
    g: &DirectedGraph,
    d: &EdgeLengthVector,
    relabel: impl Fn(usize) -> usize,
) -> BTreeMap<(usize, usize), f64> {
    let mut table = BTreeMap::new();
    for (l, &(s, t)) in g.edges().iter().enumerate() {
        table.entry(undirected(relabel(s), relabel(t))).or_insert(d[l]);
    }
    table
}

fn place(
    seq: &HennebergSequence,
    lengths: &BTreeMap<(usize, usize), f64>,
    choices: &[bool],
) -> Result<Vec<Point>, HennebergError> {
    if choices.len() != seq.len() {
        return Err(HennebergError::ChoiceCount {
            expected: seq.len(),
            got: choices.len(),
        });
    }
    let len = |a: usize, b: usize| {
        lengths
            .get(&undirected(a, b))
            .copied()
            .ok_or(HennebergError::MissingLength(a + 1, b + 1))
    };
    let mut pts = vec![Point::zeros(), Point::new(len(0, 1)?, 0.0)];
    for (k, step) in seq.steps.iter().enumerate() {
        let HennebergStep::VertexAdd { anchors: (i, j) } = *step else {
            return Err(HennebergError::NotVertexAddOnly { step: k + 1 });
        };
        let v = k + 2;
        let p = circle_intersection(pts[i], len(v, i)?, pts[j], len(v, j)?, choices[k])
            .map_err(|e| e.at_step(k + 1))?;
        pts.push(p);
    }
    Ok(pts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CircleFailure {
    Disjoint,
    Tangent,
    Concentric,
}

impl CircleFailure {
    fn at_step(self, step: usize) -> HennebergError {
        match self {
            CircleFailure::Disjoint => HennebergError::CirclesDisjoint { step },
            CircleFailure::Tangent => HennebergError::CirclesTangent { step },
            CircleFailure::Concentric => HennebergError::CoincidentAnchors { step },
        }
    }
}

/// Intersection of the circles `|x − p| = rp` and `|x − q| = rq`; `flip`
/// selects the side of negative signed area relative to `p -> q`.
fn circle_intersection(p: Point, rp: f64, q: Point, rq: f64, flip: bool) -> Result<Point, CircleFailure> {
    let delta = q - p;
    let dist = delta.norm();
    let tol = TANGENCY_TOL * (rp + rq);
    if dist <= tol {
        return Err(CircleFailure::Concentric);
    }
    let outer_gap = dist - (rp + rq);
    let inner_gap = (rp - rq).abs() - dist;
    if outer_gap > tol || inner_gap > tol {
        return Err(CircleFailure::Disjoint);
    }
    if outer_gap.abs() <= tol || inner_gap.abs() <= tol {
        return Err(CircleFailure::Tangent);
    }
    let u = delta / dist;
    let along = (rp * rp - rq * rq + dist * dist) / (2.0 * dist);
    let height = (rp * rp - along * along).max(0.0).sqrt();
    let normal = Point::new(-u.y, u.x);
    let sign = if flip { -1.0 } else { 1.0 };
    Ok(p + along * u + sign * height * normal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::shape_space::{are_congruent, mirror};

    fn va(i: usize, j: usize) -> HennebergStep {
        HennebergStep::VertexAdd {
            anchors: (i - 1, j - 1),
        }
    }

    fn lengths(v: &[f64]) -> EdgeLengthVector {
        EdgeLengthVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn empty_sequence_is_a_segment() {
        let g = apply_sequence(&HennebergSequence::default());
        assert_eq!(g.edges_one_based(), vec![(1, 2)]);
    }

    #[test]
    fn two_vertex_adds_on_a_segment_give_the_two_cycles() {
        // Base (x1, x3); then x2 and x4 both attach to x1 and x3.
        let seq = HennebergSequence::new(vec![va(1, 2), va(1, 2)]).unwrap();
        let g = apply_sequence(&seq);
        assert!(validate(&seq));
        assert_eq!(g.m(), 5);
        // Relabel sequence vertices (x1, x3, x2, x4) to graph vertices.
        let label = [0, 2, 1, 3];
        let mut built: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .map(|&(s, t)| undirected(label[s], label[t]))
            .collect();
        let mut target = fixtures::two_cycles().undirected().edges;
        built.sort();
        target.sort();
        assert_eq!(built, target);
    }

    #[test]
    fn edge_split_on_triangle() {
        let seq = HennebergSequence::new(vec![
            va(1, 2),
            HennebergStep::EdgeSplit {
                edge: (0, 1),
                third: 2,
            },
        ])
        .unwrap();
        let g = apply_sequence(&seq);
        assert_eq!(g.n(), 4);
        assert_eq!(g.m(), 5);
        assert_eq!(g.degrees()[3], 3);
        assert!(rigidity::laman_check(&g).unwrap());
        assert!(validate(&seq));
    }

    #[test]
    fn invalid_steps_are_rejected() {
        assert!(matches!(
            HennebergSequence::new(vec![va(1, 1)]),
            Err(HennebergError::InvalidStep { step: 1, .. })
        ));
        assert!(matches!(
            HennebergSequence::new(vec![va(1, 3)]),
            Err(HennebergError::InvalidStep { step: 1, .. })
        ));
        let split_missing = HennebergStep::EdgeSplit {
            edge: (0, 2),
            third: 1,
        };
        assert!(matches!(
            HennebergSequence::new(vec![split_missing]),
            Err(HennebergError::InvalidStep { step: 1, .. })
        ));
        let split_bad_third = HennebergStep::EdgeSplit {
            edge: (0, 1),
            third: 1,
        };
        assert!(matches!(
            HennebergSequence::new(vec![va(1, 2), split_bad_third]),
            Err(HennebergError::InvalidStep { step: 2, .. })
        ));
    }

    #[test]
    fn random_sequences_small_cases() {
        let tri = apply_sequence(&random_sequence(3, 42, true));
        assert_eq!(tri.undirected().edges, vec![(0, 1), (0, 2), (1, 2)]);
        for seed in 0..20 {
            let g = apply_sequence(&random_sequence(4, seed, true));
            let mut deg = g.degrees();
            deg.sort();
            assert_eq!(deg, vec![2, 2, 3, 3]);
            assert!(rigidity::laman_check(&g).unwrap());
        }
        assert!(validate(&random_sequence(6, 1, false)));
        assert!(validate(&random_sequence(6, 2, false)));
        assert_eq!(random_sequence(7, 9, false), random_sequence(7, 9, false));
    }

    #[test]
    fn vertex_add_order_of_fixtures() {
        let order = find_vertex_add_order(&fixtures::two_cycles()).unwrap().unwrap();
        assert_eq!(order.removal_order(), vec![1, 3]);
        assert_eq!(order.labels[..2], [0, 2]);
        let tri = find_vertex_add_order(&fixtures::triangle()).unwrap().unwrap();
        assert_eq!(tri.sequence.len(), 1);
        assert_eq!(
            find_vertex_add_order(&fixtures::k4()),
            Err(HennebergError::NotLaman)
        );
    }

    #[test]
    fn edge_split_only_graph_has_no_vertex_add_order() {
        // Triangular prism: Laman, every vertex of degree 3.
        let g = DirectedGraph::from_one_based(
            6,
            &[(1, 2), (2, 3), (3, 1), (4, 5), (5, 6), (6, 4), (1, 4), (2, 5), (3, 6)],
        )
        .unwrap();
        assert!(rigidity::laman_check(&g).unwrap());
        assert_eq!(find_vertex_add_order(&g), Ok(None));
    }

    #[test]
    fn realize_triangle_both_sides() {
        let seq = HennebergSequence::new(vec![va(1, 2)]).unwrap();
        // apply_sequence edge order: 1->2, 3->1, 3->2.
        let d = lengths(&[5.0, 3.0, 4.0]);
        let left = realize(&seq, &d, &[false]).unwrap();
        let right = realize(&seq, &d, &[true]).unwrap();
        assert!(left.position(2).y > 0.0);
        assert!(right.position(2).y < 0.0);
        for f in [&left, &right] {
            for (l, got) in f.edge_lengths().iter().enumerate() {
                assert!((got - d[l]).abs() <= 1e-10 * d[l]);
            }
        }
        assert!(!are_congruent(&left, &right, false, 1e-6).unwrap());
        assert!(are_congruent(&left, &right, true, 1e-6).unwrap());
    }

    #[test]
    fn realize_reports_circle_failures() {
        let seq = HennebergSequence::new(vec![va(1, 2)]).unwrap();
        assert_eq!(
            realize(&seq, &lengths(&[5.0, 1.0, 1.0]), &[false]),
            Err(HennebergError::CirclesDisjoint { step: 1 })
        );
        assert_eq!(
            realize(&seq, &lengths(&[5.0, 2.0, 3.0]), &[false]),
            Err(HennebergError::CirclesTangent { step: 1 })
        );
        assert_eq!(
            realize(&seq, &lengths(&[5.0, 2.0]), &[false]),
            Err(HennebergError::LengthCount { expected: 3, got: 2 })
        );
        assert_eq!(
            realize(&seq, &lengths(&[5.0, 3.0, 4.0]), &[]),
            Err(HennebergError::ChoiceCount { expected: 1, got: 0 })
        );
    }

    #[test]
    fn flipping_every_choice_mirrors() {
        let g = fixtures::triangle_strip(6);
        let order = find_vertex_add_order(&g).unwrap().unwrap();
        let d = EdgeLengthVector::of(&rigidity::random_placement(&g, 4, 0));
        let choices = [false, true, true, false];
        let flipped: Vec<bool> = choices.iter().map(|c| !c).collect();
        let a = realize_graph(&g, &order, &d, &choices).unwrap();
        let b = realize_graph(&g, &order, &d, &flipped).unwrap();
        assert!(a.max_vertex_distance(&mirror(&b)) < 1e-12);
        assert!(are_congruent(&a, &b, true, 1e-6).unwrap());
    }
}
