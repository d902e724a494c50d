//! Distance function, rigidity matrix and the combinatorial rigidity tests.
//!
//! Rank decisions use singular values with a relative cutoff
//! (`σ > tol · σ_max`). Generic properties are estimated by sampling
//! placements uniformly in `[0, 1)²`; each draw has its own ChaCha stream so
//! results do not depend on evaluation order.

use std::fmt::{self, Write as _};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::framework::{Framework, Point};
use crate::graph::{DirectedGraph, UndirectedView};
use crate::numfmt::fmt_f64;

/// Relative singular-value cutoff for rank decisions.
pub const RANK_TOL: f64 = 1e-9;
/// Number of random placements used to estimate generic rank.
pub const GENERIC_SAMPLES: usize = 5;
/// Largest vertex count accepted by the exhaustive connectivity search.
pub const MAX_CONNECTIVITY_N: usize = 12;
/// Largest vertex count for which the exhaustive Laman oracle is run.
pub const MAX_EXHAUSTIVE_LAMAN_N: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RigidityError {
    #[error("framework is totally coincident")]
    DegenerateFramework,
    #[error("operation needs at least {min} vertices, graph has {n}")]
    TooSmall { n: usize, min: usize },
    #[error("vertex connectivity is limited to n <= {max}, graph has {n}")]
    TooLarge { n: usize, max: usize },
    #[error("pebble game ({pebble}) and exhaustive subgraph count ({exhaustive}) disagree")]
    Inconsistency { pebble: bool, exhaustive: bool },
}

/// `½‖x_i − x_j‖²` for every edge, in edge order.
pub fn distance_function(f: &Framework) -> DVector<f64> {
    DVector::from_iterator(
        f.graph().m(),
        f.edge_vectors().iter().map(|z| 0.5 * z.norm_squared()),
    )
}

/// Jacobian of the distance function restricted to the edges (m×2n).
///
/// Row `l` for edge `(i, j)` carries `x_i − x_j` in vertex `i`'s column pair
/// and `x_j − x_i` in vertex `j`'s. This is the gradient convention; it equals
/// `Z · (A_m ⊗ I₂)` exactly, with `Z` the block-diagonal matrix of edge
/// vectors. Flipping the sign of a row does not change the rank.
pub fn rigidity_matrix(f: &Framework) -> DMatrix<f64> {
    let g = f.graph();
    let mut r = DMatrix::zeros(g.m(), 2 * g.n());
    for (l, &(i, j)) in g.edges().iter().enumerate() {
        let d = f.position(i) - f.position(j);
        r[(l, 2 * i)] = d.x;
        r[(l, 2 * i + 1)] = d.y;
        r[(l, 2 * j)] = -d.x;
        r[(l, 2 * j + 1)] = -d.y;
    }
    r
}

/// Singular values in descending order (empty for a matrix with no rows or columns).
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values above `tol · σ_max`.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    rank_from_singular_values(&singular_values(m), tol)
}

pub fn rank_from_singular_values(sv: &[f64], tol: f64) -> usize {
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// `2n − 3`, the rank of an infinitesimally rigid framework (0 below two vertices).
pub fn rigid_rank(n: usize) -> usize {
    (2 * n).saturating_sub(3)
}

pub fn is_infinitesimally_rigid(f: &Framework, tol: f64) -> Result<bool, RigidityError> {
    if f.n() < 2 {
        return Err(RigidityError::TooSmall { n: f.n(), min: 2 });
    }
    if f.is_totally_coincident() {
        return Err(RigidityError::DegenerateFramework);
    }
    Ok(numerical_rank(&rigidity_matrix(f), tol) == rigid_rank(f.n()))
}

/// Uniform random placement in `[0, 1)²` drawn from stream `draw` of `seed`.
pub fn random_placement(g: &DirectedGraph, seed: u64, draw: u64) -> Framework {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    let positions = (0..g.n())
        .map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    Framework::new(g.clone(), positions).expect("random placement matches the graph")
}

/// Maximum rigidity-matrix rank over `samples` random placements.
pub fn generic_rank(g: &DirectedGraph, samples: usize, seed: u64) -> usize {
    generic_rank_with_witness(g, samples, seed).0
}

fn generic_rank_with_witness(g: &DirectedGraph, samples: usize, seed: u64) -> (usize, Vec<f64>) {
    let mut best = (0, Vec::new());
    if g.m() == 0 {
        return best;
    }
    for draw in 0..samples.max(1) as u64 {
        let f = random_placement(g, seed, draw);
        let sv = singular_values(&rigidity_matrix(&f));
        let rank = rank_from_singular_values(&sv, RANK_TOL);
        if rank > best.0 || best.1.is_empty() {
            best = (rank, sv);
        }
    }
    best
}

/// (2,3)-pebble game on the underlying simple graph.
///
/// Returns the number of independent edges, which equals the generic rank of
/// the rigidity matrix.
pub fn pebble_game_rank(g: &DirectedGraph) -> usize {
    PebbleGame::run(&g.undirected())
}

/// Laman test by pebble game: `m = 2n − 3` and every edge independent.
pub fn pebble_game_laman(g: &DirectedGraph) -> bool {
    let view = g.undirected();
    if g.n() < 2 || view.m() != rigid_rank(g.n()) {
        return false;
    }
    PebbleGame::run(&view) == view.m()
}

/// Laman test by enumerating every vertex subset. Exponential in `n`.
pub fn exhaustive_laman(g: &DirectedGraph) -> bool {
    let view = g.undirected();
    let n = g.n();
    if n < 2 || view.m() != rigid_rank(n) {
        return false;
    }
    assert!(n < 64, "exhaustive Laman check needs n < 64");
    let full: u64 = if n == 63 { u64::MAX >> 1 } else { (1u64 << n) - 1 };
    (1..=full).all(|mask| {
        let k = mask.count_ones() as usize;
        if k < 2 {
            return true;
        }
        let inside = view
            .edges
            .iter()
            .filter(|&&(a, b)| mask >> a & 1 == 1 && mask >> b & 1 == 1)
            .count();
        inside <= 2 * k - 3
    })
}

/// Laman condition on the underlying undirected graph.
///
/// The pebble game decides; for `n <= 8` the exhaustive subgraph count is run
/// as well and any disagreement is an error.
pub fn laman_check(g: &DirectedGraph) -> Result<bool, RigidityError> {
    if g.n() < 2 {
        return Err(RigidityError::TooSmall { n: g.n(), min: 2 });
    }
    let pebble = pebble_game_laman(g);
    if g.n() <= MAX_EXHAUSTIVE_LAMAN_N {
        let exhaustive = exhaustive_laman(g);
        if exhaustive != pebble {
            return Err(RigidityError::Inconsistency { pebble, exhaustive });
        }
    }
    Ok(pebble)
}

/// Generically rigid after deleting any single (undirected) edge.
pub fn is_redundantly_rigid(g: &DirectedGraph, seed: u64) -> bool {
    if g.n() < 3 {
        return false;
    }
    let view = g.undirected();
    let target = rigid_rank(g.n());
    (0..view.m()).all(|skip| {
        let edges: Vec<(usize, usize)> = view
            .edges
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != skip)
            .map(|(_, &e)| e)
            .collect();
        let reduced = DirectedGraph::new(g.n(), edges).expect("subgraph of a valid graph");
        generic_rank(&reduced, GENERIC_SAMPLES, seed) == target
    })
}

/// Largest `k` such that removing any `k − 1` vertices leaves a connected graph
/// with at least two vertices. Disconnected graphs have connectivity 0.
pub fn vertex_connectivity(g: &DirectedGraph) -> Result<usize, RigidityError> {
    let n = g.n();
    if n < 2 {
        return Err(RigidityError::TooSmall { n, min: 2 });
    }
    if n > MAX_CONNECTIVITY_N {
        return Err(RigidityError::TooLarge {
            n,
            max: MAX_CONNECTIVITY_N,
        });
    }
    let adj = g.undirected().neighbours();
    let mut k = 0;
    for removed in 0..=n - 2 {
        let ok = (0u32..1 << n)
            .filter(|mask| mask.count_ones() as usize == removed)
            .all(|mask| connected_without(&adj, mask));
        if !ok {
            break;
        }
        k = removed + 1;
    }
    Ok(k)
}

fn connected_without(adj: &[Vec<usize>], removed: u32) -> bool {
    let n = adj.len();
    let Some(start) = (0..n).find(|&v| removed >> v & 1 == 0) else {
        return true;
    };
    let mut seen = removed | 1 << start;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if seen >> w & 1 == 0 {
                seen |= 1 << w;
                stack.push(w);
            }
        }
    }
    seen.count_ones() as usize == n
}

/// Redundant rigidity plus 3-connectivity (sufficient and necessary for
/// generic global rigidity in the plane when `n >= 4`). Complete graphs on
/// two or three vertices are handled directly.
pub fn is_generically_globally_rigid(g: &DirectedGraph, seed: u64) -> Result<bool, RigidityError> {
    let n = g.n();
    match n {
        0 | 1 => Ok(true),
        2 | 3 => Ok(g.undirected().m() == n * (n - 1) / 2),
        _ => Ok(is_redundantly_rigid(g, seed) && vertex_connectivity(g)? >= 3),
    }
}

/// The `K` of `A_e = A_m K` for a leaderless graph: column `j` is the unit
/// vector of edge `j`'s source. Returns `None` when some vertex has no
/// outgoing edge (then `K` cannot reach rank `n`).
pub fn source_selector(g: &DirectedGraph) -> Option<DMatrix<i64>> {
    if (0..g.n()).any(|v| g.outvalence(v) == 0) {
        return None;
    }
    let mut k = DMatrix::zeros(g.n(), g.m());
    for (j, &(s, _)) in g.edges().iter().enumerate() {
        k[(s, j)] = 1;
    }
    Some(k)
}

/// Every rigidity property of a graph, evaluated at generic placements.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidityReport {
    pub n: usize,
    pub m: usize,
    pub collapsed_antiparallel: usize,
    pub rank: usize,
    pub is_infinitesimally_rigid: bool,
    pub is_laman: bool,
    pub is_minimally_rigid: bool,
    pub is_redundantly_rigid: bool,
    pub vertex_connectivity: usize,
    pub is_generically_globally_rigid: bool,
    pub singular_values: Vec<f64>,
}

pub fn analyze(g: &DirectedGraph, seed: u64) -> Result<RigidityReport, RigidityError> {
    let n = g.n();
    if n < 2 {
        return Err(RigidityError::TooSmall { n, min: 2 });
    }
    let (rank, singular_values) = generic_rank_with_witness(g, GENERIC_SAMPLES, seed);
    let vertex_connectivity = vertex_connectivity(g)?;
    let is_laman = laman_check(g)?;
    let is_infinitesimally_rigid = rank == rigid_rank(n);
    let is_redundantly_rigid = is_redundantly_rigid(g, seed);
    let is_generically_globally_rigid = match n {
        2 | 3 => is_generically_globally_rigid(g, seed)?,
        _ => is_redundantly_rigid && vertex_connectivity >= 3,
    };
    Ok(RigidityReport {
        n,
        m: g.m(),
        collapsed_antiparallel: g.undirected().collapsed.len(),
        rank,
        is_infinitesimally_rigid,
        is_laman,
        is_minimally_rigid: is_laman && is_infinitesimally_rigid,
        is_redundantly_rigid,
        vertex_connectivity,
        is_generically_globally_rigid,
        singular_values,
    })
}

impl RigidityReport {
    /// One `key value` pair per line.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let sv: Vec<String> = self.singular_values.iter().map(|&s| fmt_f64(s)).collect();
        let _ = writeln!(out, "n {}", self.n);
        let _ = writeln!(out, "m {}", self.m);
        let _ = writeln!(out, "collapsed_antiparallel {}", self.collapsed_antiparallel);
        let _ = writeln!(out, "rank {}", self.rank);
        let _ = writeln!(out, "is_infinitesimally_rigid {}", self.is_infinitesimally_rigid);
        let _ = writeln!(out, "is_laman {}", self.is_laman);
        let _ = writeln!(out, "is_minimally_rigid {}", self.is_minimally_rigid);
        let _ = writeln!(out, "is_redundantly_rigid {}", self.is_redundantly_rigid);
        let _ = writeln!(out, "vertex_connectivity {}", self.vertex_connectivity);
        let _ = writeln!(
            out,
            "is_generically_globally_rigid {}",
            self.is_generically_globally_rigid
        );
        let _ = writeln!(out, "singular_values {}", sv.join(" "));
        out
    }
}

impl fmt::Display for RigidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_key_value())
    }
}

struct PebbleGame {
    pebbles: Vec<u8>,
    // Directed pebble graph: out[v] lists the targets of edges covered by v.
    out: Vec<Vec<usize>>,
}

impl PebbleGame {
    fn run(view: &UndirectedView) -> usize {
        let mut game = PebbleGame {
            pebbles: vec![2; view.n],
            out: vec![Vec::new(); view.n],
        };
        view.edges
            .iter()
            .filter(|&&(u, v)| game.try_insert(u, v))
            .count()
    }

    fn try_insert(&mut self, u: usize, v: usize) -> bool {
        while self.pebbles[u] < 2 {
            if !self.fetch(u, v) {
                return false;
            }
        }
        while self.pebbles[v] < 2 {
            if !self.fetch(v, u) {
                return false;
            }
        }
        self.pebbles[u] -= 1;
        self.out[u].push(v);
        true
    }

    /// Moves one free pebble to `root` along a directed path avoiding `blocked`,
    /// reversing the path's edges.
    fn fetch(&mut self, root: usize, blocked: usize) -> bool {
        let n = self.pebbles.len();
        let mut parent = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        seen[blocked] = true;
        let mut stack = vec![root];
        let mut found = None;
        'search: while let Some(x) = stack.pop() {
            for &y in &self.out[x] {
                if seen[y] {
                    continue;
                }
                seen[y] = true;
                parent[y] = x;
                if self.pebbles[y] > 0 {
                    found = Some(y);
                    break 'search;
                }
                stack.push(y);
            }
        }
        let Some(mut y) = found else {
            return false;
        };
        self.pebbles[y] -= 1;
        while y != root {
            let x = parent[y];
            let pos = self.out[x].iter().position(|&t| t == y).expect("path edge exists");
            self.out[x].swap_remove(pos);
            self.out[y].push(x);
            y = x;
        }
        self.pebbles[root] += 1;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::kron2;

    fn frame(g: DirectedGraph, xy: &[(f64, f64)]) -> Framework {
        Framework::from_xy(g, xy).unwrap()
    }

    #[test]
    fn distance_function_examples() {
        let seg = DirectedGraph::from_one_based(2, &[(1, 2)]).unwrap();
        assert_eq!(distance_function(&frame(seg.clone(), &[(0.0, 0.0), (1.0, 0.0)]))[0], 0.5);
        assert_eq!(distance_function(&frame(seg, &[(1.0, 1.0), (1.0, 1.0)]))[0], 0.0);
        let s3 = 3f64.sqrt();
        let tri = frame(fixtures::triangle(), &[(0.0, 0.0), (2.0, 0.0), (1.0, s3)]);
        for v in distance_function(&tri).iter() {
            assert!((v - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_edge_rigidity_matrix() {
        let seg = DirectedGraph::from_one_based(2, &[(1, 2)]).unwrap();
        let r = rigidity_matrix(&frame(seg, &[(0.0, 0.0), (1.0, 0.0)]));
        assert_eq!(r, DMatrix::from_row_slice(1, 4, &[-1.0, 0.0, 1.0, 0.0]));
    }

    #[test]
    fn rigidity_matrix_factors_through_mixed_adjacency() {
        for seed in 0..20 {
            for g in [fixtures::two_cycles(), fixtures::k4(), fixtures::dangling()] {
                let f = random_placement(&g, seed, 0);
                let z = crate::linearization::build_z(&f);
                let am2 = kron2(&crate::graph::to_f64(&g.mixed_adjacency_matrix()));
                let diff = (&z * am2 - rigidity_matrix(&f)).abs().max();
                assert!(diff < 1e-14, "factorization residual {diff}");
            }
        }
    }

    #[test]
    fn rigidity_matrix_matches_finite_differences_of_distance_function() {
        let g = fixtures::two_cycles();
        let f = random_placement(&g, 3, 0);
        let x = f.state();
        let h = 1e-6;
        let r = rigidity_matrix(&f);
        for c in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[c] += h;
            xm[c] -= h;
            let fp = distance_function(&Framework::from_state(g.clone(), &xp).unwrap());
            let fm = distance_function(&Framework::from_state(g.clone(), &xm).unwrap());
            let col = (fp - fm) / (2.0 * h);
            for l in 0..g.m() {
                assert!((col[l] - r[(l, c)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn collinear_triangle_loses_rank() {
        let f = frame(fixtures::triangle(), &[(0.0, 0.0), (1.0, 0.0), (3.0, 0.0)]);
        assert_eq!(numerical_rank(&rigidity_matrix(&f), RANK_TOL), 2);
        assert!(!is_infinitesimally_rigid(&f, RANK_TOL).unwrap());
    }

    #[test]
    fn infinitesimal_rigidity_examples() {
        let tri = frame(fixtures::triangle(), &[(0.1, 0.2), (0.9, 0.15), (0.4, 0.8)]);
        assert!(is_infinitesimally_rigid(&tri, RANK_TOL).unwrap());
        let tc = random_placement(&fixtures::two_cycles(), 11, 0);
        assert!(is_infinitesimally_rigid(&tc, RANK_TOL).unwrap());
        for seed in 0..10 {
            let f = random_placement(&fixtures::dangling(), seed, 0);
            assert!(!is_infinitesimally_rigid(&f, RANK_TOL).unwrap());
        }
    }

    #[test]
    fn coincident_framework_is_rejected() {
        let f = frame(fixtures::triangle(), &[(1.0, 1.0); 3]);
        assert_eq!(
            is_infinitesimally_rigid(&f, RANK_TOL),
            Err(RigidityError::DegenerateFramework)
        );
    }

    #[test]
    fn generic_rank_examples() {
        assert_eq!(generic_rank(&fixtures::triangle(), 5, 1), 3);
        assert_eq!(generic_rank(&fixtures::two_cycles(), 5, 1), 5);
        let empty = DirectedGraph::new(4, vec![]).unwrap();
        assert_eq!(generic_rank(&empty, 5, 1), 0);
        assert_eq!(generic_rank(&fixtures::k4(), 5, 1), 5);
    }

    #[test]
    fn laman_examples() {
        assert!(laman_check(&fixtures::triangle()).unwrap());
        assert!(laman_check(&fixtures::two_cycles()).unwrap());
        assert!(!laman_check(&fixtures::k4()).unwrap());
        assert!(!laman_check(&fixtures::dangling()).unwrap());
        assert!(laman_check(&DirectedGraph::from_one_based(2, &[(1, 2)]).unwrap()).unwrap());
    }

    #[test]
    fn laman_counts_antiparallel_pair_once() {
        let g = DirectedGraph::from_one_based(3, &[(1, 2), (2, 1), (2, 3), (3, 1)]).unwrap();
        assert_eq!(g.undirected().collapsed, vec![(0, 1)]);
        assert!(laman_check(&g).unwrap());
    }

    #[test]
    fn overbraced_subgraph_with_right_edge_count_is_not_laman() {
        // K4 plus a pendant pair: 2n-3 = 9 edges but the K4 part is over-braced.
        let g = DirectedGraph::from_one_based(
            6,
            &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4), (5, 1), (6, 5), (6, 2)],
        )
        .unwrap();
        assert!(!pebble_game_laman(&g));
        assert!(!exhaustive_laman(&g));
        assert_eq!(pebble_game_rank(&g), 8);
        assert_eq!(generic_rank(&g, 5, 2), 8);
    }

    #[test]
    fn redundancy_examples() {
        assert!(is_redundantly_rigid(&fixtures::k4(), 0));
        assert!(!is_redundantly_rigid(&fixtures::two_cycles(), 0));
        assert!(!is_redundantly_rigid(&fixtures::triangle(), 0));
    }

    #[test]
    fn connectivity_examples() {
        assert_eq!(vertex_connectivity(&fixtures::k4()).unwrap(), 3);
        assert_eq!(vertex_connectivity(&fixtures::two_cycles()).unwrap(), 2);
        assert_eq!(vertex_connectivity(&fixtures::path(5)).unwrap(), 1);
        let disconnected = DirectedGraph::from_one_based(4, &[(1, 2), (3, 4)]).unwrap();
        assert_eq!(vertex_connectivity(&disconnected).unwrap(), 0);
        assert_eq!(
            vertex_connectivity(&fixtures::path(13)),
            Err(RigidityError::TooLarge { n: 13, max: 12 })
        );
    }

    #[test]
    fn global_rigidity_examples() {
        assert!(is_generically_globally_rigid(&fixtures::k4(), 0).unwrap());
        assert!(!is_generically_globally_rigid(&fixtures::two_cycles(), 0).unwrap());
        assert!(is_generically_globally_rigid(&fixtures::triangle(), 0).unwrap());
    }

    #[test]
    fn source_selector_reproduces_edge_adjacency() {
        for g in [fixtures::two_cycles(), fixtures::triangle(), fixtures::k4()] {
            let Some(k) = source_selector(&g) else {
                assert!(!g.classify_agents().is_leaderless);
                continue;
            };
            assert_eq!(g.mixed_adjacency_matrix() * &k, g.edge_adjacency_matrix());
            assert_eq!(numerical_rank(&k.map(|a| a as f64), RANK_TOL), g.n());
        }
        assert!(source_selector(&fixtures::k4()).is_none());
    }

    #[test]
    fn report_is_internally_consistent() {
        for g in [fixtures::two_cycles(), fixtures::k4(), fixtures::triangle(), fixtures::dangling()] {
            let r = analyze(&g, 4).unwrap();
            if r.is_minimally_rigid {
                assert!(r.is_laman);
            }
            if r.is_generically_globally_rigid && r.n >= 4 {
                assert!(r.is_redundantly_rigid && r.vertex_connectivity >= 3);
            }
            assert_eq!(r.singular_values.len(), r.m.min(2 * r.n));
        }
        let text = analyze(&fixtures::two_cycles(), 4).unwrap().to_key_value();
        assert!(text.contains("is_minimally_rigid true\n"));
        assert!(text.contains("is_generically_globally_rigid false\n"));
    }
}
