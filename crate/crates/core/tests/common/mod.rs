#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rigidkit::{DirectedGraph, EdgeLengthVector, Framework};

/// Random simple directed graph on `n` vertices. Half the time it has exactly
/// `2n - 3` edges so that Laman graphs show up often.
pub fn random_graph(seed: u64) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=7usize);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((a, b));
        }
    }
    for i in (1..pairs.len()).rev() {
        let j = rng.random_range(0..=i);
        pairs.swap(i, j);
    }
    let m = if rng.random_bool(0.5) {
        2 * n - 3
    } else {
        rng.random_range(0..=pairs.len())
    };
    let edges = pairs
        .into_iter()
        .take(m)
        .map(|(a, b)| if rng.random_bool(0.5) { (a, b) } else { (b, a) })
        .collect();
    DirectedGraph::new(n, edges).unwrap()
}

/// A random framework of `g` and the lengths it realizes.
pub fn random_equilibrium(g: &DirectedGraph, seed: u64) -> (Framework, EdgeLengthVector) {
    let f = rigidkit::rigidity::random_placement(g, seed, 0);
    let d = EdgeLengthVector::of(&f);
    (f, d)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Random framework whose placement is far from degenerate: every edge is at
/// least 0.2 of the diameter and the smallest nonzero singular value of the
/// rigidity matrix is at least 0.05 of the largest.
pub fn well_conditioned_equilibrium(g: &DirectedGraph, seed: u64) -> (Framework, EdgeLengthVector) {
    let rank = rigidkit::rigidity::rigid_rank(g.n()).min(g.m());
    for draw in 0..10_000 {
        let f = rigidkit::rigidity::random_placement(g, seed, draw);
        let diam = f.diameter();
        if f.edge_lengths().iter().any(|&l| l < 0.2 * diam) {
            continue;
        }
        let sv = rigidkit::rigidity::singular_values(&rigidkit::rigidity::rigidity_matrix(&f));
        if rank > 0 && sv[rank - 1] < 0.05 * sv[0] {
            continue;
        }
        let d = EdgeLengthVector::of(&f);
        return (f, d);
    }
    panic!("no well-conditioned placement found for seed {seed}");
}
