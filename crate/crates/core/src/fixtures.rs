//! Named graphs used throughout the tests, the CLI and the docs.

use crate::graph::DirectedGraph;

fn build(n: usize, one_based: &[(usize, usize)]) -> DirectedGraph {
    DirectedGraph::from_one_based(n, one_based).expect("fixture graphs are valid")
}

/// The 2-cycles formation in its canonical edge order
/// `z1 = 1->2, z2 = 2->3, z3 = 3->1, z4 = 4->3, z5 = 1->4`.
pub fn two_cycles() -> DirectedGraph {
    build(4, &[(1, 2), (2, 3), (3, 1), (4, 3), (1, 4)])
}

/// Directed 3-cycle `1->2, 2->3, 3->1`.
pub fn triangle() -> DirectedGraph {
    build(3, &[(1, 2), (2, 3), (3, 1)])
}

/// Complete graph on four vertices, every edge directed low -> high.
pub fn k4() -> DirectedGraph {
    build(4, &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)])
}

/// Five agents, six edges: `x5` hangs off `x4` by a single edge and can swing freely.
pub fn dangling() -> DirectedGraph {
    build(5, &[(1, 4), (1, 2), (2, 3), (3, 1), (4, 3), (4, 5)])
}

/// Agent 3 follows the three vertices of the rigid triangle `{1, 2, 4}`.
pub fn follower_onto_triangle() -> DirectedGraph {
    build(4, &[(1, 2), (2, 4), (4, 1), (3, 1), (3, 2), (3, 4)])
}

/// Strip of triangles: vertex `k >= 3` follows vertices `k-1` and `k-2`.
///
/// Every vertex-add anchors onto an existing edge, so the feasible set of
/// edge lengths is a product of triangle-inequality cones.
pub fn triangle_strip(n: usize) -> DirectedGraph {
    assert!(n >= 2, "a triangle strip needs at least two vertices");
    let mut edges = vec![(2, 1)];
    for k in 3..=n {
        edges.push((k, k - 1));
        edges.push((k, k - 2));
    }
    build(n, &edges)
}

/// Directed path `1->2->...->n`.
pub fn path(n: usize) -> DirectedGraph {
    let edges: Vec<(usize, usize)> = (1..n).map(|k| (k, k + 1)).collect();
    build(n, &edges)
}

/// Looks up a fixture by the name used in config files.
pub fn by_name(name: &str) -> Option<DirectedGraph> {
    match name {
        "two_cycles" | "2-cycles" => Some(two_cycles()),
        "triangle" => Some(triangle()),
        "k4" => Some(k4()),
        "dangling" => Some(dangling()),
        "follower_onto_triangle" => Some(follower_onto_triangle()),
        _ => None,
    }
}
