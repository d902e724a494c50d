//! Frameworks modulo rigid motions: the SE(2) action, canonical
//! representatives, congruence, edge-length feasibility and the discrete
//! symmetries that permute the realizations of a given length vector.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::framework::{Framework, Point};
use crate::graph::DirectedGraph;
use crate::henneberg::{self, HennebergError};
use crate::rigidity;

/// Default congruence threshold, relative to the framework diameter.
pub const DEFAULT_CONGRUENCE_TOL: f64 = 1e-6;
/// Alignment vertices closer than this (relative to the diameter) to `x_1`
/// count as coincident with it.
pub const COINCIDENCE_TOL: f64 = 1e-9;
/// Triangle-inequality slack below this (relative to the perimeter) is tight.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapeError {
    #[error("framework is totally coincident")]
    DegenerateFramework,
    #[error("frameworks are built on different graphs")]
    GraphMismatch,
    #[error("all edges have zero length")]
    ZeroPerimeter,
    #[error("reflection axis edge {edge} has coincident endpoints")]
    DegenerateAxis { edge: usize },
    #[error("edge index {edge} is out of range")]
    NoSuchEdge { edge: usize },
    #[error("graph is not the 2-cycles graph")]
    NotTwoCycles,
    #[error("graph has no vertex-add-only Henneberg order")]
    NotVertexAddConstructible,
    #[error("edge lengths are not in the interior of the feasible set ({0:?})")]
    InfeasibleLengths(Feasibility),
    #[error("expected {expected} edge lengths, got {got}")]
    LengthCount { expected: usize, got: usize },
    #[error("edge length {index} is negative or not finite")]
    InvalidLength { index: usize },
    #[error(transparent)]
    Henneberg(#[from] HennebergError),
}

/// Rotation by `theta` followed by translation by `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Se2 {
    pub theta: f64,
    pub a: f64,
    pub b: f64,
}

impl Se2 {
    pub const IDENTITY: Se2 = Se2 {
        theta: 0.0,
        a: 0.0,
        b: 0.0,
    };

    pub fn new(theta: f64, a: f64, b: f64) -> Self {
        Self { theta, a, b }
    }

    pub fn rotation(&self) -> Matrix2<f64> {
        let (s, c) = self.theta.sin_cos();
        Matrix2::new(c, -s, s, c)
    }

    /// Homogeneous 3×3 form `[[R, t], [0, 1]]`.
    pub fn matrix(&self) -> Matrix3<f64> {
        let r = self.rotation();
        Matrix3::new(r[(0, 0)], r[(0, 1)], self.a, r[(1, 0)], r[(1, 1)], self.b, 0.0, 0.0, 1.0)
    }

    pub fn apply_point(&self, p: &Point) -> Point {
        self.rotation() * p + Point::new(self.a, self.b)
    }

    /// Velocities only see the rotation part.
    pub fn apply_vector(&self, v: &Point) -> Point {
        self.rotation() * v
    }

    /// `self ∘ other`, i.e. the product of the homogeneous matrices. The
    /// translation of `other` is rotated by `self.theta`; angles add.
    pub fn compose(&self, other: &Se2) -> Se2 {
        let t = self.rotation() * Point::new(other.a, other.b) + Point::new(self.a, self.b);
        Se2::new(self.theta + other.theta, t.x, t.y)
    }

    pub fn inverse(&self) -> Se2 {
        let rt = self.rotation().transpose();
        let t = -(rt * Point::new(self.a, self.b));
        Se2::new(-self.theta, t.x, t.y)
    }
}

pub fn apply_se2(g: &Se2, f: &Framework) -> Framework {
    f.with_positions(f.positions().iter().map(|p| g.apply_point(p)).collect())
}

/// Applies `g` to a stacked velocity vector `[v1x, v1y, ...]`.
pub fn apply_se2_velocity(g: &Se2, v: &DVector<f64>) -> DVector<f64> {
    let mut out = v.clone();
    for i in 0..v.len() / 2 {
        let w = g.apply_vector(&Point::new(v[2 * i], v[2 * i + 1]));
        out[2 * i] = w.x;
        out[2 * i + 1] = w.y;
    }
    out
}

/// Canonical representative of a framework's SE(2) orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub framework: Framework,
    /// Every vertex lies on the x-axis, so the form is its own mirror image.
    pub mirror_fixed: bool,
}

/// Translates `x_1` to the origin and rotates the first vertex not
/// coincident with it onto the positive x-axis.
pub fn canonical_form(f: &Framework) -> Result<CanonicalForm, ShapeError> {
    if f.is_totally_coincident() {
        return Err(ShapeError::DegenerateFramework);
    }
    let diam = f.diameter();
    let origin = f.position(0);
    let shifted: Vec<Point> = f.positions().iter().map(|p| p - origin).collect();
    let anchor = shifted
        .iter()
        .find(|p| p.norm() > COINCIDENCE_TOL * diam)
        .copied()
        .ok_or(ShapeError::DegenerateFramework)?;
    let rot = Se2::new(-anchor.y.atan2(anchor.x), 0.0, 0.0);
    let positions: Vec<Point> = shifted.iter().map(|p| rot.apply_vector(p)).collect();
    let mirror_fixed = positions.iter().all(|p| p.y.abs() <= COINCIDENCE_TOL * diam);
    Ok(CanonicalForm {
        framework: f.with_positions(positions),
        mirror_fixed,
    })
}

/// Label-respecting congruence test. `rel_tol` is scaled by the larger diameter.
pub fn are_congruent(
    f1: &Framework,
    f2: &Framework,
    allow_reflection: bool,
    rel_tol: f64,
) -> Result<bool, ShapeError> {
    if f1.graph() != f2.graph() {
        return Err(ShapeError::GraphMismatch);
    }
    let c1 = canonical_form(f1)?.framework;
    let c2 = canonical_form(f2)?.framework;
    let tol = rel_tol * f1.diameter().max(f2.diameter());
    if c1.max_vertex_distance(&c2) <= tol {
        return Ok(true);
    }
    Ok(allow_reflection && c1.max_vertex_distance(&mirror(&c2)) <= tol)
}

/// `(x, y) -> (x, -y)` on every vertex.
pub fn mirror(f: &Framework) -> Framework {
    f.with_positions(f.positions().iter().map(|p| Point::new(p.x, -p.y)).collect())
}

/// Rescales so the edge lengths sum to one; returns the original sum.
pub fn normalize(f: &Framework) -> Result<(Framework, f64), ShapeError> {
    let scale: f64 = f.edge_lengths().iter().sum();
    if scale <= 0.0 {
        return Err(ShapeError::ZeroPerimeter);
    }
    let positions = f.positions().iter().map(|p| p / scale).collect();
    Ok((f.with_positions(positions), scale))
}

/// Target Euclidean edge lengths (not squared), one per edge in edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeLengthVector(Vec<f64>);

impl EdgeLengthVector {
    pub fn new(lengths: Vec<f64>) -> Result<Self, ShapeError> {
        if let Some(index) = lengths.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return Err(ShapeError::InvalidLength { index: index + 1 });
        }
        Ok(Self(lengths))
    }

    pub fn for_graph(g: &DirectedGraph, lengths: Vec<f64>) -> Result<Self, ShapeError> {
        if lengths.len() != g.m() {
            return Err(ShapeError::LengthCount {
                expected: g.m(),
                got: lengths.len(),
            });
        }
        Self::new(lengths)
    }

    /// Lengths realized by a framework.
    pub fn of(f: &Framework) -> Self {
        Self(f.edge_lengths())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `d_l²`, the targets of the squared-length error `e_l`.
    pub fn squared(&self) -> Vec<f64> {
        self.0.iter().map(|d| d * d).collect()
    }

    /// `½ d_l²`, comparable with the distance function.
    pub fn half_squared(&self) -> Vec<f64> {
        self.0.iter().map(|d| 0.5 * d * d).collect()
    }

    pub fn all_positive(&self) -> bool {
        self.0.iter().all(|&d| d > 0.0)
    }
}

impl std::ops::Index<usize> for EdgeLengthVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Interior,
    Boundary,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub status: Feasibility,
    /// Decided by numerical search rather than an exact criterion.
    pub approximate: bool,
}

/// Decides whether `d` lies in the interior, on the boundary, or outside the
/// set of realizable edge lengths of `g`.
pub fn edge_length_feasible(
    g: &DirectedGraph,
    d: &EdgeLengthVector,
) -> Result<FeasibilityReport, ShapeError> {
    if d.len() != g.m() {
        return Err(ShapeError::LengthCount {
            expected: g.m(),
            got: d.len(),
        });
    }
    if let Some(triangles) = triangle_decomposition(g) {
        return Ok(FeasibilityReport {
            status: triangle_feasibility(d, &triangles),
            approximate: false,
        });
    }
    if let Some(order) = henneberg::find_vertex_add_order(g).ok().flatten() {
        let k = order.sequence.len();
        let mut best = Feasibility::Infeasible;
        for bits in 0..1u64 << k {
            match henneberg::realize_graph(g, &order, d, &choice_bits(bits, k)) {
                Ok(_) => {
                    best = Feasibility::Interior;
                    break;
                }
                Err(HennebergError::CirclesTangent { .. }) => best = Feasibility::Boundary,
                Err(_) => {}
            }
        }
        return Ok(FeasibilityReport {
            status: best,
            approximate: false,
        });
    }
    let found = numerical_realization(g, d, 16, 0x5eed).is_some();
    Ok(FeasibilityReport {
        status: if found {
            Feasibility::Interior
        } else {
            Feasibility::Infeasible
        },
        approximate: true,
    })
}

/// Choice vector with bit `i` of `bits` as the `i`-th placement choice.
pub fn choice_bits(bits: u64, k: usize) -> Vec<bool> {
    (0..k).map(|i| bits >> i & 1 == 1).collect()
}

/// Edge-index triples of the triangles of a triangle or 2-cycles graph.
fn triangle_decomposition(g: &DirectedGraph) -> Option<Vec<[usize; 3]>> {
    let view = g.undirected();
    if !view.collapsed.is_empty() {
        return None;
    }
    let shaped = (g.n() == 3 && g.m() == 3) || (g.n() == 4 && g.m() == 5);
    if !shaped {
        return None;
    }
    let index = |a: usize, b: usize| {
        g.edges()
            .iter()
            .position(|&(s, t)| (s, t) == (a, b) || (s, t) == (b, a))
    };
    let mut triangles = Vec::new();
    for a in 0..g.n() {
        for b in a + 1..g.n() {
            for c in b + 1..g.n() {
                if let (Some(x), Some(y), Some(z)) = (index(a, b), index(b, c), index(a, c)) {
                    triangles.push([x, y, z]);
                }
            }
        }
    }
    let expected = if g.n() == 3 { 1 } else { 2 };
    (triangles.len() == expected).then_some(triangles)
}

fn triangle_feasibility(d: &EdgeLengthVector, triangles: &[[usize; 3]]) -> Feasibility {
    let mut status = Feasibility::Interior;
    for t in triangles {
        let [a, b, c] = t.map(|l| d[l]);
        let perimeter = a + b + c;
        let slack = (a + b - c).min(b + c - a).min(a + c - b);
        let tight = BOUNDARY_TOL * perimeter.max(f64::MIN_POSITIVE);
        if slack < -tight {
            return Feasibility::Infeasible;
        }
        if slack <= tight || a == 0.0 || b == 0.0 || c == 0.0 {
            status = Feasibility::Boundary;
        }
    }
    status
}

/// Multistart Levenberg–Marquardt search for a framework with edge lengths
/// `d`. Returns the first start whose squared-length residual drops below
/// `1e-10` relative.
pub fn numerical_realization(
    g: &DirectedGraph,
    d: &EdgeLengthVector,
    starts: usize,
    seed: u64,
) -> Option<Framework> {
    let targets = d.squared();
    let scale = d.as_slice().iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for draw in 0..starts as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(draw);
        let mut x = DVector::from_fn(2 * g.n(), |_, _| scale * rng.random::<f64>());
        let mut lambda = 1e-3;
        let residual = |x: &DVector<f64>| -> DVector<f64> {
            DVector::from_iterator(
                g.m(),
                g.edges().iter().enumerate().map(|(l, &(s, t))| {
                    let dx = x[2 * t] - x[2 * s];
                    let dy = x[2 * t + 1] - x[2 * s + 1];
                    dx * dx + dy * dy - targets[l]
                }),
            )
        };
        let mut r = residual(&x);
        for _ in 0..500 {
            let f = Framework::from_state(g.clone(), &x).ok()?;
            let jac: DMatrix<f64> = rigidity::rigidity_matrix(&f) * 2.0;
            let jtj = jac.transpose() * &jac;
            let grad = jac.transpose() * &r;
            let damped = &jtj + DMatrix::identity(jtj.nrows(), jtj.ncols()) * lambda;
            let Some(step) = damped.lu().solve(&(-grad)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = &x + step;
            let rt = residual(&trial);
            if rt.norm() < r.norm() {
                x = trial;
                r = rt;
                lambda = (lambda * 0.3).max(1e-12);
            } else {
                lambda *= 4.0;
            }
            if r.amax() <= 1e-10 * scale * scale {
                return Framework::from_state(g.clone(), &x).ok();
            }
        }
    }
    None
}

/// All pairwise non-congruent (under SE(2), reflections distinct) frameworks
/// of a vertex-add-constructible graph with edge lengths `d`.
pub fn enumerate_frameworks(
    g: &DirectedGraph,
    d: &EdgeLengthVector,
    rel_tol: f64,
) -> Result<Vec<Framework>, ShapeError> {
    let order = henneberg::find_vertex_add_order(g)?.ok_or(ShapeError::NotVertexAddConstructible)?;
    let feasibility = edge_length_feasible(g, d)?;
    if feasibility.status != Feasibility::Interior {
        return Err(ShapeError::InfeasibleLengths(feasibility.status));
    }
    let k = order.sequence.len();
    let mut found: Vec<Framework> = Vec::new();
    for bits in 0..1u64 << k {
        let Ok(f) = henneberg::realize_graph(g, &order, d, &choice_bits(bits, k)) else {
            continue;
        };
        let mut duplicate = false;
        for existing in &found {
            if are_congruent(existing, &f, false, rel_tol)? {
                duplicate = true;
                break;
            }
        }
        if !duplicate {
            found.push(f);
        }
    }
    Ok(found)
}

/// Reflects `vertices` across the line through the endpoints of `axis_edge`.
pub fn reflect_vertices(
    f: &Framework,
    axis_edge: usize,
    vertices: &[usize],
) -> Result<Framework, ShapeError> {
    if axis_edge >= f.graph().m() {
        return Err(ShapeError::NoSuchEdge {
            edge: axis_edge + 1,
        });
    }
    let (s, t) = f.graph().edge(axis_edge);
    let p = f.position(s);
    let dir = f.position(t) - p;
    let len = dir.norm();
    if len <= COINCIDENCE_TOL * f.diameter().max(f64::MIN_POSITIVE) {
        return Err(ShapeError::DegenerateAxis {
            edge: axis_edge + 1,
        });
    }
    let normal = Point::new(-dir.y, dir.x) / len;
    let mut positions = f.positions().to_vec();
    for &v in vertices {
        let x = positions[v];
        positions[v] = x - 2.0 * (x - p).dot(&normal) * normal;
    }
    Ok(f.with_positions(positions))
}

/// The two reflections of the 2-cycles graph: both fold one degree-2 vertex
/// across the shared (diagonal) edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoCyclesSymmetry {
    pub axis_edge: usize,
    pub first: usize,
    pub second: usize,
}

impl TwoCyclesSymmetry {
    pub fn detect(g: &DirectedGraph) -> Result<Self, ShapeError> {
        let view = g.undirected();
        if g.n() != 4 || view.m() != 5 || !view.collapsed.is_empty() {
            return Err(ShapeError::NotTwoCycles);
        }
        let deg = g.degrees();
        let hubs: Vec<usize> = (0..4).filter(|&v| deg[v] == 3).collect();
        let tips: Vec<usize> = (0..4).filter(|&v| deg[v] == 2).collect();
        if hubs.len() != 2 || tips.len() != 2 {
            return Err(ShapeError::NotTwoCycles);
        }
        let axis_edge = g
            .edges()
            .iter()
            .position(|&(s, t)| (s == hubs[0] && t == hubs[1]) || (s == hubs[1] && t == hubs[0]))
            .ok_or(ShapeError::NotTwoCycles)?;
        Ok(Self {
            axis_edge,
            first: tips[0],
            second: tips[1],
        })
    }

    pub fn r1(&self, f: &Framework) -> Result<Framework, ShapeError> {
        reflect_vertices(f, self.axis_edge, &[self.first])
    }

    pub fn r2(&self, f: &Framework) -> Result<Framework, ShapeError> {
        reflect_vertices(f, self.axis_edge, &[self.second])
    }
}

/// `[f, R1 f, R2 f, R1 R2 f]` for a 2-cycles framework.
pub fn symmetry_orbit(f: &Framework) -> Result<[Framework; 4], ShapeError> {
    let sym = TwoCyclesSymmetry::detect(f.graph())?;
    let r1 = sym.r1(f)?;
    let r2 = sym.r2(f)?;
    let r12 = sym.r1(&r2)?;
    Ok([f.clone(), r1, r2, r12])
}

/// `2^⌈(n−1)/2⌉`, the lower bound on the number of non-congruent frameworks
/// for generic edge lengths when the feasible set is null-homotopic.
pub fn ls_lower_bound(n: usize) -> usize {
    1 << n.saturating_sub(1).div_ceil(2)
}

/// Category of the complex projective space of complex dimension `k`.
pub fn cat_cp(k: usize) -> usize {
    k + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_relative_eq;

    fn tri345() -> Framework {
        Framework::from_xy(fixtures::triangle(), &[(0.0, 0.0), (3.0, 0.0), (3.0, 4.0)]).unwrap()
    }

    fn lengths(v: &[f64]) -> EdgeLengthVector {
        EdgeLengthVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn se2_identity_and_translation() {
        let f = tri345();
        assert_eq!(apply_se2(&Se2::IDENTITY, &f), f);
        let moved = apply_se2(&Se2::new(0.0, 5.0, -2.0), &f);
        let d0 = rigidity::distance_function(&f);
        let d1 = rigidity::distance_function(&moved);
        assert!((d0 - d1).amax() < 1e-12);
    }

    #[test]
    fn composition_is_the_matrix_product() {
        let g1 = Se2::new(0.7, 1.0, -2.0);
        let g2 = Se2::new(-1.9, 0.3, 4.0);
        let prod = g1.matrix() * g2.matrix();
        let comp = g1.compose(&g2).matrix();
        assert!((prod - comp).amax() < 1e-14);
        let f = tri345();
        let lhs = apply_se2(&g1, &apply_se2(&g2, &f));
        let rhs = apply_se2(&g1.compose(&g2), &f);
        assert!(lhs.max_vertex_distance(&rhs) < 1e-12);
        // Adding angles and translations componentwise is not the group law.
        let naive = Se2::new(g1.theta + g2.theta, g1.a + g2.a, g1.b + g2.b);
        assert!((naive.matrix() - prod).amax() > 1e-3);
        let id = g1.compose(&g1.inverse());
        assert!((id.matrix() - Matrix3::identity()).amax() < 1e-14);
    }

    #[test]
    fn canonical_form_examples() {
        let f = tri345();
        let c = canonical_form(&f).unwrap();
        assert!(c.framework.max_vertex_distance(&f) < 1e-15);
        assert!(!c.mirror_fixed);

        let moved = apply_se2(&Se2::new(2.3, -4.0, 7.5), &f);
        let cm = canonical_form(&moved).unwrap();
        assert!(cm.framework.max_vertex_distance(&c.framework) < 1e-12);

        // x1 = x2, so x3 fixes the orientation.
        let g = fixtures::triangle();
        let coincident = Framework::from_xy(g, &[(1.0, 1.0), (1.0, 1.0), (1.0, 3.0)]).unwrap();
        let cc = canonical_form(&coincident).unwrap().framework;
        assert_relative_eq!(cc.position(2).x, 2.0, epsilon = 1e-15);
        assert_relative_eq!(cc.position(2).y, 0.0, epsilon = 1e-15);
        assert!(canonical_form(&coincident).unwrap().mirror_fixed);
    }

    #[test]
    fn canonical_form_rejects_coincident() {
        let g = fixtures::triangle();
        let f = Framework::from_xy(g, &[(2.0, 2.0); 3]).unwrap();
        assert_eq!(canonical_form(&f), Err(ShapeError::DegenerateFramework));
    }

    #[test]
    fn congruence_and_mirror() {
        let f = tri345();
        assert!(are_congruent(&f, &f, false, DEFAULT_CONGRUENCE_TOL).unwrap());
        let m = mirror(&f);
        assert!(!are_congruent(&f, &m, false, DEFAULT_CONGRUENCE_TOL).unwrap());
        assert!(are_congruent(&f, &m, true, DEFAULT_CONGRUENCE_TOL).unwrap());
        assert_eq!(mirror(&m), f);
        let other = Framework::from_xy(fixtures::path(3), &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(
            are_congruent(&f, &other, false, DEFAULT_CONGRUENCE_TOL),
            Err(ShapeError::GraphMismatch)
        );
        let on_axis = Framework::from_xy(fixtures::triangle(), &[(0.0, 0.0), (1.0, 0.0), (3.0, 0.0)]).unwrap();
        assert_eq!(mirror(&on_axis), on_axis);
        let d = rigidity::distance_function(&f) - rigidity::distance_function(&m);
        assert_eq!(d.amax(), 0.0);
    }

    #[test]
    fn normalize_examples() {
        let s3 = 3f64.sqrt();
        let eq = Framework::from_xy(fixtures::triangle(), &[(0.0, 0.0), (2.0, 0.0), (1.0, s3)]).unwrap();
        let (n, scale) = normalize(&eq).unwrap();
        assert_relative_eq!(scale, 6.0, epsilon = 1e-12);
        for l in n.edge_lengths() {
            assert_relative_eq!(l, 1.0 / 3.0, epsilon = 1e-12);
        }
        let (nn, s2) = normalize(&n).unwrap();
        assert_relative_eq!(s2, 1.0, epsilon = 1e-12);
        assert!(nn.max_vertex_distance(&n) < 1e-15);
        assert_relative_eq!(normalize(&tri345()).unwrap().1, 12.0, epsilon = 1e-12);
        let flat = Framework::from_xy(fixtures::triangle(), &[(1.0, 1.0); 3]).unwrap();
        assert_eq!(normalize(&flat).unwrap_err(), ShapeError::ZeroPerimeter);
    }

    #[test]
    fn feasibility_examples() {
        let tri = fixtures::triangle();
        let tc = fixtures::two_cycles();
        let f = |g: &DirectedGraph, v: &[f64]| edge_length_feasible(g, &lengths(v)).unwrap();
        assert_eq!(f(&tri, &[3.0, 4.0, 5.0]).status, Feasibility::Interior);
        assert_eq!(f(&tri, &[1.0, 1.0, 3.0]).status, Feasibility::Infeasible);
        assert_eq!(f(&tri, &[1.0, 2.0, 3.0]).status, Feasibility::Boundary);
        let r = f(&tc, &[1.0, 1.2, 1.5, 0.9, 1.1]);
        assert_eq!(r, FeasibilityReport { status: Feasibility::Interior, approximate: false });
        assert_eq!(f(&tc, &[1.0, 1.2, 1.5, 0.2, 1.1]).status, Feasibility::Infeasible);
        assert_eq!(f(&tc, &[1.0, 0.5, 1.5, 0.9, 1.1]).status, Feasibility::Boundary);
    }

    #[test]
    fn feasibility_of_vertex_add_graph_uses_realization() {
        let g = fixtures::triangle_strip(5);
        let f = rigidity::random_placement(&g, 9, 0);
        let d = EdgeLengthVector::of(&f);
        let r = edge_length_feasible(&g, &d).unwrap();
        assert_eq!(r, FeasibilityReport { status: Feasibility::Interior, approximate: false });
        let mut bad = d.as_slice().to_vec();
        bad[0] = 50.0;
        let r = edge_length_feasible(&g, &lengths(&bad)).unwrap();
        assert_eq!(r.status, Feasibility::Infeasible);
    }

    #[test]
    fn feasibility_falls_back_to_numerical_search() {
        let g = fixtures::k4();
        let f = rigidity::random_placement(&g, 2, 0);
        let r = edge_length_feasible(&g, &EdgeLengthVector::of(&f)).unwrap();
        assert_eq!(r, FeasibilityReport { status: Feasibility::Interior, approximate: true });
        let r = edge_length_feasible(&g, &lengths(&[1.0, 1.0, 1.0, 1.0, 1.0, 5.0])).unwrap();
        assert_eq!(r, FeasibilityReport { status: Feasibility::Infeasible, approximate: true });
    }

    #[test]
    fn enumeration_counts() {
        let tri = enumerate_frameworks(&fixtures::triangle(), &lengths(&[3.0, 4.0, 5.0]), 1e-6).unwrap();
        assert_eq!(tri.len(), 2);
        let tc = enumerate_frameworks(&fixtures::two_cycles(), &lengths(&[1.0, 1.2, 1.5, 0.9, 1.1]), 1e-6)
            .unwrap();
        assert_eq!(tc.len(), 4);
        let strip = fixtures::triangle_strip(6);
        let d = EdgeLengthVector::of(&rigidity::random_placement(&strip, 5, 0));
        let all = enumerate_frameworks(&strip, &d, 1e-6).unwrap();
        assert!(all.len() >= ls_lower_bound(6));
        assert_eq!(all.len() % 2, 0);
    }

    #[test]
    fn enumeration_errors() {
        assert_eq!(
            enumerate_frameworks(&fixtures::triangle(), &lengths(&[1.0, 1.0, 3.0]), 1e-6),
            Err(ShapeError::InfeasibleLengths(Feasibility::Infeasible))
        );
        assert_eq!(
            enumerate_frameworks(&fixtures::k4(), &lengths(&[1.0; 6]), 1e-6),
            Err(ShapeError::Henneberg(HennebergError::NotLaman))
        );
    }

    #[test]
    fn reflections_form_klein_four_group() {
        let tc = fixtures::two_cycles();
        let d = lengths(&[1.0, 1.2, 1.5, 0.9, 1.1]);
        let f = enumerate_frameworks(&tc, &d, 1e-6).unwrap().remove(0);
        let sym = TwoCyclesSymmetry::detect(&tc).unwrap();
        assert_eq!(sym, TwoCyclesSymmetry { axis_edge: 2, first: 1, second: 3 });
        let r1r1 = sym.r1(&sym.r1(&f).unwrap()).unwrap();
        assert!(r1r1.max_vertex_distance(&f) < 1e-12);
        let a = sym.r1(&sym.r2(&f).unwrap()).unwrap();
        let b = sym.r2(&sym.r1(&f).unwrap()).unwrap();
        assert!(a.max_vertex_distance(&b) < 1e-12);
        assert!(are_congruent(&a, &mirror(&f), false, 1e-6).unwrap());
        let orbit = symmetry_orbit(&f).unwrap();
        for member in &orbit {
            let diff = rigidity::distance_function(member) - rigidity::distance_function(&f);
            assert!(diff.amax() < 1e-12);
        }
    }

    #[test]
    fn orbit_collapses_when_tip_on_axis() {
        let tc = fixtures::two_cycles();
        // x2 on the x1-x3 line.
        let f = Framework::from_xy(tc, &[(0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (0.4, 0.7)]).unwrap();
        let orbit = symmetry_orbit(&f).unwrap();
        let mut distinct: Vec<&Framework> = Vec::new();
        for m in &orbit {
            if !distinct.iter().any(|d| are_congruent(d, m, false, 1e-9).unwrap()) {
                distinct.push(m);
            }
        }
        assert!(distinct.len() <= 2);
    }

    #[test]
    fn orbit_requires_two_cycles() {
        assert_eq!(symmetry_orbit(&tri345()).unwrap_err(), ShapeError::NotTwoCycles);
        let f = Framework::from_xy(fixtures::two_cycles(), &[(0.0, 0.0), (1.0, 1.0), (0.0, 0.0), (1.0, -1.0)]).unwrap();
        assert_eq!(symmetry_orbit(&f).unwrap_err(), ShapeError::DegenerateAxis { edge: 3 });
    }

    #[test]
    fn category_constants() {
        assert_eq!(ls_lower_bound(3), 2);
        assert_eq!(ls_lower_bound(4), 4);
        assert_eq!(ls_lower_bound(5), 4);
        assert_eq!(ls_lower_bound(6), 8);
        assert_eq!(ls_lower_bound(7), 8);
        assert_eq!(cat_cp(2), 3);
    }
}
