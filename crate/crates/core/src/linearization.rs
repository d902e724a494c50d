//! Jacobian of the z-dynamics at design equilibria and its spectra.
//!
//! At an equilibrium every gain vanishes, so only the derivative of the gains
//! survives: `∂ż/∂z = (A_e ⊗ I₂) Z′ᵀ Z` with `Z = blockdiag(z_lᵀ)` and
//! `Z′ = blockdiag(z′_lᵀ)`. For an agent with two out-edges `a < b`
//!
//! ```text
//! z′_a = 2 (∂u₁/∂e_a z_a + ∂u₂/∂e_a z_b)
//! z′_b = 2 (∂u₁/∂e_b z_a + ∂u₂/∂e_b z_b)
//! ```
//!
//! which relies on columns `a` and `b` of `A_e` being equal (same source).
//! A single out-edge gives `z′_l = 2 u′(e_l) z_l`. The analytic Jacobian is
//! always cross-checked against central differences of [`vector_field_z`].

use std::fmt::{self, Write as _};

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

use crate::assignment::hungarian;
use crate::dynamics::{
    error_vector, stack, vector_field_z, ControlLaw, DualArgs, DualMode, DynamicsError,
    FormationProblem, FD_REL_STEP,
};
use crate::framework::{Framework, Point};
use crate::numfmt::fmt_f64;
use crate::rigidity::{numerical_rank, RANK_TOL};

/// Equilibrium tolerance on `|e_l|`, relative to `d_l`.
pub const EQUILIBRIUM_TOL: f64 = 1e-9;
/// Allowed relative deviation between analytic and difference Jacobians.
pub const ORACLE_TOL: f64 = 1e-6;
/// Zero-eigenvalue threshold relative to `max |λ|`.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinearizationError {
    #[error("edge {edge} has error {error:e}; not a design equilibrium")]
    NotAtEquilibrium { edge: usize, error: f64 },
    #[error("{what}: analytic and finite-difference values differ by {deviation:e} (relative)")]
    OracleMismatch { what: &'static str, deviation: f64 },
    #[error("framework graph does not match the problem graph")]
    GraphMismatch,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// `m × 2m` block-diagonal matrix with row `l` holding `z_lᵀ` in columns `2l, 2l+1`.
pub fn build_z(f: &Framework) -> DMatrix<f64> {
    block_rows(&f.edge_vectors())
}

fn block_rows(vectors: &[Point]) -> DMatrix<f64> {
    let m = vectors.len();
    let mut z = DMatrix::zeros(m, 2 * m);
    for (l, v) in vectors.iter().enumerate() {
        z[(l, 2 * l)] = v.x;
        z[(l, 2 * l + 1)] = v.y;
    }
    z
}

fn check_graph(problem: &FormationProblem, f: &Framework) -> Result<(), LinearizationError> {
    if problem.graph() != f.graph() {
        return Err(LinearizationError::GraphMismatch);
    }
    Ok(())
}

fn check_equilibrium(problem: &FormationProblem, f: &Framework) -> Result<(), LinearizationError> {
    let e = error_vector(problem, f);
    for (l, (&e, &d)) in e.iter().zip(problem.squared_targets()).enumerate() {
        if e.abs() > EQUILIBRIUM_TOL * d.max(1.0) {
            return Err(LinearizationError::NotAtEquilibrium { edge: l + 1, error: e });
        }
    }
    Ok(())
}

fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = FD_REL_STEP * x.abs().max(1.0);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// `∂u/∂e` of a single-leader law, analytic when available and compared
/// against a central difference.
fn single_partial(
    law: &dyn crate::dynamics::SingleLaw,
    d: f64,
    e: f64,
) -> Result<f64, LinearizationError> {
    let fd = central(|e| law.eval(d, e), e);
    match law.partial_e(d, e) {
        Some(a) => {
            let dev = (a - fd).abs() / a.abs().max(fd.abs()).max(1.0);
            if dev > ORACLE_TOL {
                return Err(LinearizationError::OracleMismatch {
                    what: "single-leader law partial",
                    deviation: dev,
                });
            }
            Ok(a)
        }
        None => Ok(fd),
    }
}

/// `[[∂u₁/∂e_a, ∂u₁/∂e_b], [∂u₂/∂e_a, ∂u₂/∂e_b]]` of a two-leader law.
fn dual_partials(
    law: &dyn crate::dynamics::DualLaw,
    args: &DualArgs,
) -> Result<[[f64; 2]; 2], LinearizationError> {
    let mut fd = [[0.0; 2]; 2];
    for arg in 0..2 {
        let x0 = if arg == 0 { args.e_first } else { args.e_second };
        let at = |x: f64| {
            let mut a = *args;
            if arg == 0 {
                a.e_first = x;
            } else {
                a.e_second = x;
            }
            law.eval(&a)
        };
        let h = FD_REL_STEP * x0.abs().max(1.0);
        let (up, down) = (at(x0 + h), at(x0 - h));
        for c in 0..2 {
            fd[c][arg] = (up[c] - down[c]) / (2.0 * h);
        }
    }
    match law.partials(args) {
        Some(p) => {
            let mut dev: f64 = 0.0;
            for c in 0..2 {
                for arg in 0..2 {
                    let a = p[c][arg];
                    dev = dev.max((a - fd[c][arg]).abs() / a.abs().max(fd[c][arg].abs()).max(1.0));
                }
            }
            if dev > ORACLE_TOL {
                return Err(LinearizationError::OracleMismatch {
                    what: "two-leader law partials",
                    deviation: dev,
                });
            }
            Ok([[p[0][0], p[0][1]], [p[1][0], p[1][1]]])
        }
        None => Ok(fd),
    }
}

/// The `z′_l` vectors at a design equilibrium.
pub fn zprime_vectors(problem: &FormationProblem, f: &Framework) -> Result<Vec<Point>, LinearizationError> {
    check_graph(problem, f)?;
    check_equilibrium(problem, f)?;
    let z = f.edge_vectors();
    let d = problem.squared_targets();
    let e = error_vector(problem, f);
    let mut zp = vec![Point::zeros(); z.len()];
    for (edges, law) in problem.agent_edges().iter().zip(problem.laws()) {
        match (edges.as_slice(), law) {
            ([l], Some(ControlLaw::Single(u))) => {
                zp[*l] = 2.0 * single_partial(u.as_ref(), d[*l], e[*l])? * z[*l];
            }
            ([a, b], Some(ControlLaw::Dual(u))) => {
                let args = DualArgs {
                    d_first: d[*a],
                    d_second: d[*b],
                    e_first: e[*a],
                    e_second: e[*b],
                    w: if u.mode() == DualMode::DistanceOnly {
                        0.0
                    } else {
                        z[*a].dot(&z[*b])
                    },
                };
                let p = dual_partials(u.as_ref(), &args)?;
                zp[*a] = 2.0 * (p[0][0] * z[*a] + p[1][0] * z[*b]);
                zp[*b] = 2.0 * (p[0][1] * z[*a] + p[1][1] * z[*b]);
            }
            _ => {}
        }
    }
    Ok(zp)
}

/// `m × 2m` block-diagonal matrix of the `z′_lᵀ`.
pub fn build_zprime(problem: &FormationProblem, f: &Framework) -> Result<DMatrix<f64>, LinearizationError> {
    Ok(block_rows(&zprime_vectors(problem, f)?))
}

/// Central-difference Jacobian of [`vector_field_z`].
pub fn finite_difference_jacobian(
    problem: &FormationProblem,
    z: &DVector<f64>,
) -> Result<DMatrix<f64>, LinearizationError> {
    let k = z.len();
    let mut jac = DMatrix::zeros(k, k);
    for c in 0..k {
        let h = FD_REL_STEP * z[c].abs().max(1.0);
        let mut up = z.clone();
        up[c] += h;
        let mut down = z.clone();
        down[c] -= h;
        let col = (vector_field_z(problem, &up)? - vector_field_z(problem, &down)?) / (2.0 * h);
        jac.set_column(c, &col);
    }
    Ok(jac)
}

/// Max entrywise deviation relative to the largest entry of `reference`.
pub fn relative_deviation(a: &DMatrix<f64>, reference: &DMatrix<f64>) -> f64 {
    let scale = reference.amax().max(f64::MIN_POSITIVE);
    (a - reference).amax() / scale
}

/// `2m × 2m` Jacobian `(A_e ⊗ I₂) Z′ᵀ Z` and its deviation from differences.
pub fn jacobian_z_checked(
    problem: &FormationProblem,
    f: &Framework,
) -> Result<(DMatrix<f64>, f64), LinearizationError> {
    let zp = build_zprime(problem, f)?;
    let z = build_z(f);
    let analytic = problem.edge_adjacency2() * zp.transpose() * &z;
    let fd = finite_difference_jacobian(problem, &stack(&f.edge_vectors()))?;
    let dev = if fd.amax() == 0.0 && analytic.amax() == 0.0 {
        0.0
    } else {
        relative_deviation(&analytic, &fd)
    };
    if !(dev < ORACLE_TOL) {
        return Err(LinearizationError::OracleMismatch {
            what: "jacobian_z",
            deviation: dev,
        });
    }
    Ok((analytic, dev))
}

pub fn jacobian_z(problem: &FormationProblem, f: &Framework) -> Result<DMatrix<f64>, LinearizationError> {
    jacobian_z_checked(problem, f).map(|(j, _)| j)
}

/// `m × m` matrix `Z (A_e ⊗ I₂) Z′ᵀ`, sharing the nonzero spectrum of [`jacobian_z`].
pub fn reduced_jacobian(problem: &FormationProblem, f: &Framework) -> Result<DMatrix<f64>, LinearizationError> {
    let zp = build_zprime(problem, f)?;
    Ok(build_z(f) * problem.edge_adjacency2() * zp.transpose())
}

/// Eigenvalues in a deterministic order (by real part, then imaginary part).
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<Complex<f64>> = m.clone().complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev
}

/// Infinitesimal rotation `δz_l = rot90(z_l)`.
pub fn rotation_direction(f: &Framework) -> DVector<f64> {
    let rotated: Vec<Point> = f.edge_vectors().iter().map(|z| Point::new(-z.y, z.x)).collect();
    stack(&rotated)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub n: usize,
    pub m: usize,
    pub full_eigenvalues: Vec<Complex<f64>>,
    pub reduced_eigenvalues: Vec<Complex<f64>>,
    pub threshold: f64,
    /// Absolute cut-off, `threshold · max |λ|`.
    pub cutoff: f64,
    pub zero_multiplicity_full: usize,
    pub zero_multiplicity_reduced: usize,
    pub fd_max_deviation: f64,
    /// Largest matched distance between nonzero full and reduced eigenvalues,
    /// relative to `max |λ|`. Infinite when the nonzero counts differ.
    pub ab_ba_deviation: f64,
    pub rank_full: usize,
    pub rank_reduced: usize,
    /// `‖∂F/∂z · δ_rot‖ / (‖∂F/∂z‖ ‖δ_rot‖)`.
    pub rotation_residual: f64,
}

impl SpectrumReport {
    pub fn nonzero_full(&self) -> usize {
        self.full_eigenvalues.len() - self.zero_multiplicity_full
    }

    pub fn nonzero_reduced(&self) -> usize {
        self.reduced_eigenvalues.len() - self.zero_multiplicity_reduced
    }

    /// The printed count `2n + 3 − m` (saturating at zero).
    pub fn formula_multiplicity(&self) -> usize {
        (2 * self.n + 3).saturating_sub(self.m)
    }

    pub fn formula_agrees(&self) -> bool {
        self.formula_multiplicity() == self.zero_multiplicity_full
    }

    /// Lower bound `2m − rank(J)` on the zero multiplicity of the full Jacobian.
    pub fn rank_bound(&self) -> usize {
        2 * self.m - self.rank_reduced
    }

    pub fn ab_ba_agrees(&self, tol: f64) -> bool {
        self.ab_ba_deviation <= tol
    }

    /// Nonzero eigenvalues of the full Jacobian all have negative real part.
    pub fn is_hurwitz_on_nonzero(&self) -> bool {
        self.full_eigenvalues
            .iter()
            .filter(|l| l.norm() >= self.cutoff)
            .all(|l| l.re < 0.0)
    }

    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n {}", self.n);
        let _ = writeln!(s, "m {}", self.m);
        let _ = writeln!(s, "threshold {}", fmt_f64(self.threshold));
        let _ = writeln!(s, "cutoff {}", fmt_f64(self.cutoff));
        let _ = writeln!(s, "fd_max_deviation {}", fmt_f64(self.fd_max_deviation));
        let _ = writeln!(s, "rank_full {}", self.rank_full);
        let _ = writeln!(s, "rank_reduced {}", self.rank_reduced);
        let _ = writeln!(s, "zero_multiplicity_full {}", self.zero_multiplicity_full);
        let _ = writeln!(s, "zero_multiplicity_reduced {}", self.zero_multiplicity_reduced);
        let _ = writeln!(s, "nonzero_full {}", self.nonzero_full());
        let _ = writeln!(s, "nonzero_reduced {}", self.nonzero_reduced());
        let _ = writeln!(s, "formula_multiplicity {}", self.formula_multiplicity());
        let _ = writeln!(s, "formula_agrees {}", self.formula_agrees());
        let _ = writeln!(s, "rank_bound {}", self.rank_bound());
        let _ = writeln!(
            s,
            "rank_bound_consistent {}",
            self.zero_multiplicity_full >= self.rank_bound()
        );
        let _ = writeln!(s, "ab_ba_deviation {}", fmt_f64(self.ab_ba_deviation));
        let _ = writeln!(s, "ab_ba_agrees {}", self.ab_ba_agrees(1e-8));
        let _ = writeln!(s, "hurwitz_nonzero {}", self.is_hurwitz_on_nonzero());
        let _ = writeln!(s, "rotation_residual {}", fmt_f64(self.rotation_residual));
        let mut mags: Vec<f64> = self.full_eigenvalues.iter().map(|l| l.norm()).collect();
        mags.sort_by(f64::total_cmp);
        let mags: Vec<String> = mags.iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(s, "abs_full {}", mags.join(" "));
        s
    }

    /// CSV `re,im,abs,which` with `which` in `{full, reduced}`.
    pub fn eigenvalue_csv(&self) -> String {
        let mut s = String::from("re,im,abs,which\n");
        for (which, list) in [("full", &self.full_eigenvalues), ("reduced", &self.reduced_eigenvalues)] {
            for l in list {
                let _ = writeln!(s, "{},{},{},{which}", fmt_f64(l.re), fmt_f64(l.im), fmt_f64(l.norm()));
            }
        }
        s
    }
}

impl fmt::Display for SpectrumReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_key_value())
    }
}

/// Matches two equally long eigenvalue lists and returns the largest distance.
pub fn matched_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let cost: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| (x - y).norm()).collect()).collect();
    let assignment = hungarian(&cost);
    Some(
        assignment
            .iter()
            .enumerate()
            .map(|(i, &j)| cost[i][j])
            .fold(0.0, f64::max),
    )
}

pub fn spectrum_report(
    problem: &FormationProblem,
    f: &Framework,
    threshold: f64,
) -> Result<SpectrumReport, LinearizationError> {
    let (full, fd_dev) = jacobian_z_checked(problem, f)?;
    let reduced = reduced_jacobian(problem, f)?;
    let full_ev = eigenvalues(&full);
    let reduced_ev = eigenvalues(&reduced);
    let max_abs = full_ev
        .iter()
        .chain(&reduced_ev)
        .map(|l| l.norm())
        .fold(0.0, f64::max);
    let cutoff = threshold * max_abs;
    let nonzero = |ev: &[Complex<f64>]| -> Vec<Complex<f64>> {
        ev.iter().copied().filter(|l| l.norm() >= cutoff).collect()
    };
    let (nz_full, nz_reduced) = (nonzero(&full_ev), nonzero(&reduced_ev));
    let ab_ba_deviation = match matched_distance(&nz_full, &nz_reduced) {
        Some(d) if max_abs > 0.0 => d / max_abs,
        Some(_) => 0.0,
        None => f64::INFINITY,
    };
    let rot = rotation_direction(f);
    let rotation_residual = {
        let denom = full.norm() * rot.norm();
        if denom == 0.0 {
            0.0
        } else {
            (&full * &rot).norm() / denom
        }
    };
    Ok(SpectrumReport {
        n: f.n(),
        m: problem.graph().m(),
        zero_multiplicity_full: full_ev.len() - nz_full.len(),
        zero_multiplicity_reduced: reduced_ev.len() - nz_reduced.len(),
        full_eigenvalues: full_ev,
        reduced_eigenvalues: reduced_ev,
        threshold,
        cutoff,
        fd_max_deviation: fd_dev,
        ab_ba_deviation,
        rank_full: numerical_rank(&full, RANK_TOL),
        rank_reduced: numerical_rank(&reduced, RANK_TOL),
        rotation_residual,
    })
}
