//! Singular-corner problem: -lap u = 1 on [-1/2, 1/2] x [0, 1] with a
//! boundary-condition change at the origin, and the adaptive study that
//! measures how the filtered derivative error decays with mesh size.
//!
//! The exact solution is u = g - y^2/2 with g = r^{1/2} sin(theta/2) in
//! polar coordinates about the origin, theta measured from the positive
//! x-axis (two-argument arctangent, so theta spans [0, pi] on the
//! domain). u vanishes on the bottom-right boundary piece (marker 1),
//! has zero normal derivative on the bottom-left piece (marker 5), and
//! supplies Dirichlet data everywhere else. u_x is unbounded at the
//! origin, which is what makes the filtered-derivative comparison
//! interesting: the regularized reference
//!   gx_eps = (eps + x^2 + y^2)^{-3/4} (x sin(theta/2) - y cos(theta/2)) / 2
//! keeps the error integrals finite near the corner.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::galerkin::{solve_dirichlet, DirichletProblem};
use crate::mesh::{Diagonal, Mesh};
use crate::norms::{h1_error, l2_error};
use crate::projection::{project, ProjectionProblem, Source};
use crate::space::{Deriv, Family, FeFunction, FunctionSpace};

/// Quadrature degree for error norms against the singular fields
/// (2k + 8 at k = 1).
pub const SINGULAR_QUAD_DEGREE: usize = 10;

/// Fraction of the total squared indicator captured by the marked set.
pub const DORFLER_FRACTION: f64 = 0.5;

/// Tolerances at or above this value leave the initial mesh unchanged.
pub const NO_ADAPT_TOLERANCE: f64 = 0.03;

/// Regularization used on the unadapted initial mesh.
pub const INITIAL_EPSILON: f64 = 1e-3;

/// Markers of the Dirichlet boundary; marker 5 (bottom, x < 0) is the
/// natural part.
pub const DIRICHLET_MARKERS: [u32; 4] = [1, 2, 3, 4];

/// The analytic fields of the corner problem for one regularization
/// parameter.
#[derive(Clone, Copy, Debug)]
pub struct CornerFields {
    pub epsilon: f64,
}

impl CornerFields {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "regularization must be nonnegative, got {epsilon}"
            )));
        }
        Ok(CornerFields { epsilon })
    }

    /// g = r^{1/2} sin(theta/2).
    pub fn g(&self) -> ScalarField {
        ScalarField::new(|x, y| {
            let r = x.hypot(y);
            let theta = y.atan2(x);
            r.sqrt() * (0.5 * theta).sin()
        })
    }

    /// Exact solution u = g - y^2/2 with its gradient (singular at the
    /// origin).
    pub fn exact_solution(&self) -> ScalarField {
        ScalarField::with_gradient(
            |x, y| {
                let r = x.hypot(y);
                let theta = y.atan2(x);
                r.sqrt() * (0.5 * theta).sin() - 0.5 * y * y
            },
            |x, y| {
                let r = x.hypot(y);
                let theta = y.atan2(x);
                let s = 0.5 / r.sqrt();
                (-s * (0.5 * theta).sin(), s * (0.5 * theta).cos() - y)
            },
        )
    }

    /// Regularized x-derivative of g. With epsilon = 0 it is singular at
    /// the origin, where evaluation fails.
    pub fn gx_epsilon(&self) -> ScalarField {
        let eps = self.epsilon;
        ScalarField::new(move |x, y| {
            let theta = y.atan2(x);
            0.5 * (eps + x * x + y * y).powf(-0.75)
                * (x * (0.5 * theta).sin() - y * (0.5 * theta).cos())
        })
    }
}

/// The eight-triangle, nine-vertex initial mesh.
pub fn initial_mesh() -> Result<Mesh> {
    Mesh::build_structured(2, 2, (-0.5, 0.0, 0.5, 1.0), Diagonal::Right)
}

/// Continuous Galerkin solve of the corner problem on the given mesh.
pub fn solve(mesh: Arc<Mesh>, degree: usize, solver_tol: f64) -> Result<FeFunction> {
    let space = FunctionSpace::new(mesh, Family::Cg, degree)?;
    let one = ScalarField::constant(1.0);
    let bc = CornerFields::new(0.0)?.exact_solution();
    let mut problem = DirichletProblem::new(space, &one, &DIRICHLET_MARKERS, &bc);
    problem.solver_tol = solver_tol;
    solve_dirichlet(&problem)
}

/// || Pi(d_x u_h) - gx_eps ||_{L2}, with the projection onto continuous
/// piecewise linears on the mesh of `u_h`.
pub fn sisg_error(u_h: &FeFunction, epsilon: f64) -> Result<f64> {
    let cg1 = FunctionSpace::new(Arc::clone(u_h.space().mesh()), Family::Cg, 1)?;
    let filtered = project(&ProjectionProblem::new(
        cg1,
        Source::Derivative(u_h, Deriv::Dx),
    ))?;
    let reference = CornerFields::new(epsilon)?.gx_epsilon();
    l2_error(&filtered, &reference, SINGULAR_QUAD_DEGREE)
}

#[derive(Clone, Copy, Debug)]
pub struct StudyRecord {
    /// Vertex count, boundary included, after adaptation.
    pub n_vertices: usize,
    pub tolerance: f64,
    pub sisg_error: f64,
    pub h1_error: f64,
    pub epsilon: f64,
    /// False when the vertex cap stopped refinement before the tolerance
    /// was met.
    pub converged: bool,
}

pub struct StudyOutcome {
    pub records: Vec<StudyRecord>,
    pub final_mesh: Arc<Mesh>,
    pub final_solution: FeFunction,
    pub final_filtered: FeFunction,
}

/// Smallest set of elements carrying at least `fraction` of the total
/// squared indicator, largest indicators first.
fn dorfler_marking(indicators: &[f64], fraction: f64) -> Vec<usize> {
    let total: f64 = indicators.iter().sum();
    let mut order: Vec<usize> = (0..indicators.len()).collect();
    order.sort_by(|&a, &b| indicators[b].total_cmp(&indicators[a]).then(a.cmp(&b)));
    let mut marked = Vec::new();
    let mut acc = 0.0;
    for e in order {
        if acc >= fraction * total {
            break;
        }
        acc += indicators[e];
        marked.push(e);
    }
    marked
}

/// Run the adaptive loop for each tolerance (each starting from the
/// initial mesh): solve, measure the exact elementwise H1-seminorm
/// error, stop once its square is at or below the tolerance, otherwise
/// mark and bisect. Tolerances at or above `NO_ADAPT_TOLERANCE` keep the
/// initial mesh. The regularization for the filtered-derivative error is
/// `INITIAL_EPSILON` capped by the squared smallest element size.
pub fn adaptive_study(tolerances: &[f64], max_vertices: usize) -> Result<StudyOutcome> {
    if tolerances.is_empty() {
        return Err(Error::InvalidArgument("no tolerances given".into()));
    }
    for pair in tolerances.windows(2) {
        if pair[1] > pair[0] {
            return Err(Error::InvalidArgument(
                "tolerances must be non-increasing".into(),
            ));
        }
    }
    if tolerances.iter().any(|&t| t <= 0.0 || t.is_nan()) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }

    let exact = CornerFields::new(0.0)?.exact_solution();
    let mut records = Vec::with_capacity(tolerances.len());
    let mut last: Option<(Arc<Mesh>, FeFunction)> = None;

    for &tolerance in tolerances {
        let mut mesh = Arc::new(initial_mesh()?);
        let (u_h, report, converged) = loop {
            let u_h = solve(Arc::clone(&mesh), 1, 1e-12)?;
            let report = h1_error(&u_h, &exact, SINGULAR_QUAD_DEGREE)?;
            let semi_sq = report.h1_seminorm_error * report.h1_seminorm_error;
            if tolerance >= NO_ADAPT_TOLERANCE || semi_sq <= tolerance {
                break (u_h, report, true);
            }
            if mesh.n_vertices() >= max_vertices {
                break (u_h, report, false);
            }
            let indicators: Vec<f64> = report
                .per_element
                .as_ref()
                .expect("h1_error fills per-element data")
                .iter()
                .map(|p| p.semi_sq)
                .collect();
            let marked = dorfler_marking(&indicators, DORFLER_FRACTION);
            mesh = Arc::new(mesh.refine(&marked)?);
        };

        let quality = mesh.quality_report()?;
        let h_min = quality.h_min();
        let epsilon = INITIAL_EPSILON.min(h_min * h_min);
        let sisg = sisg_error(&u_h, epsilon)?;
        records.push(StudyRecord {
            n_vertices: mesh.n_vertices(),
            tolerance,
            sisg_error: sisg,
            h1_error: report.h1_error,
            epsilon,
            converged,
        });
        last = Some((mesh, u_h));
    }

    let (final_mesh, final_solution) = last.expect("at least one tolerance");
    let cg1 = FunctionSpace::new(Arc::clone(&final_mesh), Family::Cg, 1)?;
    let final_filtered = project(&ProjectionProblem::new(
        cg1,
        Source::Derivative(&final_solution, Deriv::Dx),
    ))?;
    Ok(StudyOutcome {
        records,
        final_mesh,
        final_solution,
        final_filtered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_values_on_the_axis() {
        let fields = CornerFields::new(0.0).unwrap();
        let g = fields.g();
        assert!(g.eval(1.0, 0.0).abs() < 1e-15);
        assert!(g.eval(0.25, 0.0).abs() < 1e-15);
        assert!((g.eval(-1.0, 0.0) - 1.0).abs() < 1e-15);
        // Continuity of the branch from above at the negative axis.
        assert!((g.eval(-1.0, 1e-12) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gx_matches_finite_differences_of_g() {
        let fields = CornerFields::new(0.0).unwrap();
        let g = fields.g();
        let gx = fields.gx_epsilon();
        let d = 1e-6;
        for (x, y) in [(0.3, 0.4), (-0.2, 0.35), (0.1, 0.05)] {
            let fd = (g.eval(x + d, y) - g.eval(x - d, y)) / (2.0 * d);
            assert!((gx.eval(x, y) - fd).abs() < 1e-5, "at ({x}, {y})");
        }
    }

    #[test]
    fn gx_epsilon_zero_is_singular_only_at_origin() {
        let fields = CornerFields::new(0.0).unwrap();
        let gx = fields.gx_epsilon();
        assert!(gx.try_eval(0.0, 0.0).is_err());
        assert!(gx.try_eval(1e-8, 0.0).is_ok());
        let reg = CornerFields::new(1e-3).unwrap().gx_epsilon();
        assert!(reg.try_eval(0.0, 0.0).is_ok());
        assert_eq!(reg.eval(0.0, 0.0), 0.0);
    }

    #[test]
    fn g_is_harmonic_away_from_the_origin() {
        let fields = CornerFields::new(0.0).unwrap();
        let g = fields.g();
        let d = 1e-4;
        for (x, y) in [(0.3, 0.4), (-0.25, 0.3), (0.1, 0.6), (-0.4, 0.05)] {
            let lap = (g.eval(x + d, y) + g.eval(x - d, y) + g.eval(x, y + d) + g.eval(x, y - d)
                - 4.0 * g.eval(x, y))
                / (d * d);
            assert!(lap.abs() < 1e-4, "Laplacian {lap} at ({x}, {y})");
        }
    }

    #[test]
    fn exact_solution_satisfies_the_problem() {
        let fields = CornerFields::new(0.0).unwrap();
        let u = fields.exact_solution();
        let d = 1e-4;
        // -lap u = 1 in the interior.
        for (x, y) in [(0.2, 0.5), (-0.3, 0.2), (0.05, 0.8)] {
            let lap = (u.eval(x + d, y) + u.eval(x - d, y) + u.eval(x, y + d) + u.eval(x, y - d)
                - 4.0 * u.eval(x, y))
                / (d * d);
            assert!((lap + 1.0).abs() < 1e-4, "at ({x}, {y})");
        }
        // u = 0 on the bottom-right piece.
        for x in [0.1, 0.3, 0.49] {
            assert!(u.eval(x, 0.0).abs() < 1e-14);
        }
        // Zero normal derivative on the bottom-left piece, one-sided
        // second-order difference from inside the domain.
        for x in [-0.1, -0.3, -0.45] {
            let dy = (-3.0 * u.eval(x, 0.0) + 4.0 * u.eval(x, d) - u.eval(x, 2.0 * d)) / (2.0 * d);
            assert!(dy.abs() < 1e-4, "du/dy = {dy} at ({x}, 0)");
        }
        // Gradient agrees with finite differences in the interior.
        let (gx, gy) = u.gradient(0.2, 0.3).unwrap();
        let fdx = (u.eval(0.2 + 1e-6, 0.3) - u.eval(0.2 - 1e-6, 0.3)) / 2e-6;
        let fdy = (u.eval(0.2, 0.3 + 1e-6) - u.eval(0.2, 0.3 - 1e-6)) / 2e-6;
        assert!((gx - fdx).abs() < 1e-5);
        assert!((gy - fdy).abs() < 1e-5);
    }

    #[test]
    fn initial_mesh_shape() {
        let m = initial_mesh().unwrap();
        assert_eq!(m.n_vertices(), 9);
        assert_eq!(m.n_triangles(), 8);
    }

    #[test]
    fn discrete_system_is_solved_to_tolerance() {
        let mesh = Arc::new(initial_mesh().unwrap());
        let u_h = solve(mesh, 1, 1e-12).unwrap();
        // The corner vertex keeps the Dirichlet value zero.
        let pts = u_h.space().dof_points();
        for (dof, p) in pts.iter().enumerate() {
            if p[0].abs() < 1e-14 && p[1].abs() < 1e-14 {
                assert_eq!(u_h.coeffs()[dof], 0.0);
            }
        }
    }

    #[test]
    fn table_row_one_is_reproduced() {
        let mesh = Arc::new(initial_mesh().unwrap());
        let u_h = solve(mesh, 1, 1e-12).unwrap();
        let exact = CornerFields::new(0.0).unwrap().exact_solution();
        let h1 = h1_error(&u_h, &exact, SINGULAR_QUAD_DEGREE)
            .unwrap()
            .h1_error;
        assert!(
            (h1 - 4.21e-1).abs() <= 0.05 * 4.21e-1,
            "H1 error {h1:.4e} vs 4.21e-01"
        );
        let sisg = sisg_error(&u_h, INITIAL_EPSILON).unwrap();
        assert!(
            (sisg - 1.64e-1).abs() <= 0.05 * 1.64e-1,
            "filtered-derivative error {sisg:.4e} vs 1.64e-01"
        );
    }

    #[test]
    fn loose_tolerance_keeps_the_initial_mesh() {
        let outcome = adaptive_study(&[0.03], 1000).unwrap();
        assert_eq!(outcome.records.len(), 1);
        let rec = outcome.records[0];
        assert_eq!(rec.n_vertices, 9);
        assert!(rec.converged);
        assert_eq!(rec.epsilon, INITIAL_EPSILON);
    }

    #[test]
    fn vertex_counts_grow_as_tolerances_shrink() {
        let outcome = adaptive_study(&[0.03, 0.01, 0.005], 3000).unwrap();
        let n: Vec<usize> = outcome.records.iter().map(|r| r.n_vertices).collect();
        assert!(n[0] <= n[1] && n[1] <= n[2], "{n:?}");
        assert!(outcome.records.iter().all(|r| r.converged));
        // Errors shrink along the study.
        let e: Vec<f64> = outcome.records.iter().map(|r| r.h1_error).collect();
        assert!(e[0] >= e[1] && e[1] >= e[2], "{e:?}");
    }

    #[test]
    fn cap_is_reported() {
        let outcome = adaptive_study(&[0.001], 20).unwrap();
        assert!(!outcome.records[0].converged);
        assert!(outcome.records[0].n_vertices >= 20);
    }

    #[test]
    fn bad_tolerance_lists_rejected() {
        assert!(adaptive_study(&[], 100).is_err());
        assert!(adaptive_study(&[0.01, 0.02], 100).is_err());
        assert!(adaptive_study(&[0.0], 100).is_err());
    }

    #[test]
    fn dorfler_takes_the_largest_indicators_first() {
        let marked = dorfler_marking(&[0.1, 4.0, 0.2, 3.0, 0.7], 0.5);
        assert_eq!(marked, vec![1]);
        let marked = dorfler_marking(&[1.0, 1.0, 1.0, 1.0], 0.5);
        assert_eq!(marked, vec![0, 1]);
    }
}
