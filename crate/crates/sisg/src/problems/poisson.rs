//! Smooth Poisson demo: a manufactured oscillatory solution whose
//! x-derivative is filtered onto the continuous space.
//!
//! The solution u = -cos(4 pi x) sin(4 pi y) satisfies -lap u = f with
//! f = -32 pi^2 cos(4 pi x) sin(4 pi y); it vanishes on the horizontal
//! boundary sides but not on the vertical ones, so the solver takes the
//! full trace as Dirichlet data. The raw one-sided derivative of the
//! discrete solution jumps across every interior edge; its projection is
//! continuous by construction and converges to the exact derivative
//! 4 pi sin(4 pi x) sin(4 pi y) at the same order as the solution.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Result;
use crate::field::ScalarField;
use crate::galerkin::{solve_dirichlet, DirichletProblem};
use crate::mesh::{Diagonal, Mesh};
use crate::projection::{project, ProjectionProblem, Source};
use crate::space::{Deriv, Family, FeFunction, FunctionSpace};

pub fn exact_solution() -> ScalarField {
    ScalarField::with_gradient(
        |x, y| -(4.0 * PI * x).cos() * (4.0 * PI * y).sin(),
        |x, y| {
            (
                4.0 * PI * (4.0 * PI * x).sin() * (4.0 * PI * y).sin(),
                -4.0 * PI * (4.0 * PI * x).cos() * (4.0 * PI * y).cos(),
            )
        },
    )
}

/// x-derivative of the exact solution.
pub fn exact_x_derivative() -> ScalarField {
    ScalarField::new(|x, y| 4.0 * PI * (4.0 * PI * x).sin() * (4.0 * PI * y).sin())
}

/// y-derivative of the exact solution.
pub fn exact_y_derivative() -> ScalarField {
    ScalarField::new(|x, y| -4.0 * PI * (4.0 * PI * x).cos() * (4.0 * PI * y).cos())
}

pub fn forcing() -> ScalarField {
    ScalarField::new(|x, y| -32.0 * PI * PI * (4.0 * PI * x).cos() * (4.0 * PI * y).sin())
}

/// n-by-n right-triangle mesh of the unit square.
pub fn demo_mesh(n: usize) -> Result<Mesh> {
    Mesh::build_structured(n, n, (0.0, 0.0, 1.0, 1.0), Diagonal::Right)
}

/// Galerkin solution of the demo problem on an n-by-n mesh with
/// continuous elements of the given degree.
pub fn solve_demo(n: usize, degree: usize, solver_tol: f64) -> Result<FeFunction> {
    let mesh = Arc::new(demo_mesh(n)?);
    let space = FunctionSpace::new(mesh, Family::Cg, degree)?;
    let exact = exact_solution();
    let f = forcing();
    let mut problem = DirichletProblem::new(space, &f, &[1, 2, 3, 4], &exact);
    problem.solver_tol = solver_tol;
    solve_dirichlet(&problem)
}

/// Project a one-sided derivative of `u_h` onto its own (continuous)
/// space.
pub fn filtered_derivative(u_h: &FeFunction, deriv: Deriv) -> Result<FeFunction> {
    project(&ProjectionProblem::new(
        Arc::clone(u_h.space()),
        Source::Derivative(u_h, deriv),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::{h1_error, l2_error, max_interior_edge_jump};

    #[test]
    fn forcing_is_minus_laplacian_of_exact() {
        let u = exact_solution();
        let f = forcing();
        let d = 1e-4;
        for (x, y) in [(0.3, 0.4), (0.71, 0.12), (0.5, 0.9)] {
            let lap = (u.eval(x + d, y) + u.eval(x - d, y) + u.eval(x, y + d) + u.eval(x, y - d)
                - 4.0 * u.eval(x, y))
                / (d * d);
            assert!((f.eval(x, y) + lap).abs() < 1e-3, "at ({x}, {y})");
        }
    }

    #[test]
    fn exact_x_derivative_matches_gradient_field() {
        let u = exact_solution();
        let ux = exact_x_derivative();
        for (x, y) in [(0.2, 0.3), (0.9, 0.6)] {
            let (gx, _) = u.gradient(x, y).unwrap();
            assert!((gx - ux.eval(x, y)).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_energy_error_halves_three_times_per_refinement() {
        let exact = exact_solution();
        let e8 = h1_error(&solve_demo(8, 3, 1e-12).unwrap(), &exact, 10)
            .unwrap()
            .h1_seminorm_error;
        let e16 = h1_error(&solve_demo(16, 3, 1e-12).unwrap(), &exact, 10)
            .unwrap()
            .h1_seminorm_error;
        let order = (e8 / e16).log2();
        assert!((order - 3.0).abs() < 0.2, "observed energy order {order}");
    }

    #[test]
    fn filtered_derivative_is_continuous_while_raw_jumps() {
        let u_h = solve_demo(8, 3, 1e-12).unwrap();
        assert!(max_interior_edge_jump(&u_h, Deriv::Dx, 3) > 1e-3);
        let filtered = filtered_derivative(&u_h, Deriv::Dx).unwrap();
        let scale = filtered
            .coeffs()
            .iter()
            .fold(0.0f64, |a, &c| a.max(c.abs()));
        assert!(max_interior_edge_jump(&filtered, Deriv::Value, 3) <= 1e-9 * scale);
    }

    #[test]
    fn filtered_derivative_converges_to_exact() {
        let ux = exact_x_derivative();
        let mut errors = Vec::new();
        for n in [8usize, 16] {
            let u_h = solve_demo(n, 3, 1e-12).unwrap();
            let filtered = filtered_derivative(&u_h, Deriv::Dx).unwrap();
            errors.push(l2_error(&filtered, &ux, 10).unwrap());
        }
        let order = (errors[0] / errors[1]).log2();
        assert!(order > 2.5, "observed order {order} ({errors:?})");
    }

    #[test]
    fn galerkin_solution_minimizes_the_energy_error() {
        // Perturbing any single free dof must not decrease the energy
        // error, since the discrete solution is the energy projection.
        let exact = ScalarField::with_gradient(
            |x, y| x * (1.0 - x) * y * (1.0 - y),
            |x, y| {
                (
                    (1.0 - 2.0 * x) * y * (1.0 - y),
                    x * (1.0 - x) * (1.0 - 2.0 * y),
                )
            },
        );
        let f = ScalarField::new(|x, y| 2.0 * (x * (1.0 - x) + y * (1.0 - y)));
        let zero = ScalarField::constant(0.0);
        let mesh = Arc::new(demo_mesh(2).unwrap());
        let space = FunctionSpace::new(mesh, Family::Cg, 1).unwrap();
        let mut problem = DirichletProblem::new(Arc::clone(&space), &f, &[1, 2, 3, 4], &zero);
        problem.solver_tol = 1e-13;
        let u_h = solve_dirichlet(&problem).unwrap();
        let energy = |v: &FeFunction| {
            let r = h1_error(v, &exact, 8).unwrap().h1_seminorm_error;
            r * r
        };
        let base = energy(&u_h);
        // The 3x3-vertex grid has a single interior dof, at the center.
        let pts = space.dof_points();
        for (dof, p) in pts.iter().enumerate() {
            let interior = p[0] > 1e-12 && p[0] < 1.0 - 1e-12 && p[1] > 1e-12 && p[1] < 1.0 - 1e-12;
            if !interior {
                continue;
            }
            for delta in [1e-3, -1e-3] {
                let mut v = u_h.clone();
                v.set_coeff(dof, u_h.coeffs()[dof] + delta);
                assert!(energy(&v) >= base - 1e-12, "dof {dof}, delta {delta}");
            }
        }
    }
}
