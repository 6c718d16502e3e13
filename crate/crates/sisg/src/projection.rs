//! Global L2 projection onto a finite-element space.
//!
//! The projection of a source s onto the target space V_h solves
//! M c = b with the mass matrix `M[i][j]` = integral of phi_i phi_j and
//! `b[i]` = integral of s phi_i, so the output matches the source against
//! every test function in V_h. The source may be an analytic field, a
//! finite-element function from another space on the same mesh, or an
//! elementwise one-sided derivative of one; the projection itself does
//! all the smoothing.
//!
//! The linear solve is global. That is what makes arbitrary meshes,
//! including strongly graded adaptive ones, work without any stencil or
//! kernel bookkeeping.

use std::sync::Arc;

use crate::basis;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::norms::{broken_weighted_sum, element_error_squares};
use crate::quadrature::quad_rule;
use crate::space::{Deriv, ElementGeometry, FeFunction, FunctionSpace};
use crate::sparse::{assemble, pcg_solve, SparseMatrix};
use crate::util::map_elements;

/// What gets projected.
pub enum Source<'a> {
    Field(&'a ScalarField),
    Function(&'a FeFunction),
    /// Elementwise one-sided derivative of a finite-element function.
    Derivative(&'a FeFunction, Deriv),
}

pub struct ProjectionProblem<'a> {
    pub target: Arc<FunctionSpace>,
    pub source: Source<'a>,
    /// Right-hand-side quadrature degree; defaults to 2k+4 for analytic
    /// sources and 2k+2 for finite-element ones.
    pub quadrature_degree: Option<usize>,
    pub solver_tol: f64,
    pub max_iterations: usize,
}

impl<'a> ProjectionProblem<'a> {
    pub fn new(target: Arc<FunctionSpace>, source: Source<'a>) -> Self {
        ProjectionProblem {
            target,
            source,
            quadrature_degree: None,
            solver_tol: 1e-12,
            max_iterations: 10_000,
        }
    }

    fn rhs_quad_degree(&self) -> usize {
        let k = self.target.degree();
        self.quadrature_degree.unwrap_or(match self.source {
            Source::Field(_) => 2 * k + 4,
            Source::Function(_) | Source::Derivative(_, _) => 2 * k + 2,
        })
    }
}

/// Mass matrix of `space`: `M[i][j]` = integral of phi_i phi_j.
pub fn assemble_mass(space: &FunctionSpace, quad_degree: usize) -> Result<SparseMatrix> {
    let k = space.degree();
    if quad_degree < 2 * k {
        return Err(Error::InvalidArgument(format!(
            "mass quadrature degree {quad_degree} below 2k = {}",
            2 * k
        )));
    }
    let mesh = space.mesh();
    let rule = quad_rule(quad_degree)?;
    let tab = basis::tabulate(k, &rule);
    let nloc = space.local_dim();
    let element_triplets: Vec<Vec<(usize, usize, f64)>> = map_elements(mesh.n_triangles(), |e| {
        let det = ElementGeometry::of(mesh, e).det;
        let dofs = space.element_dofs(e);
        let mut local = vec![0.0; nloc * nloc];
        for (q, w) in rule.weights.iter().enumerate() {
            let vals = &tab.values[q];
            let scale = w * det;
            for i in 0..nloc {
                let vi = scale * vals[i];
                for j in 0..nloc {
                    local[i * nloc + j] += vi * vals[j];
                }
            }
        }
        let mut out = Vec::with_capacity(nloc * nloc);
        for i in 0..nloc {
            for j in 0..nloc {
                out.push((dofs[i], dofs[j], local[i * nloc + j]));
            }
        }
        out
    });
    assemble(space.n_dofs(), element_triplets.into_iter().flatten())
}

/// Compute the projection. The result lives in the target space and
/// satisfies the defining equations up to the solver tolerance.
pub fn project(problem: &ProjectionProblem) -> Result<FeFunction> {
    let target = &problem.target;
    let mesh = target.mesh();

    if let Source::Function(f) | Source::Derivative(f, _) = &problem.source {
        if !Arc::ptr_eq(f.space().mesh(), mesh) {
            return Err(Error::SpaceMismatch(
                "source and target must live on the same mesh".into(),
            ));
        }
    }

    let mass = assemble_mass(target, 2 * target.degree())?;
    let rhs = assemble_rhs(problem)?;
    let sol = pcg_solve(&mass, &rhs, problem.solver_tol, problem.max_iterations)?;
    FeFunction::from_coeffs(Arc::clone(target), sol.x)
}

fn assemble_rhs(problem: &ProjectionProblem) -> Result<Vec<f64>> {
    let target = &problem.target;
    let mesh = target.mesh();
    let rule = quad_rule(problem.rhs_quad_degree())?;
    let tab = basis::tabulate(target.degree(), &rule);
    let source_tab = match &problem.source {
        Source::Function(f) | Source::Derivative(f, _) => {
            Some(basis::tabulate(f.space().degree(), &rule))
        }
        Source::Field(_) => None,
    };

    let per_element: Vec<Result<Vec<f64>>> = map_elements(mesh.n_triangles(), |e| {
        let geo = ElementGeometry::of(mesh, e);
        let nloc = target.local_dim();
        let mut local = vec![0.0; nloc];
        for (q, w) in rule.weights.iter().enumerate() {
            let s = match &problem.source {
                Source::Field(field) => {
                    let p = geo.to_physical(rule.points[q]);
                    field.try_eval(p[0], p[1])?
                }
                Source::Function(f) => {
                    let st = source_tab.as_ref().unwrap();
                    f.space()
                        .element_dofs(e)
                        .iter()
                        .zip(&st.values[q])
                        .map(|(&d, v)| f.coeffs()[d] * v)
                        .sum()
                }
                Source::Derivative(f, deriv) => {
                    let st = source_tab.as_ref().unwrap();
                    let idx = match deriv {
                        Deriv::Dx => 0,
                        Deriv::Dy => 1,
                        Deriv::Value => {
                            return Err(Error::InvalidArgument(
                                "derivative source must be dx or dy".into(),
                            ))
                        }
                    };
                    f.space()
                        .element_dofs(e)
                        .iter()
                        .zip(&st.gradients[q])
                        .map(|(&d, g)| f.coeffs()[d] * geo.gradient(*g)[idx])
                        .sum()
                }
            };
            let scale = w * geo.det * s;
            for (i, v) in tab.values[q].iter().enumerate() {
                local[i] += scale * v;
            }
        }
        Ok(local)
    });

    let mut rhs = vec![0.0; target.n_dofs()];
    for (e, local) in per_element.into_iter().enumerate() {
        let local = local?;
        for (i, &d) in problem.target.element_dofs(e).iter().enumerate() {
            rhs[d] += local[i];
        }
    }
    Ok(rhs)
}

/// Euclidean norm of the order-m derivative tensor of `u`, from the
/// analytic gradient by nested central differences for m >= 2.
fn derivative_tensor_norm(u: &ScalarField, x: f64, y: f64, order: usize) -> Result<f64> {
    match order {
        1 => {
            let (gx, gy) = u.try_gradient(x, y)?;
            Ok((gx * gx + gy * gy).sqrt())
        }
        2 => {
            let [uxx, uxy, uyy] = hessian(u, x, y, 1e-4)?;
            Ok((uxx * uxx + 2.0 * uxy * uxy + uyy * uyy).sqrt())
        }
        3 => {
            let d = 1e-3;
            let hp = hessian(u, x + d, y, 1e-4)?;
            let hm = hessian(u, x - d, y, 1e-4)?;
            let kp = hessian(u, x, y + d, 1e-4)?;
            let km = hessian(u, x, y - d, 1e-4)?;
            let uxxx = (hp[0] - hm[0]) / (2.0 * d);
            let uxxy = (kp[0] - km[0]) / (2.0 * d);
            let uxyy = (hp[2] - hm[2]) / (2.0 * d);
            let uyyy = (kp[2] - km[2]) / (2.0 * d);
            Ok((uxxx * uxxx + 3.0 * uxxy * uxxy + 3.0 * uxyy * uxyy + uyyy * uyyy).sqrt())
        }
        _ => Err(Error::InvalidArgument(format!(
            "derivative order {order} unsupported (max 3)"
        ))),
    }
}

fn hessian(u: &ScalarField, x: f64, y: f64, d: f64) -> Result<[f64; 3]> {
    let (gxp, gyp) = u.try_gradient(x + d, y)?;
    let (gxm, gym) = u.try_gradient(x - d, y)?;
    let (hxp, hyp) = u.try_gradient(x, y + d)?;
    let (hxm, hym) = u.try_gradient(x, y - d)?;
    let uxx = (gxp - gxm) / (2.0 * d);
    let uyy = (hyp - hym) / (2.0 * d);
    let uxy = 0.5 * ((hxp - hxm) / (2.0 * d) + (gyp - gym) / (2.0 * d));
    Ok([uxx, uxy, uyy])
}

/// Ratio of the broken error sum of a projection to the broken
/// higher-derivative sum of the projected field:
///
///   sum_{m<=t} sum_e h_e^{2m} |d^m(u - proj)|^2_e
///   ----------------------------------------------
///   sum_e h_e^{2(k+1)} |d^{k+1} u|^2_e
///
/// A bounded ratio across refinements is the computable form of the
/// projection error estimate. If both sides vanish (u a polynomial of
/// degree <= k) the ratio is 0 by convention.
pub fn broken_estimate_ratio(
    u: &ScalarField,
    proj: &FeFunction,
    k: usize,
    t: usize,
) -> Result<f64> {
    let mesh = proj.space().mesh();
    let quad_err = 2 * proj.space().degree() + 4;

    let mut per_order: Vec<Vec<f64>> = Vec::new();
    for m in 0..=t {
        per_order.push(element_error_squares(proj, u, m, quad_err)?);
    }
    let terms: Vec<(usize, i32)> = (0..=t).map(|m| (m, 2 * m as i32)).collect();
    let lhs = broken_weighted_sum(mesh, &terms, |e, m| Ok(per_order[m][e]))?;

    // Right side: h_e^{2(k+1)} times the elementwise squared L2 norm of
    // the (k+1)-th derivative of u, by quadrature.
    let rule = quad_rule(quad_err)?;
    let quality = mesh.quality_report()?;
    let mut rhs = 0.0;
    for e in 0..mesh.n_triangles() {
        let geo = ElementGeometry::of(mesh, e);
        let mut acc = 0.0;
        for (q, w) in rule.weights.iter().enumerate() {
            let p = geo.to_physical(rule.points[q]);
            let dnorm = derivative_tensor_norm(u, p[0], p[1], k + 1)?;
            acc += w * geo.det * dnorm * dnorm;
        }
        rhs += quality.h[e].powi(2 * (k as i32 + 1)) * acc;
    }

    if rhs <= 1e-16 {
        if lhs <= 1e-18 {
            return Ok(0.0);
        }
        return Err(Error::ZeroReference { lhs });
    }
    Ok(lhs / rhs)
}
