//! Continuous-Galerkin Poisson solves with Dirichlet boundary conditions.
//!
//! Dirichlet data is interpolated nodally on the dofs of marked boundary
//! edges and eliminated symmetrically: the reduced system keeps only free
//! dofs, with the constrained columns moved to the right-hand side.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::basis;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::quadrature::quad_rule;
use crate::space::{ElementGeometry, Family, FeFunction, FunctionSpace};
use crate::sparse::{assemble, pcg_solve, SparseMatrix};
use crate::util::map_elements;

/// Stiffness matrix `K[i][j]` = integral of grad phi_i . grad phi_j.
pub fn assemble_stiffness(space: &FunctionSpace, quad_degree: usize) -> Result<SparseMatrix> {
    let mesh = space.mesh();
    let rule = quad_rule(quad_degree)?;
    let tab = basis::tabulate(space.degree(), &rule);
    let nloc = space.local_dim();
    let element_triplets: Vec<Vec<(usize, usize, f64)>> = map_elements(mesh.n_triangles(), |e| {
        let geo = ElementGeometry::of(mesh, e);
        let dofs = space.element_dofs(e);
        let mut local = vec![0.0; nloc * nloc];
        for (q, w) in rule.weights.iter().enumerate() {
            let grads: Vec<[f64; 2]> = tab.gradients[q].iter().map(|g| geo.gradient(*g)).collect();
            let scale = w * geo.det;
            for i in 0..nloc {
                for j in 0..nloc {
                    local[i * nloc + j] +=
                        scale * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
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

/// Load vector `b[i]` = integral of f phi_i.
pub fn assemble_load(
    space: &FunctionSpace,
    f: &ScalarField,
    quad_degree: usize,
) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    let rule = quad_rule(quad_degree)?;
    let tab = basis::tabulate(space.degree(), &rule);
    let per_element: Vec<Result<Vec<f64>>> = map_elements(mesh.n_triangles(), |e| {
        let geo = ElementGeometry::of(mesh, e);
        let mut local = vec![0.0; space.local_dim()];
        for (q, w) in rule.weights.iter().enumerate() {
            let p = geo.to_physical(rule.points[q]);
            let scale = w * geo.det * f.try_eval(p[0], p[1])?;
            for (i, v) in tab.values[q].iter().enumerate() {
                local[i] += scale * v;
            }
        }
        Ok(local)
    });
    let mut b = vec![0.0; space.n_dofs()];
    for (e, local) in per_element.into_iter().enumerate() {
        let local = local?;
        for (i, &d) in space.element_dofs(e).iter().enumerate() {
            b[d] += local[i];
        }
    }
    Ok(b)
}

/// Dofs constrained to nodal values of `value` on boundary edges whose
/// marker appears in `markers`, keyed by global dof index.
pub fn dirichlet_dofs(
    space: &FunctionSpace,
    markers: &[u32],
    value: &ScalarField,
) -> Result<BTreeMap<usize, f64>> {
    let mesh = space.mesh();
    let k = space.degree();
    // Locate each boundary edge inside its owning element.
    let mut edge_owner: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for (e, t) in mesh.triangles().iter().enumerate() {
        for i in 0..3 {
            let key = sorted(t[i], t[(i + 1) % 3]);
            edge_owner.entry(key).or_insert((e, i));
        }
    }
    let points = space.dof_points();
    let mut out = BTreeMap::new();
    for be in mesh.boundary_edges() {
        if !markers.contains(&be.marker) {
            continue;
        }
        let key = sorted(be.vertices[0], be.vertices[1]);
        let (e, local_edge) = *edge_owner.get(&key).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "boundary edge ({}, {}) not found in any element",
                key.0, key.1
            ))
        })?;
        for loc in basis::edge_nodes(k, local_edge) {
            let dof = space.element_dofs(e)[loc];
            let p = points[dof];
            out.insert(dof, value.try_eval(p[0], p[1])?);
        }
    }
    Ok(out)
}

fn sorted(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub struct DirichletProblem<'a> {
    pub space: Arc<FunctionSpace>,
    /// Right-hand side of -laplace(u) = f.
    pub forcing: &'a ScalarField,
    /// Markers of the Dirichlet part of the boundary; every other marker
    /// is treated naturally (zero Neumann).
    pub dirichlet_markers: &'a [u32],
    pub dirichlet_value: &'a ScalarField,
    pub solver_tol: f64,
    pub max_iterations: usize,
}

impl<'a> DirichletProblem<'a> {
    pub fn new(
        space: Arc<FunctionSpace>,
        forcing: &'a ScalarField,
        dirichlet_markers: &'a [u32],
        dirichlet_value: &'a ScalarField,
    ) -> Self {
        DirichletProblem {
            space,
            forcing,
            dirichlet_markers,
            dirichlet_value,
            solver_tol: 1e-10,
            max_iterations: 100_000,
        }
    }
}

/// Galerkin solve of the Poisson problem with the given boundary data.
pub fn solve_dirichlet(problem: &DirichletProblem) -> Result<FeFunction> {
    let space = &problem.space;
    if space.family() != Family::Cg {
        return Err(Error::InvalidArgument(
            "Dirichlet solves need a continuous space".into(),
        ));
    }
    let k = space.degree();
    let stiffness = assemble_stiffness(space, 2 * k)?;
    let load = assemble_load(space, problem.forcing, 2 * k + 4)?;
    let constrained = dirichlet_dofs(space, problem.dirichlet_markers, problem.dirichlet_value)?;
    if constrained.is_empty() {
        return Err(Error::InvalidArgument(
            "no Dirichlet dofs found; check the marker set".into(),
        ));
    }

    let n = space.n_dofs();
    let mut new_index = vec![usize::MAX; n];
    let mut free = Vec::with_capacity(n - constrained.len());
    for (dof, slot) in new_index.iter_mut().enumerate() {
        if !constrained.contains_key(&dof) {
            *slot = free.len();
            free.push(dof);
        }
    }

    // Reduced system over free dofs; constrained columns shift the load.
    let mut triplets = Vec::new();
    let mut rhs = Vec::with_capacity(free.len());
    for (fi, &dof) in free.iter().enumerate() {
        let (cols, vals) = stiffness.row(dof);
        let mut b = load[dof];
        for (c, v) in cols.iter().zip(vals) {
            match constrained.get(c) {
                Some(g) => b -= v * g,
                None => triplets.push((fi, new_index[*c], *v)),
            }
        }
        rhs.push(b);
    }
    let reduced = assemble(free.len(), triplets)?;
    let sol = pcg_solve(&reduced, &rhs, problem.solver_tol, problem.max_iterations)?;

    let mut coeffs = vec![0.0; n];
    for (&dof, &g) in &constrained {
        coeffs[dof] = g;
    }
    for (fi, &dof) in free.iter().enumerate() {
        coeffs[dof] = sol.x[fi];
    }
    FeFunction::from_coeffs(Arc::clone(space), coeffs)
}
