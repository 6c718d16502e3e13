//! Scalar finite-element spaces on triangulations.
//!
//! Two families: continuous Lagrange (`Cg`, degree >= 1) and
//! discontinuous Lagrange (`Dg`, degree >= 0). Continuous spaces share
//! vertex and edge degrees of freedom across elements; discontinuous
//! spaces number every element independently.

use std::collections::HashMap;
use std::sync::Arc;

use crate::basis;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::mesh::Mesh;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Cg,
    Dg,
}

/// What to evaluate of a finite-element function: the value or one of its
/// physical-coordinate first derivatives, always one-sided per element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Deriv {
    Value,
    Dx,
    Dy,
}

#[derive(Debug)]
pub struct FunctionSpace {
    mesh: Arc<Mesh>,
    family: Family,
    degree: usize,
    /// Flat element-to-global map, stride `local_dim`.
    dof_map: Vec<usize>,
    n_dofs: usize,
}

impl FunctionSpace {
    pub fn new(mesh: Arc<Mesh>, family: Family, degree: usize) -> Result<Arc<Self>> {
        if family == Family::Cg && degree == 0 {
            return Err(Error::InvalidArgument(
                "continuous spaces need degree >= 1".into(),
            ));
        }
        let k = degree;
        let nloc = basis::node_count(k);
        let nt = mesh.n_triangles();
        let mut dof_map = vec![0usize; nloc * nt];
        let n_dofs;
        match family {
            Family::Dg => {
                for (i, d) in dof_map.iter_mut().enumerate() {
                    *d = i;
                }
                n_dofs = nloc * nt;
            }
            Family::Cg => {
                let nv = mesh.n_vertices();
                let per_edge = k - 1;
                let n_interior = nloc - 3 - 3 * per_edge;
                // Edges numbered in first-seen element order.
                let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
                for t in mesh.triangles() {
                    for i in 0..3 {
                        let (a, b) = ordered(t[i], t[(i + 1) % 3]);
                        let next = edge_ids.len();
                        edge_ids.entry((a, b)).or_insert(next);
                    }
                }
                let n_edges = edge_ids.len();
                let interior_base = nv + n_edges * per_edge;
                for (e, t) in mesh.triangles().iter().enumerate() {
                    let dofs = &mut dof_map[e * nloc..(e + 1) * nloc];
                    dofs[0] = t[0];
                    dofs[1] = t[1];
                    dofs[2] = t[2];
                    for edge in 0..3 {
                        let (p, q) = (t[edge], t[(edge + 1) % 3]);
                        let (a, b) = ordered(p, q);
                        let base = nv + edge_ids[&(a, b)] * per_edge;
                        for s in 1..k {
                            // Edge dofs run from the lower-numbered vertex.
                            let slot = if p < q { s - 1 } else { per_edge - s };
                            dofs[3 + edge * per_edge + (s - 1)] = base + slot;
                        }
                    }
                    for i in 0..n_interior {
                        dofs[3 + 3 * per_edge + i] = interior_base + e * n_interior + i;
                    }
                }
                n_dofs = interior_base + nt * n_interior;
            }
        }
        Ok(Arc::new(FunctionSpace {
            mesh,
            family,
            degree,
            dof_map,
            n_dofs,
        }))
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Highest derivative order controlled across element boundaries:
    /// 1 for continuous spaces, 0 for discontinuous ones.
    pub fn continuity_order(&self) -> usize {
        match self.family {
            Family::Cg => 1,
            Family::Dg => 0,
        }
    }

    pub fn local_dim(&self) -> usize {
        basis::node_count(self.degree)
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn element_dofs(&self, e: usize) -> &[usize] {
        let nloc = self.local_dim();
        &self.dof_map[e * nloc..(e + 1) * nloc]
    }

    /// Physical coordinates of every degree of freedom. Shared dofs take
    /// the coordinates computed from the first element that owns them.
    pub fn dof_points(&self) -> Vec<[f64; 2]> {
        let ref_nodes = basis::nodes(self.degree);
        let mut pts = vec![[f64::NAN, f64::NAN]; self.n_dofs];
        let mut set = vec![false; self.n_dofs];
        for e in 0..self.mesh.n_triangles() {
            let [p0, p1, p2] = self.mesh.corners(e);
            for (loc, node) in ref_nodes.iter().enumerate() {
                let dof = self.element_dofs(e)[loc];
                if !set[dof] {
                    set[dof] = true;
                    let l0 = 1.0 - node[0] - node[1];
                    pts[dof] = [
                        l0 * p0[0] + node[0] * p1[0] + node[1] * p2[0],
                        l0 * p0[1] + node[0] * p1[1] + node[1] * p2[1],
                    ];
                }
            }
        }
        pts
    }

    /// Nodal interpolant: each coefficient is the field value at its node.
    pub fn interpolate(self: &Arc<Self>, field: &ScalarField) -> Result<FeFunction> {
        let pts = self.dof_points();
        let mut coeffs = Vec::with_capacity(self.n_dofs);
        for p in &pts {
            coeffs.push(field.try_eval(p[0], p[1])?);
        }
        Ok(FeFunction {
            space: Arc::clone(self),
            coeffs,
        })
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Affine element geometry: Jacobian, determinant and the pieces needed
/// to push reference gradients to physical coordinates.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry {
    pub origin: [f64; 2],
    pub jac: [[f64; 2]; 2],
    pub det: f64,
}

impl ElementGeometry {
    pub fn of(mesh: &Mesh, e: usize) -> Self {
        let [p0, p1, p2] = mesh.corners(e);
        let jac = [
            [p1[0] - p0[0], p2[0] - p0[0]],
            [p1[1] - p0[1], p2[1] - p0[1]],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        ElementGeometry {
            origin: p0,
            jac,
            det,
        }
    }

    pub fn to_physical(&self, r: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * r[0] + self.jac[0][1] * r[1],
            self.origin[1] + self.jac[1][0] * r[0] + self.jac[1][1] * r[1],
        ]
    }

    pub fn to_reference(&self, x: [f64; 2]) -> [f64; 2] {
        let b = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [
            (self.jac[1][1] * b[0] - self.jac[0][1] * b[1]) / self.det,
            (-self.jac[1][0] * b[0] + self.jac[0][0] * b[1]) / self.det,
        ]
    }

    /// Push a reference gradient to physical coordinates (J^{-T} g).
    pub fn gradient(&self, g: [f64; 2]) -> [f64; 2] {
        [
            (self.jac[1][1] * g[0] - self.jac[1][0] * g[1]) / self.det,
            (-self.jac[0][1] * g[0] + self.jac[0][0] * g[1]) / self.det,
        ]
    }
}

/// A finite-element function: a coefficient vector bound to its space.
#[derive(Clone, Debug)]
pub struct FeFunction {
    space: Arc<FunctionSpace>,
    coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn zeros(space: Arc<FunctionSpace>) -> Self {
        let n = space.n_dofs();
        FeFunction {
            space,
            coeffs: vec![0.0; n],
        }
    }

    pub fn from_coeffs(space: Arc<FunctionSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.n_dofs() {
            return Err(Error::SpaceMismatch(format!(
                "coefficient vector has length {}, space has {} dofs",
                coeffs.len(),
                space.n_dofs()
            )));
        }
        Ok(FeFunction { space, coeffs })
    }

    pub fn space(&self) -> &Arc<FunctionSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, i: usize, v: f64) {
        self.coeffs[i] = v;
    }

    /// Value or one-sided derivative on element `e` at reference
    /// coordinates `point`. Panics if `e` is out of range.
    pub fn eval(&self, e: usize, point: [f64; 2], deriv: Deriv) -> f64 {
        let (values, gradients) = basis::eval(self.space.degree(), point);
        let dofs = self.space.element_dofs(e);
        match deriv {
            Deriv::Value => dofs
                .iter()
                .zip(&values)
                .map(|(&d, v)| self.coeffs[d] * v)
                .sum(),
            Deriv::Dx | Deriv::Dy => {
                let geo = ElementGeometry::of(self.space.mesh(), e);
                let idx = if deriv == Deriv::Dx { 0 } else { 1 };
                dofs.iter()
                    .zip(&gradients)
                    .map(|(&d, g)| self.coeffs[d] * geo.gradient(*g)[idx])
                    .sum()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Diagonal;

    fn unit_square(n: usize) -> Arc<Mesh> {
        Arc::new(Mesh::build_structured(n, n, (0.0, 0.0, 1.0, 1.0), Diagonal::Right).unwrap())
    }

    #[test]
    fn dof_counts() {
        let mesh = unit_square(2); // 9 vertices, 8 triangles, 16 edges
        for (family, k, expect) in [
            (Family::Cg, 1, 9),
            (Family::Cg, 2, 9 + 16),
            (Family::Cg, 3, 9 + 2 * 16 + 8),
            (Family::Dg, 0, 8),
            (Family::Dg, 1, 24),
            (Family::Dg, 2, 48),
        ] {
            let s = FunctionSpace::new(Arc::clone(&mesh), family, k).unwrap();
            assert_eq!(s.n_dofs(), expect, "{family:?} degree {k}");
            assert_eq!(s.local_dim(), (k + 1) * (k + 2) / 2);
        }
    }

    #[test]
    fn cg_degree_zero_rejected() {
        let mesh = unit_square(1);
        assert!(FunctionSpace::new(mesh, Family::Cg, 0).is_err());
    }

    #[test]
    fn shared_edge_dofs_agree_between_elements() {
        let mesh = unit_square(2);
        for k in 1..=4 {
            let s = FunctionSpace::new(Arc::clone(&mesh), Family::Cg, k).unwrap();
            let pts = s.dof_points();
            // Recompute each dof's position from every element owning it;
            // shared dofs must land on the same physical point.
            let ref_nodes = basis::nodes(k);
            for e in 0..mesh.n_triangles() {
                let geo = ElementGeometry::of(&mesh, e);
                for (loc, rn) in ref_nodes.iter().enumerate() {
                    let dof = s.element_dofs(e)[loc];
                    let p = geo.to_physical(*rn);
                    assert!(
                        (p[0] - pts[dof][0]).abs() < 1e-12 && (p[1] - pts[dof][1]).abs() < 1e-12,
                        "k={k} element {e} local {loc}"
                    );
                }
            }
        }
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let mesh = unit_square(3);
        for k in 1..=4usize {
            let s = FunctionSpace::new(Arc::clone(&mesh), Family::Cg, k).unwrap();
            let kf = k as i32;
            let poly = ScalarField::new(move |x, y| {
                (x + 0.5 * y).powi(kf) - 2.0 * x * y.powi(kf - 1) + 1.0
            });
            let f = s.interpolate(&poly).unwrap();
            // Check at off-node points of a few elements.
            for e in [0, 3, 7] {
                let geo = ElementGeometry::of(&mesh, e);
                for r in [[0.21, 0.33], [0.05, 0.61]] {
                    let p = geo.to_physical(r);
                    let diff = (f.eval(e, r, Deriv::Value) - poly.eval(p[0], p[1])).abs();
                    assert!(diff < 1e-12, "k={k} e={e}: {diff}");
                }
            }
        }
    }

    #[test]
    fn interpolating_constant_gives_unit_coefficients() {
        let mesh = unit_square(2);
        for (family, k) in [
            (Family::Cg, 1),
            (Family::Cg, 3),
            (Family::Dg, 0),
            (Family::Dg, 2),
        ] {
            let s = FunctionSpace::new(Arc::clone(&mesh), family, k).unwrap();
            let f = s.interpolate(&ScalarField::constant(1.0)).unwrap();
            assert!(f.coeffs().iter().all(|&c| (c - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn derivative_of_linear_interpolant_is_exact() {
        let mesh = unit_square(2);
        let s = FunctionSpace::new(Arc::clone(&mesh), Family::Cg, 1).unwrap();
        let f = s.interpolate(&ScalarField::new(|x, _| x)).unwrap();
        for e in 0..mesh.n_triangles() {
            let dx = f.eval(e, [0.3, 0.3], Deriv::Dx);
            let dy = f.eval(e, [0.3, 0.3], Deriv::Dy);
            assert!((dx - 1.0).abs() < 1e-13);
            assert!(dy.abs() < 1e-13);
        }
    }

    #[test]
    fn piecewise_gradient_of_quadratic_interpolant_jumps() {
        let mesh = unit_square(2);
        let s = FunctionSpace::new(Arc::clone(&mesh), Family::Cg, 1).unwrap();
        let f = s.interpolate(&ScalarField::new(|x, _| x * x)).unwrap();
        // Some pair of adjacent elements must disagree on the one-sided
        // x-derivative of the piecewise-linear interpolant.
        let centroid = [1.0 / 3.0, 1.0 / 3.0];
        let max_jump = mesh
            .interior_edges()
            .iter()
            .map(|(_, [e1, e2])| {
                (f.eval(*e1, centroid, Deriv::Dx) - f.eval(*e2, centroid, Deriv::Dx)).abs()
            })
            .fold(0.0f64, f64::max);
        assert!(max_jump > 0.1, "max jump {max_jump}");
    }

    #[test]
    fn dg0_derivatives_vanish() {
        let mesh = unit_square(2);
        let s = FunctionSpace::new(Arc::clone(&mesh), Family::Dg, 0).unwrap();
        let f = s.interpolate(&ScalarField::new(|x, y| x + y)).unwrap();
        for e in 0..mesh.n_triangles() {
            assert_eq!(f.eval(e, [0.25, 0.25], Deriv::Dx), 0.0);
            assert_eq!(f.eval(e, [0.25, 0.25], Deriv::Dy), 0.0);
        }
    }

    #[test]
    fn singular_field_at_a_node_is_reported() {
        let mesh = unit_square(1);
        let s = FunctionSpace::new(Arc::clone(&mesh), Family::Cg, 1).unwrap();
        let f = ScalarField::new(|x, y| 1.0 / (x + y));
        assert!(matches!(
            s.interpolate(&f),
            Err(Error::SingularEvaluation { .. })
        ));
    }

    #[test]
    fn geometry_roundtrip() {
        let mesh = unit_square(2);
        let geo = ElementGeometry::of(&mesh, 5);
        for r in [[0.1, 0.2], [0.7, 0.1], [0.0, 0.0]] {
            let x = geo.to_physical(r);
            let back = geo.to_reference(x);
            assert!((back[0] - r[0]).abs() < 1e-14);
            assert!((back[1] - r[1]).abs() < 1e-14);
        }
        assert!((geo.det - 2.0 * mesh.area(5)).abs() < 1e-14);
    }
}
