//! Lagrange basis on the reference triangle at equispaced nodes.
//!
//! Nodes are ordered vertices first (at barycentric (k,0,0), (0,k,0),
//! (0,0,k)), then the interior nodes of each edge walked from its first
//! local vertex to its second, then element-interior nodes. Degree 0 is
//! the single centroid node with the constant basis.
//!
//! Basis functions are evaluated through the barycentric product form
//!   N_a(l) = prod_c prod_{j < a_c} (k l_c - j) / (a_c - j),
//! which is exact at the nodes by construction and differentiates
//! cleanly, so no Vandermonde solve is involved.

use crate::quadrature::QuadratureRule;

pub fn node_count(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Barycentric multi-indices (a0, a1, a2) with a0+a1+a2 = degree, in the
/// node order described above. Degree 0 yields the single index (0,0,0).
pub fn multi_indices(degree: usize) -> Vec<[usize; 3]> {
    let k = degree;
    if k == 0 {
        return vec![[0, 0, 0]];
    }
    let mut out = Vec::with_capacity(node_count(k));
    out.push([k, 0, 0]);
    out.push([0, k, 0]);
    out.push([0, 0, k]);
    for s in 1..k {
        out.push([k - s, s, 0]); // edge 0: v0 -> v1
    }
    for s in 1..k {
        out.push([0, k - s, s]); // edge 1: v1 -> v2
    }
    for s in 1..k {
        out.push([s, 0, k - s]); // edge 2: v2 -> v0
    }
    for a1 in 1..k {
        for a2 in 1..k {
            if a1 + a2 < k {
                out.push([k - a1 - a2, a1, a2]);
            }
        }
    }
    debug_assert_eq!(out.len(), node_count(k));
    out
}

/// Reference coordinates of the nodes.
pub fn nodes(degree: usize) -> Vec<[f64; 2]> {
    if degree == 0 {
        return vec![[1.0 / 3.0, 1.0 / 3.0]];
    }
    let k = degree as f64;
    multi_indices(degree)
        .iter()
        .map(|a| [a[1] as f64 / k, a[2] as f64 / k])
        .collect()
}

/// Local node indices lying on local edge `edge` (0: v0-v1, 1: v1-v2,
/// 2: v2-v0), walked from the edge's first vertex to its second,
/// endpoints included.
pub fn edge_nodes(degree: usize, edge: usize) -> Vec<usize> {
    let k = degree;
    let mut out = Vec::with_capacity(k + 1);
    out.push(edge); // first vertex of the edge
    let base = 3 + edge * k.saturating_sub(1);
    for s in 1..k {
        out.push(base + (s - 1));
    }
    out.push((edge + 1) % 3);
    out
}

/// One factor of the product form: value and derivative of
/// prod_{j<a} (k l - j) / (a - j) at l.
fn factor(a: usize, k: f64, l: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut dp = 0.0;
    for j in 0..a {
        let denom = (a - j) as f64;
        let f = (k * l - j as f64) / denom;
        dp = dp * f + p * (k / denom);
        p *= f;
    }
    (p, dp)
}

/// Values and reference-coordinate gradients of all basis functions at a
/// reference point.
pub fn eval(degree: usize, point: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
    let [x, y] = point;
    let l = [1.0 - x - y, x, y];
    debug_assert!(
        l.iter().all(|&c| c >= -1e-12),
        "point ({x}, {y}) outside the reference triangle"
    );
    let k = degree as f64;
    let idx = multi_indices(degree);
    let mut values = Vec::with_capacity(idx.len());
    let mut gradients = Vec::with_capacity(idx.len());
    for a in &idx {
        let (p0, d0) = factor(a[0], k, l[0]);
        let (p1, d1) = factor(a[1], k, l[1]);
        let (p2, d2) = factor(a[2], k, l[2]);
        values.push(p0 * p1 * p2);
        // dN/dl_c, then chain rule through l = (1-x-y, x, y).
        let g0 = d0 * p1 * p2;
        let g1 = p0 * d1 * p2;
        let g2 = p0 * p1 * d2;
        gradients.push([g1 - g0, g2 - g0]);
    }
    (values, gradients)
}

/// Basis values and reference gradients tabulated at a set of points,
/// indexed `[point][basis]`.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub values: Vec<Vec<f64>>,
    pub gradients: Vec<Vec<[f64; 2]>>,
}

pub fn tabulate(degree: usize, rule: &QuadratureRule) -> Tabulation {
    let mut values = Vec::with_capacity(rule.len());
    let mut gradients = Vec::with_capacity(rule.len());
    for p in &rule.points {
        let (v, g) = eval(degree, *p);
        values.push(v);
        gradients.push(g);
    }
    Tabulation { values, gradients }
}
