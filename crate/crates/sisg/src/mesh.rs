//! Conforming 2D triangular meshes over rectangular domains.
//!
//! A mesh is immutable once built; [`Mesh::refine`] returns a new mesh.
//! Refinement is newest-vertex bisection: each triangle carries a
//! refinement edge (initialized to the hypotenuse for structured grids,
//! to the longest edge otherwise) and is only ever split through it, with
//! a conformity closure so the result never has hanging vertices. For the
//! structured 45-degree right-triangle grids used throughout, bisection
//! reproduces similar triangles, so element quality is preserved exactly.
//!
//! Boundary edges carry small integer markers: 1 bottom, 2 right, 3 top,
//! 4 left. When the rectangle spans x = 0, the bottom side is split at
//! the origin into marker 5 for x < 0 and marker 1 for x >= 0, which is
//! how the mixed boundary condition of the corner problem is expressed.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// One boundary edge: vertex pair (oriented as stored in its triangle)
/// plus a marker identifying the boundary part it belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub marker: u32,
}

/// How structured grid cells are split into triangles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Diagonal {
    /// Diagonal from bottom-left to top-right, two triangles per cell.
    Right,
    /// Diagonal from bottom-right to top-left, two triangles per cell.
    Left,
    /// Both diagonals with a cell-center vertex, four triangles per cell.
    Crossed,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    /// Local index of the bisection edge; edge `i` joins local vertices
    /// `i` and `(i + 1) % 3`.
    refinement_edge: Vec<u8>,
}

/// Per-mesh element quality data.
///
/// `h_e` is the diameter of the smallest circle containing the element
/// (longest edge for right or obtuse triangles, circumdiameter for acute
/// ones); `rho_e` the diameter of the inscribed circle. `gamma` bounds
/// the elementwise ratio, `quasi_uniform_ratio` the global one.
#[derive(Clone, Debug)]
pub struct QualityReport {
    pub h: Vec<f64>,
    pub rho: Vec<f64>,
    pub gamma: f64,
    pub quasi_uniform_ratio: f64,
}

impl QualityReport {
    pub fn h_max(&self) -> f64 {
        self.h.iter().cloned().fold(0.0, f64::max)
    }

    pub fn h_min(&self) -> f64 {
        self.h.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

impl Mesh {
    /// Build a mesh from raw data, validating conformity and orientation.
    /// Refinement edges are initialized to the longest edge of each
    /// triangle (lowest local index on ties).
    pub fn from_parts(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        let refinement_edge = triangles
            .iter()
            .map(|t| {
                let mut best = 0u8;
                let mut best_len = -1.0;
                for i in 0..3 {
                    let len = dist(vertices[t[i]], vertices[t[(i + 1) % 3]]);
                    if len > best_len {
                        best_len = len;
                        best = i as u8;
                    }
                }
                best
            })
            .collect();
        let mesh = Mesh {
            vertices,
            triangles,
            boundary_edges,
            refinement_edge,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Structured grid of `nx` by `ny` rectangles over `rect`
    /// `(x0, y0, x1, y1)`, each split according to `diag`.
    pub fn build_structured(
        nx: usize,
        ny: usize,
        rect: (f64, f64, f64, f64),
        diag: Diagonal,
    ) -> Result<Self> {
        let (x0, y0, x1, y1) = rect;
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid must have at least one cell per direction, got {nx} x {ny}"
            )));
        }
        if x1 <= x0 || y1 <= y0 {
            return Err(Error::InvalidArgument(format!(
                "inverted or degenerate rectangle ({x0}, {y0}, {x1}, {y1})"
            )));
        }

        let dx = (x1 - x0) / nx as f64;
        let dy = (y1 - y0) / ny as f64;
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                // Endpoints exactly on the rectangle corners.
                let x = if i == nx { x1 } else { x0 + i as f64 * dx };
                let y = if j == ny { y1 } else { y0 + j as f64 * dy };
                vertices.push([x, y]);
            }
        }
        let vid = |i: usize, j: usize| j * (nx + 1) + i;

        let mut triangles = Vec::new();
        let mut refinement_edge = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let bl = vid(i, j);
                let br = vid(i + 1, j);
                let tr = vid(i + 1, j + 1);
                let tl = vid(i, j + 1);
                match diag {
                    Diagonal::Right => {
                        // Hypotenuse bl-tr stored first so it is the
                        // refinement edge.
                        triangles.push([tr, bl, br]);
                        triangles.push([bl, tr, tl]);
                        refinement_edge.extend([0, 0]);
                    }
                    Diagonal::Left => {
                        triangles.push([br, tl, bl]);
                        triangles.push([tl, br, tr]);
                        refinement_edge.extend([0, 0]);
                    }
                    Diagonal::Crossed => {
                        let c = vertices.len();
                        vertices.push([
                            0.5 * (vertices[bl][0] + vertices[tr][0]),
                            0.5 * (vertices[bl][1] + vertices[tr][1]),
                        ]);
                        triangles.push([bl, br, c]);
                        triangles.push([br, tr, c]);
                        triangles.push([tr, tl, c]);
                        triangles.push([tl, bl, c]);
                        refinement_edge.extend([0, 0, 0, 0]);
                    }
                }
            }
        }

        // Bottom gets marker 5 left of the origin when the rectangle
        // straddles x = 0; the corner vertex itself stays with marker 1.
        let split_bottom = x0 < 0.0 && x1 > 0.0;
        let mut boundary_edges = Vec::with_capacity(2 * (nx + ny));
        for i in 0..nx {
            let a = vid(i, 0);
            let b = vid(i + 1, 0);
            let mid = 0.5 * (vertices[a][0] + vertices[b][0]);
            let marker = if split_bottom && mid < 0.0 { 5 } else { 1 };
            boundary_edges.push(BoundaryEdge {
                vertices: [a, b],
                marker,
            });
        }
        for j in 0..ny {
            boundary_edges.push(BoundaryEdge {
                vertices: [vid(nx, j), vid(nx, j + 1)],
                marker: 2,
            });
        }
        for i in 0..nx {
            boundary_edges.push(BoundaryEdge {
                vertices: [vid(nx - i, ny), vid(nx - i - 1, ny)],
                marker: 3,
            });
        }
        for j in 0..ny {
            boundary_edges.push(BoundaryEdge {
                vertices: [vid(0, ny - j), vid(0, ny - j - 1)],
                marker: 4,
            });
        }

        let mesh = Mesh {
            vertices,
            triangles,
            boundary_edges,
            refinement_edge,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn refinement_edges(&self) -> &[u8] {
        &self.refinement_edge
    }

    /// Coordinates of the three corners of element `e`.
    pub fn corners(&self, e: usize) -> [[f64; 2]; 3] {
        let t = self.triangles[e];
        [
            self.vertices[t[0]],
            self.vertices[t[1]],
            self.vertices[t[2]],
        ]
    }

    pub fn area(&self, e: usize) -> f64 {
        let [p, q, r] = self.corners(e);
        signed_area(p, q, r)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|e| self.area(e)).sum()
    }

    /// Interior edges with the two elements sharing each, in first-seen
    /// element order.
    pub fn interior_edges(&self) -> Vec<((usize, usize), [usize; 2])> {
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        let mut out = Vec::new();
        for (e, t) in self.triangles.iter().enumerate() {
            for i in 0..3 {
                let key = sorted_pair(t[i], t[(i + 1) % 3]);
                match seen.get(&key) {
                    Some(&first) => out.push((key, [first, e])),
                    None => {
                        seen.insert(key, e);
                    }
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        for (e, t) in self.triangles.iter().enumerate() {
            for &v in t {
                if v >= nv {
                    return Err(Error::IndexOutOfRange {
                        what: "vertex",
                        index: v,
                        len: nv,
                    });
                }
            }
            let a = self.area(e);
            if a <= 0.0 || !a.is_finite() {
                return Err(Error::DegenerateElement {
                    element: e,
                    area: a,
                });
            }
        }

        // Conformity: every edge is used by one or two triangles, and the
        // once-used ones are exactly the marked boundary edges.
        let mut use_count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for i in 0..3 {
                *use_count
                    .entry(sorted_pair(t[i], t[(i + 1) % 3]))
                    .or_insert(0) += 1;
            }
        }
        if let Some((&(a, b), &c)) = use_count.iter().find(|&(_, &c)| c > 2) {
            return Err(Error::InvalidArgument(format!(
                "edge ({a}, {b}) shared by {c} triangles"
            )));
        }
        let mut marked: HashMap<(usize, usize), usize> = HashMap::new();
        for be in &self.boundary_edges {
            let key = sorted_pair(be.vertices[0], be.vertices[1]);
            if marked.insert(key, 1).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "boundary edge ({}, {}) listed twice",
                    key.0, key.1
                )));
            }
            if use_count.get(&key) != Some(&1) {
                return Err(Error::InvalidArgument(format!(
                    "boundary edge ({}, {}) does not belong to exactly one triangle",
                    key.0, key.1
                )));
            }
        }
        let n_boundary = use_count.values().filter(|&&c| c == 1).count();
        if n_boundary != self.boundary_edges.len() {
            return Err(Error::InvalidArgument(format!(
                "{} boundary edges in the mesh but {} carry markers",
                n_boundary,
                self.boundary_edges.len()
            )));
        }
        Ok(())
    }

    /// Newest-vertex bisection of the `marked` elements plus whatever
    /// closure refinement conformity requires.
    pub fn refine(&self, marked: &[usize]) -> Result<Mesh> {
        let nt = self.triangles.len();
        for &m in marked {
            if m >= nt {
                return Err(Error::IndexOutOfRange {
                    what: "element",
                    index: m,
                    len: nt,
                });
            }
        }
        if marked.is_empty() {
            return Ok(self.clone());
        }

        let ref_edge_key = |e: usize| -> (usize, usize) {
            let t = self.triangles[e];
            let r = self.refinement_edge[e] as usize;
            sorted_pair(t[r], t[(r + 1) % 3])
        };

        // Closure: an element any of whose edges will be split must split
        // its refinement edge too. Iterate to a fixpoint; the split set
        // only grows, so this terminates.
        let mut split: HashMap<(usize, usize), usize> = HashMap::new();
        for &m in marked {
            split.insert(ref_edge_key(m), usize::MAX);
        }
        loop {
            let mut changed = false;
            for (e, t) in self.triangles.iter().enumerate() {
                let any = (0..3).any(|i| split.contains_key(&sorted_pair(t[i], t[(i + 1) % 3])));
                if any {
                    if let std::collections::hash_map::Entry::Vacant(slot) =
                        split.entry(ref_edge_key(e))
                    {
                        slot.insert(usize::MAX);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        // Assign midpoint vertex ids in element order so the output is
        // independent of hash-map iteration order.
        let mut vertices = self.vertices.clone();
        for t in &self.triangles {
            for i in 0..3 {
                let (a, b) = sorted_pair(t[i], t[(i + 1) % 3]);
                if let Some(mid) = split.get_mut(&(a, b)) {
                    if *mid == usize::MAX {
                        *mid = vertices.len();
                        vertices.push([
                            0.5 * (self.vertices[a][0] + self.vertices[b][0]),
                            0.5 * (self.vertices[a][1] + self.vertices[b][1]),
                        ]);
                    }
                }
            }
        }

        // Subdivide. Children place the new vertex last and their own
        // refinement edge first; each child re-checks its refinement edge
        // against the split set, which bisects triangles with two or
        // three split edges into three or four pieces.
        let mut triangles = Vec::with_capacity(self.triangles.len() * 2);
        let mut refinement_edge = Vec::new();
        fn emit(
            tri: [usize; 3],
            split: &HashMap<(usize, usize), usize>,
            triangles: &mut Vec<[usize; 3]>,
            refinement_edge: &mut Vec<u8>,
        ) {
            let key = sorted_pair(tri[0], tri[1]);
            match split.get(&key) {
                Some(&m) => {
                    emit([tri[2], tri[0], m], split, triangles, refinement_edge);
                    emit([tri[1], tri[2], m], split, triangles, refinement_edge);
                }
                None => {
                    triangles.push(tri);
                    refinement_edge.push(0);
                }
            }
        }
        for (e, t) in self.triangles.iter().enumerate() {
            let r = self.refinement_edge[e] as usize;
            let rotated = [t[r], t[(r + 1) % 3], t[(r + 2) % 3]];
            emit(rotated, &split, &mut triangles, &mut refinement_edge);
        }

        let mut boundary_edges = Vec::with_capacity(self.boundary_edges.len());
        for be in &self.boundary_edges {
            let [a, b] = be.vertices;
            match split.get(&sorted_pair(a, b)) {
                Some(&m) => {
                    boundary_edges.push(BoundaryEdge {
                        vertices: [a, m],
                        marker: be.marker,
                    });
                    boundary_edges.push(BoundaryEdge {
                        vertices: [m, b],
                        marker: be.marker,
                    });
                }
                None => boundary_edges.push(*be),
            }
        }

        let mesh = Mesh {
            vertices,
            triangles,
            boundary_edges,
            refinement_edge,
        };
        debug_assert!(mesh.validate().is_ok());
        Ok(mesh)
    }

    /// Refine every element once.
    pub fn refine_all(&self) -> Result<Mesh> {
        let all: Vec<usize> = (0..self.n_triangles()).collect();
        self.refine(&all)
    }

    pub fn quality_report(&self) -> Result<QualityReport> {
        let mut h = Vec::with_capacity(self.n_triangles());
        let mut rho = Vec::with_capacity(self.n_triangles());
        for e in 0..self.n_triangles() {
            let [p, q, r] = self.corners(e);
            let area = signed_area(p, q, r);
            if area <= 0.0 || area.is_nan() {
                return Err(Error::DegenerateElement { element: e, area });
            }
            let sides = [dist(p, q), dist(q, r), dist(r, p)];
            let mut s = sides;
            s.sort_by(f64::total_cmp);
            // Acute triangles are enclosed by the circumcircle; right and
            // obtuse ones by the circle on the longest side.
            let he = if s[0] * s[0] + s[1] * s[1] > s[2] * s[2] {
                sides[0] * sides[1] * sides[2] / (2.0 * area)
            } else {
                s[2]
            };
            let perimeter = sides[0] + sides[1] + sides[2];
            let rhoe = 4.0 * area / perimeter;
            h.push(he);
            rho.push(rhoe);
        }
        let gamma = h
            .iter()
            .zip(&rho)
            .map(|(he, re)| he / re)
            .fold(0.0, f64::max);
        let h_max = h.iter().cloned().fold(0.0, f64::max);
        let rho_min = rho.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(QualityReport {
            h,
            rho,
            gamma,
            quasi_uniform_ratio: h_max / rho_min,
        })
    }

    /// Serialize in the plain ASCII format: a `V T B` count line, then V
    /// vertex lines `x y`, T triangle lines `i j k` and B boundary lines
    /// `i j marker`, all 0-based, reals with 17 significant digits.
    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {} {}",
            self.vertices.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        );
        for v in &self.vertices {
            let _ = writeln!(s, "{:.16e} {:.16e}", v[0], v[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        for be in &self.boundary_edges {
            let _ = writeln!(s, "{} {} {}", be.vertices[0], be.vertices[1], be.marker);
        }
        s
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_file_string())?;
        Ok(())
    }

    pub fn from_file_string(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let fail = |line: usize, message: &str| Error::MeshFormat {
            line: line + 1,
            message: message.to_string(),
        };
        let (ln, header) = lines.next().ok_or_else(|| fail(0, "empty file"))?;
        let counts: Vec<usize> = header
            .split_whitespace()
            .map(|w| w.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| fail(ln, "header must be three counts `V T B`"))?;
        if counts.len() != 3 {
            return Err(fail(ln, "header must be three counts `V T B`"));
        }
        let (nv, nt, nb) = (counts[0], counts[1], counts[2]);

        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| fail(usize::MAX - 1, "unexpected end of file"))?;
            let xy: Vec<f64> = line
                .split_whitespace()
                .map(|w| w.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| fail(ln, "vertex line must be `x y`"))?;
            if xy.len() != 2 {
                return Err(fail(ln, "vertex line must be `x y`"));
            }
            vertices.push([xy[0], xy[1]]);
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| fail(usize::MAX - 1, "unexpected end of file"))?;
            let ijk: Vec<usize> = line
                .split_whitespace()
                .map(|w| w.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| fail(ln, "triangle line must be `i j k`"))?;
            if ijk.len() != 3 {
                return Err(fail(ln, "triangle line must be `i j k`"));
            }
            triangles.push([ijk[0], ijk[1], ijk[2]]);
        }
        let mut boundary_edges = Vec::with_capacity(nb);
        for _ in 0..nb {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| fail(usize::MAX - 1, "unexpected end of file"))?;
            let ijm: Vec<usize> = line
                .split_whitespace()
                .map(|w| w.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| fail(ln, "boundary line must be `i j marker`"))?;
            if ijm.len() != 3 {
                return Err(fail(ln, "boundary line must be `i j marker`"));
            }
            boundary_edges.push(BoundaryEdge {
                vertices: [ijm[0], ijm[1]],
                marker: ijm[2] as u32,
            });
        }
        Mesh::from_parts(vertices, triangles, boundary_edges)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_file_string(&text)
    }
}
