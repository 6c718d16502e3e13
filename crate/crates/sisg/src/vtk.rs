//! Legacy ASCII VTK output (unstructured triangle grids).
//!
//! Continuous fields are written on the mesh vertices. Discontinuous
//! fields duplicate the corner points per element so viewers display the
//! true jumps instead of silently averaging them. Headers carry no
//! timestamps; identical inputs produce identical files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::space::{Deriv, FeFunction};

fn header(out: &mut String, title: &str) {
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str(title);
    out.push('\n');
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
}

fn scalars(out: &mut String, name: &str, values: &[f64]) {
    let _ = writeln!(out, "SCALARS {name} double 1");
    out.push_str("LOOKUP_TABLE default\n");
    for v in values {
        let _ = writeln!(out, "{v}");
    }
}

/// Fields sampled at mesh vertices, one scalar block per field.
pub fn vertex_grid_string(mesh: &Mesh, fields: &[(&str, &[f64])]) -> Result<String> {
    for (name, values) in fields {
        if values.len() != mesh.n_vertices() {
            return Err(Error::InvalidArgument(format!(
                "field {name} has {} values for {} vertices",
                values.len(),
                mesh.n_vertices()
            )));
        }
    }
    let mut out = String::new();
    header(&mut out, "vertex fields");
    let _ = writeln!(out, "POINTS {} double", mesh.n_vertices());
    for v in mesh.vertices() {
        let _ = writeln!(out, "{} {} 0", v[0], v[1]);
    }
    let nt = mesh.n_triangles();
    let _ = writeln!(out, "CELLS {nt} {}", 4 * nt);
    for t in mesh.triangles() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(out, "CELL_TYPES {nt}");
    for _ in 0..nt {
        out.push_str("5\n");
    }
    let _ = writeln!(out, "POINT_DATA {}", mesh.n_vertices());
    for (name, values) in fields {
        scalars(&mut out, name, values);
    }
    Ok(out)
}

/// Fields sampled per element corner (3 values per triangle, element
/// order); every triangle gets its own three points.
pub fn corner_grid_string(mesh: &Mesh, fields: &[(&str, &[f64])]) -> Result<String> {
    let nt = mesh.n_triangles();
    for (name, values) in fields {
        if values.len() != 3 * nt {
            return Err(Error::InvalidArgument(format!(
                "field {name} has {} values for {} element corners",
                values.len(),
                3 * nt
            )));
        }
    }
    let mut out = String::new();
    header(&mut out, "per-element fields");
    let _ = writeln!(out, "POINTS {} double", 3 * nt);
    for e in 0..nt {
        for p in mesh.corners(e) {
            let _ = writeln!(out, "{} {} 0", p[0], p[1]);
        }
    }
    let _ = writeln!(out, "CELLS {nt} {}", 4 * nt);
    for e in 0..nt {
        let _ = writeln!(out, "3 {} {} {}", 3 * e, 3 * e + 1, 3 * e + 2);
    }
    let _ = writeln!(out, "CELL_TYPES {nt}");
    for _ in 0..nt {
        out.push_str("5\n");
    }
    let _ = writeln!(out, "POINT_DATA {}", 3 * nt);
    for (name, values) in fields {
        scalars(&mut out, name, values);
    }
    Ok(out)
}

pub fn write_vertex_grid(path: &Path, mesh: &Mesh, fields: &[(&str, &[f64])]) -> Result<()> {
    std::fs::write(path, vertex_grid_string(mesh, fields)?)?;
    Ok(())
}

pub fn write_corner_grid(path: &Path, mesh: &Mesh, fields: &[(&str, &[f64])]) -> Result<()> {
    std::fs::write(path, corner_grid_string(mesh, fields)?)?;
    Ok(())
}

/// Values of a continuous function at the mesh vertices.
pub fn vertex_values(f: &FeFunction) -> Vec<f64> {
    let mesh = f.space().mesh();
    let mut out = vec![0.0; mesh.n_vertices()];
    let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    for (e, t) in mesh.triangles().iter().enumerate() {
        for (i, &v) in t.iter().enumerate() {
            out[v] = f.eval(e, corners[i], Deriv::Value);
        }
    }
    out
}

/// One-sided values of `f` (or a derivative) at each element corner.
pub fn corner_values(f: &FeFunction, deriv: Deriv) -> Vec<f64> {
    let mesh = f.space().mesh();
    let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut out = Vec::with_capacity(3 * mesh.n_triangles());
    for e in 0..mesh.n_triangles() {
        for c in corners {
            out.push(f.eval(e, c, deriv));
        }
    }
    out
}
