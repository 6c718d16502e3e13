//! Compressed sparse-row matrices and a Jacobi-preconditioned conjugate
//! gradient solver.
//!
//! Assembly sums duplicate entries in the order they appear in the input
//! stream, so two assemblies of the same stream are bitwise identical.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Build an n-by-n CSR matrix from (row, col, value) contributions.
/// Duplicates are summed; column indices come out sorted within each row.
pub fn assemble(
    n: usize,
    contributions: impl IntoIterator<Item = (usize, usize, f64)>,
) -> Result<SparseMatrix> {
    let mut triplets: Vec<(usize, usize, f64)> = contributions.into_iter().collect();
    for &(r, c, _) in &triplets {
        if r >= n {
            return Err(Error::IndexOutOfRange {
                what: "row",
                index: r,
                len: n,
            });
        }
        if c >= n {
            return Err(Error::IndexOutOfRange {
                what: "column",
                index: c,
                len: n,
            });
        }
    }
    // Stable sort keeps duplicates in stream order, fixing the summation
    // order independently of how the stream was produced.
    triplets.sort_by_key(|t| (t.0, t.1));

    let mut row_offsets = vec![0usize; n + 1];
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    let mut i = 0;
    while i < triplets.len() {
        let (r, c, _) = triplets[i];
        let mut sum = 0.0;
        while i < triplets.len() && triplets[i].0 == r && triplets[i].1 == c {
            sum += triplets[i].2;
            i += 1;
        }
        row_offsets[r + 1] += 1;
        col_indices.push(c);
        values.push(sum);
    }
    for r in 0..n {
        row_offsets[r + 1] += row_offsets[r];
    }
    Ok(SparseMatrix {
        n,
        row_offsets,
        col_indices,
        values,
    })
}

impl SparseMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (r, out) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            *out = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    /// Largest relative deviation from symmetry.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(*c, r)).abs());
                scale = scale.max(v.abs());
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug)]
pub struct PcgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative true residual ||b - Ax|| / ||b|| at exit.
    pub achieved_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve Ax = b for symmetric positive definite A with Jacobi (diagonal)
/// preconditioning, to a relative residual of `rel_tol`.
pub fn pcg_solve(
    a: &SparseMatrix,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<PcgSolution> {
    let n = a.n();
    assert_eq!(b.len(), n);
    if rel_tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "relative tolerance must be positive, got {rel_tol}"
        )));
    }
    let diag = a.diagonal();
    for (r, &d) in diag.iter().enumerate() {
        if d <= 0.0 || d.is_nan() {
            return Err(Error::NonPositiveDiagonal { row: r, value: d });
        }
    }
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(PcgSolution {
            x: vec![0.0; n],
            iterations: 0,
            achieved_residual: 0.0,
        });
    }
    let target = rel_tol * b_norm;

    let mut x = vec![0.0; n];
    let mut total_iters = 0;
    // Outer restart guards against drift of the recurrence residual; it
    // normally runs once.
    loop {
        let mut r: Vec<f64> = {
            let ax = a.matvec(&x);
            b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
        };
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, di)| ri / di).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut r_norm = norm(&r);

        while r_norm > target && total_iters < max_iter {
            let ap = a.matvec(&p);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                return Err(Error::NoConvergence {
                    iterations: total_iters,
                    residual: r_norm / b_norm,
                });
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..n {
                z[i] = r[i] / diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            rz = rz_new;
            r_norm = norm(&r);
            total_iters += 1;
        }

        let true_res = {
            let ax = a.matvec(&x);
            let diff: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            norm(&diff)
        };
        if true_res <= target {
            return Ok(PcgSolution {
                x,
                iterations: total_iters,
                achieved_residual: true_res / b_norm,
            });
        }
        if total_iters >= max_iter {
            return Err(Error::NoConvergence {
                iterations: total_iters,
                residual: true_res / b_norm,
            });
        }
    }
}
