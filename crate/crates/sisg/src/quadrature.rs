//! Quadrature on the reference triangle {x, y >= 0, x + y <= 1}.
//!
//! Degrees 0-2 use the classic symmetric rules. Higher degrees fall back
//! to a collapsed tensor-product Gauss rule (the square `[0, 1]^2` mapped by
//! (u, v) -> (u, v(1-u)) with the 1-u Jacobian folded into the weights),
//! which is exact for the requested degree and has all-positive weights
//! at any order.

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 20;

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    /// Reference coordinates of the quadrature points.
    pub points: Vec<[f64; 2]>,
    /// Weights, summing to the reference-triangle area 1/2.
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on [0, 1].
fn gauss_legendre_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        // Chebyshev initial guess, then Newton on P_m.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map [-1, 1] to [0, 1]; reverse so nodes come out ascending.
        nodes[m - 1 - i] = 0.5 * (x + 1.0);
        weights[m - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Rule integrating all polynomials of total degree up to
/// `exactness_degree` exactly.
pub fn quad_rule(exactness_degree: usize) -> Result<QuadratureRule> {
    if exactness_degree > MAX_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "quadrature degree {exactness_degree} unsupported (max {MAX_DEGREE})"
        )));
    }
    match exactness_degree {
        0 | 1 => Ok(QuadratureRule {
            points: vec![[1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![0.5],
            exactness_degree,
        }),
        2 => Ok(QuadratureRule {
            points: vec![
                [1.0 / 6.0, 1.0 / 6.0],
                [2.0 / 3.0, 1.0 / 6.0],
                [1.0 / 6.0, 2.0 / 3.0],
            ],
            weights: vec![1.0 / 6.0; 3],
            exactness_degree,
        }),
        d => {
            // In u the integrand carries the extra 1-u factor, hence one
            // more degree than in v.
            let mu = (d + 2).div_ceil(2);
            let mv = (d + 1).div_ceil(2);
            let (un, uw) = gauss_legendre_unit(mu);
            let (vn, vw) = gauss_legendre_unit(mv);
            let mut points = Vec::with_capacity(mu * mv);
            let mut weights = Vec::with_capacity(mu * mv);
            for (u, wu) in un.iter().zip(&uw) {
                for (v, wv) in vn.iter().zip(&vw) {
                    points.push([*u, v * (1.0 - u)]);
                    weights.push(wu * wv * (1.0 - u));
                }
            }
            Ok(QuadratureRule {
                points,
                weights,
                exactness_degree: d,
            })
        }
    }
}
