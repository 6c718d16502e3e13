//! Classic 1D Savitzky-Golay filtering on uniformly spaced samples.
//!
//! A window of r samples is fitted by a least-squares polynomial of
//! degree k < r under the discrete inner product (f, g) = sum_i f_i g_i;
//! evaluating the fit (or one of its derivatives) at a chosen position in
//! the window is linear in the data, so it collapses to a convolution
//! with a fixed kernel. `kernel` extracts that weight vector; `apply`
//! slides it over a series (valid region only, no boundary padding).

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct SGWindow {
    /// Window length r.
    pub window: usize,
    /// Polynomial degree k, k < r.
    pub degree: usize,
    /// Sample spacing.
    pub spacing: f64,
    /// 1-based index within the window where the fit is evaluated.
    pub eval_offset: usize,
    /// Derivative order d <= k extracted from the fit.
    pub deriv_order: usize,
}

impl SGWindow {
    /// Smoothing window (derivative order 0) evaluated at the center,
    /// unit spacing.
    pub fn new(window: usize, degree: usize) -> Result<Self> {
        SGWindow {
            window,
            degree,
            spacing: 1.0,
            eval_offset: window.div_ceil(2),
            deriv_order: 0,
        }
        .validated()
    }

    pub fn with_derivative(mut self, d: usize) -> Result<Self> {
        self.deriv_order = d;
        self.validated()
    }

    pub fn with_offset(mut self, offset: usize) -> Result<Self> {
        self.eval_offset = offset;
        self.validated()
    }

    pub fn with_spacing(mut self, h: f64) -> Result<Self> {
        self.spacing = h;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        if self.window <= self.degree {
            return Err(Error::InvalidArgument(format!(
                "window {} must exceed polynomial degree {}, otherwise a nonzero \
                 polynomial can vanish at every sample",
                self.window, self.degree
            )));
        }
        if self.eval_offset < 1 || self.eval_offset > self.window {
            return Err(Error::InvalidArgument(format!(
                "evaluation offset {} outside 1..={}",
                self.eval_offset, self.window
            )));
        }
        if self.deriv_order > self.degree {
            return Err(Error::InvalidArgument(format!(
                "derivative order {} exceeds polynomial degree {}",
                self.deriv_order, self.degree
            )));
        }
        if self.spacing <= 0.0 || self.spacing.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "sample spacing must be positive, got {}",
                self.spacing
            )));
        }
        Ok(self)
    }

    /// Sample positions relative to the evaluation point.
    pub fn nodes(&self) -> Vec<f64> {
        (1..=self.window)
            .map(|i| (i as f64 - self.eval_offset as f64) * self.spacing)
            .collect()
    }
}

/// Cholesky solve of the small SPD normal-equation system.
fn cholesky_solve(g: &mut [Vec<f64>], rhs: &mut [f64]) {
    let n = rhs.len();
    for i in 0..n {
        for j in 0..i {
            let s = g[i][j] - (0..j).map(|k| g[i][k] * g[j][k]).sum::<f64>();
            g[i][j] = s / g[j][j];
        }
        let s = g[i][i] - (0..i).map(|k| g[i][k] * g[i][k]).sum::<f64>();
        debug_assert!(s > 0.0, "normal equations not positive definite");
        g[i][i] = s.sqrt();
    }
    for i in 0..n {
        let s = rhs[i] - (0..i).map(|k| g[i][k] * rhs[k]).sum::<f64>();
        rhs[i] = s / g[i][i];
    }
    for i in (0..n).rev() {
        let s = rhs[i] - ((i + 1)..n).map(|k| g[k][i] * rhs[k]).sum::<f64>();
        rhs[i] = s / g[i][i];
    }
}

/// Gram matrix of the monomials on scaled nodes, plus the scale factor.
fn gram(w: &SGWindow) -> (Vec<Vec<f64>>, Vec<f64>, f64) {
    let nodes = w.nodes();
    let scale = nodes.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let scale = if scale == 0.0 { 1.0 } else { scale };
    let scaled: Vec<f64> = nodes.iter().map(|x| x / scale).collect();
    let n = w.degree + 1;
    let mut g = vec![vec![0.0; n]; n];
    for &x in &scaled {
        let mut pow = vec![1.0; 2 * n - 1];
        for p in 1..2 * n - 1 {
            pow[p] = pow[p - 1] * x;
        }
        for a in 0..n {
            for b in 0..n {
                g[a][b] += pow[a + b];
            }
        }
    }
    (g, scaled, scale)
}

/// Coefficients (about the evaluation point, in physical units) of the
/// least-squares polynomial through the window data.
pub fn fit_window(w: &SGWindow, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != w.window {
        return Err(Error::InvalidArgument(format!(
            "window data has length {}, expected {}",
            y.len(),
            w.window
        )));
    }
    let (mut g, scaled, scale) = gram(w);
    let n = w.degree + 1;
    let mut rhs = vec![0.0; n];
    for (i, &x) in scaled.iter().enumerate() {
        let mut pow = 1.0;
        for coeff in rhs.iter_mut() {
            *coeff += y[i] * pow;
            pow *= x;
        }
    }
    cholesky_solve(&mut g, &mut rhs);
    // Undo the node scaling: coefficient of xi^a picks up scale^-a.
    let mut s = 1.0;
    for coeff in rhs.iter_mut() {
        *coeff /= s;
        s *= scale;
    }
    Ok(rhs)
}

/// Convolution weights c with c . y = d! * (coefficient d of the fit),
/// i.e. the d-th derivative of the fit at the evaluation point.
pub fn kernel(w: &SGWindow) -> Result<Vec<f64>> {
    let (mut g, scaled, scale) = gram(w);
    let n = w.degree + 1;
    let mut z = vec![0.0; n];
    z[w.deriv_order] = 1.0;
    cholesky_solve(&mut g, &mut z);
    let dfact: f64 = (1..=w.deriv_order)
        .map(|i| i as f64)
        .product::<f64>()
        .max(1.0);
    let rescale = dfact / scale.powi(w.deriv_order as i32);
    Ok(scaled
        .iter()
        .map(|&x| {
            let mut pow = 1.0;
            let mut acc = 0.0;
            for &za in &z {
                acc += za * pow;
                pow *= x;
            }
            acc * rescale
        })
        .collect())
}

/// Slide the window kernel over a series; output covers the valid region
/// only, length n - r + 1.
pub fn apply(w: &SGWindow, series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < w.window {
        return Err(Error::InvalidArgument(format!(
            "series of length {} shorter than window {}",
            series.len(),
            w.window
        )));
    }
    let c = kernel(w)?;
    Ok(series
        .windows(w.window)
        .map(|chunk| chunk.iter().zip(&c).map(|(y, k)| y * k).sum())
        .collect())
}
