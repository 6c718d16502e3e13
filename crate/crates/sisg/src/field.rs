//! Analytic scalar fields with optional gradients.

use crate::error::{Error, Result};

type ValueFn = dyn Fn(f64, f64) -> f64 + Send + Sync;
type GradFn = dyn Fn(f64, f64) -> (f64, f64) + Send + Sync;

/// An evaluatable field (x, y) -> value, optionally with an analytic
/// gradient. Singular fields signal failure by returning non-finite
/// values, which consumers turn into errors at the offending point.
pub struct ScalarField {
    value: Box<ValueFn>,
    gradient: Option<Box<GradFn>>,
}

impl ScalarField {
    pub fn new(value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            value: Box::new(value),
            gradient: None,
        }
    }

    pub fn with_gradient(
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            value: Box::new(value),
            gradient: Some(Box::new(gradient)),
        }
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::with_gradient(move |_, _| c, |_, _| (0.0, 0.0))
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.value)(x, y)
    }

    /// Evaluate, turning non-finite results into an error.
    pub fn try_eval(&self, x: f64, y: f64) -> Result<f64> {
        let v = self.eval(x, y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::SingularEvaluation { x, y })
        }
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn gradient(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        self.gradient.as_ref().map(|g| g(x, y))
    }

    pub fn try_gradient(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let (gx, gy) = self.gradient(x, y).ok_or(Error::MissingGradient)?;
        if gx.is_finite() && gy.is_finite() {
            Ok((gx, gy))
        } else {
            Err(Error::SingularEvaluation { x, y })
        }
    }
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("has_gradient", &self.has_gradient())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_consistent_with_finite_differences() {
        let f = ScalarField::with_gradient(
            |x, y| (2.0 * x).sin() * y * y,
            |x, y| (2.0 * (2.0 * x).cos() * y * y, 2.0 * (2.0 * x).sin() * y),
        );
        let d = 1e-6;
        for (x, y) in [(0.3, 0.7), (-1.2, 0.4), (2.0, -0.5)] {
            let (gx, gy) = f.gradient(x, y).unwrap();
            let fx = (f.eval(x + d, y) - f.eval(x - d, y)) / (2.0 * d);
            let fy = (f.eval(x, y + d) - f.eval(x, y - d)) / (2.0 * d);
            assert!((gx - fx).abs() < 1e-6);
            assert!((gy - fy).abs() < 1e-6);
        }
    }

    #[test]
    fn singular_values_become_errors() {
        let f = ScalarField::new(|x, y| 1.0 / (x * x + y * y).sqrt());
        assert!(f.try_eval(0.0, 0.0).is_err());
        assert!(f.try_eval(0.5, 0.0).is_ok());
    }
}
