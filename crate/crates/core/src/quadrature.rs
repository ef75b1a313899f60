//! Composite Simpson quadrature with interval doubling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
    #[error("integration bounds must be finite with lower <= upper, got [{lower}, {upper}]")]
    InvalidBounds { lower: f64, upper: f64 },
    #[error(
        "quadrature did not converge within {evaluations} evaluations \
         (last estimate {estimate:e}, relative change {relative_change:e})"
    )]
    NotConverged {
        evaluations: usize,
        estimate: f64,
        relative_change: f64,
    },
    #[error("integrand returned a non-finite value at x = {x:e}")]
    NonFiniteIntegrand { x: f64 },
}

/// Convergence controls for [`simpson`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Stop once two successive estimates agree to this relative tolerance.
    pub rel_tol: f64,
    /// Maximum number of integrand evaluations.
    pub max_evaluations: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_evaluations: 1 << 20,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(QuadratureError::InvalidConfig(format!(
                "rel_tol must be finite and > 0, got {}",
                self.rel_tol
            )));
        }
        if self.max_evaluations < INITIAL_INTERVALS + 1 {
            return Err(QuadratureError::InvalidConfig(format!(
                "max_evaluations must be at least {}, got {}",
                INITIAL_INTERVALS + 1,
                self.max_evaluations
            )));
        }
        Ok(())
    }
}

const INITIAL_INTERVALS: usize = 16;

/// Integrates `f` over `[lower, upper]`.
///
/// Starts from 16 subintervals and doubles the subdivision, reusing every
/// previous evaluation, until successive composite Simpson estimates agree to
/// `config.rel_tol`. An empty interval integrates to zero.
pub fn simpson<F>(f: F, lower: f64, upper: f64, config: &QuadratureConfig) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    config.validate()?;
    if !(lower.is_finite() && upper.is_finite() && lower <= upper) {
        return Err(QuadratureError::InvalidBounds { lower, upper });
    }
    if lower == upper {
        return Ok(0.0);
    }

    let eval = |x: f64| -> Result<f64, QuadratureError> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadratureError::NonFiniteIntegrand { x })
        }
    };

    let width = upper - lower;
    let mut n = INITIAL_INTERVALS;
    let ends = eval(lower)? + eval(upper)?;
    // Interior nodes split by parity of their index at the current resolution.
    let mut even = 0.0;
    let mut odd = 0.0;
    for i in 1..n {
        let y = eval(lower + width * i as f64 / n as f64)?;
        if i % 2 == 0 {
            even += y;
        } else {
            odd += y;
        }
    }
    let mut evaluations = n + 1;
    let mut estimate = width / n as f64 / 3.0 * (ends + 4.0 * odd + 2.0 * even);

    loop {
        if evaluations + n > config.max_evaluations {
            return Err(QuadratureError::NotConverged {
                evaluations,
                estimate,
                relative_change: f64::NAN,
            });
        }
        let refined_n = 2 * n;
        even += odd;
        odd = 0.0;
        for i in (1..refined_n).step_by(2) {
            odd += eval(lower + width * i as f64 / refined_n as f64)?;
        }
        evaluations += n;
        n = refined_n;
        let refined = width / n as f64 / 3.0 * (ends + 4.0 * odd + 2.0 * even);

        let change = (refined - estimate).abs();
        if change <= config.rel_tol * refined.abs() {
            return Ok(refined);
        }
        if evaluations + n > config.max_evaluations {
            return Err(QuadratureError::NotConverged {
                evaluations,
                estimate: refined,
                relative_change: change / refined.abs(),
            });
        }
        estimate = refined;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn cubic_is_exact() {
        let v = simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, &QuadratureConfig::default()).unwrap();
        // x^4/4 - x^2 on [0, 2] is 4 - 4
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn exponential_matches_closed_form() {
        let v = simpson(|x| (-3.0 * x).exp(), 0.0, 1.5, &QuadratureConfig::default()).unwrap();
        let exact = (1.0 - (-4.5f64).exp()) / 3.0;
        assert!(rel(v, exact) < 1e-9);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(simpson(|x| x, 2.0, 2.0, &QuadratureConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn zero_integrand_converges() {
        assert_eq!(simpson(|_| 0.0, 0.0, 1.0, &QuadratureConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn reversed_bounds_rejected() {
        assert!(matches!(
            simpson(|x| x, 1.0, 0.0, &QuadratureConfig::default()),
            Err(QuadratureError::InvalidBounds { .. })
        ));
    }

    #[test]
    fn budget_exhaustion_reported() {
        let cfg = QuadratureConfig {
            rel_tol: 1e-15,
            max_evaluations: 40,
        };
        let err = simpson(|x| (50.0 * x).sin().abs(), 0.0, 10.0, &cfg).unwrap_err();
        assert!(matches!(err, QuadratureError::NotConverged { .. }));
    }

    #[test]
    fn non_finite_integrand_rejected() {
        let err = simpson(|x| 1.0 / (x - 0.5), 0.0, 1.0, &QuadratureConfig::default()).unwrap_err();
        assert!(matches!(err, QuadratureError::NonFiniteIntegrand { .. }));
    }
}
