//! Central finite differences, the verification oracle every analytic
//! gradient in this crate is tested against.

use crate::error::{Error, Result};

/// Central-difference gradient of a scalar function: per coordinate,
/// (f(theta + h e_i) - f(theta - h e_i)) / (2 h).
///
/// `f` must be a pure function of its argument; a non-finite evaluation is an
/// error rather than a silent NaN in the output.
pub fn finite_difference_gradient<F>(f: F, theta: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    assert!(h > 0.0, "step size must be positive");
    let mut work = theta.to_vec();
    let mut grad = vec![0.0; theta.len()];
    for i in 0..theta.len() {
        let orig = work[i];
        work[i] = orig + h;
        let plus = f(&work);
        work[i] = orig - h;
        let minus = f(&work);
        work[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite(format!(
                "finite_difference_gradient at coordinate {i}"
            )));
        }
        grad[i] = (plus - minus) / (2.0 * h);
    }
    Ok(grad)
}

/// Relative error between an analytic and a numeric gradient entry, with the
/// usual guard against tiny denominators.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(1e-8);
    (analytic - numeric).abs() / denom
}

/// Largest relative error across two gradient vectors.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric.iter())
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let grad =
            finite_difference_gradient(|t| t.iter().map(|x| x * x).sum(), &[1.0, 2.0], 1e-5)
                .unwrap();
        assert!((grad[0] - 2.0).abs() < 1e-8);
        assert!((grad[1] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn constant_function_has_zero_gradient() {
        let grad = finite_difference_gradient(|_| 3.5, &[0.1, -0.2, 7.0], 1e-5).unwrap();
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn sine_derivative() {
        // cos(0.3) = 0.955336489125606 (mpmath, 15 digits)
        let grad = finite_difference_gradient(|t| t[0].sin(), &[0.3], 1e-5).unwrap();
        assert!((grad[0] - 0.955336489125606).abs() < 1e-6);
    }

    #[test]
    fn non_finite_evaluation_is_an_error() {
        let err = finite_difference_gradient(|t| (-t[0]).sqrt(), &[1.0], 1e-5).unwrap_err();
        assert!(err.to_string().contains("non-finite"));
    }
}
