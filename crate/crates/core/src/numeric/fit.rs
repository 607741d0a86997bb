//! Ordinary least squares for a straight line.

use super::Float;
use crate::error::NumericError;

/// OLS fit of `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Coefficient of determination; `None` when the response is constant
    /// (the fit is degenerate and r^2 is undefined).
    pub r_squared: Option<T>,
    pub points: usize,
}

/// Fit a line through `(x, y)` pairs.
pub fn linear<T: Float>(xs: &[T], ys: &[T]) -> Result<LinearFit<T>, NumericError> {
    if xs.len() != ys.len() {
        return Err(NumericError::InsufficientData(format!(
            "x/y length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(NumericError::InsufficientData(format!(
            "need at least 2 points, got {}",
            xs.len()
        )));
    }
    let n = T::from(xs.len()).unwrap();
    let mean_x = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let mean_y = ys.iter().fold(T::zero(), |a, &y| a + y) / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == T::zero() {
        return Err(NumericError::InsufficientData(
            "regressor has zero variance".to_string(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy > T::zero() {
        Some((sxy * sxy) / (sxx * syy))
    } else {
        None
    };
    Ok(LinearFit { slope, intercept, r_squared, points: xs.len() })
}
