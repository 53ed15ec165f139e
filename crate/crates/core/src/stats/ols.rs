//! Ordinary least squares over (x, y) points.

use super::special::c;
use super::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlsFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Pearson correlation; 0 when y has no variance.
    pub r: T,
    /// Root mean squared residual.
    pub rmse: T,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OlsError {
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("x values are all identical; slope undefined")]
    DegenerateX,
}

/// Least-squares line through the points, plus Pearson r and residual RMSE.
pub fn ols_fit<T: Real>(points: &[(T, T)]) -> Result<OlsFit<T>, OlsError> {
    let n = points.len();
    if n < 2 {
        return Err(OlsError::TooFewPoints(n));
    }
    let nf = c::<T>(n as f64);
    let mean_x = points.iter().map(|&(x, _)| x).sum::<T>() / nf;
    let mean_y = points.iter().map(|&(_, y)| y).sum::<T>() / nf;

    let mut sxx = T::zero();
    let mut syy = T::zero();
    let mut sxy = T::zero();
    for &(x, y) in points {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == T::zero() {
        return Err(OlsError::DegenerateX);
    }

    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r = if syy == T::zero() { T::zero() } else { sxy / (sxx * syy).sqrt() };
    let sse = points
        .iter()
        .map(|&(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<T>();
    let rmse = (sse / nf).sqrt();

    Ok(OlsFit { slope, intercept, r, rmse, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 2.0 * i as f64 + 1.0)).collect();
        let fit = ols_fit(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.r - 1.0).abs() < 1e-12);
        assert!(fit.rmse < 1e-12);
    }

    #[test]
    fn two_points_perfect_fit() {
        let fit = ols_fit(&[(0.0f64, 3.0), (2.0, 7.0)]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!(fit.rmse < 1e-12);
    }

    #[test]
    fn degenerate_x() {
        assert_eq!(
            ols_fit(&[(1.0f64, 2.0), (1.0, 3.0), (1.0, 4.0)]),
            Err(OlsError::DegenerateX)
        );
    }

    #[test]
    fn too_few_points() {
        assert_eq!(ols_fit(&[(1.0f64, 2.0)]), Err(OlsError::TooFewPoints(1)));
    }

    #[test]
    fn flat_y_gives_zero_slope_and_r() {
        let fit = ols_fit(&[(0.0f64, 5.0), (1.0, 5.0), (2.0, 5.0)]).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r, 0.0);
        assert_eq!(fit.rmse, 0.0);
    }
}
