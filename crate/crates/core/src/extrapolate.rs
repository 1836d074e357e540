//! Limit estimation and slope fitting.

use crate::error::{Error, Result};

/// Value at `x = 0` of the interpolating polynomial through `(xs, ys)`,
/// by Neville's scheme.
fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
        }
    }
    p[0]
}

/// Richardson (polynomial) extrapolation of `y(x)` to `x → 0`.
///
/// Returns the limit and an error estimate: the change when the sample
/// farthest from zero is dropped.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::InvalidArgument(
            "extrapolation needs at least three matching samples".into(),
        ));
    }
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].abs().total_cmp(&xs[b].abs()));
    let xs: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
    let full = neville_at_zero(&xs, &ys);
    let reduced = neville_at_zero(&xs[..xs.len() - 1], &ys[..ys.len() - 1]);
    if !full.is_finite() {
        return Err(Error::ExtrapolationUnstable {
            value: full,
            error: f64::INFINITY,
        });
    }
    Ok((full, (full - reduced).abs()))
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(Error::InvalidArgument("fit needs at least two matching samples".into()));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Slope of `log y` against `log x`: the order of vanishing or growth.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("log-log fit needs positive samples".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly).map(|(s, _)| s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_for_polynomials() {
        let xs = [0.1, 0.05, 0.025, 0.0125];
        let ys: Vec<f64> = xs.iter().map(|x| -0.064 + 1.7 * x - 3.0 * x * x).collect();
        let (v, e) = extrapolate_to_zero(&xs, &ys).unwrap();
        assert_relative_eq!(v, -0.064, max_relative = 1e-12);
        assert!(e < 1e-12);
    }

    #[test]
    fn smooth_limit() {
        let xs: Vec<f64> = (0..6).map(|k| 0.2 / 2f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin() / x).collect();
        let (v, e) = extrapolate_to_zero(&xs, &ys).unwrap();
        assert!((v - 1.0).abs() < 1e-10 && e < 1e-8);
    }

    #[test]
    fn slopes() {
        let xs = [0.02, 0.04, 0.06, 0.08, 0.1];
        let ys: Vec<f64> = xs.iter().map(|t| 5.0 * t * t).collect();
        assert_relative_eq!(log_log_slope(&xs, &ys).unwrap(), 2.0, max_relative = 1e-12);
        assert!(log_log_slope(&xs, &[1.0, 0.0, 1.0, 1.0, 1.0]).is_err());
        assert!(extrapolate_to_zero(&xs[..2], &ys[..2]).is_err());
    }
}
