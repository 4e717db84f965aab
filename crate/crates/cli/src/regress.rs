use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub grid: Vec<f64>,
}

/// Ordinary least squares `y = slope * x + intercept` on the given
/// coordinates; callers apply any log transform first.
pub fn regress(xs: &[f64], ys: &[f64]) -> CliResult<RegressionResult> {
    if xs.len() != ys.len() {
        return Err(CliError::Usage(format!("{} x values for {} y values", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(CliError::Usage("regression needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * n * (1.0 + mx * mx) {
        return Err(CliError::Usage("degenerate x grid: all points share one x".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Ok(RegressionResult { slope, intercept, residual_rms: (rss / n).sqrt(), grid: xs.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|x| -x + 3.0).collect();
        let r = regress(&xs, &ys).unwrap();
        assert!((r.slope + 1.0).abs() < 1e-12);
        assert!((r.intercept - 3.0).abs() < 1e-12);
        assert!(r.residual_rms < 1e-12);
    }

    #[test]
    fn noisy_inverse_scaling() {
        let mut rng = rmcorr::rng::from_seed(3);
        let grid = [32.0, 64.0, 128.0, 256.0, 512.0, 1024.0];
        let xs: Vec<f64> = grid.iter().map(|x: &f64| x.log2()).collect();
        let ys: Vec<f64> = grid
            .iter()
            .map(|nu| (0.7 / nu * (1.0 + 0.1 * rng.random_range(-1.0..1.0))).log2())
            .collect();
        let r = regress(&xs, &ys).unwrap();
        assert!((-1.1..=-0.9).contains(&r.slope), "{}", r.slope);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(regress(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).is_err());
        assert!(regress(&[1.0], &[0.0]).is_err());
        assert!(regress(&[1.0, 2.0], &[0.0]).is_err());
    }
}
