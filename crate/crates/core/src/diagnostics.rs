//! Q-Q data for checking whether order values are log-normal.
//!
//! Log values are sorted, standardized with the population standard
//! deviation (divisor `n`) and paired with standard normal quantiles at the
//! plotting positions `(i - 0.5) / n`. Log-normal data lies close to `y = x`.
//! Ties keep their sorted order and their own plotting positions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::normal_quantile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqPoint {
    pub theoretical_z: f64,
    pub empirical_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqData {
    pub points: Vec<QqPoint>,
    pub n: usize,
    /// Pearson correlation of the point cloud.
    pub correlation: f64,
}

/// Plotting positions `(i - 0.5) / n` for `i = 1..=n`.
pub fn plotting_positions(n: usize) -> Vec<f64> {
    (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect()
}

/// Q-Q data of standardized `ln(values)` against the standard normal.
pub fn qq_lognormal(values: &[f64]) -> Result<QqData> {
    if values.len() < 3 {
        return Err(Error::Input(format!("need at least 3 values, got {}", values.len())));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Input(format!("Q-Q values must be positive, found {v}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    // Logs are taken relative to the median, which standardization removes
    // anyway; a power-of-two rescaling then leaves every ratio bit-identical.
    let reference = sorted[sorted.len() / 2];
    let logs: Vec<f64> = sorted.iter().map(|v| (v / reference).ln()).collect();

    let n = logs.len();
    let mean = logs.iter().sum::<f64>() / n as f64;
    let var = logs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if var == 0.0 {
        return Err(Error::DegenerateInput("log values have zero variance".into()));
    }
    let sd = var.sqrt();

    let points: Vec<QqPoint> = plotting_positions(n)
        .into_iter()
        .zip(&logs)
        .map(|(p, x)| QqPoint {
            theoretical_z: normal_quantile(p),
            empirical_z: (x - mean) / sd,
        })
        .collect();
    let correlation = pearson(&points);
    Ok(QqData { points, n, correlation })
}

fn pearson(points: &[QqPoint]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.theoretical_z).sum::<f64>() / n;
    let my = points.iter().map(|p| p.empirical_z).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p.theoretical_z - mx, p.empirical_z - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{simulate, ZiLogNormalParams};
    use approx::assert_abs_diff_eq;

    #[test]
    fn plotting_positions_for_four() {
        assert_eq!(plotting_positions(4), vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(normal_quantile(0.5), 0.0);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(qq_lognormal(&[1.0, 2.0]), Err(Error::Input(_))));
        assert!(matches!(qq_lognormal(&[1.0, 0.0, 2.0]), Err(Error::Input(_))));
        assert!(matches!(qq_lognormal(&[3.0, 3.0, 3.0]), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn points_are_sorted_and_standardized() {
        let x: Vec<f64> = simulate(&ZiLogNormalParams::new(1.0, 2.0, 0.5).unwrap(), 500, 3).unwrap();
        let qq = qq_lognormal(&x).unwrap();
        assert_eq!(qq.points.len(), 500);
        assert!(qq.points.windows(2).all(|w| w[0].theoretical_z < w[1].theoretical_z));
        assert!(qq.points.windows(2).all(|w| w[0].empirical_z <= w[1].empirical_z));
        let n = qq.n as f64;
        let mean = qq.points.iter().map(|p| p.empirical_z).sum::<f64>() / n;
        let var = qq.points.iter().map(|p| (p.empirical_z - mean).powi(2)).sum::<f64>() / n;
        assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(var, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ties_are_kept() {
        let qq = qq_lognormal(&[2.0, 2.0, 5.0, 9.0]).unwrap();
        assert_eq!(qq.points[0].empirical_z, qq.points[1].empirical_z);
        assert!(qq.points[0].theoretical_z < qq.points[1].theoretical_z);
    }
}
