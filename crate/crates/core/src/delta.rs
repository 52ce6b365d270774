//! Delta-method confidence interval for the RPV difference.
//!
//! The per-visit variance of the RPV estimator is computed from parameters
//! fitted on both arms pooled together, then scaled by the harmonic rate
//! `h = (1/n_c + 1/n_t)^-1`:
//!
//! ```text
//! diff ± z(1 - α/2) · sqrt(σ²_RPV / h)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{fit_mle, ExperimentData, ZiLogNormalParams};
use crate::special::two_sided_critical;

/// How the per-visit RPV variance is composed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceMode {
    /// Delta method over the fitted `(r, mu, sigma2)` with their inverse
    /// Fisher information: `AOV² [r(1-r) + r σ² + r σ⁴/2]`. The AOV part
    /// reflects that AOV is estimated from the `n r` purchases only.
    #[default]
    Mle,
    /// `AOV² r(1-r) + r² Var(order value)` with `AOV² = e^{2μ+σ²}`.
    Consistent,
    /// As `Consistent` but with the first factor printed as `e^{μ+σ²/2}`.
    PaperLiteral,
}

/// Binomial and log-normal per-observation variances `(σ_r², σ²_AOV)`.
pub fn component_variances(params: &ZiLogNormalParams) -> (f64, f64) {
    (params.r * (1.0 - params.r), params.order_value_variance())
}

/// Per-visit variance of the RPV estimator at `pooled` parameters.
pub fn delta_variance(pooled: &ZiLogNormalParams, mode: VarianceMode) -> Result<f64> {
    let ZiLogNormalParams { r, mu, sigma2 } = *pooled;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::BoundaryParam(format!("conversion rate {r} must lie in (0, 1)")));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::BoundaryParam(format!("sigma2 {sigma2} must be positive")));
    }
    let aov_sq = (2.0 * mu + sigma2).exp();
    let (var_r, var_ov) = component_variances(pooled);
    let v = match mode {
        VarianceMode::Mle => aov_sq * (var_r + r * sigma2 + 0.5 * r * sigma2 * sigma2),
        VarianceMode::Consistent => aov_sq * var_r + r * r * var_ov,
        VarianceMode::PaperLiteral => (mu + 0.5 * sigma2).exp() * var_r + r * r * var_ov,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical(format!("RPV variance is not finite ({v})")))
    }
}

/// Harmonic rate `(1/n1 + 1/n2)^-1`.
pub fn harmonic_rate(n1: usize, n2: usize) -> f64 {
    1.0 / (1.0 / n1 as f64 + 1.0 / n2 as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RpvEstimate {
    pub rpv_control: f64,
    pub rpv_treatment: f64,
    /// `rpv_treatment - rpv_control`.
    pub diff: f64,
    /// Pooled per-visit variance σ²_RPV.
    pub pooled_sigma2_rpv: f64,
    pub h: f64,
    pub critical: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub alpha: f64,
    pub variance_mode: VarianceMode,
    /// Zero lies outside the interval.
    pub significant: bool,
}

/// Confidence interval for the treatment-minus-control RPV difference.
pub fn delta_ci(data: &ExperimentData, alpha: f64, mode: VarianceMode) -> Result<RpvEstimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Input(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let control = data.control_summary();
    let treatment = data.treatment_summary();
    let fit_c = fit_mle(&control)?;
    let fit_t = fit_mle(&treatment)?;
    for (name, fit) in [("control", &fit_c), ("treatment", &fit_t)] {
        if fit.sigma2 <= 0.0 {
            return Err(Error::BoundaryParam(format!("{name} order values have zero dispersion")));
        }
    }
    let pooled = fit_mle(&data.pooled_summary())?;
    let sigma2_rpv = delta_variance(&pooled, mode)?;

    let h = harmonic_rate(control.n, treatment.n);
    let critical = two_sided_critical(alpha);
    let half_width = critical * (sigma2_rpv / h).sqrt();
    let (rpv_c, rpv_t) = (fit_c.rpv(), fit_t.rpv());
    let diff = rpv_t - rpv_c;
    let (ci_low, ci_high) = (diff - half_width, diff + half_width);
    Ok(RpvEstimate {
        rpv_control: rpv_c,
        rpv_treatment: rpv_t,
        diff,
        pooled_sigma2_rpv: sigma2_rpv,
        h,
        critical,
        ci_low,
        ci_high,
        alpha,
        variance_mode: mode,
        significant: ci_low > 0.0 || ci_high < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::simulate;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(r: f64, mu: f64, sigma2: f64) -> ZiLogNormalParams {
        ZiLogNormalParams::new(r, mu, sigma2).unwrap()
    }

    #[test]
    fn variance_examples() {
        let p = params(0.05, 4.0, 1.0);
        assert_relative_eq!(
            delta_variance(&p, VarianceMode::Consistent).unwrap(),
            419.704_941_227_909_1,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            delta_variance(&p, VarianceMode::PaperLiteral).unwrap(),
            39.084_268_404_853_11,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            delta_variance(&p, VarianceMode::Mle).unwrap(),
            (9.0f64).exp() * (0.0475 + 0.05 + 0.025),
            max_relative = 1e-14
        );
        let v = delta_variance(&params(0.5, 0.0, 1e-12), VarianceMode::Consistent).unwrap();
        assert_abs_diff_eq!(v, 0.25, epsilon = 1e-9);
    }

    #[test]
    fn variance_rejects_boundary() {
        for p in [params(0.0, 1.0, 1.0), params(1.0, 1.0, 1.0), params(0.3, 1.0, 0.0)] {
            assert!(matches!(
                delta_variance(&p, VarianceMode::Mle),
                Err(Error::BoundaryParam(_))
            ));
        }
    }

    #[test]
    fn harmonic_rate_examples() {
        assert_eq!(harmonic_rate(500, 500), 250.0);
        assert_relative_eq!(harmonic_rate(1000, 4000), 800.0, max_relative = 1e-14);
    }

    #[test]
    fn identical_arms_give_centered_interval() {
        let x = simulate(&params(0.1, 3.0, 1.0), 4000, 2).unwrap();
        let data = ExperimentData::new(x.clone(), x).unwrap();
        let est = delta_ci(&data, 0.05, VarianceMode::Mle).unwrap();
        assert_eq!(est.diff, 0.0);
        assert_abs_diff_eq!(est.ci_low, -est.ci_high, epsilon = 1e-12);
        assert!(!est.significant);
        assert_eq!(est.h, 2000.0);
    }

    #[test]
    fn degenerate_arm_is_rejected() {
        let data = ExperimentData::new(vec![0.0, 0.0, 4.0], vec![0.0, 2.0, 3.0, 5.0]).unwrap();
        assert!(matches!(
            delta_ci(&data, 0.05, VarianceMode::Mle),
            Err(Error::DegenerateGroup(_))
        ));
    }

    #[test]
    fn scaling_values_scales_difference() {
        let c = simulate(&params(0.1, 3.0, 1.0), 3000, 4).unwrap();
        let t = simulate(&params(0.12, 3.1, 1.0), 3000, 5).unwrap();
        let data = ExperimentData::new(c, t).unwrap();
        let base = delta_ci(&data, 0.05, VarianceMode::Mle).unwrap();
        for factor in [0.01, 3.0, 250.0] {
            let scaled = delta_ci(&data.scaled(factor).unwrap(), 0.05, VarianceMode::Mle).unwrap();
            assert_relative_eq!(scaled.diff, factor * base.diff, max_relative = 1e-9);
            assert_relative_eq!(scaled.ci_high, factor * base.ci_high, max_relative = 1e-9);
            assert_eq!(scaled.significant, base.significant);
        }
    }
}
