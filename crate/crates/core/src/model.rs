//! Zero-inflated log-normal revenue model.
//!
//! A visit converts with probability `r`; a converted visit has an order
//! value whose logarithm is `Normal(mu, sigma2)`. Non-converted visits are
//! recorded as an order value of exactly zero.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::special::normal_quantile;

/// Per-visit order values for the two arms of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentData {
    pub control: Vec<f64>,
    pub treatment: Vec<f64>,
}

impl ExperimentData {
    pub fn new(control: Vec<f64>, treatment: Vec<f64>) -> Result<Self> {
        validate_group("control", &control)?;
        validate_group("treatment", &treatment)?;
        Ok(Self { control, treatment })
    }

    pub fn control_summary(&self) -> GroupSummary {
        summarize_unchecked(self.control.iter().copied())
    }

    pub fn treatment_summary(&self) -> GroupSummary {
        summarize_unchecked(self.treatment.iter().copied())
    }

    /// Summary over the union of both arms.
    pub fn pooled_summary(&self) -> GroupSummary {
        summarize_unchecked(self.control.iter().chain(&self.treatment).copied())
    }

    /// Both arms with every order value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::Input(format!("scale factor must be positive, got {factor}")));
        }
        Self::new(
            self.control.iter().map(|v| v * factor).collect(),
            self.treatment.iter().map(|v| v * factor).collect(),
        )
    }
}

fn validate_group(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Input(format!("{name} group is empty")));
    }
    if let Some((i, v)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        return Err(Error::Input(format!(
            "{name} value #{i} is {v}; order values must be finite and >= 0"
        )));
    }
    Ok(())
}

/// Sufficient statistics of one arm.
///
/// `log_var` uses divisor `m = n - k` (maximum-likelihood convention), so it
/// is the variance the log-likelihood is maximized at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub n: usize,
    /// Number of visits without a purchase.
    pub k: usize,
    /// No-purchase proportion `k / n`.
    pub p_hat: f64,
    /// Conversion rate `1 - k / n`.
    pub r_hat: f64,
    /// Mean of `ln` over positive values; absent without purchases.
    pub log_mean: Option<f64>,
    /// Variance of `ln` over positive values; absent with fewer than two purchases.
    pub log_var: Option<f64>,
}

impl GroupSummary {
    /// Number of purchases.
    pub fn purchases(&self) -> usize {
        self.n - self.k
    }
}

/// Sufficient statistics of one arm's order values.
pub fn summarize(values: &[f64]) -> Result<GroupSummary> {
    validate_group("group", values)?;
    Ok(summarize_unchecked(values.iter().copied()))
}

fn summarize_unchecked(values: impl Iterator<Item = f64> + Clone) -> GroupSummary {
    let mut n = 0usize;
    let mut m = 0usize;
    let mut sum = 0.0;
    for v in values.clone() {
        n += 1;
        if v > 0.0 {
            m += 1;
            sum += v.ln();
        }
    }
    let k = n - m;
    let log_mean = (m >= 1).then(|| sum / m as f64);
    let log_var = match log_mean {
        Some(mean) if m >= 2 => {
            // Second pass about the mean; corrected for the residual mean error.
            let (ss, s1) = values
                .filter(|v| *v > 0.0)
                .map(|v| v.ln() - mean)
                .fold((0.0, 0.0), |(ss, s1), d| (ss + d * d, s1 + d));
            Some(((ss - s1 * s1 / m as f64) / m as f64).max(0.0))
        }
        _ => None,
    };
    let p_hat = k as f64 / n as f64;
    GroupSummary {
        n,
        k,
        p_hat,
        r_hat: 1.0 - p_hat,
        log_mean,
        log_var,
    }
}

/// Parameters of the zero-inflated log-normal model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZiLogNormalParams {
    /// Conversion probability.
    pub r: f64,
    /// Location of `ln(order value)`.
    pub mu: f64,
    /// Variance of `ln(order value)`.
    pub sigma2: f64,
}

impl ZiLogNormalParams {
    pub fn new(r: f64, mu: f64, sigma2: f64) -> Result<Self> {
        if !(r.is_finite() && (0.0..=1.0).contains(&r)) {
            return Err(Error::Input(format!("conversion rate must lie in [0, 1], got {r}")));
        }
        if !mu.is_finite() {
            return Err(Error::Input(format!("mu must be finite, got {mu}")));
        }
        if !(sigma2.is_finite() && sigma2 >= 0.0) {
            return Err(Error::Input(format!("sigma2 must be >= 0, got {sigma2}")));
        }
        Ok(Self { r, mu, sigma2 })
    }

    /// Average order value `exp(mu + sigma2 / 2)`.
    pub fn aov(&self) -> f64 {
        (self.mu + 0.5 * self.sigma2).exp()
    }

    /// Revenue per visit, `r * AOV`.
    pub fn rpv(&self) -> f64 {
        rpv(self)
    }

    /// Variance of a single order value, `(e^{σ²} - 1) e^{2μ + σ²}`.
    pub fn order_value_variance(&self) -> f64 {
        self.sigma2.exp_m1() * (2.0 * self.mu + self.sigma2).exp()
    }

    /// `r` on the edge of `[0, 1]` or zero dispersion.
    pub fn is_boundary(&self) -> bool {
        self.r <= 0.0 || self.r >= 1.0 || self.sigma2 <= 0.0
    }
}

/// Expected revenue per visit.
pub fn rpv(params: &ZiLogNormalParams) -> f64 {
    params.r * params.aov()
}

/// Closed-form maximum-likelihood fit of one arm.
///
/// Zero dispersion (all purchases equal) is returned with `sigma2 = 0`;
/// callers check [`ZiLogNormalParams::is_boundary`].
pub fn fit_mle(summary: &GroupSummary) -> Result<ZiLogNormalParams> {
    match (summary.log_mean, summary.log_var) {
        (Some(mu), Some(sigma2)) => Ok(ZiLogNormalParams {
            r: summary.r_hat,
            mu,
            sigma2,
        }),
        _ => Err(Error::DegenerateGroup(format!(
            "need at least 2 purchases to fit, found {}",
            summary.purchases()
        ))),
    }
}

/// Draws `n` visits from the model. Visit `i` uses stream `(seed, i)`.
pub fn simulate(params: &ZiLogNormalParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Input("simulate needs n >= 1".into()));
    }
    let params = ZiLogNormalParams::new(params.r, params.mu, params.sigma2)?;
    let sigma = params.sigma2.sqrt();
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i);
            if rng::open_unit(&mut rng) < params.r {
                let z = normal_quantile(rng::open_unit(&mut rng));
                (params.mu + sigma * z).exp()
            } else {
                0.0
            }
        })
        .collect())
}
