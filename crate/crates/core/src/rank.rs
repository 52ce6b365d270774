//! Two-part test for zero-clumped revenue data.
//!
//! Combines a pooled two-proportion z statistic on the no-purchase rate with
//! a Mann-Whitney z statistic on order values into `L = z_p² + z_u²`, which is
//! chi-square(2) under the null. After an overall rejection the sign of each
//! component is read off against the normal critical value and the pair of
//! verdicts is mapped onto an RPV decision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ExperimentData, GroupSummary};
use crate::special::{chi2_2_upper_quantile, two_sided_critical};

/// Rejection threshold for `L` quoted in the original two-part test write-up.
pub const PAPER_L_THRESHOLD: f64 = 9.633;

/// Direction and significance of one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    PosSig,
    NonSig,
    NegSig,
}

impl Verdict {
    pub const ALL: [Verdict; 3] = [Verdict::PosSig, Verdict::NonSig, Verdict::NegSig];

    fn from_z(z: f64, critical: f64) -> Self {
        if z > critical {
            Verdict::PosSig
        } else if z < -critical {
            Verdict::NegSig
        } else {
            Verdict::NonSig
        }
    }
}

/// Conclusion about revenue per visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Positive,
    Negative,
    NoChange,
    Indeterminate,
}

impl Decision {
    pub fn is_determinate(self) -> bool {
        !matches!(self, Decision::Indeterminate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// chi-square(2) quantile at `1 - alpha`.
    #[default]
    Consistent,
    /// The fixed value [`PAPER_L_THRESHOLD`].
    Paper,
}

/// Which visits enter the rank statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankScope {
    /// Purchases only; `z_u` then isolates the order-value component.
    #[default]
    Positive,
    /// Every visit, zeros included.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPartConfig {
    pub alpha: f64,
    pub threshold: ThresholdMode,
    pub rank_scope: RankScope,
}

impl Default for TwoPartConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            threshold: ThresholdMode::Consistent,
            rank_scope: RankScope::Positive,
        }
    }
}

impl TwoPartConfig {
    pub fn l_threshold(&self) -> f64 {
        match self.threshold {
            ThresholdMode::Consistent => chi2_2_upper_quantile(self.alpha),
            ThresholdMode::Paper => PAPER_L_THRESHOLD,
        }
    }

    pub fn component_threshold(&self) -> f64 {
        two_sided_critical(self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPartResult {
    /// Proportion statistic on no-purchases (treatment minus control).
    pub z_p: f64,
    /// Rank statistic, treatment against control; absent when an arm has no purchases.
    pub z_u: Option<f64>,
    /// `z_p² + z_u²`.
    pub l: f64,
    pub alpha: f64,
    pub component_threshold: f64,
    pub l_threshold: f64,
    /// `l > l_threshold`.
    pub reject: bool,
    /// Conversion-rate direction (opposite sign to `z_p`).
    pub r_verdict: Verdict,
    pub aov_verdict: Option<Verdict>,
    pub decision: Decision,
    /// An arm had no purchases, so the rank component is undefined.
    pub degenerate: bool,
}

/// Pooled two-proportion z statistic for the no-purchase rate,
/// `(p_treatment - p_control) / sqrt(p_pool (1 - p_pool) (1/n_t + 1/n_c))`.
pub fn z_proportion(control: &GroupSummary, treatment: &GroupSummary) -> Result<f64> {
    if control.n == 0 || treatment.n == 0 {
        return Err(Error::Input("z_proportion needs non-empty groups".into()));
    }
    let (n1, n2) = (treatment.n as f64, control.n as f64);
    let pooled = (treatment.k + control.k) as f64 / (n1 + n2);
    if pooled <= 0.0 || pooled >= 1.0 {
        return Err(Error::DegenerateProportion(pooled));
    }
    let p1 = treatment.k as f64 / n1;
    let p2 = control.k as f64 / n2;
    Ok((p1 - p2) / (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt())
}

/// Mann-Whitney U of `a` against `b`: wins of `a` over `b`, ties counting half.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Input("mann_whitney_u needs two non-empty samples".into()));
    }
    let mut sorted = b.to_vec();
    sorted.sort_by(f64::total_cmp);
    // Twice U, kept integral so ties are exact.
    let doubled: u64 = a
        .iter()
        .map(|x| {
            let below = sorted.partition_point(|y| y < x);
            let not_above = sorted.partition_point(|y| y <= x);
            (below + not_above) as u64
        })
        .sum();
    Ok(doubled as f64 / 2.0)
}

/// Normal approximation for U, without tie correction.
pub fn z_rank(u: f64, n1: usize, n2: usize) -> f64 {
    let (n1, n2) = (n1 as f64, n2 as f64);
    (u - n1 * n2 / 2.0) / (n1 * n2 * (n1 + n2 + 1.0) / 12.0).sqrt()
}

/// RPV decision for a pair of component verdicts.
///
/// | r \ AOV | Pos      | Non      | Neg           |
/// |---------|----------|----------|---------------|
/// | Pos     | Positive | Positive | Indeterminate |
/// | Non     | Positive | NoChange | Negative      |
/// | Neg     | Indet.   | Negative | Negative      |
pub fn classify(r_verdict: Verdict, aov_verdict: Verdict) -> Decision {
    use Decision::*;
    use Verdict::*;
    match (r_verdict, aov_verdict) {
        (PosSig, PosSig) | (PosSig, NonSig) | (NonSig, PosSig) => Positive,
        (NonSig, NonSig) => NoChange,
        (NonSig, NegSig) | (NegSig, NonSig) | (NegSig, NegSig) => Negative,
        (PosSig, NegSig) | (NegSig, PosSig) => Indeterminate,
    }
}

/// Runs the two-part test on raw order values.
pub fn two_part_test(data: &ExperimentData, config: &TwoPartConfig) -> Result<TwoPartResult> {
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::Input(format!("alpha must lie in (0, 1), got {}", config.alpha)));
    }
    let control = data.control_summary();
    let treatment = data.treatment_summary();
    let z_p = z_proportion(&control, &treatment)?;

    let z_u = match config.rank_scope {
        RankScope::Positive => {
            let a: Vec<f64> = data.treatment.iter().copied().filter(|v| *v > 0.0).collect();
            let b: Vec<f64> = data.control.iter().copied().filter(|v| *v > 0.0).collect();
            if a.is_empty() || b.is_empty() {
                None
            } else {
                Some(z_rank(mann_whitney_u(&a, &b)?, a.len(), b.len()))
            }
        }
        RankScope::All => {
            let u = mann_whitney_u(&data.treatment, &data.control)?;
            Some(z_rank(u, data.treatment.len(), data.control.len()))
        }
    };

    let l = z_p * z_p + z_u.map_or(0.0, |z| z * z);
    let l_threshold = config.l_threshold();
    let component_threshold = config.component_threshold();
    let reject = l > l_threshold;

    // Fewer no-purchases in treatment means higher conversion, hence the flip.
    let (r_verdict, aov_verdict) = if reject {
        (
            Verdict::from_z(-z_p, component_threshold),
            z_u.map(|z| Verdict::from_z(z, component_threshold)),
        )
    } else {
        (Verdict::NonSig, z_u.map(|_| Verdict::NonSig))
    };

    let decision = match aov_verdict {
        None => Decision::Indeterminate,
        Some(_) if !reject => Decision::NoChange,
        // Overall rejection that neither component accounts for.
        Some(Verdict::NonSig) if r_verdict == Verdict::NonSig => Decision::Indeterminate,
        Some(aov) => classify(r_verdict, aov),
    };

    Ok(TwoPartResult {
        z_p,
        z_u,
        l,
        alpha: config.alpha,
        component_threshold,
        l_threshold,
        reject,
        r_verdict,
        aov_verdict,
        decision,
        degenerate: z_u.is_none(),
    })
}
