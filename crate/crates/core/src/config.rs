use serde::{Deserialize, Serialize};

use crate::delta::VarianceMode;
use crate::lrt::{ConstraintKind, SolverOptions};
use crate::rank::{RankScope, ThresholdMode, TwoPartConfig};

/// Parametric test run when the two-part test is indeterminate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParametricTest {
    #[default]
    Delta,
    Lrt,
}

/// Every knob that influences a result. Echoed verbatim in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub alpha: f64,
    pub threshold: ThresholdMode,
    pub rank_scope: RankScope,
    pub variance_mode: VarianceMode,
    pub constraint: ConstraintKind,
    pub parametric: ParametricTest,
    pub solver_tolerance: f64,
    pub seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            threshold: ThresholdMode::Consistent,
            rank_scope: RankScope::Positive,
            variance_mode: VarianceMode::Mle,
            constraint: ConstraintKind::Rpv,
            parametric: ParametricTest::Delta,
            solver_tolerance: SolverOptions::default().tolerance,
            seed: 0,
        }
    }
}

impl AnalysisConfig {
    pub fn two_part(&self) -> TwoPartConfig {
        TwoPartConfig {
            alpha: self.alpha,
            threshold: self.threshold,
            rank_scope: self.rank_scope,
        }
    }

    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            constraint: self.constraint,
            tolerance: self.solver_tolerance,
            ..SolverOptions::default()
        }
    }

    /// Human-readable notes for every non-default reproduction mode.
    pub fn mode_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.threshold == ThresholdMode::Paper {
            out.push(format!(
                "threshold=paper: L is compared to {} instead of the chi-square(2) quantile {:.3} at alpha={}",
                crate::rank::PAPER_L_THRESHOLD,
                crate::special::chi2_2_upper_quantile(self.alpha),
                self.alpha
            ));
        }
        match self.variance_mode {
            VarianceMode::Mle => {}
            VarianceMode::Consistent => out.push(
                "variance-mode=consistent: AOV variance is not scaled by the purchase count; intervals undercover at low conversion"
                    .into(),
            ),
            VarianceMode::PaperLiteral => out.push(
                "variance-mode=paper-literal: first variance term uses e^(mu+sigma2/2); intervals undercover".into(),
            ),
        }
        if self.constraint == ConstraintKind::PaperLiteral {
            out.push("constraint=paper-literal: null imposes p_c*mu_c = p_t*mu_t, not equal RPV".into());
        }
        if self.rank_scope == RankScope::All {
            out.push("rank-scope=all: rank statistic includes zero order values".into());
        }
        out
    }
}
