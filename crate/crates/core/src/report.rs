//! Structured analysis reports and their text rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::AnalysisConfig;
use crate::delta::RpvEstimate;
use crate::diagnostics::QqData;
use crate::lrt::LrtResult;
use crate::model::{GroupSummary, ZiLogNormalParams};
use crate::power::{PowerEstimate, SampleSizePlan};
use crate::rank::{TwoPartResult, PAPER_L_THRESHOLD};
use crate::special::{chi2_1_upper_quantile, chi2_2_upper_quantile, two_sided_critical};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    TwoPart,
    DeltaCi,
    Lrt,
    Power,
    SampleSize,
    Qq,
    Simulate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub control_params: ZiLogNormalParams,
    pub treatment_params: ZiLogNormalParams,
    pub n_per_group: usize,
    pub control: GroupSummary,
    pub treatment: GroupSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum StageResult {
    TwoPart(TwoPartResult),
    DeltaCi(RpvEstimate),
    Lrt(LrtResult),
    Power(PowerEstimate),
    SampleSize(SampleSizePlan),
    Qq(QqData),
    Simulate(SimulationSummary),
}

impl StageResult {
    pub fn stage(&self) -> Stage {
        match self {
            StageResult::TwoPart(_) => Stage::TwoPart,
            StageResult::DeltaCi(_) => Stage::DeltaCi,
            StageResult::Lrt(_) => Stage::Lrt,
            StageResult::Power(_) => Stage::Power,
            StageResult::SampleSize(_) => Stage::SampleSize,
            StageResult::Qq(_) => Stage::Qq,
            StageResult::Simulate(_) => Stage::Simulate,
        }
    }
}

/// Every critical value in play, so modes can be audited from the report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub alpha: f64,
    /// Threshold actually used for L.
    pub l_threshold: f64,
    pub chi2_2_quantile: f64,
    pub paper_l_threshold: f64,
    pub normal_critical: f64,
    pub chi2_1_quantile: f64,
}

impl Thresholds {
    pub fn from_config(config: &AnalysisConfig) -> Self {
        Self {
            alpha: config.alpha,
            l_threshold: config.two_part().l_threshold(),
            chi2_2_quantile: chi2_2_upper_quantile(config.alpha),
            paper_l_threshold: PAPER_L_THRESHOLD,
            normal_critical: two_sided_critical(config.alpha),
            chi2_1_quantile: chi2_1_upper_quantile(config.alpha),
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub command: String,
    pub analysis: AnalysisConfig,
    pub thresholds: Thresholds,
    /// Command-specific parameters (sizes, replications, search bounds, ...).
    pub parameters: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    /// Stages in the order they ran.
    pub stage: Vec<Stage>,
    /// SHA-256 of the canonical CSV form of the input (or generated) data.
    pub inputs_digest: String,
    pub config_echo: ConfigEcho,
    pub result: Vec<StageResult>,
    pub verdict: String,
    pub warnings: Vec<String>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Plain-text rendering; a pure function of the structured report.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let stages: Vec<String> = self.stage.iter().map(|s| format!("{s:?}")).collect();
        let _ = writeln!(out, "command   : {}", self.config_echo.command);
        let _ = writeln!(out, "stages    : {}", stages.join(" -> "));
        let _ = writeln!(out, "input     : sha256 {}", self.inputs_digest);
        let a = &self.config_echo.analysis;
        let _ = writeln!(
            out,
            "config    : alpha={} threshold={:?} rank-scope={:?} variance-mode={:?} constraint={:?} parametric={:?} seed={}",
            a.alpha, a.threshold, a.rank_scope, a.variance_mode, a.constraint, a.parametric, a.seed
        );
        for (k, v) in &self.config_echo.parameters {
            let _ = writeln!(out, "            {k}={v}");
        }
        let t = &self.config_echo.thresholds;
        let _ = writeln!(
            out,
            "thresholds: L>{:.4} (chi2_2 {:.4}, paper {}) |z|>{:.4} chi2_1 {:.4}",
            t.l_threshold, t.chi2_2_quantile, t.paper_l_threshold, t.normal_critical, t.chi2_1_quantile
        );
        for r in &self.result {
            out.push('\n');
            render_result(&mut out, r);
        }
        let _ = writeln!(out, "\nverdict   : {}", self.verdict);
        for w in &self.warnings {
            let _ = writeln!(out, "warning   : {w}");
        }
        out
    }
}

fn render_result(out: &mut String, result: &StageResult) {
    match result {
        StageResult::TwoPart(r) => {
            let _ = writeln!(out, "[two-part test]");
            let z_u = r.z_u.map_or("n/a".to_string(), |z| format!("{z:.4}"));
            let _ = writeln!(out, "  z_p={:.4} z_u={} L={:.4} reject={}", r.z_p, z_u, r.l, r.reject);
            let aov = r.aov_verdict.map_or("n/a".to_string(), |v| format!("{v:?}"));
            let _ = writeln!(
                out,
                "  conversion {:?}, AOV {} -> {:?}",
                r.r_verdict, aov, r.decision
            );
        }
        StageResult::DeltaCi(e) => {
            let _ = writeln!(out, "[delta-method CI]");
            let _ = writeln!(
                out,
                "  RPV control={:.6} treatment={:.6} diff={:.6}",
                e.rpv_control, e.rpv_treatment, e.diff
            );
            let _ = writeln!(
                out,
                "  sigma2_RPV={:.6} h={:.3} CI=[{:.6}, {:.6}] significant={}",
                e.pooled_sigma2_rpv, e.h, e.ci_low, e.ci_high, e.significant
            );
        }
        StageResult::Lrt(r) => {
            let _ = writeln!(out, "[likelihood-ratio test]");
            let _ = writeln!(
                out,
                "  -2 ln LR={:.6} df={} p={:.6} lambda={:.6} reject={}",
                r.stat, r.df, r.p_value, r.lambda, r.reject
            );
            let (c, t) = r.constrained;
            let _ = writeln!(
                out,
                "  constrained control r={:.6} mu={:.6} s2={:.6} | treatment r={:.6} mu={:.6} s2={:.6}",
                c.r, c.mu, c.sigma2, t.r, t.mu, t.sigma2
            );
            let _ = writeln!(
                out,
                "  kkt residual={:.3e} constraint violation={:.3e} iterations={}",
                r.kkt_residual, r.constraint_violation, r.iterations
            );
        }
        StageResult::Power(p) => {
            let _ = writeln!(out, "[power]");
            render_power(out, p);
        }
        StageResult::SampleSize(plan) => {
            let _ = writeln!(out, "[sample size]");
            let _ = writeln!(out, "  target power {} -> n per group {}", plan.target_power, plan.chosen_n);
            for (_, p) in &plan.search_trace {
                render_power(out, p);
            }
        }
        StageResult::Qq(q) => {
            let _ = writeln!(out, "[Q-Q log-normal]");
            let _ = writeln!(out, "  n={} correlation={:.6}", q.n, q.correlation);
        }
        StageResult::Simulate(s) => {
            let _ = writeln!(out, "[simulate]");
            let _ = writeln!(
                out,
                "  n per group {}; purchases control={} treatment={}",
                s.n_per_group,
                s.control.purchases(),
                s.treatment.purchases()
            );
        }
    }
}

fn render_power(out: &mut String, p: &PowerEstimate) {
    let _ = writeln!(
        out,
        "  n={} power={:.4} [{:.4}, {:.4}] ({}/{} rejections, {} degenerate, {:?})",
        p.n_per_group,
        p.power,
        p.power_ci_low,
        p.power_ci_high,
        p.rejections,
        p.replications,
        p.degenerate,
        p.test_kind
    );
}
