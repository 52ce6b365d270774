//! Staged analysis and per-command report builders.
//!
//! The staged analysis runs the two-part test first and stops on a
//! determinate decision. Only an indeterminate outcome proceeds to the
//! configured parametric test.

use serde_json::{json, Map, Value};

use crate::config::{AnalysisConfig, ParametricTest};
use crate::delta::{delta_ci, RpvEstimate};
use crate::diagnostics::qq_lognormal;
use crate::error::Result;
use crate::io::digest;
use crate::lrt::{lrt, LrtResult};
use crate::model::{simulate, ExperimentData, ZiLogNormalParams};
use crate::power::{estimate_power, find_sample_size, SearchConfig, TestKind};
use crate::rank::{two_part_test, Decision, TwoPartResult};
use crate::report::{AnalysisReport, ConfigEcho, SimulationSummary, StageResult, Thresholds};
use crate::rng::derive_seed;

fn echo(command: &str, config: &AnalysisConfig, parameters: Map<String, Value>) -> ConfigEcho {
    ConfigEcho {
        command: command.to_string(),
        analysis: *config,
        thresholds: Thresholds::from_config(config),
        parameters,
    }
}

fn params(pairs: Value) -> Map<String, Value> {
    match pairs {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn two_part_verdict(r: &TwoPartResult) -> String {
    match r.decision {
        Decision::Positive => "two-part test: RPV increased (Positive)".into(),
        Decision::Negative => "two-part test: RPV decreased (Negative)".into(),
        Decision::NoChange => "two-part test: no significant difference (NoChange)".into(),
        Decision::Indeterminate => "two-part test: indeterminate; a parametric RPV test is required".into(),
    }
}

fn two_part_warnings(r: &TwoPartResult) -> Vec<String> {
    let mut w = Vec::new();
    if r.degenerate {
        w.push("an arm has no purchases; the rank component is undefined".into());
    }
    if r.reject && r.r_verdict == crate::rank::Verdict::NonSig && r.aov_verdict == Some(crate::rank::Verdict::NonSig) {
        w.push("L is significant but neither component is; treated as indeterminate".into());
    }
    w
}

fn delta_verdict(e: &RpvEstimate) -> String {
    let ci = format!("[{:.6}, {:.6}]", e.ci_low, e.ci_high);
    if !e.significant {
        format!("delta CI: no significant RPV change, CI {ci} contains 0")
    } else if e.diff > 0.0 {
        format!("delta CI: RPV increased by {:.6}, CI {ci}", e.diff)
    } else {
        format!("delta CI: RPV decreased by {:.6}, CI {ci}", -e.diff)
    }
}

fn lrt_verdict(r: &LrtResult) -> String {
    let diff = r.unconstrained.1.rpv() - r.unconstrained.0.rpv();
    if !r.reject {
        format!("LRT: no significant RPV change (p = {:.6})", r.p_value)
    } else if diff > 0.0 {
        format!("LRT: RPV increased (p = {:.6})", r.p_value)
    } else {
        format!("LRT: RPV decreased (p = {:.6})", r.p_value)
    }
}

fn finish(
    command: &str,
    data_digest: String,
    config: &AnalysisConfig,
    parameters: Map<String, Value>,
    result: Vec<StageResult>,
    verdict: String,
    mut warnings: Vec<String>,
) -> AnalysisReport {
    let mut all = config.mode_warnings();
    all.append(&mut warnings);
    AnalysisReport {
        stage: result.iter().map(StageResult::stage).collect(),
        inputs_digest: data_digest,
        config_echo: echo(command, config, parameters),
        result,
        verdict,
        warnings: all,
    }
}

/// Two-part test first; the configured parametric test only when it is indeterminate.
pub fn run_pipeline(data: &ExperimentData, config: &AnalysisConfig) -> Result<AnalysisReport> {
    let data_digest = digest(data);
    let tp = two_part_test(data, &config.two_part())?;
    let mut warnings = two_part_warnings(&tp);
    let mut result = vec![StageResult::TwoPart(tp)];

    let verdict = if tp.decision.is_determinate() {
        two_part_verdict(&tp)
    } else {
        warnings.push(format!(
            "parametric stage reuses the two-part test data (sha256 {data_digest}); valid inference requires a newly collected sample"
        ));
        match config.parametric {
            ParametricTest::Delta => {
                let e = delta_ci(data, config.alpha, config.variance_mode)?;
                result.push(StageResult::DeltaCi(e));
                delta_verdict(&e)
            }
            ParametricTest::Lrt => {
                let r = lrt(data, config.alpha, &config.solver())?;
                result.push(StageResult::Lrt(r));
                lrt_verdict(&r)
            }
        }
    };
    Ok(finish("pipeline", data_digest, config, Map::new(), result, verdict, warnings))
}

pub fn two_part_report(data: &ExperimentData, config: &AnalysisConfig) -> Result<AnalysisReport> {
    let tp = two_part_test(data, &config.two_part())?;
    let warnings = two_part_warnings(&tp);
    Ok(finish(
        "two-part",
        digest(data),
        config,
        Map::new(),
        vec![StageResult::TwoPart(tp)],
        two_part_verdict(&tp),
        warnings,
    ))
}

pub fn delta_report(data: &ExperimentData, config: &AnalysisConfig) -> Result<AnalysisReport> {
    let e = delta_ci(data, config.alpha, config.variance_mode)?;
    Ok(finish(
        "delta",
        digest(data),
        config,
        Map::new(),
        vec![StageResult::DeltaCi(e)],
        delta_verdict(&e),
        Vec::new(),
    ))
}

pub fn lrt_report(data: &ExperimentData, config: &AnalysisConfig) -> Result<AnalysisReport> {
    let r = lrt(data, config.alpha, &config.solver())?;
    Ok(finish(
        "lrt",
        digest(data),
        config,
        Map::new(),
        vec![StageResult::Lrt(r)],
        lrt_verdict(&r),
        Vec::new(),
    ))
}

pub fn power_report(
    pilot: &ExperimentData,
    n_per_group: usize,
    replications: usize,
    kind: TestKind,
    config: &AnalysisConfig,
) -> Result<AnalysisReport> {
    let p = estimate_power(pilot, n_per_group, replications, kind, config, config.seed)?;
    let mut warnings = Vec::new();
    if p.degenerate > 0 {
        warnings.push(format!(
            "{} of {} resamples were degenerate and counted as non-rejections",
            p.degenerate, p.replications
        ));
    }
    let verdict = format!(
        "estimated power {:.4} (95% CI [{:.4}, {:.4}]) at n = {} per group",
        p.power, p.power_ci_low, p.power_ci_high, n_per_group
    );
    Ok(finish(
        "power",
        digest(pilot),
        config,
        params(json!({ "n_per_group": n_per_group, "replications": replications, "test": kind })),
        vec![StageResult::Power(p)],
        verdict,
        warnings,
    ))
}

pub fn sample_size_report(
    pilot: &ExperimentData,
    target_power: f64,
    kind: TestKind,
    config: &AnalysisConfig,
    search: &SearchConfig,
) -> Result<AnalysisReport> {
    let plan = find_sample_size(pilot, target_power, kind, config, config.seed, search)?;
    let mut warnings = plan.warnings.clone();
    let degenerate: usize = plan.search_trace.iter().map(|(_, p)| p.degenerate).sum();
    if degenerate > 0 {
        warnings.push(format!("{degenerate} degenerate resamples across the search"));
    }
    let verdict = format!(
        "n = {} per group reaches power >= {} for {:?}",
        plan.chosen_n, target_power, kind
    );
    Ok(finish(
        "samplesize",
        digest(pilot),
        config,
        params(json!({ "target_power": target_power, "test": kind, "search": search })),
        vec![StageResult::SampleSize(plan)],
        verdict,
        warnings,
    ))
}

/// Which arm(s) feed the Q-Q diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QqSource {
    Control,
    Treatment,
    Both,
}

pub fn qq_report(data: &ExperimentData, source: QqSource, config: &AnalysisConfig) -> Result<AnalysisReport> {
    let values: Vec<f64> = match source {
        QqSource::Control => data.control.clone(),
        QqSource::Treatment => data.treatment.clone(),
        QqSource::Both => data.control.iter().chain(&data.treatment).copied().collect(),
    }
    .into_iter()
    .filter(|v| *v > 0.0)
    .collect();
    let qq = qq_lognormal(&values)?;
    let verdict = format!(
        "Q-Q correlation {:.6} over {} purchases; inspect the plot data for systematic deviation from y = x",
        qq.correlation, qq.n
    );
    Ok(finish(
        "qq",
        digest(data),
        config,
        params(json!({ "source": source })),
        vec![StageResult::Qq(qq)],
        verdict,
        Vec::new(),
    ))
}

/// Simulated experiment: control from stream `derive_seed(seed, 0)`,
/// treatment from `derive_seed(seed, 1)`.
pub fn simulate_experiment(
    control: &ZiLogNormalParams,
    treatment: &ZiLogNormalParams,
    n_per_group: usize,
    seed: u64,
) -> Result<ExperimentData> {
    ExperimentData::new(
        simulate(control, n_per_group, derive_seed(seed, 0))?,
        simulate(treatment, n_per_group, derive_seed(seed, 1))?,
    )
}

pub fn simulate_report(
    control: &ZiLogNormalParams,
    treatment: &ZiLogNormalParams,
    n_per_group: usize,
    config: &AnalysisConfig,
) -> Result<(ExperimentData, AnalysisReport)> {
    let data = simulate_experiment(control, treatment, n_per_group, config.seed)?;
    let summary = SimulationSummary {
        control_params: *control,
        treatment_params: *treatment,
        n_per_group,
        control: data.control_summary(),
        treatment: data.treatment_summary(),
    };
    let mut warnings = Vec::new();
    if control.is_boundary() || treatment.is_boundary() {
        warnings.push("simulation parameters lie on the boundary (r in {0,1} or sigma2 = 0)".into());
    }
    let verdict = format!(
        "simulated {} visits per group; RPV control {:.6}, treatment {:.6}",
        n_per_group,
        control.rpv(),
        treatment.rpv()
    );
    let report = finish(
        "simulate",
        digest(&data),
        config,
        params(json!({ "n_per_group": n_per_group, "control": control, "treatment": treatment })),
        vec![StageResult::Simulate(summary)],
        verdict,
        warnings,
    );
    Ok((data, report))
}
