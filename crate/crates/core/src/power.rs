//! Monte Carlo power and sample-size planning from pilot data.
//!
//! Each replication resamples `n` visits with replacement from each pilot arm
//! separately and runs the chosen test. Power is the fraction of replications
//! that reject. Replication `j` draws from stream `(seed, j)`, so estimates do
//! not depend on thread scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::AnalysisConfig;
use crate::delta::delta_ci;
use crate::error::{Error, Result};
use crate::lrt::lrt;
use crate::model::ExperimentData;
use crate::rank::two_part_test;
use crate::rng;
use crate::special::two_sided_critical;

pub const MIN_REPLICATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    TwoPart,
    DeltaCi,
    Lrt,
}

impl TestKind {
    pub const ALL: [TestKind; 3] = [TestKind::TwoPart, TestKind::DeltaCi, TestKind::Lrt];
}

/// Outcome of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Reject,
    Accept,
    Degenerate,
}

/// Runs `kind` on `data` and reports whether it rejects the null.
///
/// Degenerate data (no purchases, zero dispersion, solver failure) is an
/// [`Outcome::Degenerate`]; invalid configuration is an error.
pub fn run_test(kind: TestKind, data: &ExperimentData, config: &AnalysisConfig) -> Result<Outcome> {
    let outcome = match kind {
        TestKind::TwoPart => two_part_test(data, &config.two_part()).map(|r| {
            if r.degenerate {
                Outcome::Degenerate
            } else if r.reject {
                Outcome::Reject
            } else {
                Outcome::Accept
            }
        }),
        TestKind::DeltaCi => delta_ci(data, config.alpha, config.variance_mode).map(|e| reject_if(e.significant)),
        TestKind::Lrt => lrt(data, config.alpha, &config.solver()).map(|r| reject_if(r.reject)),
    };
    match outcome {
        Ok(o) => Ok(o),
        Err(Error::Input(msg)) => Err(Error::Input(msg)),
        Err(_) => Ok(Outcome::Degenerate),
    }
}

fn reject_if(reject: bool) -> Outcome {
    if reject {
        Outcome::Reject
    } else {
        Outcome::Accept
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub n_per_group: usize,
    pub replications: usize,
    pub rejections: usize,
    /// Replications where the test could not be computed; counted as non-rejections.
    pub degenerate: usize,
    pub power: f64,
    /// 95% Wilson interval.
    pub power_ci_low: f64,
    pub power_ci_high: f64,
    pub test_kind: TestKind,
    pub alpha: f64,
    pub seed: u64,
}

/// Wilson score interval for `successes / trials` at confidence `1 - alpha`.
pub fn wilson_interval(successes: usize, trials: usize, alpha: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = two_sided_critical(alpha);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

fn resample(values: &[f64], n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| values[rng.random_range(0..values.len())]).collect()
}

fn replicate(
    pilot: &ExperimentData,
    n: usize,
    kind: TestKind,
    config: &AnalysisConfig,
    seed: u64,
    j: usize,
) -> Result<Outcome> {
    let mut rng = rng::stream(seed, j as u64);
    let control = resample(&pilot.control, n, &mut rng);
    let treatment = resample(&pilot.treatment, n, &mut rng);
    run_test(kind, &ExperimentData { control, treatment }, config)
}

fn estimate(
    pilot: &ExperimentData,
    n_per_group: usize,
    replications: usize,
    kind: TestKind,
    config: &AnalysisConfig,
    seed: u64,
    parallel: bool,
) -> Result<PowerEstimate> {
    if replications < MIN_REPLICATIONS {
        return Err(Error::Input(format!(
            "need at least {MIN_REPLICATIONS} replications, got {replications}"
        )));
    }
    if n_per_group == 0 {
        return Err(Error::Input("n_per_group must be positive".into()));
    }
    // Re-validate: the pilot may have been built field by field.
    ExperimentData::new(pilot.control.clone(), pilot.treatment.clone())?;

    let outcomes: Vec<Outcome> = if parallel {
        (0..replications)
            .into_par_iter()
            .map(|j| replicate(pilot, n_per_group, kind, config, seed, j))
            .collect::<Result<_>>()?
    } else {
        (0..replications)
            .map(|j| replicate(pilot, n_per_group, kind, config, seed, j))
            .collect::<Result<_>>()?
    };
    let rejections = outcomes.iter().filter(|o| **o == Outcome::Reject).count();
    let degenerate = outcomes.iter().filter(|o| **o == Outcome::Degenerate).count();
    let (lo, hi) = wilson_interval(rejections, replications, 0.05);
    Ok(PowerEstimate {
        n_per_group,
        replications,
        rejections,
        degenerate,
        power: rejections as f64 / replications as f64,
        power_ci_low: lo,
        power_ci_high: hi,
        test_kind: kind,
        alpha: config.alpha,
        seed,
    })
}

/// Bootstrap power of `kind` at `n_per_group` visits per arm.
pub fn estimate_power(
    pilot: &ExperimentData,
    n_per_group: usize,
    replications: usize,
    kind: TestKind,
    config: &AnalysisConfig,
    seed: u64,
) -> Result<PowerEstimate> {
    estimate(pilot, n_per_group, replications, kind, config, seed, true)
}

/// Same as [`estimate_power`] on the calling thread only.
pub fn estimate_power_serial(
    pilot: &ExperimentData,
    n_per_group: usize,
    replications: usize,
    kind: TestKind,
    config: &AnalysisConfig,
    seed: u64,
) -> Result<PowerEstimate> {
    estimate(pilot, n_per_group, replications, kind, config, seed, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Starting size; defaults to the larger pilot arm.
    pub n0: Option<usize>,
    /// Bisection stops once the bracket is at most this wide.
    pub resolution: usize,
    pub n_max: usize,
    pub replications: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n0: None,
            resolution: 100,
            n_max: 1_000_000,
            replications: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSizePlan {
    pub target_power: f64,
    pub chosen_n: usize,
    /// Every probe, sorted by `n`.
    pub search_trace: Vec<(usize, PowerEstimate)>,
    pub warnings: Vec<String>,
}

/// Smallest per-arm size (to within `search.resolution`) whose bootstrap
/// power reaches `target_power`: doubling from `n0`, then bisection.
/// Probe at size `n` uses seed `derive_seed(seed, n)`.
pub fn find_sample_size(
    pilot: &ExperimentData,
    target_power: f64,
    kind: TestKind,
    config: &AnalysisConfig,
    seed: u64,
    search: &SearchConfig,
) -> Result<SampleSizePlan> {
    if !(target_power > 0.0 && target_power < 1.0) {
        return Err(Error::Input(format!("target power must lie in (0, 1), got {target_power}")));
    }
    if search.resolution == 0 {
        return Err(Error::Input("resolution must be positive".into()));
    }
    let n0 = search
        .n0
        .unwrap_or_else(|| pilot.control.len().max(pilot.treatment.len()))
        .max(1);
    if n0 > search.n_max {
        return Err(Error::Input(format!("n0 = {n0} exceeds n_max = {}", search.n_max)));
    }

    let mut warnings = Vec::new();
    let (c, t) = (pilot.control_summary(), pilot.treatment_summary());
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    if c.k * t.n == t.k * c.n && mean(&pilot.control) == mean(&pilot.treatment) {
        warnings.push("pilot shows no effect; the search may run to n_max".into());
    }

    let mut trace: Vec<(usize, PowerEstimate)> = Vec::new();
    let probe = |n: usize, trace: &mut Vec<(usize, PowerEstimate)>| -> Result<f64> {
        let est = estimate_power(pilot, n, search.replications, kind, config, rng::derive_seed(seed, n as u64))?;
        trace.push((n, est));
        Ok(est.power)
    };

    let mut lo = n0;
    let mut power = probe(n0, &mut trace)?;
    let mut hi = n0;
    if power < target_power {
        loop {
            if lo >= search.n_max {
                trace.sort_by_key(|(n, _)| *n);
                return Err(Error::SearchExhausted {
                    n_max: search.n_max,
                    last_power: power,
                    trace: trace.iter().map(|(n, e)| (*n, e.power)).collect(),
                });
            }
            hi = (lo * 2).min(search.n_max);
            power = probe(hi, &mut trace)?;
            if power >= target_power {
                break;
            }
            lo = hi;
        }
        while hi - lo > search.resolution {
            let mid = lo + (hi - lo) / 2;
            if probe(mid, &mut trace)? >= target_power {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    trace.sort_by_key(|(n, _)| *n);
    Ok(SampleSizePlan {
        target_power,
        chosen_n: hi,
        search_trace: trace,
        warnings,
    })
}
