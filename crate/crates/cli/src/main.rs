//! `rpvtest`: revenue-per-visit A/B analysis from the command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rpv_core::config::{AnalysisConfig, ParametricTest};
use rpv_core::delta::VarianceMode;
use rpv_core::io::{load_csv, write_csv};
use rpv_core::lrt::ConstraintKind;
use rpv_core::pipeline::{self, QqSource};
use rpv_core::power::{SearchConfig, TestKind};
use rpv_core::rank::{RankScope, ThresholdMode};
use rpv_core::report::{AnalysisReport, StageResult};
use rpv_core::ZiLogNormalParams;

#[derive(Parser)]
#[command(name = "rpvtest", version, about = "Revenue-per-visit A/B testing under a zero-inflated log-normal model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-part test (conversion proportion + rank test on order values).
    TwoPart(DataArgs),
    /// Delta-method confidence interval for the RPV difference.
    Delta(DataArgs),
    /// Likelihood-ratio test of equal RPV.
    Lrt(DataArgs),
    /// Two-part test, then the parametric test only if it is indeterminate.
    Pipeline(DataArgs),
    /// Bootstrap power at a fixed per-group size.
    Power(PowerArgs),
    /// Smallest per-group size reaching a target power.
    Samplesize(SampleSizeArgs),
    /// Log-normal Q-Q data for the positive order values.
    Qq(QqArgs),
    /// Simulate an experiment and write it as CSV.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct Common {
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = Threshold::Consistent)]
    threshold: Threshold,
    #[arg(long, value_enum, default_value_t = Variance::Mle)]
    variance_mode: Variance,
    #[arg(long, value_enum, default_value_t = Constraint::Rpv)]
    constraint: Constraint,
    #[arg(long, value_enum, default_value_t = Scope::Positive)]
    rank_scope: Scope,
    #[arg(long, value_enum, default_value_t = Parametric::Delta)]
    parametric: Parametric,
    #[arg(long, default_value_t = 1e-7)]
    solver_tolerance: f64,
}

#[derive(Args)]
struct DataArgs {
    /// CSV with header `group,order_value`.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PowerArgs {
    /// Pilot data CSV.
    #[arg(long)]
    input: PathBuf,
    /// Visits per group.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    replications: usize,
    #[arg(long, value_enum, default_value_t = Test::TwoPart)]
    test: Test,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SampleSizeArgs {
    /// Pilot data CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    target_power: f64,
    /// Starting size (default: larger pilot arm).
    #[arg(long)]
    n0: Option<usize>,
    #[arg(long, default_value_t = 100)]
    resolution: usize,
    #[arg(long, default_value_t = 1_000_000)]
    n_max: usize,
    #[arg(long, default_value_t = 1000)]
    replications: usize,
    #[arg(long, value_enum, default_value_t = Test::TwoPart)]
    test: Test,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct QqArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Group::Both)]
    group: Group,
    /// Write `theoretical_z,empirical_z` rows here instead of stdout.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SimulateArgs {
    /// Control conversion rate.
    #[arg(long)]
    r: f64,
    /// Control log-mean.
    #[arg(long)]
    mu: f64,
    /// Control log-variance.
    #[arg(long)]
    sigma2: f64,
    /// Treatment conversion rate (default: control).
    #[arg(long)]
    r_t: Option<f64>,
    #[arg(long)]
    mu_t: Option<f64>,
    #[arg(long)]
    sigma2_t: Option<f64>,
    /// Visits per group.
    #[arg(long)]
    n: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum Threshold {
    Consistent,
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variance {
    Mle,
    Consistent,
    PaperLiteral,
}

#[derive(Clone, Copy, ValueEnum)]
enum Constraint {
    Rpv,
    PaperLiteral,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    Positive,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Parametric {
    Delta,
    Lrt,
}

#[derive(Clone, Copy, ValueEnum)]
enum Test {
    TwoPart,
    Delta,
    Lrt,
}

#[derive(Clone, Copy, ValueEnum)]
enum Group {
    Control,
    Treatment,
    Both,
}

impl Common {
    fn config(&self) -> AnalysisConfig {
        AnalysisConfig {
            alpha: self.alpha,
            threshold: match self.threshold {
                Threshold::Consistent => ThresholdMode::Consistent,
                Threshold::Paper => ThresholdMode::Paper,
            },
            rank_scope: match self.rank_scope {
                Scope::Positive => RankScope::Positive,
                Scope::All => RankScope::All,
            },
            variance_mode: match self.variance_mode {
                Variance::Mle => VarianceMode::Mle,
                Variance::Consistent => VarianceMode::Consistent,
                Variance::PaperLiteral => VarianceMode::PaperLiteral,
            },
            constraint: match self.constraint {
                Constraint::Rpv => ConstraintKind::Rpv,
                Constraint::PaperLiteral => ConstraintKind::PaperLiteral,
            },
            parametric: match self.parametric {
                Parametric::Delta => ParametricTest::Delta,
                Parametric::Lrt => ParametricTest::Lrt,
            },
            solver_tolerance: self.solver_tolerance,
            seed: self.seed,
        }
    }
}

impl From<Test> for TestKind {
    fn from(t: Test) -> Self {
        match t {
            Test::TwoPart => TestKind::TwoPart,
            Test::Delta => TestKind::DeltaCi,
            Test::Lrt => TestKind::Lrt,
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Text report to stdout (or stderr when stdout carries data), JSON to `--out`.
fn emit(report: &AnalysisReport, common: &Common, to_stderr: bool) -> Result<()> {
    let text = report.render_text();
    if to_stderr {
        eprint!("{text}");
    } else {
        print!("{text}");
    }
    if let Some(path) = &common.out {
        let mut w = create(path)?;
        writeln!(w, "{}", report.to_json())?;
        w.flush()?;
    }
    Ok(())
}

fn load(path: &Path) -> Result<rpv_core::ExperimentData> {
    load_csv(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::TwoPart(a) => {
            let report = pipeline::two_part_report(&load(&a.input)?, &a.common.config())?;
            emit(&report, &a.common, false)
        }
        Command::Delta(a) => {
            let report = pipeline::delta_report(&load(&a.input)?, &a.common.config())?;
            emit(&report, &a.common, false)
        }
        Command::Lrt(a) => {
            let report = pipeline::lrt_report(&load(&a.input)?, &a.common.config())?;
            emit(&report, &a.common, false)
        }
        Command::Pipeline(a) => {
            let report = pipeline::run_pipeline(&load(&a.input)?, &a.common.config())?;
            emit(&report, &a.common, false)
        }
        Command::Power(a) => {
            let report = pipeline::power_report(
                &load(&a.input)?,
                a.n,
                a.replications,
                a.test.into(),
                &a.common.config(),
            )?;
            emit(&report, &a.common, false)
        }
        Command::Samplesize(a) => {
            let search = SearchConfig {
                n0: a.n0,
                resolution: a.resolution,
                n_max: a.n_max,
                replications: a.replications,
            };
            let report = pipeline::sample_size_report(
                &load(&a.input)?,
                a.target_power,
                a.test.into(),
                &a.common.config(),
                &search,
            )?;
            emit(&report, &a.common, false)
        }
        Command::Qq(a) => {
            let source = match a.group {
                Group::Control => QqSource::Control,
                Group::Treatment => QqSource::Treatment,
                Group::Both => QqSource::Both,
            };
            let report = pipeline::qq_report(&load(&a.input)?, source, &a.common.config())?;
            let Some(StageResult::Qq(qq)) = report.result.first() else {
                unreachable!("qq report carries Q-Q data")
            };
            let mut w: Box<dyn Write> = match &a.plot {
                Some(p) => Box::new(create(p)?),
                None => Box::new(BufWriter::new(io::stdout().lock())),
            };
            writeln!(w, "theoretical_z,empirical_z")?;
            for p in &qq.points {
                writeln!(w, "{},{}", p.theoretical_z, p.empirical_z)?;
            }
            w.flush()?;
            drop(w);
            emit(&report, &a.common, a.plot.is_none())
        }
        Command::Simulate(a) => {
            let control = ZiLogNormalParams::new(a.r, a.mu, a.sigma2)?;
            let treatment = ZiLogNormalParams::new(
                a.r_t.unwrap_or(a.r),
                a.mu_t.unwrap_or(a.mu),
                a.sigma2_t.unwrap_or(a.sigma2),
            )?;
            let (data, report) = pipeline::simulate_report(&control, &treatment, a.n, &a.common.config())?;
            match &a.csv {
                Some(p) => write_csv(&data, create(p)?)?,
                None => write_csv(&data, BufWriter::new(io::stdout().lock()))?,
            }
            emit(&report, &a.common, a.csv.is_none())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
