//! Subcommands of the `tvpoint` binary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use tvpoint_core::estimator::{default_bins, fit, StepFunction};
use tvpoint_core::evaluate::{cross_validate_scale, default_scale_grid, CvConfig, WeightMode};
use tvpoint_core::simulate::{example_intensity, sample_events, SimulationConfig};
use tvpoint_core::weights::{data_driven_weights, uniform_weights, WeightConfig};

use crate::error::{CliError, Result};
use crate::eventfile::{format_timestamps, read_event_file, EventFormat};
use crate::report::{BinRow, ConfigEcho, CvEcho, RunReport, Timings};
use crate::study::{
    consistency_rows, format_consistency_tsv, format_mise_tsv, mise_rows, run_study, StudyConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "tvpoint",
    version,
    about = "Weighted total-variation intensity estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a piecewise-constant intensity to an event file.
    Fit(FitArgs),
    /// Simulate events from a piecewise-constant intensity.
    Simulate(SimulateArgs),
    /// Monte-Carlo MISE as a function of the sample size.
    MiseStudy(MiseStudyArgs),
    /// Monte-Carlo change-point recovery as a function of the sample size.
    ConsistencyStudy(ConsistencyStudyArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "timestamps")]
    pub format: EventFormat,
    /// Number of bins (default ceil(sqrt(n))).
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub x: f64,
    /// Fixed multiplier for the weights.
    #[arg(long, conflicts_with = "cv")]
    pub scale: Option<f64>,
    /// Pick the multiplier by cross-validation.
    #[arg(long)]
    pub cv: bool,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Candidate multipliers for --cv (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub scale_grid: Option<Vec<f64>>,
    /// Use unit weights on every edge instead of data-driven ones.
    #[arg(long)]
    pub unweighted: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-bin TSV table.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Include wall-clock timings in the report (makes it non-reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
#[group(id = "truth", required = true, multiple = false, args = ["example", "intensity"])]
pub struct TruthArgs {
    /// Bundled benchmark intensity.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub example: Option<u32>,
    /// JSON file `{"breakpoints": [...], "levels": [...]}`.
    #[arg(long)]
    pub intensity: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub truth: TruthArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub truth: TruthArgs,
    /// Sample sizes (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_grid: Vec<usize>,
    /// Monte-Carlo replicates per sample size.
    #[arg(long)]
    pub mc: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub x: f64,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, value_delimiter = ',')]
    pub scale_grid: Option<Vec<f64>>,
    /// Fixed multiplier instead of per-replicate cross-validation.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Number of bins (default ceil(sqrt(n)) for each n).
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MiseStudyArgs {
    #[command(flatten)]
    pub study: StudyArgs,
    #[arg(long, conflicts_with = "both_modes")]
    pub unweighted: bool,
    /// Report weighted and unweighted rows side by side.
    #[arg(long)]
    pub both_modes: bool,
}

#[derive(Debug, Args)]
pub struct ConsistencyStudyArgs {
    #[command(flatten)]
    pub study: StudyArgs,
    #[arg(long)]
    pub unweighted: bool,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(args) => cmd_fit(&args).map(|_| ()),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::MiseStudy(args) => cmd_mise_study(&args),
        Command::ConsistencyStudy(args) => cmd_consistency_study(&args),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn weight_mode(unweighted: bool) -> WeightMode {
    if unweighted {
        WeightMode::Uniform
    } else {
        WeightMode::DataDriven
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<RunReport> {
    if args.bins == Some(0) {
        return Err(CliError::Usage("--bins must be positive".into()));
    }
    let wcfg = WeightConfig {
        x: args.x,
        ..WeightConfig::default()
    };
    wcfg.validate()?;
    let events = read_event_file(&args.input, args.format)?;
    let m = args
        .bins
        .unwrap_or_else(|| default_bins(events.replicates()));
    let mode = weight_mode(args.unweighted);

    let started = Instant::now();
    let (scale, cv) = if args.cv {
        let cfg = CvConfig {
            folds: args.folds,
            scale_grid: args.scale_grid.clone().unwrap_or_else(default_scale_grid),
            seed: args.seed,
        };
        let out = cross_validate_scale(&events, m, &cfg, mode, &wcfg)?;
        let echo = CvEcho {
            folds: args.folds,
            curve: out.curve.iter().map(|&(s, r)| [s, r]).collect(),
        };
        (out.best_scale, Some(echo))
    } else {
        (args.scale.unwrap_or(1.0), None)
    };
    let cv_seconds = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let weights = match mode {
        WeightMode::DataDriven => data_driven_weights(&events, m, &wcfg.with_scale(scale))?,
        WeightMode::Uniform => uniform_weights(m, scale)?,
    };
    let fitted = fit(&events, m, &weights)?;
    let fit_seconds = started.elapsed().as_secs_f64();

    let counts = events.counts(m)?;
    let mf = m as f64;
    let bins = (0..m)
        .map(|j| BinRow {
            bin: j + 1,
            left: j as f64 / mf,
            right: (j + 1) as f64 / mf,
            count: counts[j],
            level: mf.sqrt() * fitted.beta[j],
        })
        .collect();

    let report = RunReport {
        config: ConfigEcho {
            input: args.input.display().to_string(),
            format: args.format.name().to_string(),
            replicates: events.replicates(),
            events: events.len(),
            bins: m,
            x: args.x,
            weighting: crate::study::mode_name(mode).to_string(),
            scale,
            scale_source: if args.cv { "cv" } else { "fixed" }.to_string(),
            seed: args.seed,
            cv,
        },
        l_hat: fitted.l_hat,
        tau_boundary: fitted.tau_boundary(),
        tau_hat: fitted.tau_hat,
        jump_set: fitted.jump_set,
        kkt_residual: fitted.kkt_residual,
        clamped: fitted.clamped,
        beta: fitted.beta,
        beta_unclamped: fitted.beta_unclamped,
        weights: weights.as_slice().to_vec(),
        bins,
        timings: args.timings.then_some(Timings {
            cv_seconds,
            fit_seconds,
        }),
    };

    match &args.out {
        Some(path) => write_file(path, &report.to_json())?,
        None => print!("{}", report.to_json()),
    }
    if let Some(path) = &args.table {
        write_file(path, &report.table_tsv())?;
    }
    Ok(report)
}

fn load_truth(truth: &TruthArgs) -> Result<StepFunction> {
    if let Some(id) = truth.example {
        return Ok(example_intensity(id)?);
    }
    let path = truth
        .intensity
        .as_ref()
        .ok_or_else(|| CliError::Usage("one of --example or --intensity is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let f: StepFunction = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad intensity spec {}: {e}", path.display())))?;
    if let Some(l) = f.levels().iter().find(|l| **l < 0.0) {
        return Err(CliError::Usage(format!("intensity level {l} is negative")));
    }
    Ok(f)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let intensity = load_truth(&args.truth)?;
    let events = sample_events(&SimulationConfig {
        intensity,
        n: args.n,
        seed: args.seed,
    })?;
    write_file(&args.out, &format_timestamps(&events))
}

fn study_config(args: &StudyArgs) -> Result<StudyConfig> {
    let cfg = StudyConfig {
        truth: load_truth(&args.truth)?,
        n_grid: args.n_grid.clone(),
        replicates: args.mc,
        seed: args.seed,
        weights: WeightConfig {
            x: args.x,
            ..WeightConfig::default()
        },
        folds: args.folds,
        scale_grid: args.scale_grid.clone().unwrap_or_else(default_scale_grid),
        fixed_scale: args.scale,
        bins: args.bins,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_mise_study(args: &MiseStudyArgs) -> Result<()> {
    let cfg = study_config(&args.study)?;
    let modes = if args.both_modes {
        vec![WeightMode::DataDriven, WeightMode::Uniform]
    } else {
        vec![weight_mode(args.unweighted)]
    };
    let outcomes = run_study(&cfg, &modes)?;
    write_file(&args.study.out, &format_mise_tsv(&mise_rows(&outcomes)))
}

pub fn cmd_consistency_study(args: &ConsistencyStudyArgs) -> Result<()> {
    let cfg = study_config(&args.study)?;
    let outcomes = run_study(&cfg, &[weight_mode(args.unweighted)])?;
    write_file(
        &args.study.out,
        &format_consistency_tsv(&consistency_rows(&outcomes)),
    )
}
