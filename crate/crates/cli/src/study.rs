//! Monte-Carlo experiments: MISE decay and change-point consistency.
//!
//! Replicate `r` at sample size `n` simulates from seed
//! `derive_seed(seed, n, r)`, so a given `(seed, n, r)` sees the same data
//! whatever the grid or weighting mode. Replicates run in parallel and are
//! reported in `(n, mode, replicate)` order.

use std::fmt::Write as _;

use rayon::prelude::*;
use tvpoint_core::estimator::{bin_counts, default_bins, fit, FitResult, StepFunction};
use tvpoint_core::evaluate::{
    cross_validate_scale, hausdorff_one_sided, mise, CvConfig, WeightMode,
};
use tvpoint_core::simulate::{derive_seed, sample_events, SimulationConfig};
use tvpoint_core::tvprox::{BinnedSignal, WeightVector};
use tvpoint_core::weights::{data_driven_weights, uniform_weights, WeightConfig};

use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub truth: StepFunction,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub weights: WeightConfig,
    pub folds: usize,
    pub scale_grid: Vec<f64>,
    /// Skip cross-validation and use this multiplier.
    pub fixed_scale: Option<f64>,
    /// Override `m = ceil(sqrt(n))`.
    pub bins: Option<usize>,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(CliError::Usage(
                "n-grid must list positive sample sizes".into(),
            ));
        }
        if self.replicates == 0 {
            return Err(CliError::Usage(
                "need at least one Monte-Carlo replicate".into(),
            ));
        }
        if self.bins == Some(0) {
            return Err(CliError::Usage("bins must be positive".into()));
        }
        if let Some(s) = self.fixed_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(CliError::Usage(format!("scale must be positive, got {s}")));
            }
        }
        self.weights.validate()?;
        Ok(())
    }

    pub fn bins_for(&self, n: usize) -> usize {
        self.bins.unwrap_or_else(|| default_bins(n))
    }
}

pub fn mode_name(mode: WeightMode) -> &'static str {
    match mode {
        WeightMode::DataDriven => "weighted",
        WeightMode::Uniform => "unweighted",
    }
}

#[derive(Debug, Clone)]
pub struct ReplicateOutcome {
    pub n: usize,
    pub m: usize,
    pub replicate: usize,
    pub mode: WeightMode,
    pub scale: f64,
    pub signal: BinnedSignal,
    pub weights: WeightVector,
    pub fit: FitResult,
    pub mise: f64,
    /// One-sided Hausdorff distance from the true change-points to the estimated ones.
    pub hausdorff: f64,
    /// Largest location error, only when the number of change-points is right.
    pub max_error: Option<f64>,
}

pub fn run_replicate(
    cfg: &StudyConfig,
    n: usize,
    replicate: usize,
    mode: WeightMode,
) -> Result<ReplicateOutcome> {
    let data_seed = derive_seed(cfg.seed, n as u64, replicate as u64);
    let events = sample_events(&SimulationConfig {
        intensity: cfg.truth.clone(),
        n,
        seed: data_seed,
    })?;
    let m = cfg.bins_for(n);

    let scale = match cfg.fixed_scale {
        Some(s) => s,
        None => {
            let cv = CvConfig {
                folds: cfg.folds,
                scale_grid: cfg.scale_grid.clone(),
                seed: derive_seed(data_seed, 1, 0),
            };
            cross_validate_scale(&events, m, &cv, mode, &cfg.weights)?.best_scale
        }
    };
    let weights = match mode {
        WeightMode::DataDriven => data_driven_weights(&events, m, &cfg.weights.with_scale(scale))?,
        WeightMode::Uniform => uniform_weights(m, scale)?,
    };
    let fitted = fit(&events, m, &weights)?;
    let truth_cps = cfg.truth.change_points();
    let max_error = (fitted.l_hat == truth_cps.len()).then(|| {
        truth_cps
            .iter()
            .zip(&fitted.tau_hat)
            .fold(0.0, |acc: f64, (a, b)| acc.max((a - b).abs()))
    });

    Ok(ReplicateOutcome {
        n,
        m,
        replicate,
        mode,
        scale,
        signal: bin_counts(&events, m)?,
        mise: mise(&fitted.intensity, &cfg.truth),
        hausdorff: hausdorff_one_sided(&fitted.tau_hat, truth_cps),
        max_error,
        weights,
        fit: fitted,
    })
}

/// Runs every `(n, mode, replicate)` cell; output is ordered by that key.
pub fn run_study(cfg: &StudyConfig, modes: &[WeightMode]) -> Result<Vec<ReplicateOutcome>> {
    cfg.validate()?;
    let jobs: Vec<(usize, WeightMode, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| {
            modes
                .iter()
                .flat_map(move |&mode| (0..cfg.replicates).map(move |r| (n, mode, r)))
        })
        .collect();
    jobs.par_iter()
        .map(|&(n, mode, r)| run_replicate(cfg, n, r, mode))
        .collect()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_sd(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let mu = mean(values);
    let ss: f64 = values.iter().map(|v| (v - mu) * (v - mu)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiseRow {
    pub n: usize,
    pub mode: WeightMode,
    pub mean_mise: f64,
    pub sd_mise: Option<f64>,
}

pub fn mise_rows(outcomes: &[ReplicateOutcome]) -> Vec<MiseRow> {
    let mut rows: Vec<MiseRow> = Vec::new();
    for chunk in outcomes.chunk_by(|a, b| a.n == b.n && a.mode == b.mode) {
        let values: Vec<f64> = chunk.iter().map(|o| o.mise).collect();
        rows.push(MiseRow {
            n: chunk[0].n,
            mode: chunk[0].mode,
            mean_mise: mean(&values),
            sd_mise: sample_sd(&values),
        });
    }
    rows
}

pub fn format_mise_tsv(rows: &[MiseRow]) -> String {
    let mut out = String::from("n\tmode\tmean_mise\tsd_mise\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            r.n,
            mode_name(r.mode),
            r.mean_mise,
            fmt_opt(r.sd_mise)
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyRow {
    pub n: usize,
    pub m: usize,
    pub frac_correct_l: f64,
    pub mean_max_err_given_correct_l: Option<f64>,
    pub mean_e_that_t0: f64,
    /// Share of replicates whose Hausdorff error is at most `2/m`.
    pub frac_e_within_2_over_m: f64,
    pub max_kkt_residual: f64,
}

pub fn consistency_rows(outcomes: &[ReplicateOutcome]) -> Vec<ConsistencyRow> {
    outcomes
        .chunk_by(|a, b| a.n == b.n && a.mode == b.mode)
        .map(|chunk| {
            let count = chunk.len() as f64;
            let errs: Vec<f64> = chunk.iter().filter_map(|o| o.max_error).collect();
            let dists: Vec<f64> = chunk.iter().map(|o| o.hausdorff).collect();
            let m = chunk[0].m;
            ConsistencyRow {
                n: chunk[0].n,
                m,
                frac_correct_l: errs.len() as f64 / count,
                mean_max_err_given_correct_l: (!errs.is_empty()).then(|| mean(&errs)),
                mean_e_that_t0: mean(&dists),
                frac_e_within_2_over_m: dists.iter().filter(|&&d| d <= 2.0 / m as f64).count()
                    as f64
                    / count,
                max_kkt_residual: chunk.iter().fold(0.0, |a, o| a.max(o.fit.kkt_residual)),
            }
        })
        .collect()
}

pub fn format_consistency_tsv(rows: &[ConsistencyRow]) -> String {
    let mut out = String::from(
        "n\tfrac_correct_L\tmean_max_err_given_correct_L\tmean_E_That_T0\tm\tfrac_E_within_2_over_m\tmax_kkt_residual\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.n,
            r.frac_correct_l,
            fmt_opt(r.mean_max_err_given_correct_l),
            r.mean_e_that_t0,
            r.m,
            r.frac_e_within_2_over_m,
            r.max_kkt_residual
        );
    }
    out
}
