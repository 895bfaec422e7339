//! Scores for fitted intensities and cross-validated selection of the weight scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{bin_index, fit_signal, signal_from_counts, EventSeries, StepFunction};
use crate::weights::{uniform_weights, weights_from_counts, WeightConfig};

/// Integrated squared difference of two step functions on `[0, 1]`, computed
/// exactly on the common refinement of their breakpoints.
pub fn mise(estimate: &StepFunction, truth: &StepFunction) -> f64 {
    let (ba, la) = (estimate.breakpoints(), estimate.levels());
    let (bb, lb) = (truth.breakpoints(), truth.levels());
    let (mut i, mut j) = (0, 0);
    let mut left = 0.0;
    let mut total = 0.0;
    while i < la.len() && j < lb.len() {
        let right = ba[i + 1].min(bb[j + 1]);
        let d = la[i] - lb[j];
        total += d * d * (right - left);
        left = right;
        if ba[i + 1] == right {
            i += 1;
        }
        if bb[j + 1] == right {
            j += 1;
        }
    }
    total
}

/// Least-squares contrast `int f^2 - (2/n) sum_i f(t_i)`.
pub fn empirical_risk(estimate: &StepFunction, events: &EventSeries) -> f64 {
    let hits: f64 = events.times().iter().map(|&t| estimate.eval(t)).sum();
    estimate.integral_of_square() - 2.0 * hits / events.replicates() as f64
}

/// `sup_{b in B} inf_{a in A} |a - b|`: how far the worst point of `b` is from `a`.
///
/// Returns 0 when `b` is empty and infinity when only `a` is empty.
pub fn hausdorff_one_sided(a: &[f64], b: &[f64]) -> f64 {
    if b.is_empty() {
        return 0.0;
    }
    if a.is_empty() {
        return f64::INFINITY;
    }
    let mut sorted = a.to_vec();
    sorted.sort_by(f64::total_cmp);
    b.iter()
        .map(|&x| {
            let idx = sorted.partition_point(|&v| v < x);
            let right = sorted.get(idx).map_or(f64::INFINITY, |v| v - x);
            let left = if idx > 0 {
                x - sorted[idx - 1]
            } else {
                f64::INFINITY
            };
            left.min(right)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    pub scale_grid: Vec<f64>,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            scale_grid: default_scale_grid(),
            seed: 0,
        }
    }
}

/// Powers of two from 1/1024 to 4.
pub fn default_scale_grid() -> Vec<f64> {
    (-10..=2).map(|k| 2f64.powi(k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    DataDriven,
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub best_scale: f64,
    /// `(scale, summed test risk)` in increasing scale order.
    pub curve: Vec<(f64, f64)>,
}

/// K-fold cross-validation of the multiplier in front of the weights.
///
/// Every event gets an independent uniform fold label. Fold `k` is fitted on
/// the remaining events (same replicate count `n`), the fitted intensity is
/// inflated by `K / (K - 1)` to undo the thinning, and the held-out events
/// score it with `int f^2 - (2K/n) sum_{t in fold k} f(t)`. The scale with the
/// smallest summed risk wins; ties go to the smaller scale.
pub fn cross_validate_scale(
    events: &EventSeries,
    m: usize,
    cfg: &CvConfig,
    mode: WeightMode,
    wcfg: &WeightConfig,
) -> Result<CvOutcome> {
    let k_folds = cfg.folds;
    if k_folds < 2 {
        return Err(Error::Config(format!(
            "need at least 2 folds, got {k_folds}"
        )));
    }
    if cfg.scale_grid.is_empty() {
        return Err(Error::Config("scale grid is empty".into()));
    }
    if let Some(s) = cfg
        .scale_grid
        .iter()
        .find(|s| !(s.is_finite() && **s > 0.0))
    {
        return Err(Error::Config(format!("scale {s} must be positive")));
    }
    if m == 0 {
        return Err(Error::Dimension("bin count must be at least 1".into()));
    }
    if events.len() < k_folds {
        return Err(Error::Input(format!(
            "{} events cannot fill {k_folds} folds",
            events.len()
        )));
    }
    if mode == WeightMode::DataDriven {
        wcfg.validate()?;
    }

    let mut grid = cfg.scale_grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut fold_counts = vec![vec![0u64; m]; k_folds];
    for &t in events.times() {
        let label = rng.random_range(0..k_folds);
        fold_counts[label][bin_index(t, m)] += 1;
    }
    let total: Vec<u64> = (0..m)
        .map(|j| fold_counts.iter().map(|c| c[j]).sum())
        .collect();

    let n = events.replicates();
    let kf = k_folds as f64;
    let inflate = kf / (kf - 1.0);
    let mf = m as f64;

    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|s| (0..k_folds).map(move |k| (s, k)))
        .collect();
    let risks: Vec<f64> = jobs
        .par_iter()
        .map(|&(s, k)| {
            let train: Vec<u64> = total
                .iter()
                .zip(&fold_counts[k])
                .map(|(t, f)| t - f)
                .collect();
            let weights = match mode {
                WeightMode::DataDriven => {
                    weights_from_counts(&train, n, &wcfg.with_scale(grid[s]))?
                }
                WeightMode::Uniform => uniform_weights(m, grid[s])?,
            };
            let fitted = fit_signal(&signal_from_counts(&train, n)?, &weights)?;
            let mut square = 0.0;
            let mut hits = 0.0;
            for (beta, &c) in fitted.beta.iter().zip(&fold_counts[k]) {
                let level = inflate * mf.sqrt() * beta;
                square += level * level / mf;
                hits += level * c as f64;
            }
            Ok(square - 2.0 * kf * hits / n as f64)
        })
        .collect::<Result<_>>()?;

    let curve: Vec<(f64, f64)> = grid
        .iter()
        .enumerate()
        .map(|(s, &scale)| (scale, risks[s * k_folds..(s + 1) * k_folds].iter().sum()))
        .collect();
    let mut best = curve[0];
    for &point in &curve[1..] {
        if point.1 < best.1 {
            best = point;
        }
    }
    Ok(CvOutcome {
        best_scale: best.0,
        curve,
    })
}
