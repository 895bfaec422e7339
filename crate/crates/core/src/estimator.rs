//! Binning, fitting and change-point extraction.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tvprox::{prox_weighted_tv, BinnedSignal, WeightVector};

/// Pooled event times from `n` i.i.d. replicates of a counting process on `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSeries {
    times: Vec<f64>,
    n: usize,
}

impl EventSeries {
    /// Builds a series from times that are already sorted.
    pub fn new(times: Vec<f64>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("replicate count must be at least 1".into()));
        }
        if let Some(t) = times.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return Err(Error::Input(format!("event time {t} is outside (0, 1]")));
        }
        if times.windows(2).any(|p| p[1] < p[0]) {
            return Err(Error::Input("event times are not sorted".into()));
        }
        Ok(Self { times, n })
    }

    pub fn from_unsorted(mut times: Vec<f64>, n: usize) -> Result<Self> {
        if times.iter().any(|t| t.is_nan()) {
            return Err(Error::Input("event time is NaN".into()));
        }
        times.sort_by(f64::total_cmp);
        Self::new(times, n)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn replicates(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Raw event counts per bin `((j-1)/m, j/m]`.
    pub fn counts(&self, m: usize) -> Result<Vec<u64>> {
        if m == 0 {
            return Err(Error::Dimension("bin count must be at least 1".into()));
        }
        let mut counts = vec![0u64; m];
        for &t in &self.times {
            counts[bin_index(t, m)] += 1;
        }
        Ok(counts)
    }

    /// Merges two pooled samples; the replicate counts add up.
    pub fn pooled(&self, other: &EventSeries) -> EventSeries {
        let mut times = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.times.len() && j < other.times.len() {
            if self.times[i] <= other.times[j] {
                times.push(self.times[i]);
                i += 1;
            } else {
                times.push(other.times[j]);
                j += 1;
            }
        }
        times.extend_from_slice(&self.times[i..]);
        times.extend_from_slice(&other.times[j..]);
        EventSeries {
            times,
            n: self.n + other.n,
        }
    }
}

/// Zero-based index of the bin `((j-1)/m, j/m]` containing `t`.
///
/// Boundaries are compared as the floats `j as f64 / m as f64`, so the result
/// agrees with direct interval tests such as `t > (j-1)/m`.
pub fn bin_index(t: f64, m: usize) -> usize {
    let mf = m as f64;
    let mut j = (t * mf).ceil().clamp(1.0, mf) as usize;
    if j > 1 && t <= (j - 1) as f64 / mf {
        j -= 1;
    } else if j < m && t > j as f64 / mf {
        j += 1;
    }
    j - 1
}

/// Default resolution `ceil(sqrt(n))`.
pub fn default_bins(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).max(1)
}

/// A piecewise-constant function on `[0, 1]`, left-open on each piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepFunction")]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

#[derive(Deserialize)]
struct RawStepFunction {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl TryFrom<RawStepFunction> for StepFunction {
    type Error = Error;

    fn try_from(raw: RawStepFunction) -> Result<Self> {
        StepFunction::new(raw.breakpoints, raw.levels)
    }
}

impl StepFunction {
    /// Validates the pieces and merges adjacent equal levels.
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || breakpoints.len() != levels.len() + 1 {
            return Err(Error::Input(format!(
                "{} breakpoints cannot carry {} levels",
                breakpoints.len(),
                levels.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::Input(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if breakpoints
            .windows(2)
            .any(|p| p[1].partial_cmp(&p[0]) != Some(Ordering::Greater))
        {
            return Err(Error::Input(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if levels.iter().any(|l| !l.is_finite()) {
            return Err(Error::Input("levels must be finite".into()));
        }

        let mut bps = vec![0.0];
        let mut lvls: Vec<f64> = Vec::with_capacity(levels.len());
        for (i, &level) in levels.iter().enumerate() {
            if lvls.last() == Some(&level) {
                *bps.last_mut().unwrap() = breakpoints[i + 1];
            } else {
                lvls.push(level);
                bps.push(breakpoints[i + 1]);
            }
        }
        Ok(Self {
            breakpoints: bps,
            levels: lvls,
        })
    }

    pub fn constant(level: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![level])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Interior breakpoints, i.e. the change-points.
    pub fn change_points(&self) -> &[f64] {
        &self.breakpoints[1..self.breakpoints.len() - 1]
    }

    pub fn num_change_points(&self) -> usize {
        self.levels.len() - 1
    }

    /// Value at `t`, taking the piece whose half-open interval `(a, b]` holds `t`.
    /// `t <= 0` maps to the first piece.
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.breakpoints[1..].partition_point(|&b| b < t);
        self.levels[idx.min(self.levels.len() - 1)]
    }

    pub fn integral_of_square(&self) -> f64 {
        self.pieces().map(|(a, b, l)| l * l * (b - a)).sum()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.breakpoints.clone(),
            self.levels.iter().map(|l| l * factor).collect(),
        )
    }

    /// `(left, right, level)` for every piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.levels)
            .map(|(b, &l)| (b[0], b[1], l))
    }
}

/// Scaled bin counts `sqrt(m) / n * #{t in ((j-1)/m, j/m]}`.
pub fn bin_counts(events: &EventSeries, m: usize) -> Result<BinnedSignal> {
    let counts = events.counts(m)?;
    signal_from_counts(&counts, events.replicates())
}

pub(crate) fn signal_from_counts(counts: &[u64], n: usize) -> Result<BinnedSignal> {
    let factor = (counts.len() as f64).sqrt() / n as f64;
    BinnedSignal::new(counts.iter().map(|&c| c as f64 * factor).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Coefficients on the orthonormal bin basis, clamped to be nonnegative.
    pub beta: Vec<f64>,
    /// One-based indices `j` in `2..=m` where `beta[j] != beta[j-1]`.
    pub jump_set: Vec<usize>,
    /// `j / m` for every `j` in the jump set.
    pub tau_hat: Vec<f64>,
    pub l_hat: usize,
    pub intensity: StepFunction,
    /// Prox solution before clamping.
    pub beta_unclamped: Vec<f64>,
    /// Optimality residual of the unclamped solution.
    pub kkt_residual: f64,
    pub clamped: bool,
    pub m: usize,
}

impl FitResult {
    /// Left edge `(j-1)/m` of the first bin of each new plateau.
    pub fn tau_boundary(&self) -> Vec<f64> {
        self.jump_set
            .iter()
            .map(|&j| (j - 1) as f64 / self.m as f64)
            .collect()
    }
}

/// Fits the weighted-TV intensity estimator with `m` bins.
pub fn fit(events: &EventSeries, m: usize, weights: &WeightVector) -> Result<FitResult> {
    let signal = bin_counts(events, m)?;
    fit_signal(&signal, weights)
}

pub(crate) fn fit_signal(signal: &BinnedSignal, weights: &WeightVector) -> Result<FitResult> {
    let m = signal.len();
    let sol = prox_weighted_tv(signal, weights)?;
    let clamped = sol.beta.iter().any(|&b| b < 0.0);
    let beta: Vec<f64> = sol.beta.iter().map(|&b| b.max(0.0)).collect();

    let jump_tol = 1e-9 * signal.sup_norm().max(1.0);
    let jump_set: Vec<usize> = (1..m)
        .filter(|&k| (beta[k] - beta[k - 1]).abs() > jump_tol)
        .map(|k| k + 1)
        .collect();
    let tau_hat = jump_set.iter().map(|&j| j as f64 / m as f64).collect();

    let mf = m as f64;
    let root_m = mf.sqrt();
    let mut breakpoints = vec![0.0];
    let mut levels = vec![root_m * beta[0]];
    for &j in &jump_set {
        breakpoints.push((j - 1) as f64 / mf);
        levels.push(root_m * beta[j - 1]);
    }
    breakpoints.push(1.0);
    let intensity = StepFunction::new(breakpoints, levels)?;

    Ok(FitResult {
        l_hat: jump_set.len(),
        beta,
        jump_set,
        tau_hat,
        intensity,
        kkt_residual: sol.kkt_residual,
        beta_unclamped: sol.beta,
        clamped,
        m,
    })
}

/// `sum_j beta[j] * sqrt(m) * 1{((j-1)/m, j/m]}` with equal neighbours merged.
pub fn intensity_from_beta(beta: &[f64], m: usize) -> Result<StepFunction> {
    if m == 0 || beta.len() != m {
        return Err(Error::Dimension(format!(
            "expected {m} coefficients, got {}",
            beta.len()
        )));
    }
    let mf = m as f64;
    let breakpoints = (0..=m).map(|j| j as f64 / mf).collect();
    StepFunction::new(breakpoints, beta.iter().map(|b| b * mf.sqrt()).collect())
}
