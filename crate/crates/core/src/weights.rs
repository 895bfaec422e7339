//! Data-driven edge weights calibrated by a Bernstein-type deviation bound.
//!
//! With `V_j` the mean number of events per replicate in `((j-1)/m, 1]` and
//! `z = x + log m`, the weight of edge `j` is
//!
//! ```text
//! w_j = c1 * sqrt(m (z + h_j) V_j / n) + c2 * sqrt(m) (z + 1 + h_j) / n
//! ```
//!
//! where `h_j` is an iterated-logarithm correction. The constants `c1`, `c2`
//! and `h_j` depend on the tuning triple `(epsilon, c_h, c_0)`; the defaults
//! `(1, 2, 28 / (3e))` give `c1 ~ 5.66` and `c2 ~ 9.31`.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::estimator::EventSeries;
use crate::tvprox::WeightVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightConfig {
    /// Confidence level: the bound fails with probability of order `exp(-x)`.
    pub x: f64,
    pub epsilon: f64,
    pub c_h: f64,
    pub c_0: f64,
    /// Multiplier applied to every weight (tuned by cross-validation).
    pub scale: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            x: 1.0,
            epsilon: 1.0,
            c_h: 2.0,
            c_0: 28.0 / (3.0 * E),
            scale: 1.0,
        }
    }
}

impl WeightConfig {
    pub fn with_scale(self, scale: f64) -> Self {
        Self { scale, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.x) {
            return Err(Error::Config(format!("x must be positive, got {}", self.x)));
        }
        if !positive(self.epsilon) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.c_h.is_finite() && self.c_h > 1.0) {
            return Err(Error::Config(format!(
                "c_h must exceed 1, got {}",
                self.c_h
            )));
        }
        if !positive(self.c_0) {
            return Err(Error::Config(format!(
                "c_0 must be positive, got {}",
                self.c_0
            )));
        }
        if !positive(self.scale) {
            return Err(Error::Config(format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        // The default triple sits exactly on e*c_0 = 2(4/3 + eps)c_h, which still
        // keeps the h denominator positive for every z > 0.
        let lhs = E * self.c_0;
        let rhs = 2.0 * (4.0 / 3.0 + self.epsilon) * self.c_h;
        if lhs < rhs * (1.0 - 1e-12) {
            return Err(Error::Config(format!(
                "e*c_0 = {lhs} must be at least 2(4/3 + epsilon)c_h = {rhs}"
            )));
        }
        Ok(())
    }
}

/// Returns `(c1, c2)` for the given tuning triple.
pub fn bernstein_constants(cfg: &WeightConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let eps = cfg.epsilon;
    let c1_eps = 2.0 * (1.0 + eps).sqrt();
    let c3_eps = (2.0 * cfg.c_0.max(2.0 * (1.0 + eps) * (4.0 / 3.0 + eps))).sqrt() + 1.0 / 3.0;
    Ok((2.0 * c1_eps, 2.0 * c3_eps))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailStatistics {
    /// `v_hat[j]`: events per replicate in `(j/m, 1]` (zero-based `j`).
    pub v_hat: Vec<f64>,
    pub h_hat: Vec<f64>,
}

pub fn tail_statistics(
    events: &EventSeries,
    m: usize,
    cfg: &WeightConfig,
) -> Result<TailStatistics> {
    let counts = events.counts(m)?;
    tail_statistics_from_counts(&counts, events.replicates(), cfg)
}

/// Tail statistics from raw per-bin counts pooled over `n` replicates.
pub fn tail_statistics_from_counts(
    counts: &[u64],
    n: usize,
    cfg: &WeightConfig,
) -> Result<TailStatistics> {
    cfg.validate()?;
    let m = counts.len();
    if m == 0 {
        return Err(Error::Dimension("bin count must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::Input("replicate count must be at least 1".into()));
    }
    let nf = n as f64;
    let z = cfg.x + (m as f64).ln();
    let a = 4.0 / 3.0 + cfg.epsilon;
    let denom = E * cfg.c_0 * (z + 1.0) - 2.0 * a * cfg.c_h;

    let mut v_hat = vec![0.0; m];
    let mut tail = 0u64;
    for j in (0..m).rev() {
        tail += counts[j];
        v_hat[j] = tail as f64 / nf;
    }
    let h_hat = v_hat
        .iter()
        .map(|&v| {
            let ratio = (2.0 * E * nf * v + 2.0 * E * a * z) / denom;
            cfg.c_h * ratio.max(E).ln().ln()
        })
        .collect();
    Ok(TailStatistics { v_hat, h_hat })
}

pub fn data_driven_weights(
    events: &EventSeries,
    m: usize,
    cfg: &WeightConfig,
) -> Result<WeightVector> {
    let counts = events.counts(m)?;
    weights_from_counts(&counts, events.replicates(), cfg)
}

/// Data-driven weights from raw per-bin counts pooled over `n` replicates.
pub fn weights_from_counts(counts: &[u64], n: usize, cfg: &WeightConfig) -> Result<WeightVector> {
    let stats = tail_statistics_from_counts(counts, n, cfg)?;
    let (c1, c2) = bernstein_constants(cfg)?;
    let m = counts.len() as f64;
    let nf = n as f64;
    let z = cfg.x + m.ln();
    let w = stats
        .v_hat
        .iter()
        .zip(&stats.h_hat)
        .enumerate()
        .map(|(j, (&v, &h))| {
            if j == 0 {
                0.0
            } else {
                cfg.scale
                    * (c1 * (m * (z + h) * v / nf).sqrt() + c2 * m.sqrt() * (z + 1.0 + h) / nf)
            }
        })
        .collect();
    WeightVector::new(w)
}

/// Unweighted penalty: every edge gets `scale`.
pub fn uniform_weights(m: usize, scale: f64) -> Result<WeightVector> {
    if m == 0 {
        return Err(Error::Dimension("bin count must be at least 1".into()));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Config(format!(
            "scale must be positive, got {scale}"
        )));
    }
    let mut w = vec![scale; m];
    w[0] = 0.0;
    WeightVector::new(w)
}
