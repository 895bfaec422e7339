//! Exact proximal operator of the weighted total-variation norm.
//!
//! For a signal `y` of length `m` and edge weights `w` (with `w[0] = 0`) the
//! solver returns the unique minimizer of
//!
//! ```text
//! 1/2 * sum_k (y[k] - beta[k])^2 + sum_{j>=1} w[j] * |beta[j] - beta[j-1]|
//! ```
//!
//! together with the scaled dual vector `theta` (length `m + 1`) satisfying
//! `beta[k] = y[k] - theta[k+1] + theta[k]` in zero-based storage, i.e.
//! `theta[k]` lives on the edge between samples `k - 1` and `k` and is bounded
//! by `w[k]`.
//!
//! The sweep works on cumulative sums: with `S_k = y[0] + ... + y[k-1]` the
//! primal cumulative sums `r_k` form the taut string through the tube
//! `|r_k - S_k| <= w[k]`, pinned at `r_0 = 0` and `r_m = S_m`. The string is
//! built left to right with two funnel chains (the concave hull of lower tube
//! points and the convex hull of upper tube points). A chain vertex becomes
//! final as soon as a new tube point crosses the opposite chain's first
//! segment, which is where a jump of `beta` is validated. Every tube point is
//! pushed and popped at most once, so the sweep is linear in `m`.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Scaled bin counts, the input of the proximal step.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedSignal {
    values: Vec<f64>,
}

impl BinnedSignal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("signal must have at least one bin".into()));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("signal entry {k} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Per-edge penalty weights. Entry `j` penalizes `|beta[j] - beta[j-1]|`;
/// entry 0 has no edge and is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Vec<f64>,
}

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::Dimension(
                "weight vector must have at least one entry".into(),
            ));
        }
        if w[0] != 0.0 {
            return Err(Error::Input(format!(
                "first weight must be 0, got {}",
                w[0]
            )));
        }
        if let Some(j) = w.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Input(format!(
                "weight {j} must be finite and nonnegative, got {}",
                w[j]
            )));
        }
        Ok(Self { w })
    }

    pub fn zeros(m: usize) -> Result<Self> {
        Self::new(vec![0.0; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.w.iter().fold(0.0, |acc, &v| acc.max(v))
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.w.iter().map(|v| v * factor).collect())
    }

    /// Weights in reverse edge order, keeping the leading zero in place.
    pub fn reversed(&self) -> Self {
        let mut w = Vec::with_capacity(self.w.len());
        w.push(0.0);
        w.extend(self.w[1..].iter().rev());
        Self { w }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxSolution {
    pub beta: Vec<f64>,
    /// Scaled dual variable, length `m + 1` with both ends pinned to zero.
    pub theta: Vec<f64>,
    pub kkt_residual: f64,
}

#[derive(Debug, Clone, Copy)]
struct Knot {
    x: usize,
    y: f64,
}

#[inline]
fn slope(a: Knot, b: Knot) -> f64 {
    (b.y - a.y) / (b.x - a.x) as f64
}

fn fill_segment(beta: &mut [f64], a: Knot, b: Knot) {
    let v = slope(a, b);
    beta[a.x..b.x].iter_mut().for_each(|x| *x = v);
}

/// Computes the weighted TV proximal point of `signal`.
pub fn prox_weighted_tv(signal: &BinnedSignal, weights: &WeightVector) -> Result<ProxSolution> {
    let y = signal.values();
    let w = weights.as_slice();
    let m = y.len();
    if w.len() != m {
        return Err(Error::Dimension(format!(
            "signal has {m} bins but {} weights were given",
            w.len()
        )));
    }

    let beta = taut_string(y, w);
    let theta = dual_from_primal(y, &beta);
    let kkt = kkt_residual_unchecked(y, w, &beta);
    Ok(ProxSolution {
        beta,
        theta,
        kkt_residual: kkt,
    })
}

fn taut_string(y: &[f64], w: &[f64]) -> Vec<f64> {
    let m = y.len();
    let mut beta = vec![0.0; m];
    if m == 1 {
        beta[0] = y[0];
        return beta;
    }

    let origin = Knot { x: 0, y: 0.0 };
    // Concave chain through lower tube points and convex chain through upper
    // tube points. Both always start at the current origin.
    let mut lower: VecDeque<Knot> = VecDeque::from([origin]);
    let mut upper: VecDeque<Knot> = VecDeque::from([origin]);
    let mut cum = 0.0;

    for x in 1..=m {
        cum += y[x - 1];
        let (lo, hi) = if x == m {
            (cum, cum)
        } else {
            (cum - w[x], cum + w[x])
        };

        let q = Knot { x, y: hi };
        while lower.len() >= 2 && slope(lower[0], q) < slope(lower[0], lower[1]) {
            // q passes below the lower chain: the string is pinned at lower[1].
            fill_segment(&mut beta, lower[0], lower[1]);
            lower.pop_front();
            upper.clear();
            upper.push_back(lower[0]);
        }
        while upper.len() >= 2 {
            let n = upper.len();
            if slope(upper[n - 2], q) <= slope(upper[n - 2], upper[n - 1]) {
                upper.pop_back();
            } else {
                break;
            }
        }
        upper.push_back(q);

        let p = Knot { x, y: lo };
        while upper.len() >= 2 && slope(upper[0], p) > slope(upper[0], upper[1]) {
            fill_segment(&mut beta, upper[0], upper[1]);
            upper.pop_front();
            lower.clear();
            lower.push_back(upper[0]);
        }
        while lower.len() >= 2 {
            let n = lower.len();
            if slope(lower[n - 2], p) >= slope(lower[n - 2], lower[n - 1]) {
                lower.pop_back();
            } else {
                break;
            }
        }
        lower.push_back(p);
    }

    // Both chains now end at (m, S_m); at most one of them still bends.
    let chain = if lower.len() > 2 { &lower } else { &upper };
    for pair in chain.iter().zip(chain.iter().skip(1)) {
        fill_segment(&mut beta, *pair.0, *pair.1);
    }
    beta
}

fn dual_from_primal(y: &[f64], beta: &[f64]) -> Vec<f64> {
    let m = y.len();
    let mut theta = vec![0.0; m + 1];
    for k in 1..m {
        theta[k] = theta[k - 1] + y[k - 1] - beta[k - 1];
    }
    theta
}

/// Maximum violation of the optimality conditions of `beta` for the weighted
/// TV prox of `signal`. Zero (up to rounding) exactly at the minimizer.
///
/// Two certificates are evaluated and the larger violation is returned:
/// the dual vector rebuilt backwards from the last bin (box constraints, the
/// pinned left end, and the sign condition at every strict jump), and the tail
/// cumulative-sum bounds `|sum_{q>=j} (y[q] - beta[q])| <= w[j]`.
pub fn kkt_residual(signal: &BinnedSignal, weights: &WeightVector, beta: &[f64]) -> Result<f64> {
    let m = signal.len();
    if weights.len() != m || beta.len() != m {
        return Err(Error::Dimension(format!(
            "signal has {m} bins, weights {}, beta {}",
            weights.len(),
            beta.len()
        )));
    }
    Ok(kkt_residual_unchecked(
        signal.values(),
        weights.as_slice(),
        beta,
    ))
}

fn kkt_residual_unchecked(y: &[f64], w: &[f64], beta: &[f64]) -> f64 {
    let m = y.len();

    // theta_m = 0, theta_{k-1} = beta_k - y_k + theta_k.
    let mut theta = vec![0.0; m + 1];
    for k in (1..=m).rev() {
        theta[k - 1] = beta[k - 1] - y[k - 1] + theta[k];
    }
    let mut worst = theta[0].abs();
    for k in 1..m {
        worst = worst.max(theta[k].abs() - w[k]);
        let step = beta[k] - beta[k - 1];
        if step != 0.0 {
            let target = -w[k] * step.signum();
            worst = worst.max((theta[k] - target).abs());
        }
    }

    worst.max(tail_sum_violation_unchecked(y, w, beta))
}

/// Largest excess of `|sum_{q>=j} (y[q] - beta[q])|` over `w[j]`, or zero.
///
/// This is the cumulative-sum form of the optimality conditions on its own.
pub fn tail_sum_violation(
    signal: &BinnedSignal,
    weights: &WeightVector,
    beta: &[f64],
) -> Result<f64> {
    let m = signal.len();
    if weights.len() != m || beta.len() != m {
        return Err(Error::Dimension(format!(
            "signal has {m} bins, weights {}, beta {}",
            weights.len(),
            beta.len()
        )));
    }
    Ok(tail_sum_violation_unchecked(
        signal.values(),
        weights.as_slice(),
        beta,
    ))
}

fn tail_sum_violation_unchecked(y: &[f64], w: &[f64], beta: &[f64]) -> f64 {
    let mut tail = 0.0;
    let mut worst = 0.0f64;
    for j in (0..y.len()).rev() {
        tail += y[j] - beta[j];
        worst = worst.max(tail.abs() - w[j]);
    }
    worst
}
