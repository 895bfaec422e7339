//! Slow reference solver for the weighted TV prox, independent of the sweep.
//!
//! Runs accelerated projected gradient (FISTA with gradient restart) on the
//! box-constrained dual
//!
//! ```text
//! min_theta 1/2 sum_k (y[k] - theta[k+1] + theta[k])^2,
//! |theta[k]| <= w[k], theta[0] = theta[m] = 0
//! ```
//!
//! and maps back with `beta[k] = y[k] - theta[k+1] + theta[k]`.

pub fn dual_projected_gradient(y: &[f64], w: &[f64]) -> Vec<f64> {
    let m = y.len();
    let primal =
        |theta: &[f64]| -> Vec<f64> { (0..m).map(|k| y[k] - theta[k + 1] + theta[k]).collect() };
    let project = |theta: &mut [f64]| {
        theta[0] = 0.0;
        theta[m] = 0.0;
        for k in 1..m {
            theta[k] = theta[k].clamp(-w[k], w[k]);
        }
    };
    if m == 1 {
        return y.to_vec();
    }

    let step = 0.25;
    let scale = y.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut theta = vec![0.0; m + 1];
    let mut prev = theta.clone();
    let mut point = theta.clone();
    let mut t = 1.0f64;
    let mut quiet = 0;
    for _ in 0..5_000_000 {
        let beta = primal(&point);
        let mut next = point.clone();
        for k in 1..m {
            next[k] -= step * (beta[k] - beta[k - 1]);
        }
        project(&mut next);

        // restart momentum when it points uphill
        let uphill: f64 = (1..m)
            .map(|k| (point[k] - next[k]) * (next[k] - theta[k]))
            .sum();
        let moved = (1..m).fold(0.0f64, |a, k| a.max((next[k] - theta[k]).abs()));
        prev.copy_from_slice(&theta);
        theta.copy_from_slice(&next);
        if uphill > 0.0 {
            t = 1.0;
            point.copy_from_slice(&theta);
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let momentum = (t - 1.0) / t_next;
            for k in 0..=m {
                point[k] = theta[k] + momentum * (theta[k] - prev[k]);
            }
            t = t_next;
        }

        if moved <= 1e-15 * scale {
            quiet += 1;
            if quiet >= 200 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    primal(&theta)
}
