//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

#[path = "../../core/tests/common/oracle.rs"]
mod oracle;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use tvpoint_cli::study::{consistency_rows, mise_rows, run_study, ReplicateOutcome, StudyConfig};
use tvpoint_core::estimator::StepFunction;
use tvpoint_core::evaluate::{default_scale_grid, WeightMode};
use tvpoint_core::simulate::{example_intensity, sample_events, SimulationConfig};
use tvpoint_core::tvprox::{prox_weighted_tv, tail_sum_violation, BinnedSignal, WeightVector};
use tvpoint_core::weights::{bernstein_constants, WeightConfig};

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

fn random_instance(rng: &mut ChaCha8Rng, m: usize) -> (Vec<f64>, Vec<f64>) {
    let y: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let mut w: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0)).collect();
    w[0] = 0.0;
    (y, w)
}

fn prox(y: &[f64], w: &[f64]) -> Vec<f64> {
    let s = BinnedSignal::new(y.to_vec()).unwrap();
    let w = WeightVector::new(w.to_vec()).unwrap();
    prox_weighted_tv(&s, &w).unwrap().beta
}

fn constants() -> Verdict {
    let (c1, c2) = bernstein_constants(&WeightConfig::default()).unwrap();
    Verdict::new(
        (c1 - 5.66).abs() <= 0.01 && (c2 - 9.31).abs() <= 0.01,
        format!("c1 = {c1:.6}, c2 = {c2:.6}"),
    )
}

fn prox_exactness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_gap, mut worst_kkt) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let m = rng.random_range(1..=200);
        let (y, w) = random_instance(&mut rng, m);
        let sol = prox_weighted_tv(
            &BinnedSignal::new(y.clone()).unwrap(),
            &WeightVector::new(w.clone()).unwrap(),
        )
        .unwrap();
        let reference = oracle::dual_projected_gradient(&y, &w);
        worst_gap = worst_gap.max(sup_diff(&sol.beta, &reference));
        worst_kkt = worst_kkt.max(sol.kkt_residual);
    }
    Verdict::new(
        worst_gap < 1e-8 && worst_kkt <= 1e-9,
        format!("max |beta - oracle| = {worst_gap:.3e}, max kkt residual = {worst_kkt:.3e}"),
    )
}

fn algebraic_laws() -> Verdict {
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = [0.0f64; 5];
    for _ in 0..200 {
        let m = rng.random_range(1..=200);
        let (y, w) = random_instance(&mut rng, m);
        let beta = prox(&y, &w);

        worst[0] = worst[0].max(sup_diff(&prox(&y, &vec![0.0; m]), &y));

        let c: f64 = rng.random_range(-10.0..10.0);
        let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
        let expect: Vec<f64> = beta.iter().map(|v| v + c).collect();
        worst[1] = worst[1].max(sup_diff(&prox(&shifted, &w), &expect));

        let a: f64 = rng.random_range(0.1..10.0);
        let ay: Vec<f64> = y.iter().map(|v| a * v).collect();
        let aw: Vec<f64> = w.iter().map(|v| a * v).collect();
        let expect: Vec<f64> = beta.iter().map(|v| a * v).collect();
        worst[2] = worst[2].max(sup_diff(&prox(&ay, &aw), &expect));

        let ry: Vec<f64> = y.iter().rev().copied().collect();
        let rw = WeightVector::new(w.clone()).unwrap().reversed();
        let mut rbeta = prox(&ry, rw.as_slice());
        rbeta.reverse();
        worst[3] = worst[3].max(sup_diff(&rbeta, &beta));

        // Every tail sum of deviations from the mean is below sum |y - mean|.
        let mean = y.iter().sum::<f64>() / m as f64;
        let big = 1.0 + y.iter().map(|v| (v - mean).abs()).sum::<f64>();
        let mut heavy = vec![big; m];
        heavy[0] = 0.0;
        worst[4] = worst[4].max(sup_diff(&prox(&y, &heavy), &vec![mean; m]));
    }
    let names = [
        "identity",
        "translation",
        "scaling",
        "reflection",
        "grand mean",
    ];
    let detail = names
        .iter()
        .zip(worst)
        .map(|(n, v)| format!("{n} {v:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Verdict::new(worst.iter().all(|&v| v <= TOL), detail)
}

fn time_prox(m: usize, rng: &mut ChaCha8Rng) -> f64 {
    let y: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let mut w = vec![0.5; m];
    w[0] = 0.0;
    let s = BinnedSignal::new(y).unwrap();
    let w = WeightVector::new(w).unwrap();
    let reps = (1_000_000 / m).clamp(1, 200);
    let mut best = f64::INFINITY;
    for _ in 0..3 {
        let start = Instant::now();
        for _ in 0..reps {
            std::hint::black_box(prox_weighted_tv(&s, &w).unwrap());
        }
        best = best.min(start.elapsed().as_secs_f64() / reps as f64);
    }
    best
}

fn linear_runtime() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sizes = [1_000usize, 10_000, 100_000, 1_000_000];
    let times: Vec<f64> = sizes.iter().map(|&m| time_prox(m, &mut rng)).collect();
    let xs: Vec<f64> = sizes.iter().map(|&m| (m as f64).ln()).collect();
    let ys: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 4.0, ys.iter().sum::<f64>() / 4.0);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let largest = times[3];
    Verdict::new(
        largest < 1.0 && slope <= 1.2,
        format!(
            "m = 1e6 in {:.1} ms, log-log slope {slope:.3}",
            largest * 1e3
        ),
    )
}

fn study_config(truth: StepFunction, n_grid: Vec<usize>, replicates: usize) -> StudyConfig {
    StudyConfig {
        truth,
        n_grid,
        replicates,
        seed: 0,
        weights: WeightConfig::default(),
        folds: 10,
        scale_grid: default_scale_grid(),
        fixed_scale: None,
        bins: None,
    }
}

fn mise_decay(fits: &mut Vec<ReplicateOutcome>) -> Verdict {
    let cfg = study_config(example_intensity(1).unwrap(), vec![500, 2000, 8000], 20);
    let outcomes = run_study(&cfg, &[WeightMode::DataDriven, WeightMode::Uniform]).unwrap();
    let rows = mise_rows(&outcomes);
    fits.extend(outcomes);
    let mut pass = true;
    let mut parts = Vec::new();
    for mode in [WeightMode::DataDriven, WeightMode::Uniform] {
        let means: Vec<f64> = rows
            .iter()
            .filter(|r| r.mode == mode)
            .map(|r| r.mean_mise)
            .collect();
        pass &= means.len() == 3 && means.windows(2).all(|p| p[1] < p[0]);
        parts.push(format!(
            "{}: {}",
            tvpoint_cli::study::mode_name(mode),
            means
                .iter()
                .map(|v| format!("{v:.3}"))
                .collect::<Vec<_>>()
                .join(" > ")
        ));
    }
    Verdict::new(pass, parts.join("; "))
}

fn consistency(fits: &mut Vec<ReplicateOutcome>) -> Verdict {
    let truth = example_intensity(1).unwrap();
    assert_eq!(truth.num_change_points(), 5);
    let cfg = study_config(truth, vec![500, 2000, 8000, 32000], 50);
    let outcomes = run_study(&cfg, &[WeightMode::DataDriven]).unwrap();
    let rows = consistency_rows(&outcomes);
    fits.extend(outcomes);
    let means: Vec<f64> = rows.iter().map(|r| r.mean_e_that_t0).collect();
    let nonincreasing = means.windows(2).all(|p| p[1] <= p[0]);
    let last = rows.last().unwrap();
    Verdict::new(
        nonincreasing && last.frac_e_within_2_over_m >= 0.8,
        format!(
            "mean E = [{}], share within 2/m at n = {}: {:.2}",
            means
                .iter()
                .map(|v| format!("{v:.4}"))
                .collect::<Vec<_>>()
                .join(", "),
            last.n,
            last.frac_e_within_2_over_m
        ),
    )
}

fn certificate(fits: &[ReplicateOutcome]) -> Verdict {
    let worst = fits
        .iter()
        .map(|o| tail_sum_violation(&o.signal, &o.weights, &o.fit.beta_unclamped).unwrap())
        .fold(0.0f64, f64::max);
    Verdict::new(
        !fits.is_empty() && worst <= 1e-8,
        format!("{} fits, worst tail-sum excess {worst:.3e}", fits.len()),
    )
}

fn simulation_fidelity() -> Verdict {
    let (lambda, n, m) = (5.0, 10_000usize, 500usize);
    let events = sample_events(&SimulationConfig {
        intensity: StepFunction::constant(lambda).unwrap(),
        n,
        seed: 8,
    })
    .unwrap();
    let expected = lambda * n as f64 / m as f64;
    let stat: f64 = events
        .counts(m)
        .unwrap()
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let p = 1.0 - ChiSquared::new(m as f64).unwrap().cdf(stat);
    Verdict::new(
        p > 0.01,
        format!("chi-square {stat:.1} on {m} df, p = {p:.3}"),
    )
}

fn run_twice(dir: &Path, name: &str, args: &[&str], outputs: &[&str]) -> Result<(), String> {
    let mut runs = Vec::new();
    for round in 0..2 {
        let round_dir = dir.join(format!("{name}{round}"));
        std::fs::create_dir_all(&round_dir).unwrap();
        let status = Command::new(env!("CARGO_BIN_EXE_tvpoint"))
            .current_dir(&round_dir)
            .args(args)
            .output()
            .unwrap();
        if !status.status.success() {
            return Err(format!(
                "{name} failed: {}",
                String::from_utf8_lossy(&status.stderr)
            ));
        }
        let files: Vec<Vec<u8>> = outputs
            .iter()
            .map(|f| std::fs::read(round_dir.join(f)).unwrap())
            .collect();
        runs.push((status.stdout, files));
    }
    if runs[0] == runs[1] {
        Ok(())
    } else {
        Err(format!("{name} output differs between runs"))
    }
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.txt");
    let status = Command::new(env!("CARGO_BIN_EXE_tvpoint"))
        .args(["simulate", "--example", "2", "--n", "300", "--seed", "9"])
        .arg("--out")
        .arg(&events)
        .status()
        .unwrap();
    assert!(status.success());
    let events = events.to_str().unwrap();
    let cases: [(&str, Vec<&str>, Vec<&str>); 5] = [
        (
            "simulate",
            vec![
                "simulate",
                "--example",
                "1",
                "--n",
                "500",
                "--seed",
                "1",
                "--out",
                "ev.txt",
            ],
            vec!["ev.txt"],
        ),
        (
            "fit",
            vec![
                "fit", "--input", events, "--cv", "--seed", "3", "--out", "fit.json", "--table",
                "fit.tsv",
            ],
            vec!["fit.json", "fit.tsv"],
        ),
        (
            "fit-stdout",
            vec!["fit", "--input", events, "--unweighted", "--scale", "0.5"],
            vec![],
        ),
        (
            "mise-study",
            vec![
                "mise-study",
                "--example",
                "1",
                "--n-grid",
                "200,800",
                "--mc",
                "5",
                "--seed",
                "4",
                "--both-modes",
                "--out",
                "mise.tsv",
            ],
            vec!["mise.tsv"],
        ),
        (
            "consistency-study",
            vec![
                "consistency-study",
                "--example",
                "1",
                "--n-grid",
                "200,800",
                "--mc",
                "5",
                "--seed",
                "4",
                "--out",
                "cons.tsv",
            ],
            vec!["cons.tsv"],
        ),
    ];
    let mut failures = Vec::new();
    for (name, args, outputs) in &cases {
        if let Err(e) = run_twice(dir.path(), name, args, outputs) {
            failures.push(e);
        }
    }
    if failures.is_empty() {
        Verdict::new(true, format!("{} commands byte-identical", cases.len()))
    } else {
        Verdict::new(false, failures.join("; "))
    }
}

fn main() {
    let mut fits = Vec::new();
    let mut verdicts: Vec<(usize, &str, Verdict, f64)> = Vec::new();
    let mut check = |id: usize, name: &'static str, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {id} [{}] {name}: {} ({secs:.1}s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        verdicts.push((id, name, v, secs));
    };

    check(1, "weight constants", &mut constants);
    check(2, "prox exactness", &mut prox_exactness);
    check(3, "algebraic laws", &mut algebraic_laws);
    check(4, "linear runtime", &mut linear_runtime);
    check(5, "MISE decay", &mut || mise_decay(&mut fits));
    check(6, "change-point consistency", &mut || {
        consistency(&mut fits)
    });
    check(7, "cumulative-sum certificate", &mut || certificate(&fits));
    check(8, "simulation fidelity", &mut simulation_fidelity);
    check(9, "CLI determinism", &mut determinism);

    let failed: Vec<usize> = verdicts
        .iter()
        .filter(|(_, _, v, _)| !v.pass)
        .map(|(id, ..)| *id)
        .collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", verdicts.len());
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
