//! Acceptance suite. Runs every criterion at its pinned tolerance, prints one
//! line per criterion and exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use clap::Parser;
use levelflow::dynamics::{eigenvalues, integrate_motion, spectral_frame};
use levelflow::ensemble::{child_seed, sample_goe, stream, EnsembleSpec};
use levelflow::pipeline::{density_check, realization_pair, run_simulation, Simulation, SimulationResult};
use levelflow::statistics::{
    build_histogram, fit_gamma, model_bin_density, sample_gamma_dist, uniform_edges, BinnedDensity, Normalization,
};
use levelflow::unfolding::{central_window, DensityModel};
use levelflow::{curvature_fd_oracle, hamiltonian_at, rotation_frame_check, RotatingPair};
use rand::Rng;

const SEED: u64 = 20_240_917;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_pair(n: usize, seed: u64) -> RotatingPair {
    let mut rng = stream(seed);
    let h1 = sample_goe(n, 0.5, &mut rng).unwrap();
    let h2 = sample_goe(n, 0.5, &mut rng).unwrap();
    RotatingPair::new(h1, h2).unwrap()
}

fn oracle_equivalence() -> Outcome {
    const VELOCITY_TOL: f64 = 1e-8;
    const CURVATURE_TOL: f64 = 1e-6;
    const GAP: f64 = 1e-3;
    const DELTA: f64 = 1e-4;
    let start = Instant::now();
    let (mut levels, mut bad_v, mut bad_c) = (0usize, 0usize, 0usize);
    let (mut worst_v, mut worst_c) = (0.0_f64, 0.0_f64);
    for i in 0..50 {
        let seed = child_seed(SEED ^ 1, i);
        let pair = random_pair(20, seed);
        let t = stream(seed.wrapping_add(1)).random_range(0.0..2.0 * PI);
        let frame = spectral_frame(&pair, t, GAP).unwrap();
        let (fd_v, fd_c) = match curvature_fd_oracle(&pair, t, DELTA) {
            Ok(v) => v,
            Err(_) => continue,
        };
        for k in 0..20 {
            if frame.neighbor_gap(k) <= GAP {
                continue;
            }
            levels += 1;
            let ev = (frame.velocities[k] - fd_v[k]).abs() / frame.velocities[k].abs();
            let ec = (frame.curvatures[k] - fd_c[k]).abs() / frame.curvatures[k].abs();
            worst_v = worst_v.max(ev);
            worst_c = worst_c.max(ec);
            bad_v += usize::from(ev.is_nan() || ev > VELOCITY_TOL);
            bad_c += usize::from(ec.is_nan() || ec > CURVATURE_TOL);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        bad_v == 0 && bad_c == 0 && elapsed < Duration::from_secs(10),
        format!(
            "{levels} levels; velocity rel err max {worst_v:.2e} ({bad_v} > {VELOCITY_TOL:e}); \
             curvature rel err max {worst_c:.2e} ({bad_c} > {CURVATURE_TOL:e}); {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn two_level_closed_form() -> Outcome {
    let h1 = levelflow::SymMatrix::from_diagonal(&[2.0, -2.0]);
    let h2 = levelflow::SymMatrix::from_upper_fn(2, |i, j| if i == j { 0.0 } else { 1.0 });
    let pair = RotatingPair::new(h1, h2).unwrap();
    let frame = spectral_frame(&pair, 0.0, 1e-12).unwrap();
    let err = (frame.curvatures[1] + 1.5).abs();
    outcome(
        err < 1e-10,
        format!("upper curvature {:.15} (error {err:.1e})", frame.curvatures[1]),
    )
}

fn rotation_frame() -> Outcome {
    let mut worst = 0.0_f64;
    for i in 0..20 {
        let pair = random_pair(50, child_seed(SEED ^ 3, i));
        for t in [0.3, 1.1, 2.0, 3.7, 5.5] {
            let norm = hamiltonian_at(&pair, t).frobenius_norm();
            worst = worst.max(rotation_frame_check(&pair, t).unwrap() / norm);
        }
    }
    outcome(
        worst < 1e-9,
        format!("max deviation / ||H|| = {worst:.2e} over 100 checks"),
    )
}

fn ode_cross_check() -> Outcome {
    let pair = random_pair(10, child_seed(SEED ^ 4, 0));
    let frame = integrate_motion(&pair, 0.0, 0.1, 1000).unwrap();
    let direct = eigenvalues(&hamiltonian_at(&pair, 0.1)).unwrap();
    let err = frame
        .energies
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    outcome(err < 1e-8, format!("max |E_ode - E_direct| = {err:.2e}"))
}

fn semicircle_density() -> Outcome {
    let start = Instant::now();
    let spec = EnsembleSpec::from_epsilon(100, 50, 0.32, 0.5, child_seed(SEED, 5)).unwrap();
    let radius = DensityModel::for_ensemble(&spec).radius();
    let edges = uniform_edges(-radius, radius, 40).unwrap();
    let report = density_check(&spec, 500, &edges).unwrap();
    let elapsed = start.elapsed();
    outcome(
        report.max_abs_z <= 4.0 && report.outside_fraction < 1e-3 && elapsed < Duration::from_secs(120),
        format!(
            "max |z| {:.2} (limit 4); outside support {:.3}% (limit 0.1%); {:.1}s",
            report.max_abs_z,
            100.0 * report.outside_fraction,
            elapsed.as_secs_f64()
        ),
    )
}

fn simulate(epsilon: Option<f64>, seed: u64) -> SimulationResult {
    let spec = match epsilon {
        Some(eps) => EnsembleSpec::from_epsilon(100, 50, eps, 0.5, seed).unwrap(),
        None => EnsembleSpec::new(100, 50, 1.0, 0.5, seed).unwrap(),
    };
    run_simulation(&Simulation::new(spec, 200)).unwrap()
}

fn goe_limit(result: &SimulationResult, elapsed: Duration) -> Outcome {
    let s = &result.summary;
    let tail = s.tail.expect("tail window populated");
    let pass = s.ks_universal < 0.03
        && (tail.exponent + 3.0).abs() <= 0.3
        && (s.mean_abs_normalized - 1.0).abs() <= 1e-12
        && elapsed < Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "{} samples; KS {:.4}; tail exponent {:.3} ± {:.3}; mean|k| - 1 = {:.1e}; {:.1}s",
            s.samples,
            s.ks_universal,
            tail.exponent,
            tail.std_error,
            s.mean_abs_normalized - 1.0,
            elapsed.as_secs_f64()
        ),
    )
}

fn decoupled_limit() -> Outcome {
    let result = simulate(Some(0.0), SEED);
    let s = &result.summary;
    outcome(
        s.per_block && s.ks_universal < 0.05,
        format!(
            "{} samples, per-block {}; KS {:.4}",
            s.samples, s.per_block, s.ks_universal
        ),
    )
}

fn median_abs(result: &SimulationResult) -> f64 {
    let mut v: Vec<f64> = result.normalized().iter().map(|k| k.abs()).collect();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn intermediate_narrowing(goe: &SimulationResult) -> Outcome {
    let mid = simulate(Some(1.0), SEED);
    let (n1, n2) = (mid.summary.samples as f64, goe.summary.samples as f64);
    let (p1, p2) = (mid.summary.fraction_above_3, goe.summary.fraction_above_3);
    let pooled = (p1 * n1 + p2 * n2) / (n1 + n2);
    let z = (p2 - p1) / (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    let raw_tail = |r: &SimulationResult| {
        r.samples.iter().filter(|s| s.rescaled.unwrap().abs() > 3.0).count() as f64 / r.samples.len() as f64
    };
    outcome(
        p1 < p2 && z > 3.0,
        format!(
            "P(|k|>3) {p1:.4} at eps=1 vs {p2:.4} at lambda=1, z = {z:.2}; median |k| {:.3} vs {:.3}; \
             P(|K|>3) {:.4} vs {:.4}",
            median_abs(&mid),
            median_abs(goe),
            raw_tail(&mid),
            raw_tail(goe)
        ),
    )
}

fn fit_samples(gamma: f64, seed: u64) -> f64 {
    let samples = sample_gamma_dist(gamma, 100_000, &mut stream(seed)).unwrap();
    let hist = build_histogram(&samples, &uniform_edges(-5.0, 5.0, 41).unwrap()).unwrap();
    fit_gamma(&hist.binned_density(Normalization::AllSamples).unwrap())
        .unwrap()
        .gamma
}

fn gamma_recovery() -> Outcome {
    let g127 = fit_samples(1.27, child_seed(SEED, 9));
    let g1 = fit_samples(1.0, child_seed(SEED, 10));
    let edges = uniform_edges(-5.0, 5.0, 41).unwrap();
    let density = model_bin_density(&edges, 1.0, Normalization::AllSamples).unwrap();
    let exact = fit_gamma(&BinnedDensity {
        edges,
        density,
        counts: None,
        normalization: Normalization::AllSamples,
    })
    .unwrap()
    .gamma;
    outcome(
        (g127 - 1.27).abs() <= 0.03 && (g1 - 1.0).abs() <= 0.02 && (exact - 1.0).abs() <= 1e-3,
        format!("gamma 1.27 -> {g127:.4}; gamma 1 -> {g1:.4}; exact table -> {exact:.6}"),
    )
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 1e-13, 50)
}

fn unfolding() -> Outcome {
    let spec = EnsembleSpec::new(100, 50, 1.0, 0.5, child_seed(SEED, 11)).unwrap();
    let model = DensityModel::for_ensemble(&spec);
    let (lo, hi) = central_window(100, 0.5).unwrap();
    let mut spacings = Vec::new();
    for r in 0..100 {
        let (pair, _) = realization_pair(&spec, r).unwrap();
        let x: Vec<f64> = eigenvalues(pair.h1())
            .unwrap()
            .iter()
            .map(|&e| model.unfold(e))
            .collect();
        spacings.extend(x[lo..hi].windows(2).map(|w| w[1] - w[0]));
    }
    let mean_spacing = spacings.iter().sum::<f64>() / spacings.len() as f64;

    let (n, alpha) = (100.0, 0.5);
    let r2 = n / alpha;
    let rho = |e: f64| 2.0 * alpha / PI * (r2 - e * e).max(0.0).sqrt();
    let mut worst = 0.0_f64;
    for i in 0..=40 {
        let e = -0.975 * r2.sqrt() + 0.04875 * r2.sqrt() * i as f64;
        let quad = n / 2.0 + integrate(&rho, 0.0, e);
        worst = worst.max((model.unfold(e) - quad).abs());
    }
    outcome(
        (mean_spacing - 1.0).abs() <= 0.02 && worst <= 1e-9,
        format!(
            "mean spacing {mean_spacing:.4} over {} gaps; closed form vs quadrature {worst:.1e}",
            spacings.len()
        ),
    )
}

fn run_cli(dir: &Path, jobs: Option<usize>, format: &str) {
    let mut args: Vec<String> = [
        "levelflow",
        "simulate",
        "--n",
        "40",
        "--realizations",
        "30",
        "--epsilon",
        "0,1,6.32",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    args.extend([
        "--seed".into(),
        "99".into(),
        "--format".into(),
        format.into(),
        "--out".into(),
    ]);
    args.push(dir.display().to_string());
    if let Some(j) = jobs {
        args.extend(["--jobs".into(), j.to_string()]);
    }
    let cli = levelflow::cli::Cli::try_parse_from(args).unwrap();
    levelflow::cli::run(cli.command).unwrap();
}

fn directory_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let mut identical = true;
    let mut files = 0;
    for format in ["csv", "json"] {
        let runs: Vec<_> = [None, Some(1), Some(1), Some(4)]
            .into_iter()
            .map(|jobs| {
                let dir = tempfile::tempdir().unwrap();
                run_cli(dir.path(), jobs, format);
                directory_bytes(dir.path())
            })
            .collect();
        files += runs[0].len();
        identical &= runs.iter().all(|r| r == &runs[0]);
    }
    outcome(
        identical,
        format!("{files} files compared across default, 1, 1 and 4 jobs"),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |id: u32, name: &'static str, o: Outcome| {
        println!(
            "criterion {id:>2} {} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((id, name, o));
    };
    record(1, "finite-difference oracle", oracle_equivalence());
    record(2, "two-level closed form", two_level_closed_form());
    record(3, "rotation frame", rotation_frame());
    record(4, "equations of motion", ode_cross_check());
    record(5, "semicircle density", semicircle_density());
    let start = Instant::now();
    let goe = simulate(None, SEED);
    let elapsed = start.elapsed();
    record(6, "GOE limit", goe_limit(&goe, elapsed));
    record(7, "decoupled limit", decoupled_limit());
    record(8, "intermediate narrowing", intermediate_narrowing(&goe));
    record(9, "gamma recovery", gamma_recovery());
    record(10, "unfolding", unfolding());
    record(11, "determinism", determinism());

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "\n{} of {} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
