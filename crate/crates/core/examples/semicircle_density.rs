//! Pooled eigenvalue histogram of the coupled ensemble against the semicircle.
//!
//!     cargo run --release --example semicircle_density -- [realizations]

use levelflow::ensemble::EnsembleSpec;
use levelflow::pipeline::density_check;
use levelflow::statistics::uniform_edges;
use levelflow::DensityModel;

fn main() -> levelflow::Result<()> {
    let realizations = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let spec = EnsembleSpec::from_epsilon(100, 50, 0.32, 0.5, 1)?;
    let radius = DensityModel::for_ensemble(&spec).radius();
    let edges = uniform_edges(-radius, radius, 24)?;
    let report = density_check(&spec, realizations, &edges)?;
    let hist = &report.histogram;
    let total = hist.all_samples() as f64;

    let peak = report.model_density.iter().cloned().fold(0.0, f64::max);
    for (b, w) in edges.windows(2).enumerate() {
        let observed = hist.counts[b] as f64 / (total * (w[1] - w[0]));
        let bar = "#".repeat((50.0 * observed / peak).round() as usize);
        println!(
            "{:>7.2} {:>8.5} {:>8.5} {:+6.2} {bar}",
            0.5 * (w[0] + w[1]),
            observed,
            report.model_density[b],
            report.z_scores[b]
        );
    }
    println!(
        "R = {radius:.4}; chi2/bin {:.3}; max |z| {:.2}; {:.3}% outside [-R, R]",
        report.chi_square_per_bin,
        report.max_abs_z,
        100.0 * report.outside_fraction
    );
    Ok(())
}
