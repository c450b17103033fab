//! Fits the scale `gamma` of `P(K) = 1 / (2 gamma (1 + (K/gamma)^2)^(3/2))`.
//!
//! With no argument the data are synthetic draws at `gamma = 1.27`. A file
//! argument is read as one curvature per line.

use levelflow::ensemble::stream;
use levelflow::statistics::{build_histogram, fit_gamma, sample_gamma_dist, uniform_edges, Normalization};

fn main() -> levelflow::Result<()> {
    let samples = match std::env::args().nth(1) {
        Some(path) => {
            let rows = levelflow::cli::read_fit_input(path.as_ref(), levelflow::config::InputKind::Samples)?;
            rows.into_iter().map(|r| r[0]).collect()
        }
        None => sample_gamma_dist(1.27, 100_000, &mut stream(9))?,
    };
    let hist = build_histogram(&samples, &uniform_edges(-5.0, 5.0, 41)?)?;
    let fit = fit_gamma(&hist.binned_density(Normalization::AllSamples)?)?;
    print!("{}", levelflow::cli::fit_report(&fit));
    println!(
        "{} of {} samples outside [-5, 5]",
        hist.underflow + hist.overflow,
        samples.len()
    );
    Ok(())
}
