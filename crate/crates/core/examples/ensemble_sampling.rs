//! Draws coupled two-block matrices and prints the empirical entry variances
//! inside and across the blocks.
//!
//!     cargo run --release --example ensemble_sampling -- [epsilon]

use levelflow::ensemble::{sample_coupled, stream, EnsembleSpec};
use levelflow::{epsilon_lambda, Direction};

fn main() -> levelflow::Result<()> {
    let n = 40;
    let epsilon: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let spec = EnsembleSpec::from_epsilon(n, n / 2, epsilon, 0.5, 17)?;
    println!(
        "N = {n}, M = {}, epsilon = {epsilon} -> lambda = {:.5}",
        spec.m(),
        spec.lambda()
    );
    println!(
        "round trip: epsilon = {:.5}",
        epsilon_lambda(n, spec.lambda(), Direction::ToEpsilon)?
    );

    let mut rng = stream(spec.seed());
    let (mut diag, mut inside, mut cross) = ((0.0, 0), (0.0, 0), (0.0, 0));
    for _ in 0..2000 {
        let h = sample_coupled(&spec, &mut rng)?;
        for i in 0..n {
            for j in i..n {
                let x = h.get(i, j) * h.get(i, j);
                let slot = if i == j {
                    &mut diag
                } else if spec.is_cross_block(i, j) {
                    &mut cross
                } else {
                    &mut inside
                };
                slot.0 += x;
                slot.1 += 1;
            }
        }
    }
    let mean = |(s, c): (f64, usize)| s / c as f64;
    println!(
        "diagonal variance      {:.4}  (expected {:.4})",
        mean(diag),
        1.0 / (2.0 * spec.alpha())
    );
    println!(
        "in-block off-diagonal  {:.4}  (expected {:.4})",
        mean(inside),
        1.0 / (4.0 * spec.alpha())
    );
    println!(
        "cross-block            {:.4}  (expected {:.4})",
        mean(cross),
        spec.lambda().powi(2) / (4.0 * spec.alpha())
    );
    Ok(())
}
