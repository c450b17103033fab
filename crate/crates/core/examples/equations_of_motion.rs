//! Integrates the coupled equations for energies and the matrix `P` with RK4
//! and compares the result with direct diagonalization. Also checks that the
//! spectrum at `t` is that of `H_D(0) cos t + P(0) sin t`.

use levelflow::dynamics::eigenvalues;
use levelflow::ensemble::{sample_goe, stream};
use levelflow::{hamiltonian_at, integrate_motion, rotation_frame_check, RotatingPair};

fn main() -> levelflow::Result<()> {
    let mut rng = stream(11);
    let pair = RotatingPair::new(sample_goe(10, 0.5, &mut rng)?, sample_goe(10, 0.5, &mut rng)?)?;

    println!("{:>6} {:>8} {:>14} {:>14}", "t", "steps", "max |dE|", "rotation dev");
    for (t, steps) in [(0.1, 100), (0.1, 1000), (0.5, 5000), (1.0, 10000)] {
        let frame = integrate_motion(&pair, 0.0, t, steps)?;
        let direct = eigenvalues(&hamiltonian_at(&pair, t))?;
        let err = frame
            .energies
            .iter()
            .zip(&direct)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!(
            "{t:>6.2} {steps:>8} {err:>14.3e} {:>14.3e}",
            rotation_frame_check(&pair, t)?
        );
    }
    Ok(())
}
