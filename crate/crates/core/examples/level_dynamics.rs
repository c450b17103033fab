//! Follows the spectrum of `H(t) = H1 cos t + H2 sin t` for one random pair and
//! compares exact velocities and curvatures with central differences.

use levelflow::ensemble::{sample_goe, stream};
use levelflow::{curvature_fd_oracle, spectral_frame, RotatingPair};

fn main() -> levelflow::Result<()> {
    let n = 8;
    let mut rng = stream(3);
    let pair = RotatingPair::new(sample_goe(n, 0.5, &mut rng)?, sample_goe(n, 0.5, &mut rng)?)?;

    for t in [0.0, 0.8, 1.6, 2.4] {
        let frame = spectral_frame(&pair, t, 1e-8)?;
        let (fd_v, fd_c) = curvature_fd_oracle(&pair, t, 1e-4)?;
        println!("t = {t:.1}   (min gap {:.3})", frame.min_gap());
        println!(
            "  {:>3} {:>10} {:>10} {:>10} {:>12} {:>12}",
            "k", "E", "Edot", "fd", "Eddot", "fd"
        );
        for k in 0..n {
            println!(
                "  {k:>3} {:>10.5} {:>10.5} {:>10.5} {:>12.5} {:>12.5}",
                frame.energies[k], frame.velocities[k], fd_v[k], frame.curvatures[k], fd_c[k]
            );
        }
    }
    Ok(())
}
