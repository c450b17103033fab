//! Analytic velocities and curvatures against Richardson-extrapolated central
//! differences of directly diagonalized spectra.

use levelflow::dynamics::{eigenvalues, spectral_frame};
use levelflow::ensemble::{child_seed, sample_goe, stream};
use levelflow::{hamiltonian_at, RotatingPair};

fn spectrum(pair: &RotatingPair, t: f64) -> Vec<f64> {
    eigenvalues(&hamiltonian_at(pair, t)).unwrap()
}

/// Fourth-order accurate derivatives from steps `h` and `h/2`.
fn richardson(pair: &RotatingPair, t: f64, h: f64) -> (Vec<f64>, Vec<f64>) {
    let e0 = spectrum(pair, t);
    let stencil = |d: f64| (spectrum(pair, t + d), spectrum(pair, t - d));
    let (p1, m1) = stencil(h);
    let (p2, m2) = stencil(h / 2.0);
    let n = e0.len();
    let mut v = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    for k in 0..n {
        let v1 = (p1[k] - m1[k]) / (2.0 * h);
        let v2 = (p2[k] - m2[k]) / h;
        let c1 = (p1[k] - 2.0 * e0[k] + m1[k]) / (h * h);
        let c2 = (p2[k] - 2.0 * e0[k] + m2[k]) / (h * h / 4.0);
        v.push((4.0 * v2 - v1) / 3.0);
        c.push((4.0 * c2 - c1) / 3.0);
    }
    (v, c)
}

#[test]
fn analytic_derivatives_match_extrapolated_differences_on_well_separated_levels() {
    let mut checked = 0;
    for i in 0..50 {
        let mut rng = stream(child_seed(31, i));
        let pair = RotatingPair::new(
            sample_goe(20, 0.5, &mut rng).unwrap(),
            sample_goe(20, 0.5, &mut rng).unwrap(),
        )
        .unwrap();
        let t = 0.37 + 0.11 * i as f64;
        let frame = spectral_frame(&pair, t, 1e-3).unwrap();
        let (v, c) = richardson(&pair, t, 1e-3);
        for k in 0..20 {
            if frame.neighbor_gap(k) < 0.25 {
                continue;
            }
            checked += 1;
            assert!(
                (frame.velocities[k] - v[k]).abs() < 1e-7 * (1.0 + frame.velocities[k].abs()),
                "velocity {} vs {}",
                frame.velocities[k],
                v[k]
            );
            assert!(
                (frame.curvatures[k] - c[k]).abs() < 1e-5 * (1.0 + frame.curvatures[k].abs()),
                "curvature {} vs {}",
                frame.curvatures[k],
                c[k]
            );
        }
    }
    assert!(checked > 300, "{checked}");
}
