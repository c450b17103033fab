use levelflow::dynamics::spectral_frame;
use levelflow::ensemble::{sample_coupled, sample_goe, stream, EnsembleSpec};
use levelflow::statistics::{
    build_histogram, fit_gamma, gamma_pdf, model_bin_density, uniform_edges, BinnedDensity, Normalization,
};
use levelflow::unfolding::{normalize_batch, rescale_batch, CurvatureSample, DensityModel};
use levelflow::{hamiltonian_rate, RotatingPair};
use proptest::prelude::*;

fn batch(motion: &[(f64, f64)]) -> Vec<CurvatureSample> {
    motion
        .iter()
        .enumerate()
        .map(|(i, &(v, c))| CurvatureSample {
            realization: 0,
            level: i,
            t: 0.0,
            energy: 0.0,
            raw_velocity: v,
            raw_curvature: c,
            unfolded_velocity: v,
            unfolded_curvature: c,
            rescaled: None,
            normalized: None,
        })
        .collect()
}

fn motion_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3.0..3.0_f64, -10.0..10.0_f64), 4..60).prop_filter("needs spread velocities", |m| {
        m.iter().filter(|(v, _)| v.abs() > 0.1).count() >= 2
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coupled_samples_are_symmetric_with_scaled_cross_block(
        n in 2usize..12, m_frac in 0.1..0.9_f64, lambda in 0.0..=1.0_f64, seed in any::<u64>()
    ) {
        let m = ((n as f64 * m_frac) as usize).clamp(1, n - 1);
        let spec = EnsembleSpec::new(n, m, lambda, 0.5, seed).unwrap();
        let h = sample_coupled(&spec, &mut stream(seed)).unwrap();
        let full = EnsembleSpec::new(n, m, 1.0, 0.5, seed).unwrap();
        let g = sample_coupled(&full, &mut stream(seed)).unwrap();
        prop_assert!(h.is_exactly_symmetric());
        for i in 0..n {
            for j in 0..n {
                let scale = if spec.is_cross_block(i, j) { lambda } else { 1.0 };
                prop_assert_eq!(h.get(i, j), scale * g.get(i, j));
            }
        }
    }

    #[test]
    fn unfold_is_monotone_and_bounded(n in 2usize..400, lambda in 0.0..=1.0_f64, a in -1.2..1.2_f64, b in -1.2..1.2_f64) {
        let model = DensityModel::new(n, 0.5, lambda).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (xl, xh) = (model.unfold(lo * model.radius()), model.unfold(hi * model.radius()));
        prop_assert!(xl <= xh);
        prop_assert!(xl >= 0.0 && xh <= n as f64);
        if lo < hi && lo > -1.0 && hi < 1.0 {
            prop_assert!(xl < xh);
        }
    }

    #[test]
    fn normalized_mean_abs_is_one(motion in motion_strategy()) {
        let mut samples = batch(&motion);
        rescale_batch(&mut samples).unwrap();
        if samples.iter().all(|s| s.rescaled.unwrap() == 0.0) {
            return Ok(());
        }
        normalize_batch(&mut samples).unwrap();
        let mean = samples.iter().map(|s| s.normalized.unwrap().abs()).sum::<f64>() / samples.len() as f64;
        prop_assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adding_velocity_multiple_leaves_rescaled_curvature_unchanged(motion in motion_strategy(), c in -5.0..5.0_f64) {
        let mut base = batch(&motion);
        rescale_batch(&mut base).unwrap();
        let shifted: Vec<(f64, f64)> = motion.iter().map(|&(v, x)| (v, x + c * v)).collect();
        let mut moved = batch(&shifted);
        rescale_batch(&mut moved).unwrap();
        let scale = base.iter().map(|s| s.rescaled.unwrap().abs()).fold(1.0, f64::max);
        for (a, b) in base.iter().zip(&moved) {
            prop_assert!((a.rescaled.unwrap() - b.rescaled.unwrap()).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn gamma_pdf_scales(k in -20.0..20.0_f64, gamma in 0.05..10.0_f64, c in 0.1..10.0_f64) {
        let lhs = gamma_pdf(c * k, c * gamma).unwrap();
        let rhs = gamma_pdf(k, gamma).unwrap() / c;
        prop_assert!((lhs - rhs).abs() <= 1e-14 * rhs.max(1e-300));
    }

    #[test]
    fn fit_is_scale_equivariant(gamma in 0.3..3.0_f64, c in 0.5..2.0_f64) {
        let edges = uniform_edges(-8.0, 8.0, 64).unwrap();
        let table = |edges: Vec<f64>, g: f64| {
            let density = model_bin_density(&edges, g, Normalization::AllSamples).unwrap();
            BinnedDensity { edges, density, counts: None, normalization: Normalization::AllSamples }
        };
        let base = fit_gamma(&table(edges.clone(), gamma)).unwrap().gamma;
        let scaled_edges: Vec<f64> = edges.iter().map(|e| c * e).collect();
        let scaled = fit_gamma(&table(scaled_edges, c * gamma)).unwrap().gamma;
        prop_assert!((base - gamma).abs() <= 1e-5 * gamma);
        prop_assert!((scaled - c * base).abs() <= 1e-5 * c * gamma);
    }

    #[test]
    fn histogram_counts_and_mass(samples in prop::collection::vec(-6.0..6.0_f64, 1..300)) {
        let edges = uniform_edges(-5.0, 5.0, 17).unwrap();
        let hist = build_histogram(&samples, &edges).unwrap();
        let inside: u64 = hist.counts.iter().sum();
        prop_assert_eq!(inside, hist.total);
        prop_assert_eq!(inside + hist.underflow + hist.overflow, samples.len() as u64);
        if inside > 0 {
            let mass: f64 = hist.density(Normalization::Truncated).unwrap().iter().zip(hist.widths()).map(|(d, w)| d * w).sum();
            prop_assert!((mass - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_sum_rules(n in 2usize..16, seed in any::<u64>(), t in 0.0..std::f64::consts::TAU) {
        let mut rng = stream(seed);
        let pair = RotatingPair::new(sample_goe(n, 0.5, &mut rng).unwrap(), sample_goe(n, 0.5, &mut rng).unwrap()).unwrap();
        let frame = spectral_frame(&pair, t, 1e-12).unwrap();
        let rate = hamiltonian_rate(&pair, t, 1).unwrap();
        let scale = frame.energies.iter().map(|e| e.abs()).sum::<f64>() + 1.0;
        let v: f64 = frame.velocities.iter().sum();
        prop_assert!((v - rate.trace()).abs() <= 1e-9 * scale);
        for k in 0..n {
            prop_assert_eq!(frame.velocities[k], frame.p_matrix.get(k, k));
        }
        if frame.min_gap() > 1e-6 {
            let curv: f64 = frame.curvatures.iter().sum();
            let energy: f64 = frame.energies.iter().sum();
            let big = frame.curvatures.iter().map(|c| c.abs()).sum::<f64>() + scale;
            prop_assert!((curv + energy).abs() <= 1e-9 * big);
        }
    }
}
