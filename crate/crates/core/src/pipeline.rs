//! End-to-end curvature sampling: draw `(H1, H2)` pairs from the coupled
//! ensemble, evaluate frames at random parameter values, unfold, rescale and
//! normalize.
//!
//! Realization `r` draws from the stream seeded by
//! `child_seed(seed, r)`; it samples `H1`, then `H2`, then its `t` values
//! uniformly on `[0, 2π)`. Work is spread over a rayon pool but collected in
//! realization order, so results do not depend on the worker count.

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;

use crate::dynamics::{spectral_frame, RotatingPair};
use crate::ensemble::{child_seed, sample_coupled, stream, EnsembleSpec};
use crate::error::{Error, Result};
use crate::statistics::{build_histogram, ks_statistic, tail_exponent, Histogram, TailFit};
use crate::unfolding::{
    normalize_batch, rescale_batch, select_levels, unfold_dynamics, CurvatureSample, DensityModel, RescaleStats,
    DEFAULT_EDGE_MARGIN, DEFAULT_WINDOW_FRACTION,
};

/// Below this coupling the two blocks are treated as independent problems.
pub const PER_BLOCK_LAMBDA: f64 = 1e-6;
/// Degeneracy tolerance relative to the semicircle radius.
pub const RELATIVE_DEGENERACY_TOL: f64 = 1e-8;
pub const DEFAULT_T_SAMPLES: usize = 4;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Simulation {
    pub ensemble: EnsembleSpec,
    pub realizations: usize,
    pub t_samples: usize,
    pub window_fraction: f64,
    pub edge_margin: f64,
    /// `None` selects per-block mode automatically when `lambda < 1e-6`.
    pub per_block: Option<bool>,
}

impl Simulation {
    pub fn new(ensemble: EnsembleSpec, realizations: usize) -> Self {
        Simulation {
            ensemble,
            realizations,
            t_samples: DEFAULT_T_SAMPLES,
            window_fraction: DEFAULT_WINDOW_FRACTION,
            edge_margin: DEFAULT_EDGE_MARGIN,
            per_block: None,
        }
    }

    pub fn per_block_active(&self) -> bool {
        self.per_block.unwrap_or(self.ensemble.lambda() < PER_BLOCK_LAMBDA)
    }

    fn validate(&self) -> Result<()> {
        if self.realizations < 1 {
            return Err(Error::InvalidParameter("realizations must be >= 1".into()));
        }
        if self.t_samples < 1 {
            return Err(Error::InvalidParameter("t samples must be >= 1".into()));
        }
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "window fraction {} outside (0, 1]",
                self.window_fraction
            )));
        }
        if !(0.0..1.0).contains(&self.edge_margin) {
            return Err(Error::InvalidParameter(format!(
                "edge margin {} outside [0, 1)",
                self.edge_margin
            )));
        }
        Ok(())
    }
}

/// Pair of matrices for realization `r`, plus the stream positioned after them.
pub fn realization_pair(spec: &EnsembleSpec, r: usize) -> Result<(RotatingPair, crate::ensemble::Stream)> {
    let mut rng = stream(child_seed(spec.seed(), r as u64));
    let h1 = sample_coupled(spec, &mut rng)?;
    let h2 = sample_coupled(spec, &mut rng)?;
    Ok((RotatingPair::new(h1, h2)?, rng))
}

/// Independent sub-problems of one realization: the full matrix, or the two
/// diagonal blocks with their own semicircle densities. Each entry carries
/// the global index offset of its levels.
fn subproblems(sim: &Simulation, pair: &RotatingPair) -> Result<Vec<(usize, RotatingPair, DensityModel)>> {
    let spec = &sim.ensemble;
    if sim.per_block_active() {
        let (n, m) = (spec.n(), spec.m());
        Ok(vec![
            (0, pair.block(0, m), DensityModel::for_block(m, spec.alpha())?),
            (m, pair.block(m, n), DensityModel::for_block(n - m, spec.alpha())?),
        ])
    } else {
        Ok(vec![(0, pair.clone(), DensityModel::for_ensemble(spec))])
    }
}

/// Unfolded, not yet rescaled samples of one realization, ordered by
/// `(t index, level)`.
pub fn realization_samples(sim: &Simulation, r: usize) -> Result<Vec<CurvatureSample>> {
    let (pair, mut rng) = realization_pair(&sim.ensemble, r)?;
    let ts: Vec<f64> = (0..sim.t_samples).map(|_| TAU * rng.random::<f64>()).collect();
    let parts = subproblems(sim, &pair)?;
    let mut out = Vec::new();
    for &t in &ts {
        for (offset, sub, model) in &parts {
            let frame = spectral_frame(sub, t, RELATIVE_DEGENERACY_TOL * model.radius())?;
            let levels = select_levels(&frame, sim.window_fraction)?;
            let motion = unfold_dynamics(model, &frame, &levels, sim.edge_margin)?;
            out.extend(levels.iter().zip(motion).map(|(&k, mv)| CurvatureSample {
                realization: r,
                level: offset + k,
                t,
                energy: frame.energies[k],
                raw_velocity: frame.velocities[k],
                raw_curvature: frame.curvatures[k],
                unfolded_velocity: mv.velocity,
                unfolded_curvature: mv.curvature,
                rescaled: None,
                normalized: None,
            }));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SimulationSummary {
    pub epsilon: f64,
    pub lambda: f64,
    pub per_block: bool,
    pub samples: usize,
    pub rescale: RescaleStats,
    /// `⟨|K|⟩` before normalization.
    pub mean_abs_rescaled: f64,
    pub mean_abs_normalized: f64,
    pub ks_universal: f64,
    pub fraction_above_3: f64,
    pub tail: Option<TailFit>,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub samples: Vec<CurvatureSample>,
    pub summary: SimulationSummary,
}

impl SimulationResult {
    pub fn normalized(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| s.normalized.expect("normalized by run"))
            .collect()
    }
}

pub const TAIL_WINDOW: (f64, f64) = (3.0, 30.0);

/// Runs the whole batch on the current rayon pool.
pub fn run_simulation(sim: &Simulation) -> Result<SimulationResult> {
    sim.validate()?;
    let per_realization: Vec<Vec<CurvatureSample>> = (0..sim.realizations)
        .into_par_iter()
        .map(|r| realization_samples(sim, r))
        .collect::<Result<_>>()?;
    let mut samples: Vec<CurvatureSample> = per_realization.into_iter().flatten().collect();
    let rescale = rescale_batch(&mut samples)?;
    let mean_abs_rescaled = normalize_batch(&mut samples)?;

    let ks: Vec<f64> = samples.iter().map(|s| s.normalized.unwrap()).collect();
    let mean_abs_normalized = crate::numeric::compensated_mean(ks.iter().map(|k| k.abs())).unwrap_or(f64::NAN);
    let fraction_above_3 = ks.iter().filter(|k| k.abs() > 3.0).count() as f64 / ks.len() as f64;
    let summary = SimulationSummary {
        epsilon: sim.ensemble.epsilon(),
        lambda: sim.ensemble.lambda(),
        per_block: sim.per_block_active(),
        samples: samples.len(),
        rescale,
        mean_abs_rescaled,
        mean_abs_normalized,
        ks_universal: ks_statistic(&ks, 1.0)?,
        fraction_above_3,
        tail: tail_exponent(&ks, TAIL_WINDOW.0, TAIL_WINDOW.1).ok(),
    };
    Ok(SimulationResult { samples, summary })
}

/// Runs `f` on a dedicated pool of `jobs` workers (`None` = rayon default).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidParameter("--jobs must be >= 1".into())),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Pooled eigenvalues of one coupled-ensemble matrix per realization
/// (realization `r` uses the `H1` of [`realization_pair`]).
pub fn pooled_eigenvalues(spec: &EnsembleSpec, realizations: usize) -> Result<Vec<f64>> {
    if realizations < 1 {
        return Err(Error::InvalidParameter("realizations must be >= 1".into()));
    }
    let per: Vec<Vec<f64>> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let (pair, _) = realization_pair(spec, r)?;
            crate::dynamics::eigenvalues(pair.h1())
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

/// Eigenvalue histogram of the coupled ensemble against the semicircle.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DensityReport {
    pub model: DensityModel,
    pub histogram: Histogram,
    /// Semicircle bin average, per eigenvalue.
    pub model_density: Vec<f64>,
    /// `(count − expected) / sqrt(expected)` per bin.
    pub z_scores: Vec<f64>,
    pub max_abs_z: f64,
    pub chi_square_per_bin: f64,
    /// Fraction of eigenvalues with `|E| > R`.
    pub outside_fraction: f64,
}

/// Pools eigenvalues over `realizations` and compares them bin by bin with
/// the integrated semicircle density.
pub fn density_check(spec: &EnsembleSpec, realizations: usize, edges: &[f64]) -> Result<DensityReport> {
    let model = DensityModel::for_ensemble(spec);
    let eigenvalues = pooled_eigenvalues(spec, realizations)?;
    let histogram = build_histogram(&eigenvalues, edges)?;
    let n = model.n() as f64;
    let all = eigenvalues.len() as f64;
    let model_density: Vec<f64> = edges
        .windows(2)
        .map(|w| (model.unfold(w[1]) - model.unfold(w[0])) / (n * (w[1] - w[0])))
        .collect();
    let z_scores: Vec<f64> = histogram
        .counts
        .iter()
        .zip(&model_density)
        .zip(edges.windows(2))
        .map(|((&c, m), w)| {
            let expected = all * m * (w[1] - w[0]);
            if expected > 0.0 {
                (c as f64 - expected) / expected.sqrt()
            } else if c == 0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let max_abs_z = z_scores.iter().fold(0.0_f64, |a, z| a.max(z.abs()));
    let chi_square_per_bin = z_scores.iter().map(|z| z * z).sum::<f64>() / z_scores.len() as f64;
    let outside = eigenvalues.iter().filter(|e| e.abs() > model.radius()).count();
    Ok(DensityReport {
        model,
        histogram,
        model_density,
        z_scores,
        max_abs_z,
        chi_square_per_bin,
        outside_fraction: outside as f64 / all,
    })
}
