//! Semicircle unfolding and the rescaling of level curvatures into
//! universal, dimensionless units.

use std::f64::consts::PI;

use crate::dynamics::SpectralFrame;
use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};
use crate::numeric::compensated_mean;

pub const DEFAULT_EDGE_MARGIN: f64 = 1e-3;
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.5;

/// Semicircle mean level density
/// `ρ(E) = 4α / (π(1+λ²)) · sqrt(R² − E²)` with `R² = n(1+λ²)/(2α)`,
/// normalized to `n` levels.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DensityModel {
    n: usize,
    alpha: f64,
    lambda: f64,
    radius: f64,
}

impl DensityModel {
    pub fn new(n: usize, alpha: f64, lambda: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDimension(format!("n = {n}")));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidScale(alpha));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidCoupling(format!("lambda = {lambda} outside [0, 1]")));
        }
        let radius = (n as f64 * (1.0 + lambda * lambda) / (2.0 * alpha)).sqrt();
        Ok(DensityModel {
            n,
            alpha,
            lambda,
            radius,
        })
    }

    pub fn for_ensemble(spec: &EnsembleSpec) -> Self {
        Self::new(spec.n(), spec.alpha(), spec.lambda()).expect("EnsembleSpec is validated")
    }

    /// Density of a single uncoupled GOE block of size `m`.
    pub fn for_block(m: usize, alpha: f64) -> Result<Self> {
        Self::new(m, alpha, 1.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn prefactor(&self) -> f64 {
        4.0 * self.alpha / (PI * (1.0 + self.lambda * self.lambda))
    }

    /// Zero outside `[-R, R]`.
    pub fn mean_density(&self, e: f64) -> f64 {
        let r2 = self.radius * self.radius;
        if e.abs() >= self.radius {
            0.0
        } else {
            self.prefactor() * (r2 - e * e).sqrt()
        }
    }

    /// `dρ/dE`; infinite at the support edges, zero outside.
    pub fn density_slope(&self, e: f64) -> f64 {
        if e.abs() > self.radius {
            return 0.0;
        }
        let r2 = self.radius * self.radius;
        -self.prefactor() * e / (r2 - e * e).sqrt()
    }

    /// Integrated density `x(E)`, clamped to `0` below and `n` above the support.
    pub fn unfold(&self, e: f64) -> f64 {
        let n = self.n as f64;
        let r = self.radius;
        if e <= -r {
            return 0.0;
        }
        if e >= r {
            return n;
        }
        let u = e / r;
        n * (0.5 + u * (1.0 - u * u).sqrt() / PI + u.asin() / PI)
    }
}

/// One level's curvature as it moves through the unfolding pipeline.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CurvatureSample {
    pub realization: usize,
    pub level: usize,
    pub t: f64,
    pub energy: f64,
    pub raw_velocity: f64,
    pub raw_curvature: f64,
    pub unfolded_velocity: f64,
    pub unfolded_curvature: f64,
    /// Filled by [`rescale_batch`].
    pub rescaled: Option<f64>,
    /// Filled by [`normalize_batch`].
    pub normalized: Option<f64>,
}

/// Unfolded velocity and curvature of one level:
/// `ẋ = ρ(E) Ė` and `ẍ = ρ(E) Ë + ρ'(E) Ė²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnfoldedMotion {
    pub velocity: f64,
    pub curvature: f64,
}

pub fn unfold_motion(model: &DensityModel, energy: f64, velocity: f64, curvature: f64) -> UnfoldedMotion {
    let rho = model.mean_density(energy);
    let slope = model.density_slope(energy);
    UnfoldedMotion {
        velocity: rho * velocity,
        curvature: rho * curvature + slope * velocity * velocity,
    }
}

/// Applies [`unfold_motion`] to the given levels of a frame. Every level must
/// lie inside `R·(1 − edge_margin)`.
pub fn unfold_dynamics(
    model: &DensityModel,
    frame: &SpectralFrame,
    levels: &[usize],
    edge_margin: f64,
) -> Result<Vec<UnfoldedMotion>> {
    let limit = model.radius() * (1.0 - edge_margin);
    levels
        .iter()
        .map(|&k| {
            let e = frame.energies[k];
            if e.abs() > limit {
                return Err(Error::EdgeProximity {
                    level: k,
                    energy: e,
                    radius: model.radius(),
                });
            }
            Ok(unfold_motion(model, e, frame.velocities[k], frame.curvatures[k]))
        })
        .collect()
}

/// Central `window_fraction` of the levels by index, minus masked levels.
pub fn select_levels(frame: &SpectralFrame, window_fraction: f64) -> Result<Vec<usize>> {
    let (start, end) = central_window(frame.dim(), window_fraction)?;
    Ok((start..end).filter(|&k| !frame.degenerate_mask[k]).collect())
}

/// Index range `[start, end)` of the central `window_fraction` of `n` levels.
pub fn central_window(n: usize, window_fraction: f64) -> Result<(usize, usize)> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "window fraction {window_fraction} outside (0, 1]"
        )));
    }
    let count = ((window_fraction * n as f64).round() as usize).clamp(1.min(n), n);
    let start = (n - count) / 2;
    Ok((start, start + count))
}

/// Batch averages entering the curvature rescaling.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RescaleStats {
    pub mean_velocity_sq: f64,
    pub mean_velocity_curvature: f64,
}

/// `K = (ẍ − (⟨ẋẍ⟩/⟨ẋ²⟩) ẋ) / (π⟨ẋ²⟩)` with averages over the whole batch.
pub fn rescale_batch(samples: &mut [CurvatureSample]) -> Result<RescaleStats> {
    if samples.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mean_velocity_sq =
        compensated_mean(samples.iter().map(|s| s.unfolded_velocity * s.unfolded_velocity)).ok_or(Error::EmptyBatch)?;
    if !(mean_velocity_sq > 0.0) {
        return Err(Error::ZeroVelocityVariance);
    }
    let mean_velocity_curvature = compensated_mean(samples.iter().map(|s| s.unfolded_velocity * s.unfolded_curvature))
        .ok_or(Error::EmptyBatch)?;
    let drift = mean_velocity_curvature / mean_velocity_sq;
    let scale = 1.0 / (PI * mean_velocity_sq);
    for s in samples.iter_mut() {
        s.rescaled = Some(scale * (s.unfolded_curvature - drift * s.unfolded_velocity));
        s.normalized = None;
    }
    Ok(RescaleStats {
        mean_velocity_sq,
        mean_velocity_curvature,
    })
}

/// `k = K / ⟨|K|⟩`. Returns `⟨|K|⟩`.
pub fn normalize_batch(samples: &mut [CurvatureSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let rescaled = samples
        .iter()
        .enumerate()
        .map(|(i, s)| s.rescaled.ok_or(Error::MissingRescale(i)))
        .collect::<Result<Vec<f64>>>()?;
    let mean_abs = compensated_mean(rescaled.iter().map(|k| k.abs())).ok_or(Error::EmptyBatch)?;
    if !(mean_abs > 0.0) {
        return Err(Error::DegenerateBatch);
    }
    for (s, k) in samples.iter_mut().zip(rescaled) {
        s.normalized = Some(k / mean_abs);
    }
    Ok(mean_abs)
}
