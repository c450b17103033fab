//! Parametric level dynamics along `H(t) = H1 cos t + H2 sin t`.
//!
//! In the instantaneous eigenbasis `U(t)` the perturbation `P = Uᵀ Ḣ U` gives
//! the level velocities `Ė_k = P_kk`, and since `Ḧ = -H` the curvatures are
//!
//! ```text
//! Ë_k = -E_k + Σ_{m≠k} 2 P_km² / (E_k - E_m)
//! ```
//!
//! The full equations of motion for `(E, P)` are also integrated numerically
//! by [`integrate_motion`] as a consistency check, with the rotation
//! generator `S_kl = P_kl / (E_l - E_k)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::matrix::{max_asymmetry, SymMatrix};

/// The fixed matrices `H1`, `H2` of the trigonometric path.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatingPair {
    h1: SymMatrix,
    h2: SymMatrix,
}

impl RotatingPair {
    pub fn new(h1: SymMatrix, h2: SymMatrix) -> Result<Self> {
        if h1.dim() != h2.dim() {
            return Err(Error::InvalidDimension(format!(
                "pair dimensions differ: {} vs {}",
                h1.dim(),
                h2.dim()
            )));
        }
        if h1.dim() == 0 {
            return Err(Error::InvalidDimension("empty pair".into()));
        }
        Ok(RotatingPair { h1, h2 })
    }

    pub fn dim(&self) -> usize {
        self.h1.dim()
    }
    pub fn h1(&self) -> &SymMatrix {
        &self.h1
    }
    pub fn h2(&self) -> &SymMatrix {
        &self.h2
    }

    /// Restriction of both matrices to the diagonal block `[start, end)`.
    pub fn block(&self, start: usize, end: usize) -> RotatingPair {
        RotatingPair {
            h1: self.h1.block(start, end),
            h2: self.h2.block(start, end),
        }
    }
}

pub fn hamiltonian_at(pair: &RotatingPair, t: f64) -> SymMatrix {
    let (s, c) = t.sin_cos();
    SymMatrix::combine(c, &pair.h1, s, &pair.h2)
}

/// First (`Ḣ = -H1 sin t + H2 cos t`) or second (`Ḧ = -H`) parameter derivative.
pub fn hamiltonian_rate(pair: &RotatingPair, t: f64, order: u8) -> Result<SymMatrix> {
    let (s, c) = t.sin_cos();
    match order {
        1 => Ok(SymMatrix::combine(-s, &pair.h1, c, &pair.h2)),
        2 => Ok(SymMatrix::combine(-c, &pair.h1, -s, &pair.h2)),
        other => Err(Error::InvalidOrder(other)),
    }
}

/// Ascending eigenvalues and matching orthonormal eigenvectors (as columns).
/// Each eigenvector is signed so that its largest-magnitude entry is positive.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

const EIGEN_MAX_ITER: usize = 10_000;

pub fn eigh(h: &SymMatrix) -> Result<Eigensystem> {
    let n = h.dim();
    let decomposition =
        SymmetricEigen::try_new(h.as_matrix().clone(), f64::EPSILON, EIGEN_MAX_ITER).ok_or_else(|| {
            Error::EigenFailure {
                dim: n,
                norm: h.frobenius_norm(),
                asymmetry: max_asymmetry(h.as_matrix()),
            }
        })?;
    if decomposition.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure {
            dim: n,
            norm: h.frobenius_norm(),
            asymmetry: max_asymmetry(h.as_matrix()),
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| decomposition.eigenvalues[a].total_cmp(&decomposition.eigenvalues[b]));

    let values = order.iter().map(|&i| decomposition.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let v = decomposition.eigenvectors.column(src);
        let pivot = v
            .iter()
            .copied()
            .fold(0.0_f64, |best, x| if x.abs() > best.abs() { x } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        vectors.set_column(col, &(v * sign));
    }
    Ok(Eigensystem { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(h: &SymMatrix) -> Result<Vec<f64>> {
    let n = h.dim();
    let mut values: Vec<f64> = SymmetricEigen::try_new(h.as_matrix().clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::EigenFailure {
            dim: n,
            norm: h.frobenius_norm(),
            asymmetry: max_asymmetry(h.as_matrix()),
        })?
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Spectrum and its first two parameter derivatives at one value of `t`.
#[derive(Debug, Clone)]
pub struct SpectralFrame {
    pub t: f64,
    pub energies: Vec<f64>,
    pub velocities: Vec<f64>,
    pub curvatures: Vec<f64>,
    /// `Uᵀ Ḣ U`, symmetrized.
    pub p_matrix: SymMatrix,
    /// Levels whose nearest-neighbour gap is below the degeneracy tolerance.
    /// Their curvatures are stored but not trustworthy.
    pub degenerate_mask: Vec<bool>,
}

impl SpectralFrame {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Smallest gap between adjacent levels (`inf` for a single level).
    pub fn min_gap(&self) -> f64 {
        min_gap(&self.energies)
    }

    /// Gap from level `k` to its nearest neighbour.
    pub fn neighbor_gap(&self, k: usize) -> f64 {
        neighbor_gap(&self.energies, k)
    }
}

pub(crate) fn min_gap(energies: &[f64]) -> f64 {
    energies.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

pub(crate) fn neighbor_gap(energies: &[f64], k: usize) -> f64 {
    let below = if k > 0 {
        energies[k] - energies[k - 1]
    } else {
        f64::INFINITY
    };
    let above = if k + 1 < energies.len() {
        energies[k + 1] - energies[k]
    } else {
        f64::INFINITY
    };
    below.min(above)
}

/// `Ë_k = -E_k + Σ_{m≠k} 2 P_km² / (E_k - E_m)` for every level.
pub fn curvatures_from(energies: &[f64], p: &SymMatrix) -> Vec<f64> {
    let n = energies.len();
    (0..n)
        .map(|k| {
            let coupling: f64 = (0..n)
                .filter(|&m| m != k)
                .map(|m| {
                    let pkm = p.get(k, m);
                    2.0 * pkm * pkm / (energies[k] - energies[m])
                })
                .sum();
            -energies[k] + coupling
        })
        .collect()
}

fn frame_from_state(t: f64, energies: Vec<f64>, p_matrix: SymMatrix, degeneracy_tol: f64) -> SpectralFrame {
    let n = energies.len();
    let velocities = (0..n).map(|k| p_matrix.get(k, k)).collect();
    let curvatures = curvatures_from(&energies, &p_matrix);
    let degenerate_mask = (0..n).map(|k| neighbor_gap(&energies, k) < degeneracy_tol).collect();
    SpectralFrame {
        t,
        energies,
        velocities,
        curvatures,
        p_matrix,
        degenerate_mask,
    }
}

/// Diagonalizes `H(t)` and evaluates velocities and curvatures from the
/// instantaneous eigenbasis.
pub fn spectral_frame(pair: &RotatingPair, t: f64, degeneracy_tol: f64) -> Result<SpectralFrame> {
    if !(degeneracy_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "degeneracy_tol = {degeneracy_tol} must be > 0"
        )));
    }
    let h = hamiltonian_at(pair, t);
    let eig = eigh(&h)?;
    let hdot = hamiltonian_rate(pair, t, 1)?;
    let p = eig.vectors.transpose() * hdot.as_matrix() * &eig.vectors;
    Ok(frame_from_state(
        t,
        eig.values,
        SymMatrix::symmetrized(&p),
        degeneracy_tol,
    ))
}

/// Central finite differences of the sorted spectrum:
/// `(E(t+δ) - E(t-δ)) / 2δ` and `(E(t+δ) - 2E(t) + E(t-δ)) / δ²`,
/// from three independent diagonalizations.
///
/// Fails when a level moves across the stencil by more than half the gap to
/// its nearest neighbour, since the sorted order can then no longer be
/// trusted to follow one level.
pub fn curvature_fd_oracle(pair: &RotatingPair, t: f64, delta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be > 0")));
    }
    let below = eigenvalues(&hamiltonian_at(pair, t - delta))?;
    let centre = eigenvalues(&hamiltonian_at(pair, t))?;
    let above = eigenvalues(&hamiltonian_at(pair, t + delta))?;
    for k in 0..centre.len() {
        let travel = (above[k] - centre[k]).abs().max((centre[k] - below[k]).abs());
        let half_gap = 0.5 * neighbor_gap(&centre, k);
        if travel >= half_gap {
            return Err(Error::StencilCrossing { level: k, t, delta });
        }
    }
    let velocities = above.iter().zip(&below).map(|(a, b)| (a - b) / (2.0 * delta)).collect();
    let curvatures = above
        .iter()
        .zip(&centre)
        .zip(&below)
        .map(|((a, c), b)| (a - 2.0 * c + b) / (delta * delta))
        .collect();
    Ok((velocities, curvatures))
}

pub const DEFAULT_GAP_FLOOR: f64 = 1e-8;

#[derive(Clone)]
struct MotionState {
    energies: DVector<f64>,
    p: DMatrix<f64>,
}

impl MotionState {
    fn axpy(&self, h: f64, d: &MotionState) -> MotionState {
        MotionState {
            energies: &self.energies + &d.energies * h,
            p: &self.p + &d.p * h,
        }
    }
}

/// `dE/dt = diag P`, `dP/dt = [P, S] - H_D`.
fn motion_rhs(state: &MotionState, t: f64, gap_floor: f64) -> Result<MotionState> {
    let n = state.energies.len();
    let e = &state.energies;
    for k in 0..n.saturating_sub(1) {
        let gap = (e[k + 1] - e[k]).abs();
        if gap < gap_floor {
            return Err(Error::NearDegeneracy {
                level: k,
                gap,
                floor: gap_floor,
                t,
            });
        }
    }
    let p = &state.p;
    let s = DMatrix::from_fn(n, n, |k, l| if k == l { 0.0 } else { p[(k, l)] / (e[l] - e[k]) });
    let mut dp = p * &s - &s * p;
    for k in 0..n {
        dp[(k, k)] -= e[k];
    }
    Ok(MotionState {
        energies: p.diagonal(),
        p: dp,
    })
}

/// Integrates the coupled `(E, P)` equations of motion from the frame at
/// `t0` to `t1` with `steps` classical fourth-order Runge-Kutta steps.
/// Uses [`DEFAULT_GAP_FLOOR`] as the near-degeneracy abort threshold.
pub fn integrate_motion(pair: &RotatingPair, t0: f64, t1: f64, steps: usize) -> Result<SpectralFrame> {
    integrate_motion_with_floor(pair, t0, t1, steps, DEFAULT_GAP_FLOOR)
}

pub fn integrate_motion_with_floor(
    pair: &RotatingPair,
    t0: f64,
    t1: f64,
    steps: usize,
    gap_floor: f64,
) -> Result<SpectralFrame> {
    if steps < 1 {
        return Err(Error::InvalidParameter("steps must be >= 1".into()));
    }
    let initial = spectral_frame(pair, t0, gap_floor)?;
    if let Some(k) = initial.degenerate_mask.iter().position(|&d| d) {
        let gap = initial.neighbor_gap(k);
        return Err(Error::NearDegeneracy {
            level: k,
            gap,
            floor: gap_floor,
            t: t0,
        });
    }
    if t1 == t0 {
        return Ok(initial);
    }
    let mut state = MotionState {
        energies: DVector::from_vec(initial.energies.clone()),
        p: initial.p_matrix.as_matrix().clone(),
    };
    let h = (t1 - t0) / steps as f64;
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k1 = motion_rhs(&state, t, gap_floor)?;
        let k2 = motion_rhs(&state.axpy(0.5 * h, &k1), t + 0.5 * h, gap_floor)?;
        let k3 = motion_rhs(&state.axpy(0.5 * h, &k2), t + 0.5 * h, gap_floor)?;
        let k4 = motion_rhs(&state.axpy(h, &k3), t + h, gap_floor)?;
        state.energies += (&k1.energies + &k2.energies * 2.0 + &k3.energies * 2.0 + &k4.energies) * (h / 6.0);
        state.p += (&k1.p + &k2.p * 2.0 + &k3.p * 2.0 + &k4.p) * (h / 6.0);
    }
    let energies: Vec<f64> = state.energies.iter().copied().collect();
    Ok(frame_from_state(
        t1,
        energies,
        SymMatrix::symmetrized(&state.p),
        gap_floor,
    ))
}

/// Largest deviation between the sorted eigenvalues of
/// `M(t) = H_D(0) cos t + P(0) sin t` and those of `H(t)`.
/// `M(t)` is `H(t)` written in the eigenbasis of `H(0)`, so the deviation is
/// round-off only.
pub fn rotation_frame_check(pair: &RotatingPair, t: f64) -> Result<f64> {
    let frame0 = spectral_frame(pair, 0.0, f64::MIN_POSITIVE)?;
    let hd0 = SymMatrix::from_diagonal(&frame0.energies);
    let (s, c) = t.sin_cos();
    let rotated = SymMatrix::combine(c, &hd0, s, &frame0.p_matrix);
    let a = eigenvalues(&rotated)?;
    let b = eigenvalues(&hamiltonian_at(pair, t))?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}
