//! Level-curvature statistics for a Gaussian orthogonal ensemble split into
//! two coupled blocks.
//!
//! A pair of random matrices `H1`, `H2` defines the path
//! `H(t) = H1 cos t + H2 sin t`. Along it, level velocities and curvatures
//! follow exactly from the eigenbasis of `H(t)` ([`dynamics`]); they are
//! unfolded with the semicircle density and rescaled ([`unfolding`]) and their
//! distribution is compared with `P(k) = 1/(2(1+k²)^{3/2})` ([`statistics`]).
//!
//! The runnable programs under `examples/` walk through each stage; the
//! `levelflow` binary wraps the whole pipeline.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod matrix;
pub mod numeric;
pub mod output;

pub mod pipeline;
pub mod statistics;
pub mod unfolding;

pub use dynamics::{
    curvature_fd_oracle, hamiltonian_at, hamiltonian_rate, integrate_motion, rotation_frame_check, spectral_frame,
    RotatingPair, SpectralFrame,
};
pub use ensemble::{epsilon_lambda, sample_coupled, sample_goe, Direction, EnsembleSpec};
pub use error::{Error, Result};
pub use matrix::SymMatrix;
pub use statistics::{fit_gamma, gamma_pdf, ks_statistic, tail_exponent, universal_pdf, DistributionFit, Histogram};
pub use unfolding::{CurvatureSample, DensityModel};
