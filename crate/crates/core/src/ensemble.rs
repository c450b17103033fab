//! Gaussian orthogonal ensemble and the coupled two-block ensemble that
//! interpolates between one GOE (`lambda = 1`) and two decoupled GOEs
//! (`lambda = 0`).
//!
//! Entries are drawn with density proportional to `exp(-alpha tr H²)`:
//! diagonal variance `1/(2 alpha)`, off-diagonal variance `1/(4 alpha)`.
//!
//! Gaussian deviates come from `rand_distr::StandardNormal` (the Ziggurat
//! sampler of rand_distr 0.5) driven by a `ChaCha8Rng` stream. The upper
//! triangle is filled in row-major order, diagonal included.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// Random stream type used throughout the crate.
pub type Stream = ChaCha8Rng;

pub const DEFAULT_ALPHA: f64 = 0.5;

/// Parameters of the coupled two-block ensemble.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EnsembleSpec {
    n: usize,
    m: usize,
    lambda: f64,
    alpha: f64,
    seed: u64,
}

impl EnsembleSpec {
    pub fn new(n: usize, m: usize, lambda: f64, alpha: f64, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(format!("n = {n}, need n >= 2")));
        }
        if m < 1 || m >= n {
            return Err(Error::InvalidDimension(format!(
                "block size m = {m}, need 1 <= m < n = {n}"
            )));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidCoupling(format!("lambda = {lambda} outside [0, 1]")));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidScale(alpha));
        }
        Ok(EnsembleSpec {
            n,
            m,
            lambda,
            alpha,
            seed,
        })
    }

    /// Builds a spec from the size-independent coupling `epsilon = sqrt(n)·lambda`.
    pub fn from_epsilon(n: usize, m: usize, epsilon: f64, alpha: f64, seed: u64) -> Result<Self> {
        let lambda = epsilon_lambda(n, epsilon, Direction::ToLambda)?;
        Self::new(n, m, lambda, alpha, seed)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn epsilon(&self) -> f64 {
        (self.n as f64).sqrt() * self.lambda
    }

    pub fn with_seed(self, seed: u64) -> Self {
        EnsembleSpec { seed, ..self }
    }

    /// Whether the index pair straddles the two diagonal blocks.
    pub fn is_cross_block(&self, i: usize, j: usize) -> bool {
        (i < self.m) != (j < self.m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToLambda,
    ToEpsilon,
}

/// Converts between `lambda` and `epsilon = sqrt(n)·lambda`.
pub fn epsilon_lambda(n: usize, value: f64, direction: Direction) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidDimension(format!("n = {n}")));
    }
    if !(value >= 0.0) || !value.is_finite() {
        return Err(Error::OutOfRange(format!(
            "coupling value {value} must be finite and >= 0"
        )));
    }
    let root = (n as f64).sqrt();
    let (lambda, out) = match direction {
        Direction::ToLambda => (value / root, value / root),
        Direction::ToEpsilon => (value, value * root),
    };
    if lambda > 1.0 {
        return Err(Error::OutOfRange(format!(
            "lambda = {lambda} > 1 (n = {n}, {direction:?} from {value})"
        )));
    }
    Ok(out)
}

/// Opens the stream for a seed.
pub fn stream(seed: u64) -> Stream {
    Stream::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of child stream `index` under `parent`:
/// `splitmix64(parent ^ splitmix64(index))`.
pub fn child_seed(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(index))
}

/// GOE matrix with density proportional to `exp(-alpha tr H²)`.
pub fn sample_goe<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> Result<SymMatrix> {
    if n < 1 {
        return Err(Error::InvalidDimension(format!("n = {n}, need n >= 1")));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidScale(alpha));
    }
    let diag_sd = (1.0 / (2.0 * alpha)).sqrt();
    let off_sd = (1.0 / (4.0 * alpha)).sqrt();
    Ok(SymMatrix::from_upper_fn(n, |i, j| {
        let z: f64 = rng.sample(StandardNormal);
        if i == j {
            diag_sd * z
        } else {
            off_sd * z
        }
    }))
}

/// One draw from the coupled ensemble: a GOE matrix whose entries coupling
/// the first `m` indices to the remaining `n - m` are multiplied by `lambda`.
pub fn sample_coupled<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<SymMatrix> {
    let spec = EnsembleSpec::new(spec.n, spec.m, spec.lambda, spec.alpha, spec.seed)?;
    let goe = sample_goe(spec.n, spec.alpha, rng)?;
    if spec.lambda == 1.0 {
        return Ok(goe);
    }
    Ok(SymMatrix::from_upper_fn(spec.n, |i, j| {
        if spec.is_cross_block(i, j) {
            spec.lambda * goe.get(i, j)
        } else {
            goe.get(i, j)
        }
    }))
}
