//! Curvature distributions: the universal law, its one-parameter scale
//! family, histograms, least-squares fitting of the scale, and
//! goodness-of-fit / tail diagnostics.

use rand::Rng;

use crate::error::{Error, Result};

/// `P(k) = 1 / (2 (1 + k²)^{3/2})`.
pub fn universal_pdf(k: f64) -> f64 {
    0.5 * (1.0 + k * k).powf(-1.5)
}

/// `P(K; γ) = 1 / (2γ (1 + (K/γ)²)^{3/2})`, whose mean `|K|` is `γ`.
pub fn gamma_pdf(k: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(universal_pdf(k / gamma) / gamma)
}

/// `F(K; γ) = (1 + z / sqrt(1 + z²)) / 2` with `z = K/γ`.
pub fn gamma_cdf(k: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(standard_cdf(k / gamma))
}

fn standard_cdf(z: f64) -> f64 {
    if z.is_infinite() {
        return if z > 0.0 { 1.0 } else { 0.0 };
    }
    0.5 * (1.0 + z / (1.0 + z * z).sqrt())
}

/// Inverse of [`gamma_cdf`] written in terms of `u = 2F − 1 ∈ (−1, 1)`.
pub fn gamma_quantile_centered(u: f64, gamma: f64) -> f64 {
    gamma * u / (1.0 - u * u).sqrt()
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidGamma(gamma))
    }
}

/// Draws `n` i.i.d. curvatures from [`gamma_pdf`] by inverse CDF.
pub fn sample_gamma_dist<R: Rng + ?Sized>(gamma: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    if n < 1 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u = 2.0 * rng.random::<f64>() - 1.0;
        if u > -1.0 {
            out.push(gamma_quantile_centered(u, gamma));
        }
    }
    Ok(out)
}

/// How histogram counts are turned into a density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub enum Normalization {
    /// Divide by in-range samples only; the density integrates to one over the range.
    #[default]
    Truncated,
    /// Divide by all samples, under- and overflow included.
    AllSamples,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// In-range sample count, equal to the sum of `counts`.
    pub total: u64,
    pub underflow: u64,
    pub overflow: u64,
}

pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Result<Vec<f64>> {
    if bins < 1 || !(hi > lo) {
        return Err(Error::InvalidEdges(format!("{bins} bins on [{lo}, {hi}]")));
    }
    Ok((0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect())
}

pub fn log_edges(lo: f64, hi: f64, bins: usize) -> Result<Vec<f64>> {
    if bins < 1 || !(lo > 0.0) || !(hi > lo) {
        return Err(Error::InvalidEdges(format!("{bins} log bins on [{lo}, {hi}]")));
    }
    let ratio = (hi / lo).ln();
    Ok((0..=bins)
        .map(|i| lo * (ratio * i as f64 / bins as f64).exp())
        .collect())
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::InvalidEdges("need at least two edges".into()));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidEdges(
            "edges must be finite and strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Counts samples into half-open bins `[e_i, e_{i+1})`; the last edge itself
/// counts as overflow.
pub fn build_histogram(samples: &[f64], edges: &[f64]) -> Result<Histogram> {
    check_edges(edges)?;
    let mut hist = Histogram::empty(edges.to_vec());
    for &x in samples {
        hist.add(x);
    }
    Ok(hist)
}

impl Histogram {
    fn empty(edges: Vec<f64>) -> Self {
        let bins = edges.len() - 1;
        Histogram {
            edges,
            counts: vec![0; bins],
            total: 0,
            underflow: 0,
            overflow: 0,
        }
    }

    fn add(&mut self, x: f64) {
        let lo = self.edges[0];
        let hi = *self.edges.last().unwrap();
        if x < lo || x.is_nan() {
            self.underflow += 1;
        } else if x >= hi {
            self.overflow += 1;
        } else {
            // first edge strictly greater than x, minus one
            let bin = self.edges.partition_point(|&e| e <= x) - 1;
            self.counts[bin] += 1;
            self.total += 1;
        }
    }

    /// Bin-wise sum with another histogram over identical edges.
    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.edges != other.edges {
            return Err(Error::InvalidEdges(
                "cannot merge histograms with different edges".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn all_samples(&self) -> u64 {
        self.total + self.underflow + self.overflow
    }

    /// `counts / (norm · width)`; errors when there is nothing to normalize by.
    pub fn density(&self, normalization: Normalization) -> Result<Vec<f64>> {
        let norm = match normalization {
            Normalization::Truncated => self.total,
            Normalization::AllSamples => self.all_samples(),
        };
        if norm == 0 || self.total == 0 {
            return Err(Error::EmptyHistogram);
        }
        Ok(self
            .counts
            .iter()
            .zip(self.widths())
            .map(|(&c, w)| c as f64 / (norm as f64 * w))
            .collect())
    }

    pub fn binned_density(&self, normalization: Normalization) -> Result<BinnedDensity> {
        Ok(BinnedDensity {
            edges: self.edges.clone(),
            density: self.density(normalization)?,
            counts: Some(self.counts.clone()),
            normalization,
        })
    }
}

/// Bin-averaged density of the γ-family, `(F(b) − F(a)) / (b − a)`, with the
/// mass renormalized to the binned range for [`Normalization::Truncated`].
pub fn model_bin_density(edges: &[f64], gamma: f64, normalization: Normalization) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    let cdf: Vec<f64> = edges.iter().map(|&e| standard_cdf(e / gamma)).collect();
    let in_range = match normalization {
        Normalization::Truncated => cdf[cdf.len() - 1] - cdf[0],
        Normalization::AllSamples => 1.0,
    };
    Ok(edges
        .windows(2)
        .zip(cdf.windows(2))
        .map(|(e, f)| (f[1] - f[0]) / ((e[1] - e[0]) * in_range))
        .collect())
}

/// Binned density ready for fitting, either from a [`Histogram`] or
/// tabulated externally.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDensity {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub counts: Option<Vec<u64>>,
    pub normalization: Normalization,
}

impl BinnedDensity {
    /// Tabulated `(center, density)` pairs normalized over the whole line.
    /// Interior edges are midpoints between centers; the outer edges sit
    /// half a neighbouring spacing beyond the end centers.
    pub fn from_centers(centers: &[f64], density: &[f64]) -> Result<Self> {
        if centers.len() != density.len() {
            return Err(Error::InvalidParameter("centers and densities differ in length".into()));
        }
        if centers.len() < 2 {
            return Err(Error::InsufficientBins {
                needed: 2,
                found: centers.len(),
            });
        }
        check_edges(centers)?;
        let n = centers.len();
        let mut edges = Vec::with_capacity(n + 1);
        edges.push(centers[0] - 0.5 * (centers[1] - centers[0]));
        edges.extend(centers.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        edges.push(centers[n - 1] + 0.5 * (centers[n - 1] - centers[n - 2]));
        Ok(BinnedDensity {
            edges,
            density: density.to_vec(),
            counts: None,
            normalization: Normalization::AllSamples,
        })
    }

    pub fn bins(&self) -> usize {
        self.density.len()
    }
}

/// Result of a one-parameter fit of the γ-family.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DistributionFit {
    pub gamma: f64,
    /// Mean squared residual between data and bin-averaged model density.
    pub objective: f64,
    pub gamma_uncertainty: f64,
    pub bins_used: usize,
    /// Pearson chi-square per degree of freedom; only with raw counts.
    pub reduced_chi_square: Option<f64>,
}

pub const DEFAULT_GAMMA_BRACKET: (f64, f64) = (0.1, 10.0);
const MIN_FIT_BINS: usize = 5;
const GOLDEN_RTOL: f64 = 1e-6;
const SCAN_POINTS: usize = 64;

pub fn fit_gamma(data: &BinnedDensity) -> Result<DistributionFit> {
    fit_gamma_in(data, DEFAULT_GAMMA_BRACKET)
}

/// Least-squares fit of γ on `bracket`: a log-spaced scan picks the best
/// cell, then golden-section search refines it to relative tolerance 1e-6.
pub fn fit_gamma_in(data: &BinnedDensity, bracket: (f64, f64)) -> Result<DistributionFit> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma bracket [{lo}, {hi}]")));
    }
    check_edges(&data.edges)?;
    if data.edges.len() != data.density.len() + 1 {
        return Err(Error::InvalidEdges("edge count must be bin count + 1".into()));
    }
    let non_empty = data.density.iter().filter(|&&d| d > 0.0).count();
    if non_empty < MIN_FIT_BINS {
        return Err(Error::InsufficientBins {
            needed: MIN_FIT_BINS,
            found: non_empty,
        });
    }

    let objective = |gamma: f64| -> f64 {
        let model = model_bin_density(&data.edges, gamma, data.normalization).expect("gamma > 0");
        let ssr: f64 = data.density.iter().zip(&model).map(|(d, m)| (d - m) * (d - m)).sum();
        ssr / data.density.len() as f64
    };

    let grid: Vec<f64> = log_edges(lo, hi, SCAN_POINTS - 1)?;
    let values: Vec<f64> = grid.iter().map(|&g| objective(g)).collect();
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = objective(c);
    let mut fd = objective(d);
    while (b - a) > GOLDEN_RTOL * 0.5 * (a + b) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    let gamma = 0.5 * (a + b);
    if gamma <= lo * (1.0 + 2.0 * GOLDEN_RTOL) || gamma >= hi * (1.0 - 2.0 * GOLDEN_RTOL) {
        return Err(Error::NoMinimumInBracket { lo, hi, at: gamma });
    }
    let q = objective(gamma);

    // quadratic approximation of the objective at the minimum
    let h = 1e-3 * gamma;
    let q2 = (objective(gamma + h) - 2.0 * q + objective(gamma - h)) / (h * h);
    let bins = data.bins();
    let gamma_uncertainty = if q2 > 0.0 && bins > 1 {
        (2.0 * q / ((bins - 1) as f64 * q2)).sqrt()
    } else {
        f64::NAN
    };

    let reduced_chi_square = data.counts.as_ref().and_then(|counts| {
        let total: u64 = match data.normalization {
            Normalization::Truncated => counts.iter().sum(),
            Normalization::AllSamples => {
                // recover the normalizing count from any non-empty bin
                let (i, &c) = counts.iter().enumerate().find(|(_, &c)| c > 0)?;
                let w = data.edges[i + 1] - data.edges[i];
                (c as f64 / (data.density[i] * w)).round() as u64
            }
        };
        let model = model_bin_density(&data.edges, gamma, data.normalization).ok()?;
        let mut chi2 = 0.0;
        let mut used = 0usize;
        for ((&c, m), w) in counts.iter().zip(&model).zip(data.edges.windows(2)) {
            let expected = total as f64 * m * (w[1] - w[0]);
            if expected > 0.0 {
                chi2 += (c as f64 - expected).powi(2) / expected;
                used += 1;
            }
        }
        (used > 2).then(|| chi2 / (used - 2) as f64)
    });

    Ok(DistributionFit {
        gamma,
        objective: q,
        gamma_uncertainty,
        bins_used: bins,
        reduced_chi_square,
    })
}

/// Kolmogorov-Smirnov distance between the empirical CDF and [`gamma_cdf`].
pub fn ks_statistic(samples: &[f64], gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = standard_cdf(x / gamma);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max))
}

/// Log-log slope of a tail density.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TailFit {
    pub exponent: f64,
    pub std_error: f64,
    pub bins_used: usize,
    pub samples_used: usize,
}

pub const DEFAULT_TAIL_BINS: usize = 10;

/// Slope of `ln(density)` against `ln|k|` over logarithmic bins on
/// `[k_min, k_max]`, using [`DEFAULT_TAIL_BINS`] bins.
pub fn tail_exponent(samples: &[f64], k_min: f64, k_max: f64) -> Result<TailFit> {
    tail_exponent_with_bins(samples, k_min, k_max, DEFAULT_TAIL_BINS)
}

pub fn tail_exponent_with_bins(samples: &[f64], k_min: f64, k_max: f64, bins: usize) -> Result<TailFit> {
    if !(k_min > 0.0) || !(k_max / k_min >= 5.0) {
        return Err(Error::InsufficientTailData(format!(
            "window [{k_min}, {k_max}] must satisfy k_max/k_min >= 5"
        )));
    }
    let edges = log_edges(k_min, k_max, bins)?;
    let magnitudes: Vec<f64> = samples.iter().map(|k| k.abs()).collect();
    let hist = build_histogram(&magnitudes, &edges)?;
    if hist.total < 100 {
        return Err(Error::InsufficientTailData(format!(
            "{} samples in [{k_min}, {k_max}], need 100",
            hist.total
        )));
    }
    let density: Vec<f64> = hist
        .counts
        .iter()
        .zip(hist.widths())
        .map(|(&c, w)| c as f64 / (samples.len() as f64 * w))
        .collect();
    let mut fit = log_log_slope(&edges, &density)?;
    fit.samples_used = hist.total as usize;
    Ok(fit)
}

/// Least-squares slope of `ln(density)` against the log bin centre
/// `sqrt(a·b)`, over bins with positive density.
pub fn log_log_slope(edges: &[f64], density: &[f64]) -> Result<TailFit> {
    check_edges(edges)?;
    let points: Vec<(f64, f64)> = edges
        .windows(2)
        .zip(density)
        .filter(|(_, &d)| d > 0.0)
        .map(|(w, &d)| ((w[0] * w[1]).sqrt().ln(), d.ln()))
        .collect();
    let m = points.len();
    if m < 3 {
        return Err(Error::InsufficientTailData(format!("{m} non-empty log bins, need 3")));
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m as f64;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m as f64;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let std_error = (ssr / (m - 2) as f64 / sxx).sqrt();
    Ok(TailFit {
        exponent: slope,
        std_error,
        bins_used: m,
        samples_used: 0,
    })
}
