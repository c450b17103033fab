//! The `levelflow` command line: `simulate`, `density`, `sweep` and `fit`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{
    parse_epsilon_list, BinSpec, Format, InputKind, RunConfig, Settings, DEFAULT_CURVATURE_BINS, DEFAULT_DENSITY_BINS,
    DEFAULT_DENSITY_EPSILON, DEFAULT_SWEEP,
};
use crate::ensemble::{child_seed, EnsembleSpec};
use crate::error::{Error, Result};
use crate::output::{format_float, Cell, Table};
use crate::pipeline::{density_check, run_simulation, with_jobs, Simulation, SimulationResult};
use crate::statistics::{
    build_histogram, fit_gamma, model_bin_density, uniform_edges, BinnedDensity, DistributionFit, Normalization,
};

#[derive(Debug, Parser)]
#[command(
    name = "levelflow",
    version,
    about = "Level-curvature statistics of coupled GOE blocks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample normalized curvatures for each epsilon and write per-sample rows.
    Simulate(RunArgs),
    /// Eigenvalue density histogram against the semicircle law.
    Density(RunArgs),
    /// Curvature histograms over several epsilon values.
    Sweep(RunArgs),
    /// Fit the scale gamma of the curvature distribution to external data.
    Fit(FitArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// key = value file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// First block size (default n/2).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated list of epsilon = sqrt(n)·lambda.
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long = "t-samples")]
    pub t_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Central fraction of levels kept.
    #[arg(long)]
    pub window: Option<f64>,
    /// COUNT or COUNT:LO:HI.
    #[arg(long)]
    pub bins: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// samples (one K per line) or binned (K, density per line).
    #[arg(long = "input-kind")]
    pub input_kind: Option<String>,
}

impl RunArgs {
    fn settings(&self) -> Result<Settings> {
        let from_file = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        let flags = Settings {
            n: self.n,
            m: self.m,
            alpha: self.alpha,
            epsilon: self.epsilon.as_deref().map(parse_epsilon_list).transpose()?,
            realizations: self.realizations,
            t_samples: self.t_samples,
            seed: self.seed,
            window: self.window,
            bins: self.bins.as_deref().map(str::parse::<BinSpec>).transpose()?,
            out: self.out.clone(),
            format: self.format.as_deref().map(str::parse::<Format>).transpose()?,
            jobs: self.jobs,
            input: None,
            input_kind: None,
        };
        Ok(from_file.overlay(flags))
    }
}

/// Parses arguments, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(report) => {
            print!("{report}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command and returns the text report printed on success.
pub fn run(command: Command) -> Result<String> {
    match command {
        Command::Simulate(args) => {
            let cfg = args.settings()?.resolve(&[])?;
            let cfg = if cfg.epsilon.is_empty() {
                RunConfig {
                    epsilon: vec![(cfg.n as f64).sqrt()],
                    ..cfg
                }
            } else {
                cfg
            };
            cmd_simulate(&cfg)
        }
        Command::Density(args) => cmd_density(&args.settings()?.resolve(&[DEFAULT_DENSITY_EPSILON])?),
        Command::Sweep(args) => cmd_sweep(&args.settings()?.resolve(&DEFAULT_SWEEP)?),
        Command::Fit(args) => {
            let mut settings = args.run.settings()?;
            let emit_curve = settings.out.is_some();
            if let Some(input) = args.input {
                settings.input = Some(input);
            }
            if let Some(kind) = args.input_kind.as_deref() {
                settings.input_kind = Some(kind.parse::<InputKind>()?);
            }
            let cfg = settings.resolve(&[])?;
            cmd_fit(&cfg, emit_curve)
        }
    }
}

fn eps_label(eps: f64) -> String {
    format!("eps{eps}")
}

fn simulation_for(cfg: &RunConfig, eps: f64, seed: u64) -> Result<Simulation> {
    let spec = EnsembleSpec::from_epsilon(cfg.n, cfg.m, eps, cfg.alpha, seed)?;
    Ok(Simulation {
        t_samples: cfg.t_samples,
        window_fraction: cfg.window_fraction,
        ..Simulation::new(spec, cfg.realizations)
    })
}

fn simulate_one(cfg: &RunConfig, eps: f64, seed: u64) -> Result<SimulationResult> {
    let sim = simulation_for(cfg, eps, seed)?;
    with_jobs(cfg.jobs, || run_simulation(&sim))?
}

const SAMPLE_COLUMNS: [&str; 10] = [
    "realization",
    "level",
    "t",
    "E",
    "Edot",
    "Eddot",
    "xdot",
    "xddot",
    "K",
    "k",
];
const HISTOGRAM_COLUMNS: [&str; 5] = ["bin_lo", "bin_hi", "count", "density", "model_density"];
const SUMMARY_COLUMNS: [&str; 13] = [
    "epsilon",
    "lambda",
    "seed",
    "per_block",
    "samples",
    "mean_abs_K",
    "mean_xdot_sq",
    "mean_xdot_xddot",
    "ks_universal",
    "fraction_abs_k_above_3",
    "tail_exponent",
    "tail_std_error",
    "mean_abs_k",
];

pub fn samples_table(cfg: &RunConfig, result: &SimulationResult, seed: u64) -> Table {
    let mut table = Table::new("simulate", cfg.entries(), &SAMPLE_COLUMNS);
    table.note_float("epsilon", result.summary.epsilon);
    table.note("seed", seed);
    for s in &result.samples {
        table.push(vec![
            s.realization.into(),
            s.level.into(),
            s.t.into(),
            s.energy.into(),
            s.raw_velocity.into(),
            s.raw_curvature.into(),
            s.unfolded_velocity.into(),
            s.unfolded_curvature.into(),
            s.rescaled.into(),
            s.normalized.into(),
        ]);
    }
    table
}

fn summary_row(result: &SimulationResult, seed: u64) -> Vec<Cell> {
    let s = &result.summary;
    vec![
        s.epsilon.into(),
        s.lambda.into(),
        Cell::Text(seed.to_string()),
        s.per_block.into(),
        s.samples.into(),
        s.mean_abs_rescaled.into(),
        s.rescale.mean_velocity_sq.into(),
        s.rescale.mean_velocity_curvature.into(),
        s.ks_universal.into(),
        s.fraction_above_3.into(),
        s.tail.map(|t| t.exponent).into(),
        s.tail.map(|t| t.std_error).into(),
        s.mean_abs_normalized.into(),
    ]
}

fn summary_line(result: &SimulationResult) -> String {
    let s = &result.summary;
    let tail = s
        .tail
        .map(|t| format!("{:.3} ± {:.3}", t.exponent, t.std_error))
        .unwrap_or_else(|| "n/a".into());
    format!(
        "epsilon {:<6} lambda {:.5}  samples {:>7}  <|K|> {:.4}  KS {:.4}  P(|k|>3) {:.4}  tail {}{}\n",
        s.epsilon,
        s.lambda,
        s.samples,
        s.mean_abs_rescaled,
        s.ks_universal,
        s.fraction_above_3,
        tail,
        if s.per_block { "  [per-block]" } else { "" }
    )
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    let mut report = String::new();
    let mut summary = Table::new("simulate", cfg.entries(), &SUMMARY_COLUMNS);
    for &eps in &cfg.epsilon {
        let result = simulate_one(cfg, eps, cfg.seed)?;
        let path = samples_table(cfg, &result, cfg.seed).write(
            &cfg.out,
            &format!("samples_{}", eps_label(eps)),
            cfg.format,
        )?;
        summary.push(summary_row(&result, cfg.seed));
        report.push_str(&summary_line(&result));
        report.push_str(&format!("  wrote {}\n", path.display()));
    }
    let path = summary.write(&cfg.out, "summary", cfg.format)?;
    report.push_str(&format!("wrote {}\n", path.display()));
    Ok(report)
}

fn curvature_edges(cfg: &RunConfig) -> Result<Vec<f64>> {
    let (count, lo, hi) = DEFAULT_CURVATURE_BINS;
    match cfg.bins {
        None => uniform_edges(lo, hi, count),
        Some(BinSpec { count, range: None }) => uniform_edges(lo, hi, count),
        Some(BinSpec {
            count,
            range: Some((lo, hi)),
        }) => uniform_edges(lo, hi, count),
    }
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    if cfg.epsilon.len() < 2 {
        return Err(Error::Config(
            "sweep needs at least two epsilon values; use `simulate` for a single one".into(),
        ));
    }
    let edges = curvature_edges(cfg)?;
    let universal = model_bin_density(&edges, 1.0, Normalization::Truncated)?;
    let mut overlay_columns = vec!["bin_lo".to_string(), "bin_hi".to_string(), "universal".to_string()];
    let mut overlay_values: Vec<Vec<f64>> = Vec::new();
    let mut summary = Table::new("sweep", cfg.entries(), &SUMMARY_COLUMNS);
    let mut report = String::new();

    for (i, &eps) in cfg.epsilon.iter().enumerate() {
        let seed = child_seed(cfg.seed, i as u64);
        let result = simulate_one(cfg, eps, seed)?;
        let label = eps_label(eps);
        samples_table(cfg, &result, seed).write(&cfg.out, &format!("samples_{label}"), cfg.format)?;

        let hist = build_histogram(&result.normalized(), &edges)?;
        let density = hist.density(Normalization::Truncated)?;
        let mut table = Table::new("sweep", cfg.entries(), &HISTOGRAM_COLUMNS);
        table.note_float("epsilon", eps);
        table.note("seed", seed);
        table.note("normalization", "truncated");
        table.note("underflow", hist.underflow);
        table.note("overflow", hist.overflow);
        for (b, w) in edges.windows(2).enumerate() {
            table.push(vec![
                w[0].into(),
                w[1].into(),
                hist.counts[b].into(),
                density[b].into(),
                universal[b].into(),
            ]);
        }
        let path = table.write(&cfg.out, &format!("histogram_{label}"), cfg.format)?;

        overlay_columns.push(format!("density_{label}"));
        overlay_values.push(density);
        summary.push(summary_row(&result, seed));
        report.push_str(&summary_line(&result));
        report.push_str(&format!("  wrote {}\n", path.display()));
    }

    let cols: Vec<&str> = overlay_columns.iter().map(String::as_str).collect();
    let mut overlay = Table::new("sweep", cfg.entries(), &cols);
    overlay.note("normalization", "truncated");
    for (b, w) in edges.windows(2).enumerate() {
        let mut row: Vec<Cell> = vec![w[0].into(), w[1].into(), universal[b].into()];
        row.extend(overlay_values.iter().map(|d| Cell::from(d[b])));
        overlay.push(row);
    }
    let p1 = overlay.write(&cfg.out, "overlay", cfg.format)?;
    let p2 = summary.write(&cfg.out, "summary", cfg.format)?;
    report.push_str(&format!("wrote {}\nwrote {}\n", p1.display(), p2.display()));
    Ok(report)
}

pub fn cmd_density(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    let [eps] = cfg.epsilon[..] else {
        return Err(Error::Config("density takes exactly one epsilon value".into()));
    };
    let spec = EnsembleSpec::from_epsilon(cfg.n, cfg.m, eps, cfg.alpha, cfg.seed)?;
    let radius = crate::unfolding::DensityModel::for_ensemble(&spec).radius();
    let edges = match cfg.bins {
        None => uniform_edges(-radius, radius, DEFAULT_DENSITY_BINS)?,
        Some(BinSpec { count, range: None }) => uniform_edges(-radius, radius, count)?,
        Some(BinSpec {
            count,
            range: Some((lo, hi)),
        }) => uniform_edges(lo, hi, count)?,
    };
    let report = with_jobs(cfg.jobs, || density_check(&spec, cfg.realizations, &edges))??;
    let hist = &report.histogram;
    let density = hist.density(Normalization::AllSamples)?;

    let mut table = Table::new("density", cfg.entries(), &HISTOGRAM_COLUMNS);
    table.note_float("epsilon", eps);
    table.note_float("lambda", spec.lambda());
    table.note_float("radius", radius);
    table.note("normalization", "per eigenvalue");
    table.note("eigenvalues", hist.all_samples());
    table.note("underflow", hist.underflow);
    table.note("overflow", hist.overflow);
    table.note_float("outside_support_fraction", report.outside_fraction);
    table.note_float("max_abs_z", report.max_abs_z);
    table.note_float("chi_square_per_bin", report.chi_square_per_bin);
    for (b, w) in edges.windows(2).enumerate() {
        table.push(vec![
            w[0].into(),
            w[1].into(),
            hist.counts[b].into(),
            density[b].into(),
            report.model_density[b].into(),
        ]);
    }
    let label = eps_label(eps);
    let p1 = table.write(&cfg.out, &format!("density_{label}"), cfg.format)?;

    let mut curve = Table::new("density", cfg.entries(), &["E", "rho", "rho_per_level"]);
    curve.note_float("radius", radius);
    for c in hist.centers() {
        let rho = report.model.mean_density(c);
        curve.push(vec![c.into(), rho.into(), (rho / cfg.n as f64).into()]);
    }
    let p2 = curve.write(&cfg.out, &format!("semicircle_{label}"), cfg.format)?;

    Ok(format!(
        "epsilon {eps}  lambda {:.5}  radius {:.4}  eigenvalues {}\n  chi2/bin {:.3}  max |z| {:.2}  outside support {:.4}%\nwrote {}\nwrote {}\n",
        spec.lambda(),
        radius,
        hist.all_samples(),
        report.chi_square_per_bin,
        report.max_abs_z,
        100.0 * report.outside_fraction,
        p1.display(),
        p2.display()
    ))
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Reads one value per line (`Samples`) or `K, density` pairs (`Binned`).
/// Blank lines and `#` comments are skipped, as is a non-numeric header on
/// the first data line.
pub fn read_fit_input(path: &Path, kind: InputKind) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let expected = match kind {
        InputKind::Samples => 1,
        InputKind::Binned => 2,
    };
    let mut rows = Vec::new();
    let mut first = true;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields = split_fields(line);
        let is_header =
            first && fields.iter().any(|f| f.parse::<f64>().is_err()) && line.chars().any(char::is_alphabetic);
        let was_first = std::mem::replace(&mut first, false);
        if was_first && is_header {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message,
        };
        if fields.len() != expected {
            return Err(err(format!("expected {expected} field(s), found {}", fields.len())));
        }
        let values = fields
            .iter()
            .map(|f| match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(err(format!("invalid number '{f}'"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(rows)
}

/// Loads fit input into a binned density.
pub fn load_binned(cfg: &RunConfig) -> Result<BinnedDensity> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("fit requires --input".into()))?;
    let rows = read_fit_input(input, cfg.input_kind)?;
    match cfg.input_kind {
        InputKind::Samples => {
            let samples: Vec<f64> = rows.into_iter().map(|r| r[0]).collect();
            let hist = build_histogram(&samples, &curvature_edges(cfg)?)?;
            hist.binned_density(Normalization::AllSamples)
        }
        InputKind::Binned => {
            let centers: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            let density: Vec<f64> = rows.iter().map(|r| r[1]).collect();
            BinnedDensity::from_centers(&centers, &density)
        }
    }
}

pub fn fit_report(fit: &DistributionFit) -> String {
    let chi = fit
        .reduced_chi_square
        .map(|c| format!("{c:.4}"))
        .unwrap_or_else(|| "n/a".into());
    format!(
        "gamma = {:.5} ± {:.5}\nobjective (mean squared density residual) = {:.6e}\nreduced chi-square = {chi}\nbins = {}\n",
        fit.gamma, fit.gamma_uncertainty, fit.objective, fit.bins_used
    )
}

pub fn cmd_fit(cfg: &RunConfig, emit_curve: bool) -> Result<String> {
    let data = load_binned(cfg)?;
    let fit = fit_gamma(&data)?;
    let mut report = fit_report(&fit);
    if emit_curve {
        let fitted = model_bin_density(&data.edges, fit.gamma, data.normalization)?;
        let universal = model_bin_density(&data.edges, 1.0, data.normalization)?;
        let mut table = Table::new(
            "fit",
            cfg.entries(),
            &["bin_lo", "bin_hi", "density", "fitted_density", "universal_density"],
        );
        table.note_float("gamma", fit.gamma);
        table.note_float("gamma_uncertainty", fit.gamma_uncertainty);
        table.note_float("objective", fit.objective);
        table.note(
            "reduced_chi_square",
            fit.reduced_chi_square.map(format_float).unwrap_or_else(|| "n/a".into()),
        );
        for (b, w) in data.edges.windows(2).enumerate() {
            table.push(vec![
                w[0].into(),
                w[1].into(),
                data.density[b].into(),
                fitted[b].into(),
                universal[b].into(),
            ]);
        }
        let path = table.write(&cfg.out, "fit_curve", cfg.format)?;
        report.push_str(&format!("wrote {}\n", path.display()));
    }
    Ok(report)
}
