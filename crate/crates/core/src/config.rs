//! Run configuration: defaults, `key = value` config files, and flag overrides.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Default ε values of a sweep, from decoupled blocks to the full GOE at N = 100.
pub const DEFAULT_SWEEP: [f64; 5] = [0.0, 0.32, 1.0, 3.2, 10.0];
/// Coupling used by `density` when none is given.
pub const DEFAULT_DENSITY_EPSILON: f64 = 0.32;
pub const DEFAULT_CURVATURE_BINS: (usize, f64, f64) = (41, -5.0, 5.0);
pub const DEFAULT_DENSITY_BINS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format '{other}' (csv or json)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    /// One curvature per line.
    Samples,
    /// `K, density` pairs at bin centres.
    Binned,
}

impl std::str::FromStr for InputKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "samples" => Ok(InputKind::Samples),
            "binned" => Ok(InputKind::Binned),
            other => Err(Error::Config(format!(
                "unknown input kind '{other}' (samples or binned)"
            ))),
        }
    }
}

/// `COUNT` or `COUNT:LO:HI`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BinSpec {
    pub count: usize,
    pub range: Option<(f64, f64)>,
}

impl std::str::FromStr for BinSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || Error::Config(format!("invalid bin spec '{s}' (COUNT or COUNT:LO:HI)"));
        let count: usize = parts[0].parse().map_err(|_| bad())?;
        if count < 1 {
            return Err(bad());
        }
        let range = match parts.len() {
            1 => None,
            3 => {
                let lo: f64 = parts[1].parse().map_err(|_| bad())?;
                let hi: f64 = parts[2].parse().map_err(|_| bad())?;
                if !(hi > lo) {
                    return Err(bad());
                }
                Some((lo, hi))
            }
            _ => return Err(bad()),
        };
        Ok(BinSpec { count, range })
    }
}

impl std::fmt::Display for BinSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.range {
            None => write!(f, "{}", self.count),
            Some((lo, hi)) => write!(f, "{}:{}:{}", self.count, lo, hi),
        }
    }
}

/// Unresolved settings; every field is optional so that a config file and
/// command-line flags can be layered.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub alpha: Option<f64>,
    pub epsilon: Option<Vec<f64>>,
    pub realizations: Option<usize>,
    pub t_samples: Option<usize>,
    pub seed: Option<u64>,
    pub window: Option<f64>,
    pub bins: Option<BinSpec>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
    pub input: Option<PathBuf>,
    pub input_kind: Option<InputKind>,
}

pub fn parse_epsilon_list(s: &str) -> Result<Vec<f64>> {
    let values = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| Error::Config(format!("invalid epsilon value '{p}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::Config("empty epsilon list".into()));
    }
    Ok(values)
}

impl Settings {
    /// Reads a `key = value` file. `#` starts a comment; keys match the long
    /// flag names (`t-samples` and `t_samples` are both accepted).
    pub fn from_file(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Settings::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Settings> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: origin.to_string(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected key = value, got '{line}'")))?;
            let key = key.trim().replace('_', "-");
            let value = value.trim();
            fn num<T: std::str::FromStr>(value: &str) -> std::result::Result<T, ()> {
                value.parse().map_err(|_| ())
            }
            let num_err = |()| parse_err(format!("invalid value '{value}' for {key}"));
            let wrap = |e: Error| parse_err(e.to_string());
            match key.as_str() {
                "n" => s.n = Some(num(value).map_err(num_err)?),
                "m" => s.m = Some(num(value).map_err(num_err)?),
                "alpha" => s.alpha = Some(num(value).map_err(num_err)?),
                "epsilon" => s.epsilon = Some(parse_epsilon_list(value).map_err(wrap)?),
                "realizations" => s.realizations = Some(num(value).map_err(num_err)?),
                "t-samples" => s.t_samples = Some(num(value).map_err(num_err)?),
                "seed" => s.seed = Some(num(value).map_err(num_err)?),
                "window" => s.window = Some(num(value).map_err(num_err)?),
                "bins" => s.bins = Some(value.parse().map_err(wrap)?),
                "out" => s.out = Some(PathBuf::from(value)),
                "format" => s.format = Some(value.parse().map_err(wrap)?),
                "jobs" => s.jobs = Some(num(value).map_err(num_err)?),
                "input" => s.input = Some(PathBuf::from(value)),
                "input-kind" => s.input_kind = Some(value.parse().map_err(wrap)?),
                other => return Err(parse_err(format!("unknown key '{other}'"))),
            }
        }
        Ok(s)
    }

    /// Values set in `over` replace those in `self`.
    pub fn overlay(self, over: Settings) -> Settings {
        Settings {
            n: over.n.or(self.n),
            m: over.m.or(self.m),
            alpha: over.alpha.or(self.alpha),
            epsilon: over.epsilon.or(self.epsilon),
            realizations: over.realizations.or(self.realizations),
            t_samples: over.t_samples.or(self.t_samples),
            seed: over.seed.or(self.seed),
            window: over.window.or(self.window),
            bins: over.bins.or(self.bins),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
            jobs: over.jobs.or(self.jobs),
            input: over.input.or(self.input),
            input_kind: over.input_kind.or(self.input_kind),
        }
    }

    pub fn resolve(self, default_epsilon: &[f64]) -> Result<RunConfig> {
        let n = self.n.unwrap_or(100);
        let cfg = RunConfig {
            n,
            m: self.m.unwrap_or(n / 2),
            alpha: self.alpha.unwrap_or(crate::ensemble::DEFAULT_ALPHA),
            epsilon: self.epsilon.unwrap_or_else(|| default_epsilon.to_vec()),
            realizations: self.realizations.unwrap_or(200),
            t_samples: self.t_samples.unwrap_or(crate::pipeline::DEFAULT_T_SAMPLES),
            seed: self.seed.unwrap_or(0),
            window_fraction: self.window.unwrap_or(crate::unfolding::DEFAULT_WINDOW_FRACTION),
            bins: self.bins,
            out: self.out.unwrap_or_else(|| PathBuf::from(".")),
            format: self.format.unwrap_or(Format::Csv),
            jobs: self.jobs,
            input: self.input,
            input_kind: self.input_kind.unwrap_or(InputKind::Samples),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RunConfig {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub epsilon: Vec<f64>,
    pub realizations: usize,
    pub t_samples: usize,
    pub seed: u64,
    pub window_fraction: f64,
    pub bins: Option<BinSpec>,
    pub out: PathBuf,
    pub format: Format,
    pub jobs: Option<usize>,
    pub input: Option<PathBuf>,
    pub input_kind: InputKind,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for &eps in &self.epsilon {
            crate::ensemble::EnsembleSpec::from_epsilon(self.n, self.m, eps, self.alpha, self.seed)?;
        }
        if self.realizations < 1 {
            return Err(Error::Config("realizations must be >= 1".into()));
        }
        if self.t_samples < 1 {
            return Err(Error::Config("t-samples must be >= 1".into()));
        }
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return Err(Error::Config(format!("window {} outside (0, 1]", self.window_fraction)));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be >= 1".into()));
        }
        Ok(())
    }

    /// `(key, value)` pairs describing the configuration, for file headers.
    pub fn entries(&self) -> Vec<(String, String)> {
        let eps: Vec<String> = self.epsilon.iter().map(|e| e.to_string()).collect();
        let mut out = vec![
            ("n".to_string(), self.n.to_string()),
            ("m".to_string(), self.m.to_string()),
            ("alpha".to_string(), self.alpha.to_string()),
            ("epsilon".to_string(), eps.join(",")),
            ("realizations".to_string(), self.realizations.to_string()),
            ("t-samples".to_string(), self.t_samples.to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("window".to_string(), self.window_fraction.to_string()),
        ];
        if let Some(b) = self.bins {
            out.push(("bins".to_string(), b.to_string()));
        }
        if let Some(input) = &self.input {
            out.push(("input".to_string(), input.display().to_string()));
            out.push((
                "input-kind".to_string(),
                format!("{:?}", self.input_kind).to_lowercase(),
            ));
        }
        out
    }
}
