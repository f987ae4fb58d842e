//! Command-line flags, the optional TOML config file, and their merge into a
//! [`RunConfig`]. Flags win over the file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// IV, ISB and MISE over a bandwidth grid.
    MiseCurve,
    /// Globally optimal bandwidth for each sample size.
    OptimalBandwidth,
    /// Optimal bandwidth and relative efficiency across sample sizes.
    EfficiencyCurve,
    /// Bandwidth sequence and efficiency of both superkernels on JdlVP.
    Figure2,
    /// Efficiency of the normal and sinc kernels on the standard normal.
    Figure3,
    /// Exact MISE against Monte Carlo estimates.
    McValidate,
    /// Analytic constants with quadrature cross-checks.
    Constants,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
pub enum Format {
    #[value(name = "csv")]
    #[serde(rename = "csv")]
    Csv,
    #[value(name = "csv+svg")]
    #[serde(rename = "csv+svg")]
    CsvSvg,
}

impl Format {
    pub fn with_svg(self) -> bool {
        self == Format::CsvSvg
    }
}

/// Linear bandwidth grid `min, …, max` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl HGrid {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self, CliError> {
        if count == 0 {
            return Err(CliError::Usage("the h-grid is empty (count must be at least 1)".into()));
        }
        if !(min.is_finite() && max.is_finite() && min >= 0.0 && max >= min) {
            return Err(CliError::Usage(format!(
                "the h-grid needs 0 <= min <= max, got min = {min}, max = {max}"
            )));
        }
        Ok(Self { min, max, count })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.max } else { self.min + step * i as f64 })
            .collect()
    }
}

impl FromStr for HGrid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("h-grid must look like MIN:MAX:COUNT, got {s:?}"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [min, max, count] = parts[..] else {
            return Err(bad());
        };
        let min: f64 = min.parse().map_err(|_| bad())?;
        let max: f64 = max.parse().map_err(|_| bad())?;
        let count: usize = count.parse().map_err(|_| bad())?;
        HGrid::new(min, max, count)
    }
}

impl fmt::Display for HGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.count)
    }
}

/// Parses `"100,1000,1e6"`. Scientific notation is accepted as long as the
/// value is a positive integer.
pub fn parse_n_list(s: &str) -> Result<Vec<usize>, CliError> {
    let list: Vec<usize> = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(parse_n)
        .collect::<Result<_, _>>()?;
    if list.is_empty() {
        return Err(CliError::Usage("the n list is empty".into()));
    }
    Ok(list)
}

fn parse_n(s: &str) -> Result<usize, CliError> {
    let bad = || CliError::Usage(format!("sample sizes must be positive integers, got {s:?}"));
    if let Ok(n) = s.parse::<usize>() {
        return if n == 0 { Err(bad()) } else { Ok(n) };
    }
    let v: f64 = s.parse().map_err(|_| bad())?;
    if v >= 1.0 && v.fract() == 0.0 && v <= 1e15 {
        Ok(v as usize)
    } else {
        Err(bad())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cdf-mise",
    version,
    about = "Exact and Monte Carlo MISE of kernel distribution function estimators",
    after_help = "Exit codes: 0 success, 1 usage or configuration error, 2 validation failure."
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Target distribution: jdlvp or normal:sigma=<v>, optionally with ,scale=<a>.
    #[arg(long)]
    pub dist: Option<String>,
    /// Kernel: normal, trapezoidal or sinc.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Comma-separated sample sizes.
    #[arg(long, value_name = "LIST")]
    pub n: Option<String>,
    /// Bandwidth grid for mise-curve and mc-validate.
    #[arg(long = "h-grid", value_name = "MIN:MAX:COUNT")]
    pub h_grid: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo replications per cell (at least 100).
    #[arg(long)]
    pub reps: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// TOML file with any of the options above; flags take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

/// Sample sizes in a config file, as an array or the flag's string form.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum NListValue {
    List(Vec<u64>),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    dist: Option<String>,
    kernel: Option<String>,
    n: Option<NListValue>,
    h_grid: Option<String>,
    seed: Option<u64>,
    reps: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

pub const DEFAULT_SEED: u64 = 20_240_917;
pub const DEFAULT_REPS: usize = 2000;
pub const MIN_REPS: usize = 100;

/// Fully merged settings. Unset optional fields fall back to per-command
/// defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub dist_spec: Option<String>,
    pub kernel_spec: Option<String>,
    pub n_list: Option<Vec<usize>>,
    pub h_grid: Option<HGrid>,
    pub seed: u64,
    pub reps: usize,
    pub output_dir: PathBuf,
    pub format: Format,
}

impl RunConfig {
    /// Defaults for `command` with nothing overridden.
    pub fn new(command: Command) -> Self {
        Self {
            command,
            dist_spec: None,
            kernel_spec: None,
            n_list: None,
            h_grid: None,
            seed: DEFAULT_SEED,
            reps: DEFAULT_REPS,
            output_dir: PathBuf::from("out"),
            format: Format::CsvSvg,
        }
    }

    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };
        let n_text = match (cli.n, file.n) {
            (Some(s), _) => Some(s),
            (None, Some(NListValue::Text(s))) => Some(s),
            (None, Some(NListValue::List(v))) => {
                Some(v.iter().map(u64::to_string).collect::<Vec<_>>().join(","))
            }
            (None, None) => None,
        };
        let defaults = RunConfig::new(cli.command);
        Ok(Self {
            command: cli.command,
            dist_spec: cli.dist.or(file.dist),
            kernel_spec: cli.kernel.or(file.kernel),
            n_list: n_text.as_deref().map(parse_n_list).transpose()?,
            h_grid: cli.h_grid.or(file.h_grid).as_deref().map(str::parse).transpose()?,
            seed: cli.seed.or(file.seed).unwrap_or(defaults.seed),
            reps: cli.reps.or(file.reps).unwrap_or(defaults.reps),
            output_dir: cli.out.or(file.out).unwrap_or(defaults.output_dir),
            format: cli.format.or(file.format).unwrap_or(defaults.format),
        })
    }
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}
