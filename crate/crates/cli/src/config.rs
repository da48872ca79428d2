//! Command-line and JSON-file configuration, merged and validated into a
//! [`RunConfig`].

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use spacings::entropy::EntropySpec;
use spacings::{ScoreFunction, WeightFunction};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "spacings",
    version,
    about = "Rate functions, simulation and entropy estimators for weighted exponential spacings"
)]
pub struct Cli {
    /// JSON configuration file. Flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// Weight: w1, w2, w3, poly:<beta>, fgce:<alpha>, fcre:<q> or score:<name>.
    #[arg(long)]
    pub weight: Option<String>,
    /// Rate λ of the exponential parent.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for the JSON summary and CSV/TSV files.
    #[arg(long, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
    /// Worker threads for Monte Carlo loops. Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the regularity conditions and steepness of a weight.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate Λ_w and its derivatives, Λ_w* and the relative-entropy bound.
    Rate {
        #[command(flatten)]
        common: Common,
        /// θ values for the Λ_w table (comma separated).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
        /// y values for the Λ_w* table (comma separated).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y_grid: Option<Vec<f64>>,
    },
    /// Draw replicates of C_n(w), optionally under an exponential tilt.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        replicates: Option<usize>,
        /// Tilt θ; draws then carry log likelihood ratios.
        #[arg(long, allow_hyphen_values = true)]
        tilt: Option<f64>,
    },
    /// Importance-sampling check of the large-deviation rate.
    VerifyLdp {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y_grid: Option<Vec<f64>>,
        #[arg(long)]
        replicates: Option<usize>,
    },
    /// Check of the moderate-deviation rate with a_n = n^(-rho).
    VerifyMdp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y_grid: Option<Vec<f64>>,
        #[arg(long)]
        replicates: Option<usize>,
    },
    /// Normal approximation of sqrt(n)(C_n − E C_n).
    Clt {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        replicates: Option<usize>,
    },
    /// Empirical cumulative entropy of a data file.
    Entropy {
        #[command(flatten)]
        common: Common,
        /// Plain text (one value per line) or CSV file.
        #[arg(long, value_name = "FILE")]
        input: Option<PathBuf>,
        /// CSV column holding the sample; without it the file is read as
        /// one value per line.
        #[arg(long)]
        column: Option<String>,
        /// ce, fgce:<alpha> or fcre:<q>.
        #[arg(long)]
        kind: Option<String>,
    },
    /// Compare the L-statistic mean and variance of a score with μ_w, σ_w².
    Bridge {
        #[command(flatten)]
        common: Common,
        /// Score: ce, indicator, zero or uniform.
        #[arg(long)]
        score: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Rate { .. } => "rate",
            Command::Simulate { .. } => "simulate",
            Command::VerifyLdp { .. } => "verify-ldp",
            Command::VerifyMdp { .. } => "verify-mdp",
            Command::Clt { .. } => "clt",
            Command::Entropy { .. } => "entropy",
            Command::Bridge { .. } => "bridge",
        }
    }
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub weight: Option<String>,
    pub lambda: Option<f64>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub theta: Option<Vec<f64>>,
    pub y_grid: Option<Vec<f64>>,
    pub n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub replicates: Option<usize>,
    pub tilt: Option<f64>,
    pub rho: Option<f64>,
    pub input: Option<PathBuf>,
    pub column: Option<String>,
    pub kind: Option<String>,
    pub score: Option<String>,
    pub tol: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config file {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("invalid config file {}: {e}", path.display())))
    }
}

/// Fully resolved settings, embedded in every report. The thread count is
/// left out on purpose: reports must not depend on it.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub weight: String,
    pub lambda: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub threads: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tilt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl RunConfig {
    /// Merges flags over the file, fills defaults and validates every
    /// parameter the command uses.
    pub fn resolve(command: &Command, file: FileConfig) -> Result<Self, CliError> {
        let f = file;
        let common = match command {
            Command::Check { common }
            | Command::Rate { common, .. }
            | Command::Simulate { common, .. }
            | Command::VerifyLdp { common, .. }
            | Command::VerifyMdp { common, .. }
            | Command::Clt { common, .. }
            | Command::Entropy { common, .. }
            | Command::Bridge { common, .. } => common,
        };
        let mut cfg = RunConfig {
            command: command.name().to_string(),
            weight: common.weight.clone().or(f.weight).unwrap_or_else(|| "w1".into()),
            lambda: common.lambda.or(f.lambda).unwrap_or(1.0),
            seed: common.seed.or(f.seed).unwrap_or(1),
            output_dir: common.output_dir.clone().or(f.output_dir).unwrap_or_else(|| PathBuf::from(".")),
            threads: common.threads.or(f.threads).unwrap_or_else(default_threads),
            theta: None,
            y_grid: None,
            n: None,
            n_list: None,
            replicates: None,
            tilt: None,
            rho: None,
            input: None,
            column: None,
            kind: None,
            score: None,
            tol: None,
        };
        match command {
            Command::Check { .. } => {}
            Command::Rate { theta, y_grid, .. } => {
                cfg.theta = theta.clone().or(f.theta);
                cfg.y_grid = y_grid.clone().or(f.y_grid);
            }
            Command::Simulate { n, replicates, tilt, .. } => {
                cfg.n = Some(n.or(f.n).unwrap_or(100));
                cfg.replicates = Some(replicates.or(f.replicates).unwrap_or(1000));
                cfg.tilt = tilt.or(f.tilt);
            }
            Command::VerifyLdp { n_list, y_grid, replicates, .. } => {
                cfg.n_list = Some(n_list.clone().or(f.n_list).unwrap_or_else(|| vec![50, 100, 200]));
                cfg.y_grid = Some(
                    y_grid
                        .clone()
                        .or(f.y_grid)
                        .ok_or_else(|| invalid("verify-ldp needs --y-grid"))?,
                );
                cfg.replicates = Some(replicates.or(f.replicates).unwrap_or(10_000));
            }
            Command::VerifyMdp { rho, n_list, y_grid, replicates, .. } => {
                cfg.rho = Some(rho.or(f.rho).unwrap_or(0.5));
                cfg.n_list = Some(n_list.clone().or(f.n_list).unwrap_or_else(|| vec![100, 1000, 10_000]));
                cfg.y_grid = Some(y_grid.clone().or(f.y_grid).unwrap_or_else(|| vec![0.0, 1.0]));
                cfg.replicates = Some(replicates.or(f.replicates).unwrap_or(10_000));
            }
            Command::Clt { n, replicates, .. } => {
                cfg.n = Some(n.or(f.n).unwrap_or(1000));
                cfg.replicates = Some(replicates.or(f.replicates).unwrap_or(10_000));
            }
            Command::Entropy { input, column, kind, .. } => {
                cfg.input = Some(
                    input
                        .clone()
                        .or(f.input)
                        .ok_or_else(|| invalid("entropy needs --input"))?,
                );
                cfg.column = column.clone().or(f.column);
                cfg.kind = Some(kind.clone().or(f.kind).unwrap_or_else(|| "ce".into()));
            }
            Command::Bridge { score, tol, .. } => {
                cfg.score = Some(score.clone().or(f.score).unwrap_or_else(|| "ce".into()));
                cfg.tol = Some(tol.or(f.tol).unwrap_or(1e-5));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(invalid(format!("--lambda must be positive and finite, got {}", self.lambda)));
        }
        if self.threads == 0 {
            return Err(invalid("--threads must be at least 1"));
        }
        self.weight_function()?;
        if self.n == Some(0) {
            return Err(invalid("--n must be at least 1"));
        }
        if self.replicates == Some(0) {
            return Err(invalid("--replicates must be at least 1"));
        }
        if let Some(list) = &self.n_list {
            if list.is_empty() || list.contains(&0) {
                return Err(invalid("--n-list must be a nonempty list of positive integers"));
            }
        }
        for (name, list) in [("--y-grid", &self.y_grid), ("--theta", &self.theta)] {
            if let Some(list) = list {
                if list.is_empty() || list.iter().any(|v| !v.is_finite()) {
                    return Err(invalid(format!("{name} must be a nonempty list of finite numbers")));
                }
            }
        }
        if let Some(t) = self.tilt {
            if !t.is_finite() {
                return Err(invalid("--tilt must be finite"));
            }
        }
        if let Some(rho) = self.rho {
            if !(rho > 0.0 && rho < 1.0) {
                return Err(invalid(format!("--rho must lie strictly between 0 and 1, got {rho}")));
            }
        }
        if let Some(kind) = &self.kind {
            EntropySpec::parse(kind).map_err(|e| invalid(e.to_string()))?;
        }
        if let Some(score) = &self.score {
            ScoreFunction::builtin(score).map_err(|e| invalid(e.to_string()))?;
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(invalid(format!("--tol must be positive, got {tol}")));
            }
        }
        Ok(())
    }

    pub fn weight_function(&self) -> Result<WeightFunction, CliError> {
        WeightFunction::parse(&self.weight).map_err(|e| invalid(e.to_string()))
    }
}
