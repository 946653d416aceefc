//! Command-line flags. Every flag of a subcommand can also be given in its
//! `--config` TOML file under the same name with dashes turned into
//! underscores; flags win over the file.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "mstphase", version, about = "Phase analysis of correlation-network minimal spanning trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan a price panel with rolling windows.
    Scan(ScanArgs),
    /// Build and export the tree of a single window.
    Tree(TreeArgs),
    /// Label the windows of a scan and list phase transitions.
    Classify(ClassifyArgs),
    /// Write a text report from a scan and its phases.
    Report(ReportArgs),
    /// Generate a synthetic price panel.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanArgs {
    /// Price file with `date,ticker,close` columns.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Window width in trading days.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    /// Step between window starts in trading days.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    /// Remove the cross-sectional mean return each day (default on).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detrend: Option<bool>,
    #[arg(long, conflicts_with = "detrend")]
    #[serde(skip)]
    pub no_detrend: bool,
    /// Ticker used as the fixed center of `mol_static`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub static_center: Option<String>,
    /// Comma-separated tickers left out of every window.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclude: Option<Vec<String>>,
    /// Longest run of missing quotes a ticker may have inside a window.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_limit: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_lo: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_hi: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_gap: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_tail: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_hub: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_min: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_err_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_smooth: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coincidence_tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Also write the edge list of every window's tree under `trees/`.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dump_trees: Option<bool>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// First trading day of the window.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<NaiveDate>,
    /// Window length in trading days.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detrend: Option<bool>,
    #[arg(long, conflicts_with = "detrend")]
    #[serde(skip)]
    pub no_detrend: bool,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub static_center: Option<String>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclude: Option<Vec<String>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_limit: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_lo: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_hi: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyArgs {
    /// `series.json` written by `scan`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_gap: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_tail: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_hub: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_min: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_err_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_smooth: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<PathBuf>,
    /// `phases.json` written by `classify`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phases: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthArgs {
    /// Scenario TOML with a `[market]` table and `[[injections]]`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_assets: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_days: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_idio: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_market: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_lo: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_hi: Option<f64>,
    /// Asset index of an added superhub.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inject_target: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inject_start: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inject_end: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inject_rho: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inject_breadth: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Overlays the flags that were given on top of the config file.
pub fn with_config<T>(flags: &T, config: Option<&Path>) -> CliResult<T>
where
    T: Serialize + DeserializeOwned + Default,
{
    let file: T = match config {
        None => T::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?
        }
    };
    let to_value = |v: &T| serde_json::to_value(v).map_err(|e| CliError::Internal(e.to_string()));
    let mut merged = to_value(&file)?;
    if let (Some(base), serde_json::Value::Object(over)) = (merged.as_object_mut(), to_value(flags)?) {
        base.extend(over);
    }
    serde_json::from_value(merged).map_err(|e| CliError::Internal(e.to_string()))
}

pub fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing required --{flag} (flag or config key)")))
}
