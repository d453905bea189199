//! Command implementations behind the `mmlink` binary.
//!
//! Exit codes: 0 success, 1 I/O or input-data errors, 2 configuration or
//! validation errors.

pub mod plot;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use mmlink::montecarlo::{self, records_to_csv, SweepSpec};
use mmlink::pilots::build_pilot_grid;
use mmlink::{BandConfig, Error, SimConfig};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidConfig(_)
            | Error::Config(_)
            | Error::Parse(_)
            | Error::InvalidArgument(_)
            | Error::NoDataSymbols { .. } => 2,
            _ => 1,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Where a sweep comes from.
#[derive(Debug, Clone, Default)]
pub struct SpecSource {
    pub config: Option<PathBuf>,
    pub preset: Option<String>,
    pub overrides: Vec<(String, String)>,
    pub seed: Option<u64>,
}

pub fn parse_override(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    if k.trim().is_empty() {
        return Err(format!("empty key in `{s}`"));
    }
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Resolves the sweep: config file or preset (default: the scaled defaults
/// as a single point), then `--set` overrides in order, then `--seed`.
pub fn load_spec(src: &SpecSource) -> CliResult<SweepSpec> {
    let mut spec = match (&src.config, &src.preset) {
        (Some(_), Some(_)) => return Err(CliError::validation("--config and --preset are mutually exclusive")),
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
            SweepSpec::from_toml_str(&text)?
        }
        (None, Some(name)) => montecarlo::preset(name)?,
        (None, None) => SweepSpec::single(SimConfig::scaled()),
    };
    for (k, v) in &src.overrides {
        spec = spec.with_override(k, v)?;
    }
    if let Some(seed) = src.seed {
        spec.base.master_seed = seed;
    }
    Ok(spec)
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult<Option<String>> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
            Ok(None)
        }
        None => Ok(Some(text.to_string())),
    }
}

/// Runs the sweep and returns the CSV when no output file is given.
pub fn cmd_run(src: &SpecSource, workers: usize, out: Option<&Path>) -> CliResult<Option<String>> {
    let spec = load_spec(src)?;
    spec.validate()?;
    let records = montecarlo::run_sweep(&spec, workers)?;
    write_output(out, &records_to_csv(&records))
}

/// Checks the sweep and returns a one-line summary.
pub fn cmd_validate(src: &SpecSource) -> CliResult<String> {
    let spec = load_spec(src)?;
    spec.validate()?;
    Ok(format!(
        "ok: {} sweep point(s), {} realization(s) each",
        spec.points().len(),
        spec.base.n_realizations
    ))
}

pub fn cmd_plot(input: &Path, x: Option<&str>, out: Option<&Path>) -> CliResult<Option<String>> {
    let text = fs::read_to_string(input).map_err(|e| CliError::io(format!("cannot read {}: {e}", input.display())))?;
    let column = match x {
        Some(c) => c.to_string(),
        None => plot::default_x_column(&text).map_err(|e| CliError::io(format!("{e:#}")))?,
    };
    let spec = plot::PlotSpec::for_column(&column);
    let series = plot::build_series(&text, &spec).map_err(|e| CliError::io(format!("{e:#}")))?;
    let svg = plot::render_svg(&series, &spec).map_err(|e| CliError::io(format!("{e:#}")))?;
    write_output(out, &svg)
}

/// Pilot layout CSV for an `m_tx × m_tx` array (or `m_rx` receive antennas)
/// over `n` subcarriers.
pub fn cmd_pilots(m_tx: usize, m_rx: Option<usize>, k_p: usize, n: usize, seed: u64) -> CliResult<String> {
    let mut band = BandConfig::mmw_table1().with_subcarriers(n);
    band.m_tx = m_tx;
    band.m_rx = m_rx.unwrap_or(m_tx);
    if m_tx == 0 || band.m_rx == 0 || n == 0 {
        return Err(CliError::validation("m_tx, m_rx and n must be >= 1"));
    }
    Ok(build_pilot_grid(&band, k_p, seed)?.to_csv())
}
