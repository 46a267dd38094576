//! CSV and JSON output of experiment results.
//!
//! Each curve becomes `<name>.csv` with the columns `param,iteration,mean,std`.
//! `manifest.json` records the resolved configuration, provenance and
//! per-curve summaries. Numbers are written in Rust's shortest round-trip
//! form, so identical results give byte-identical CSV files.

use serde_json::{json, Value};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::config::config_pairs;
use crate::driver::{mean_std, Curve, ExperimentResult, RunConfig, Termination};

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "param,iteration,mean,std";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
#[error("{}: {source}", path.display())]
pub struct ReportError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

/// Provenance recorded in the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct RunInfo {
    pub command: String,
    pub git_describe: String,
    /// Start time, seconds since the Unix epoch.
    pub started_unix_secs: f64,
    pub wall_clock_secs: f64,
}

/// The CSV text of one curve.
pub fn curve_csv(curve: &Curve) -> String {
    let mut out = String::with_capacity(32 * (curve.points.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in &curve.points {
        let _ = writeln!(out, "{},{},{},{}", p.param, p.iteration, p.mean, p.std);
    }
    out
}

/// File name used for a curve.
pub fn curve_file_name(curve: &Curve) -> String {
    format!("{}.csv", curve.name)
}

fn curve_summary(curve: &Curve) -> Value {
    let finals: Vec<f64> = curve
        .runs
        .iter()
        .map(|r| r.trace.final_objective())
        .collect();
    let initials: Vec<f64> = curve
        .runs
        .iter()
        .map(|r| r.trace.initial_objective())
        .collect();
    let gains: Vec<f64> = curve
        .runs
        .iter()
        .map(|r| r.trace.final_objective() / r.trace.initial_objective())
        .collect();
    let iterations: Vec<f64> = curve
        .runs
        .iter()
        .map(|r| r.trace.iterations() as f64)
        .collect();
    let converged = curve
        .runs
        .iter()
        .filter(|r| r.trace.termination == Termination::Converged)
        .count();
    let (final_mean, final_std) = mean_std(&finals);
    let (initial_mean, _) = mean_std(&initials);
    let (gain_mean, gain_std) = mean_std(&gains);
    let (iter_mean, _) = mean_std(&iterations);
    json!({
        "name": curve.name,
        "file": curve_file_name(curve),
        "rows": curve.points.len(),
        "runs": curve.runs.len(),
        "converged_runs": converged,
        "hit_cap_runs": curve.runs.len() - converged,
        "mean_iterations": finite_or_null(iter_mean),
        "mean_initial_objective": finite_or_null(initial_mean),
        "mean_final_objective": finite_or_null(final_mean),
        "std_final_objective": finite_or_null(final_std),
        "mean_gain_vs_iteration0": finite_or_null(gain_mean),
        "std_gain_vs_iteration0": finite_or_null(gain_std),
    })
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// The manifest document.
pub fn manifest(result: Option<&ExperimentResult>, cfg: &RunConfig, info: &RunInfo) -> Value {
    let config: serde_json::Map<String, Value> = config_pairs(cfg)
        .into_iter()
        .map(|(k, v)| (k.to_string(), Value::String(v)))
        .collect();
    let (kind, realizations, curves) = match result {
        Some(r) => (
            json!(r.kind.as_str()),
            json!(r.num_realizations),
            r.curves.iter().map(curve_summary).collect(),
        ),
        None => (Value::Null, Value::Null, Vec::new()),
    };
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": info.command,
        "experiment": kind,
        "seed": cfg.seed.0,
        "git_describe": info.git_describe,
        "started_unix_secs": info.started_unix_secs,
        "wall_clock_secs": info.wall_clock_secs,
        "num_realizations": realizations,
        "config": config,
        "curves": curves,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), ReportError> {
    fs::write(path, contents).map_err(|source| ReportError {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes one CSV per curve plus `manifest.json` into `dir` (created if
/// needed). Returns the paths written, manifest last.
pub fn emit_results(
    result: Option<&ExperimentResult>,
    cfg: &RunConfig,
    info: &RunInfo,
    dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir).map_err(|source| ReportError {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for curve in result.map(|r| r.curves.as_slice()).unwrap_or_default() {
        let path = dir.join(curve_file_name(curve));
        write(&path, &curve_csv(curve))?;
        written.push(path);
    }
    let path = dir.join(MANIFEST_FILE);
    let mut text =
        serde_json::to_string_pretty(&manifest(result, cfg, info)).expect("manifest is plain JSON");
    text.push('\n');
    write(&path, &text)?;
    written.push(path);
    Ok(written)
}
