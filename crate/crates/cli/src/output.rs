//! CSV rows and the JSON run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use stbc_ia::metrics::CheckReport;

use crate::config::ExperimentConfig;

/// Bumped whenever a CSV column or manifest field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// One CSV data row. Empty cells mean "not applicable".
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub scheme: String,
    pub constellation: String,
    pub snr_db: Option<f64>,
    pub metric_name: String,
    pub value: f64,
    pub ci_halfwidth: Option<f64>,
    pub trials: u64,
    pub seed: u64,
}

/// Conventions a reader needs to compare these numbers with another
/// implementation.
#[derive(Clone, Debug, Serialize)]
pub struct Conventions {
    pub snr: &'static str,
    pub channel: &'static str,
    pub block_power: &'static str,
    pub mi_formula: &'static str,
    pub mi_normalization: &'static str,
    pub mi_gamma: &'static str,
    pub ber: &'static str,
    pub outage: &'static str,
    pub confidence_intervals: &'static str,
    pub seeding: &'static str,
}

pub const CONVENTIONS: Conventions = Conventions {
    snr: "snr_db = 10 log10 P; noise is unit-variance circular complex Gaussian per receive antenna and channel use; P is the average energy of one transmitted symbol",
    channel: "every link is an independent 2x2 matrix of i.i.d. CN(0,1) entries, redrawn each trial (block fading over the trial); row-vector model Y = X H + W",
    block_power: "each transmitter or base station spends total energy 3P per three-slot block; jash_modified repeats this over two blocks",
    mi_formula: "sum_rate = E[ sum_k log2(1 + P * gamma_k) ] / T, summed over the 8 data symbols of a trial",
    mi_normalization: "T is the number of channel uses per trial: 3, or 6 for jash_modified; the sum rate is in bits per channel use",
    mi_gamma: "gamma_k is the post-receiver SNR of symbol k per unit P under unit noise, from the scheme's own receiver (cancellation and decoupling, or zero-forcing); jash_modified assigns the combined SNR gamma_1 + gamma_2 to both symbols of a pair",
    ber: "bit errors over all 8 symbols of every trial divided by transmitted bits; Gray labeling",
    outage: "P(gamma < eps) over every per-stream SNR sample of each realization (4 combined pairs for jash_modified); snr_db is reported as -10 log10 eps; diversity_order is the least-squares slope of log10 P(gamma < eps) against log10 eps over thresholds with enough events",
    confidence_intervals: "95%: Wilson score interval for BER and outage probabilities, normal approximation for sum rates",
    seeding: "trial t of experiment lane L uses ChaCha8 with a key from SplitMix64(seed xor L * 0xD1B54A32D192ED03) and stream t; L is FNV-1a of the experiment label; batches merge in index order, so results do not depend on the worker count",
};

#[derive(Clone, Debug, Serialize)]
pub struct Manifest<'a> {
    pub schema_version: u32,
    pub generator: String,
    pub command: &'static str,
    pub config: &'a ExperimentConfig,
    pub conventions: Conventions,
    pub csv_columns: [&'static str; 8],
    pub csv_file: String,
    pub rows: usize,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    /// Channel redraws after conditioning failures, per scheme or check.
    pub resample_counters: &'a BTreeMap<String, u64>,
    pub checks: &'a [CheckReport],
    pub failed_checks: Vec<&'static str>,
    pub details: &'a serde_json::Value,
}

pub const CSV_COLUMNS: [&str; 8] = ["scheme", "constellation", "snr_db", "metric_name", "value", "ci_halfwidth", "trials", "seed"];

/// Rows as CSV text with LF line endings.
pub fn csv_string(rows: &[Row]) -> Result<String, csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("CSV encoding: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON encoding: {0}")]
    Json(#[from] serde_json::Error),
}

fn write_file(path: &Path, text: &str) -> Result<(), OutputError> {
    let io = |source| OutputError::Io { path: path.to_path_buf(), source };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)?;
    Ok(())
}

/// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.json`; returns both paths.
pub fn write_outputs(dir: &Path, stem: &str, rows: &[Row], manifest: &Manifest<'_>) -> Result<(PathBuf, PathBuf), OutputError> {
    fs::create_dir_all(dir).map_err(|source| OutputError::Io { path: dir.to_path_buf(), source })?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_file(&csv_path, &csv_string(rows)?)?;
    let mut json = serde_json::to_string_pretty(manifest)?;
    json.push('\n');
    write_file(&json_path, &json)?;
    Ok((csv_path, json_path))
}
