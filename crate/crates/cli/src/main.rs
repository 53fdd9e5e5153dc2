use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use stbc_ia::jash::JashPower;
use stbc_ia::{Constellation, Executor, SchemeId};
use stbc_ia_cli::output::{Manifest, CONVENTIONS, CSV_COLUMNS};
use stbc_ia_cli::{run, write_outputs, Command, ExperimentConfig, Overrides, OUTPUT_DIR_ENV, SCHEMA_VERSION};

/// Monte Carlo simulator for Alamouti-embedded interference alignment.
///
/// Values come from the optional TOML file, then the output-directory
/// environment variable, then the flags below. Results go to
/// <output-dir>/<name>.csv with a <name>.json manifest next to it.
#[derive(Parser, Debug)]
#[command(version, about, long_about, after_help = format!("Environment:\n  {OUTPUT_DIR_ENV}  replaces output.dir from the file (the --output-dir flag still wins)"))]
struct Cli {
    /// What to run; may instead be given as `command` in the file.
    #[arg(value_enum)]
    command: Option<Command>,
    /// TOML configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores, 1 = sequential).
    #[arg(short, long)]
    workers: Option<usize>,
    /// Comma-separated scheme ids.
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme)]
    schemes: Option<Vec<SchemeId>>,
    /// Comma-separated constellations: BPSK, QPSK, PSK16, QAM16.
    #[arg(long, value_delimiter = ',', value_parser = parse_constellation)]
    constellation: Option<Vec<Constellation>>,
    /// First SNR point in dB.
    #[arg(long, allow_negative_numbers = true)]
    snr_start: Option<f64>,
    /// Last SNR point in dB (inclusive).
    #[arg(long, allow_negative_numbers = true)]
    snr_stop: Option<f64>,
    /// SNR step in dB.
    #[arg(long)]
    snr_step: Option<f64>,
    /// BER: trial cap per SNR point.
    #[arg(long)]
    max_trials: Option<u64>,
    /// BER: stop a point once this many bit errors are counted.
    #[arg(long)]
    target_errors: Option<u64>,
    /// MI: channel realizations.
    #[arg(long)]
    mi_trials: Option<u64>,
    /// Diversity: channel realizations for the outage estimate.
    #[arg(long)]
    realizations: Option<u64>,
    /// Power split of the linear-alignment baseline.
    #[arg(long, value_parser = parse_power)]
    jash_power: Option<JashPower>,
    /// Output directory.
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
    /// Output file stem (default: the command name).
    #[arg(long)]
    name: Option<String>,
    /// Suppress progress lines on stderr.
    #[arg(short, long)]
    quiet: bool,
}

fn parse_scheme(s: &str) -> Result<SchemeId, String> {
    s.parse().map_err(|e: stbc_ia::Error| e.to_string())
}

fn parse_constellation(s: &str) -> Result<Constellation, String> {
    s.parse().map_err(|e: stbc_ia::Error| e.to_string())
}

fn parse_power(s: &str) -> Result<JashPower, String> {
    match s {
        "per_transmitter" => Ok(JashPower::PerTransmitter),
        "per_stream" => Ok(JashPower::PerStream),
        _ => Err(format!("unknown power split `{s}` (per_transmitter or per_stream)")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    let overrides = Overrides {
        command: cli.command,
        seed: cli.seed,
        workers: cli.workers,
        schemes: cli.schemes,
        constellation: cli.constellation,
        snr_start: cli.snr_start,
        snr_stop: cli.snr_stop,
        snr_step: cli.snr_step,
        max_trials: cli.max_trials,
        target_errors: cli.target_errors,
        mi_trials: cli.mi_trials,
        realizations: cli.realizations,
        jash_power: cli.jash_power,
        output_dir: cli.output_dir,
        name: cli.name,
    };
    let cfg = match ExperimentConfig::resolve(cli.config.as_deref(), env_dir, overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cmd = cfg.command.expect("validated");
    let exec = Executor::new(cfg.workers);
    let quiet = cli.quiet;
    let start = Instant::now();
    let result = run(&cfg, &exec, &mut |line| {
        if !quiet {
            eprintln!("{line}");
        }
    });
    let out = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let wall = start.elapsed().as_secs_f64();
    let stem = cfg.stem();
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        generator: format!("stbc-ia {}", env!("CARGO_PKG_VERSION")),
        command: cmd.name(),
        config: &cfg,
        conventions: CONVENTIONS,
        csv_columns: CSV_COLUMNS,
        csv_file: format!("{stem}.csv"),
        rows: out.rows.len(),
        workers: exec.workers(),
        wall_clock_seconds: wall,
        resample_counters: &out.resample_counters,
        checks: &out.checks,
        failed_checks: out.failed_checks(),
        details: &out.details,
    };
    match write_outputs(&cfg.output.dir, &stem, &out.rows, &manifest) {
        Ok((csv, json)) => {
            if !quiet {
                eprintln!("wrote {} and {}", csv.display(), json.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    if cmd == Command::Verify {
        print_table(&out.checks);
        let failed = out.failed_checks();
        if !failed.is_empty() {
            eprintln!("{} check(s) failed: {}", failed.len(), failed.join(", "));
            return ExitCode::FAILURE;
        }
    }
    ExitCode::SUCCESS
}

fn print_table(checks: &[stbc_ia::metrics::CheckReport]) {
    let w = checks.iter().map(|c| c.name.len()).max().unwrap_or(4);
    println!("{:<w$}  {:<4}  {:>14}  {:<22}  {:>9}  detail", "check", "ok", "value", "bound", "trials");
    for c in checks {
        println!(
            "{:<w$}  {:<4}  {:>14.6e}  {:<22}  {:>9}  {}",
            c.name,
            if c.pass { "pass" } else { "FAIL" },
            c.value,
            c.bound,
            c.trials,
            c.detail
        );
    }
}
