//! Experiment configuration: a TOML file, then environment, then flags.
//!
//! Every field has a default, so an empty file is a valid configuration.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use stbc_ia::jash::JashPower;
use stbc_ia::metrics::{snr_grid, VerifyTrials};
use stbc_ia::{Constellation, SchemeId};

/// The only environment variable consulted; it replaces `output.dir`.
pub const OUTPUT_DIR_ENV: &str = "STBC_IA_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: Box<toml::de::Error> },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), message: message.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Ber,
    Mi,
    Diversity,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Ber => "ber",
            Command::Mi => "mi",
            Command::Diversity => "diversity",
            Command::Verify => "verify",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnrGrid {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl Default for SnrGrid {
    fn default() -> Self {
        SnrGrid { start_db: 20.0, stop_db: 40.0, step_db: 2.0 }
    }
}

impl SnrGrid {
    pub fn points(&self) -> Vec<f64> {
        snr_grid(self.start_db, self.stop_db, self.step_db)
    }
}

/// Per-point stopping rule of the BER runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialPolicy {
    pub max_trials: u64,
    pub target_bit_errors: u64,
    /// Trials per work unit; part of the seeding contract together with the
    /// wave schedule, so changing it changes the numbers.
    pub batch: u64,
}

impl Default for TrialPolicy {
    fn default() -> Self {
        TrialPolicy { max_trials: 10_000_000, target_bit_errors: 200, batch: 256 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiSettings {
    pub trials: u64,
}

impl Default for MiSettings {
    fn default() -> Self {
        MiSettings { trials: 100_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiversityMethod {
    /// Slope of the per-stream SNR outage probability.
    Outage,
    /// Slope of the simulated BER curve over `ber_fit_*_db`.
    Ber,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiversitySettings {
    pub method: DiversityMethod,
    /// Channel realizations; every stream SNR of a realization is a sample.
    pub realizations: u64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub eps_points: usize,
    /// Thresholds with fewer outage events are left out of the fit.
    pub min_count: u64,
    /// Fit only the lowest this-many decades of usable thresholds; 0 fits all.
    pub window_decades: f64,
    pub ber_fit_start_db: Option<f64>,
    pub ber_fit_stop_db: Option<f64>,
}

impl Default for DiversitySettings {
    fn default() -> Self {
        DiversitySettings {
            method: DiversityMethod::Outage,
            realizations: 10_000_000,
            eps_min: 1e-5,
            eps_max: 1.0,
            eps_points: 21,
            min_count: 100,
            window_decades: 2.0,
            ber_fit_start_db: None,
            ber_fit_stop_db: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    pub dir: PathBuf,
    /// File stem; defaults to the command name.
    pub name: Option<String>,
    pub format: OutputFormat,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings { dir: PathBuf::from("results"), name: None, format: OutputFormat::Csv }
    }
}

/// One explicit (scheme, constellation) pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Curve {
    pub scheme: SchemeId,
    pub constellation: Constellation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub schemes: Vec<SchemeId>,
    /// One name or a list.
    #[serde(deserialize_with = "one_or_many")]
    pub constellation: Vec<Constellation>,
    /// Explicit pairings for BER runs; when non-empty they replace the
    /// product of `schemes` and `constellation`.
    pub curves: Vec<Curve>,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub jash_power: JashPower,
    pub snr: SnrGrid,
    pub trials: TrialPolicy,
    pub mi: MiSettings,
    pub diversity: DiversitySettings,
    pub verify: VerifyTrials,
    pub output: OutputSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: None,
            schemes: vec![SchemeId::XAlamouti],
            constellation: vec![Constellation::Bpsk],
            curves: Vec::new(),
            seed: 0,
            workers: 0,
            jash_power: JashPower::default(),
            snr: SnrGrid::default(),
            trials: TrialPolicy::default(),
            mi: MiSettings::default(),
            diversity: DiversitySettings::default(),
            verify: VerifyTrials::default(),
            output: OutputSettings::default(),
        }
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Constellation>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(Constellation),
        Many(Vec<Constellation>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(c) => vec![c],
        OneOrMany::Many(v) => v,
    })
}

/// Command-line values that replace file values when present.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub schemes: Option<Vec<SchemeId>>,
    pub constellation: Option<Vec<Constellation>>,
    pub snr_start: Option<f64>,
    pub snr_stop: Option<f64>,
    pub snr_step: Option<f64>,
    pub max_trials: Option<u64>,
    pub target_errors: Option<u64>,
    pub mi_trials: Option<u64>,
    pub realizations: Option<u64>,
    pub jash_power: Option<JashPower>,
    pub output_dir: Option<PathBuf>,
    pub name: Option<String>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), source: Box::new(e) })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read { path: path.to_path_buf(), source: e })?;
        Self::from_toml_str(&text, path)
    }

    /// File (or defaults), then the output-directory variable, then flags;
    /// the result is validated.
    pub fn resolve(file: Option<&Path>, env_output_dir: Option<PathBuf>, o: Overrides) -> Result<Self, ConfigError> {
        let mut c = match file {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        if let Some(d) = env_output_dir {
            c.output.dir = d;
        }
        c.apply(o);
        c.validate()?;
        Ok(c)
    }

    pub fn apply(&mut self, o: Overrides) {
        macro_rules! set {
            ($src:expr => $dst:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        if o.command.is_some() {
            self.command = o.command;
        }
        set!(o.seed => self.seed);
        set!(o.workers => self.workers);
        if o.schemes.is_some() || o.constellation.is_some() {
            self.curves.clear();
        }
        set!(o.schemes => self.schemes);
        set!(o.constellation => self.constellation);
        set!(o.snr_start => self.snr.start_db);
        set!(o.snr_stop => self.snr.stop_db);
        set!(o.snr_step => self.snr.step_db);
        set!(o.max_trials => self.trials.max_trials);
        set!(o.target_errors => self.trials.target_bit_errors);
        set!(o.mi_trials => self.mi.trials);
        set!(o.realizations => self.diversity.realizations);
        set!(o.jash_power => self.jash_power);
        set!(o.output_dir => self.output.dir);
        if o.name.is_some() {
            self.output.name = o.name;
        }
    }

    pub fn command(&self) -> Result<Command, ConfigError> {
        self.command.ok_or_else(|| invalid("command", "missing: give it in the file or on the command line"))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let cmd = self.command()?;
        let s = &self.snr;
        if !(s.start_db.is_finite() && s.stop_db.is_finite()) {
            return Err(invalid("snr", "start_db and stop_db must be finite"));
        }
        if !(s.step_db > 0.0 && s.step_db.is_finite()) {
            return Err(invalid("snr.step_db", format!("must be positive, got {}", s.step_db)));
        }
        if s.stop_db < s.start_db {
            return Err(invalid("snr.stop_db", format!("{} is below start_db {}", s.stop_db, s.start_db)));
        }
        if self.trials.max_trials == 0 {
            return Err(invalid("trials.max_trials", "must be positive"));
        }
        if self.trials.target_bit_errors == 0 {
            return Err(invalid("trials.target_bit_errors", "must be positive"));
        }
        if self.trials.batch == 0 {
            return Err(invalid("trials.batch", "must be positive"));
        }
        if self.mi.trials < 2 {
            return Err(invalid("mi.trials", "need at least 2 trials"));
        }
        if cmd != Command::Verify {
            if self.schemes.is_empty() && self.curves.is_empty() {
                return Err(invalid("schemes", "empty list"));
            }
            if self.constellation.is_empty() && self.curves.is_empty() && cmd == Command::Ber {
                return Err(invalid("constellation", "empty list"));
            }
        }
        if matches!(cmd, Command::Ber) || (cmd == Command::Diversity && self.diversity.method == DiversityMethod::Ber) {
            let field = if self.curves.is_empty() { "constellation" } else { "curves" };
            for c in self.ber_curves() {
                c.scheme.check_constellation(c.constellation).map_err(|e| invalid(field, e.to_string()))?;
            }
        }
        let d = &self.diversity;
        if d.realizations == 0 {
            return Err(invalid("diversity.realizations", "must be positive"));
        }
        if !(d.eps_min > 0.0 && d.eps_max > d.eps_min) {
            return Err(invalid("diversity", "need 0 < eps_min < eps_max"));
        }
        if d.eps_points < 2 {
            return Err(invalid("diversity.eps_points", "need at least 2"));
        }
        if d.window_decades < 0.0 {
            return Err(invalid("diversity.window_decades", "must be non-negative"));
        }
        let v = &self.verify;
        for (name, n) in [
            ("verify.structural", v.structural),
            ("verify.inverse_trace", v.inverse_trace),
            ("verify.zf_invariance", v.zf_invariance),
            ("verify.gamma_prime", v.gamma_prime),
            ("verify.phi", v.phi),
            ("verify.gamma_bounds", v.gamma_bounds),
        ] {
            if n < 2 {
                return Err(invalid(name, "need at least 2 trials"));
            }
        }
        if let Some(n) = &self.output.name {
            if n.is_empty() || n.contains(['/', '\\']) {
                return Err(invalid("output.name", "must be a plain file stem"));
            }
        }
        Ok(())
    }

    /// BER pairings in run order.
    pub fn ber_curves(&self) -> Vec<Curve> {
        if !self.curves.is_empty() {
            return self.curves.clone();
        }
        self.schemes.iter().flat_map(|&scheme| self.constellation.iter().map(move |&constellation| Curve { scheme, constellation })).collect()
    }

    /// Output file stem.
    pub fn stem(&self) -> String {
        self.output.name.clone().unwrap_or_else(|| self.command.map_or("run", Command::name).to_string())
    }
}
