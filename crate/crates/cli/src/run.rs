//! Executes a validated configuration.

use std::collections::BTreeMap;

use serde_json::json;
use stbc_ia::channels::{lane_id, RngSpec};
use stbc_ia::metrics::{
    estimate_diversity_ber, estimate_diversity_outage, log_grid, outage_counts, run_ber, run_mi, run_verify_suite, wilson_halfwidth, BerPolicy,
    CheckReport,
};
use stbc_ia::scheme::Scheme;
use stbc_ia::{Executor, Result};

use crate::config::{Command, DiversityMethod, ExperimentConfig};
use crate::output::Row;

#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub rows: Vec<Row>,
    pub checks: Vec<CheckReport>,
    pub resample_counters: BTreeMap<String, u64>,
    /// Command-specific extras for the manifest.
    pub details: serde_json::Value,
}

impl RunOutput {
    pub fn failed_checks(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect()
    }
}

fn policy(cfg: &ExperimentConfig) -> BerPolicy {
    BerPolicy { target_bit_errors: cfg.trials.target_bit_errors, max_trials: cfg.trials.max_trials, batch: cfg.trials.batch, ..BerPolicy::default() }
}

fn scheme(cfg: &ExperimentConfig, id: stbc_ia::SchemeId) -> Scheme {
    Scheme { id, jash_power: cfg.jash_power }
}

/// Runs the configured command. `log` receives one progress line per
/// finished unit of work.
pub fn run(cfg: &ExperimentConfig, exec: &Executor, log: &mut dyn FnMut(&str)) -> Result<RunOutput> {
    let cmd = cfg.command.ok_or_else(|| stbc_ia::Error::InvalidArgument("no command".into()))?;
    let rng = RngSpec::new(cfg.seed);
    let mut out = RunOutput::default();
    match cmd {
        Command::Ber => {
            let grid = cfg.snr.points();
            for curve in cfg.ber_curves() {
                let (id, c) = (curve.scheme, curve.constellation);
                let pts = run_ber(&scheme(cfg, id), c, &grid, &policy(cfg), rng, exec)?;
                let mut redraws = 0;
                for p in &pts {
                    redraws += p.tally.redraws;
                    out.rows.push(ber_row(cfg, id.name(), c.name(), p));
                }
                *out.resample_counters.entry(id.name().into()).or_default() += redraws;
                log(&format!("ber {id} {c}: {} points", pts.len()));
            }
        }
        Command::Mi => {
            let grid = cfg.snr.points();
            for &id in &cfg.schemes {
                let pts = run_mi(&scheme(cfg, id), &grid, cfg.mi.trials, rng, exec)?;
                for p in &pts {
                    out.rows.push(Row {
                        scheme: id.name().into(),
                        constellation: "gaussian".into(),
                        snr_db: Some(p.snr_db),
                        metric_name: "sum_rate".into(),
                        value: p.sum_rate,
                        ci_halfwidth: Some(p.ci_halfwidth),
                        trials: p.trials,
                        seed: cfg.seed,
                    });
                }
                out.resample_counters.insert(id.name().into(), pts.first().map_or(0, |p| p.redraws));
                log(&format!("mi {id}: {} points", pts.len()));
            }
        }
        Command::Diversity => diversity(cfg, rng, exec, &mut out, log)?,
        Command::Verify => {
            out.checks = run_verify_suite(&cfg.verify, rng, exec)?;
            for c in &out.checks {
                out.rows.push(Row {
                    scheme: "verify".into(),
                    constellation: String::new(),
                    snr_db: None,
                    metric_name: c.name.into(),
                    value: c.value,
                    ci_halfwidth: None,
                    trials: c.trials,
                    seed: cfg.seed,
                });
                log(&format!("verify {}: {}", c.name, if c.pass { "pass" } else { "FAIL" }));
            }
        }
    }
    Ok(out)
}

fn ber_row(cfg: &ExperimentConfig, scheme: &str, constellation: &str, p: &stbc_ia::metrics::BerPoint) -> Row {
    Row {
        scheme: scheme.into(),
        constellation: constellation.into(),
        snr_db: Some(p.snr_db),
        metric_name: "ber".into(),
        value: p.ber,
        ci_halfwidth: Some(p.ci_halfwidth),
        trials: p.tally.trials,
        seed: cfg.seed,
    }
}

fn diversity(cfg: &ExperimentConfig, rng: RngSpec, exec: &Executor, out: &mut RunOutput, log: &mut dyn FnMut(&str)) -> Result<()> {
    let d = &cfg.diversity;
    let mut details = serde_json::Map::new();
    match d.method {
        DiversityMethod::Outage => {
            let eps = log_grid(d.eps_min, d.eps_max, d.eps_points);
            let window = (d.window_decades > 0.0).then_some(d.window_decades);
            for &id in &cfg.schemes {
                let s = scheme(cfg, id);
                let lane = lane_id(&["outage", id.name()]);
                let (pts, redraws) = outage_counts(|t, r| s.stream_gammas(&mut rng.trial_rng(lane, t), r), &eps, d.realizations, exec)?;
                let samples = pts.first().map_or(0, |p| p.trials);
                for p in &pts {
                    out.rows.push(Row {
                        scheme: id.name().into(),
                        constellation: String::new(),
                        snr_db: Some(-10.0 * p.threshold.log10()),
                        metric_name: "outage_probability".into(),
                        value: p.probability(),
                        ci_halfwidth: Some(wilson_halfwidth(p.count, p.trials)),
                        trials: p.trials,
                        seed: cfg.seed,
                    });
                }
                let est = estimate_diversity_outage(&pts, d.min_count, window)?;
                out.rows.push(Row {
                    scheme: id.name().into(),
                    constellation: String::new(),
                    snr_db: None,
                    metric_name: "diversity_order".into(),
                    value: est.diversity,
                    ci_halfwidth: None,
                    trials: samples,
                    seed: cfg.seed,
                });
                out.resample_counters.insert(id.name().into(), redraws);
                log(&format!("diversity {id}: {:.3}", est.diversity));
                details.insert(id.name().into(), json!({ "realizations": d.realizations, "estimate": est }));
            }
        }
        DiversityMethod::Ber => {
            let grid = cfg.snr.points();
            let lo = d.ber_fit_start_db.unwrap_or(cfg.snr.start_db);
            let hi = d.ber_fit_stop_db.unwrap_or(cfg.snr.stop_db);
            for curve in cfg.ber_curves() {
                let (id, c) = (curve.scheme, curve.constellation);
                let pts = run_ber(&scheme(cfg, id), c, &grid, &policy(cfg), rng, exec)?;
                for p in &pts {
                    out.rows.push(ber_row(cfg, id.name(), c.name(), p));
                }
                let curve: Vec<(f64, f64)> = pts.iter().map(|p| (p.snr_db, p.ber)).collect();
                let est = estimate_diversity_ber(&curve, lo, hi)?;
                out.rows.push(Row {
                    scheme: id.name().into(),
                    constellation: c.name().into(),
                    snr_db: None,
                    metric_name: "diversity_order".into(),
                    value: est.diversity,
                    ci_halfwidth: None,
                    trials: pts.iter().map(|p| p.tally.trials).sum(),
                    seed: cfg.seed,
                });
                *out.resample_counters.entry(id.name().into()).or_default() += pts.iter().map(|p| p.tally.redraws).sum::<u64>();
                log(&format!("diversity {id} {c}: {:.3}", est.diversity));
                details.insert(format!("{}/{}", id.name(), c.name()), json!({ "fit_db": [lo, hi], "estimate": est }));
            }
        }
    }
    out.details = serde_json::Value::Object(details);
    Ok(())
}
