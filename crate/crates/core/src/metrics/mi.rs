use crate::channels::{lane_id, RngSpec};
use crate::error::Result;
use crate::exec::Executor;
use crate::scheme::Scheme;

use super::db_to_power;

const BATCH: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MiPoint {
    pub snr_db: f64,
    /// Bits per channel use summed over all streams.
    pub sum_rate: f64,
    pub ci_halfwidth: f64,
    pub trials: u64,
    pub redraws: u64,
}

#[derive(Clone, Debug, Default)]
struct Acc {
    sum: Vec<f64>,
    sumsq: Vec<f64>,
    redraws: u64,
}

/// Ergodic sum rate `(1/T) Σ E log₂(1 + P γ)` over all symbols of a trial,
/// on every grid point from the same channel realizations.
pub fn run_mi(scheme: &Scheme, grid: &[f64], trials: u64, rng: RngSpec, exec: &Executor) -> Result<Vec<MiPoint>> {
    let lane = lane_id(&["mi", scheme.id.name()]);
    let powers: Vec<f64> = grid.iter().map(|&s| db_to_power(s)).collect();
    let uses = f64::from(scheme.id.channel_uses());
    let nb = trials.div_ceil(BATCH);
    let parts = exec.map(0..nb, |b| -> Result<Acc> {
        let mut acc = Acc { sum: vec![0.0; powers.len()], sumsq: vec![0.0; powers.len()], redraws: 0 };
        for t in b * BATCH..((b + 1) * BATCH).min(trials) {
            let mut r = rng.trial_rng(lane, t);
            let g = scheme.gamma_trial(&mut r, &mut acc.redraws)?;
            for (k, &p) in powers.iter().enumerate() {
                let rate: f64 = g.iter().map(|&x| (1.0 + p * x).log2()).sum::<f64>() / uses;
                acc.sum[k] += rate;
                acc.sumsq[k] += rate * rate;
            }
        }
        Ok(acc)
    });
    let mut total = Acc { sum: vec![0.0; powers.len()], sumsq: vec![0.0; powers.len()], redraws: 0 };
    for p in parts {
        let p = p?;
        for k in 0..powers.len() {
            total.sum[k] += p.sum[k];
            total.sumsq[k] += p.sumsq[k];
        }
        total.redraws += p.redraws;
    }
    let n = trials as f64;
    Ok(grid
        .iter()
        .enumerate()
        .map(|(k, &snr_db)| {
            let mean = total.sum[k] / n;
            let var = (total.sumsq[k] / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
            MiPoint { snr_db, sum_rate: mean, ci_halfwidth: 1.96 * (var / n).sqrt(), trials, redraws: total.redraws }
        })
        .collect())
}
