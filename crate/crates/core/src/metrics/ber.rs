use crate::channels::{lane_id, Constellation, RngSpec};
use crate::error::Result;
use crate::exec::Executor;
use crate::scheme::{Scheme, Tally};

use super::db_to_power;

/// Stopping rule for one SNR point. Trials run in waves of whole batches;
/// the error target is checked only between waves, so the stopping point
/// (and every count) is the same for any worker count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BerPolicy {
    pub target_bit_errors: u64,
    pub max_trials: u64,
    pub batch: u64,
    pub first_wave: u64,
    pub max_wave: u64,
}

impl Default for BerPolicy {
    fn default() -> Self {
        BerPolicy { target_bit_errors: 200, max_trials: 10_000_000, batch: 256, first_wave: 4, max_wave: 256 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub tally: Tally,
    pub ber: f64,
    pub ci_halfwidth: f64,
}

/// Half-width of the 95% Wilson score interval for `k` successes in `n`.
pub fn wilson_halfwidth(k: u64, n: u64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    let z = 1.959_963_984_540_054;
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

fn batch_tally(scheme: &Scheme, c: Constellation, power: f64, noise_var: f64, rng: RngSpec, lane: u64, lo: u64, hi: u64) -> Result<Tally> {
    let mut t = Tally::default();
    for trial in lo..hi {
        let mut r = rng.trial_rng(lane, trial);
        t.merge(&scheme.ber_trial(&mut r, c, power, noise_var)?);
    }
    Ok(t)
}

pub fn run_ber_point(scheme: &Scheme, c: Constellation, snr_db: f64, noise_var: f64, policy: &BerPolicy, rng: RngSpec, exec: &Executor) -> Result<BerPoint> {
    scheme.id.check_constellation(c)?;
    let lane = lane_id(&["ber", scheme.id.name(), c.name(), &format!("{snr_db:.6}")]);
    let power = db_to_power(snr_db);
    let batch = policy.batch.max(1);
    let total = policy.max_trials.div_ceil(batch);
    let mut tally = Tally::default();
    let mut done = 0;
    let mut wave = policy.first_wave.max(1);
    while done < total {
        let end = (done + wave).min(total);
        let parts = exec.map(done..end, |b| {
            let lo = b * batch;
            batch_tally(scheme, c, power, noise_var, rng, lane, lo, (lo + batch).min(policy.max_trials))
        });
        for p in parts {
            tally.merge(&p?);
        }
        done = end;
        if tally.bit_errors >= policy.target_bit_errors {
            break;
        }
        wave = (wave * 2).min(policy.max_wave.max(1));
    }
    let ber = tally.bit_errors as f64 / tally.bits as f64;
    Ok(BerPoint { snr_db, tally, ber, ci_halfwidth: wilson_halfwidth(tally.bit_errors, tally.bits) })
}

pub fn run_ber(scheme: &Scheme, c: Constellation, grid: &[f64], policy: &BerPolicy, rng: RngSpec, exec: &Executor) -> Result<Vec<BerPoint>> {
    grid.iter().map(|&s| run_ber_point(scheme, c, s, 1.0, policy, rng, exec)).collect()
}

/// SNR where the curve crosses `target`, by linear interpolation of
/// `log₁₀ BER` between the bracketing points. `None` if never crossed.
pub fn snr_at_ber(points: &[(f64, f64)], target: f64) -> Option<f64> {
    let lt = target.log10();
    points.windows(2).find_map(|w| {
        let ((s0, b0), (s1, b1)) = (w[0], w[1]);
        if b0 >= target && b1 <= target && b0 > 0.0 && b1 > 0.0 && b0 != b1 {
            let (l0, l1) = (b0.log10(), b1.log10());
            Some(s0 + (s1 - s0) * (l0 - lt) / (l0 - l1))
        } else {
            None
        }
    })
}
