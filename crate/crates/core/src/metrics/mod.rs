//! Monte Carlo estimators: bit error rate, sum rate, diversity order, and
//! the analytic-claim checks.

pub mod ber;
pub mod diversity;
pub mod mi;
pub mod verify;

pub use ber::{run_ber, run_ber_point, snr_at_ber, wilson_halfwidth, BerPoint, BerPolicy};
pub use diversity::{estimate_diversity_ber, estimate_diversity_outage, fit_line, log_grid, outage_counts, DiversityEstimate, OutagePoint};
pub use mi::{run_mi, MiPoint};
pub use verify::{run_verify_suite, CheckReport, VerifyTrials};

/// `P = 10^{snr_db/10}` with unit noise variance.
pub fn db_to_power(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// Inclusive grid `start, start + step, …` up to `stop` (with a little slack
/// for rounding).
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return vec![start];
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + step * k as f64).collect()
}
