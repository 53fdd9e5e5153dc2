use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Executor;

/// Least-squares line `y = a x + b`; returns `(a, b, rms residual)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - a * x - b).powi(2)).sum::<f64>() / n).sqrt();
    (a, b, rms)
}

/// `n` points spaced evenly in log scale from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiversityEstimate {
    pub method: &'static str,
    pub diversity: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    /// `(x, y)` pairs used in the fit: SNR in dB and BER, or threshold and
    /// outage probability.
    pub points: Vec<(f64, f64)>,
    /// Abscissae left out for lack of events.
    pub dropped: Vec<f64>,
}

/// Negative slope of `log₁₀ BER` against `SNR/10` over `[lo_db, hi_db]`.
pub fn estimate_diversity_ber(curve: &[(f64, f64)], lo_db: f64, hi_db: f64) -> Result<DiversityEstimate> {
    let mut pts = Vec::new();
    let mut dropped = Vec::new();
    for &(s, b) in curve {
        if s < lo_db - 1e-9 || s > hi_db + 1e-9 {
            continue;
        }
        if b > 0.0 {
            pts.push((s, b));
        } else {
            dropped.push(s);
        }
    }
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!("{} usable points in [{lo_db}, {hi_db}] dB, need 3", pts.len())));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0 / 10.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.log10()).collect();
    let (a, _, rms) = fit_line(&xs, &ys);
    Ok(DiversityEstimate { method: "ber_slope", diversity: -a, residual: rms, points: pts, dropped })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OutagePoint {
    pub threshold: f64,
    pub count: u64,
    pub trials: u64,
}

impl OutagePoint {
    pub fn probability(&self) -> f64 {
        self.count as f64 / self.trials as f64
    }
}

const BATCH: u64 = 4096;

/// Counts `γ < ε` for every threshold. Each of the `trials` calls to
/// `sample` may return several identically distributed SNRs (for instance
/// all streams of one realization); every value counts as one sample.
pub fn outage_counts<F, G>(sample: F, thresholds: &[f64], trials: u64, exec: &Executor) -> Result<(Vec<OutagePoint>, u64)>
where
    F: Fn(u64, &mut u64) -> Result<G> + Sync + Send,
    G: AsRef<[f64]>,
{
    let nb = trials.div_ceil(BATCH);
    let parts = exec.map(0..nb, |b| -> Result<(Vec<u64>, u64, u64)> {
        let mut counts = vec![0u64; thresholds.len()];
        let mut redraws = 0;
        let mut samples = 0;
        for t in b * BATCH..((b + 1) * BATCH).min(trials) {
            let g = sample(t, &mut redraws)?;
            for &x in g.as_ref() {
                samples += 1;
                for (c, &e) in counts.iter_mut().zip(thresholds) {
                    *c += u64::from(x < e);
                }
            }
        }
        Ok((counts, redraws, samples))
    });
    let mut counts = vec![0u64; thresholds.len()];
    let mut redraws = 0;
    let mut samples = 0;
    for p in parts {
        let (c, r, n) = p?;
        for (a, b) in counts.iter_mut().zip(c) {
            *a += b;
        }
        redraws += r;
        samples += n;
    }
    let pts = thresholds.iter().zip(counts).map(|(&threshold, count)| OutagePoint { threshold, count, trials: samples }).collect();
    Ok((pts, redraws))
}

/// Slope of `log₁₀ P(γ < ε)` against `log₁₀ ε`. Thresholds with fewer than
/// `min_count` events are dropped; the rest must span two decades. With
/// `window_decades`, only thresholds up to that many decades above the
/// smallest usable one enter the fit, which keeps the fit in the tail.
pub fn estimate_diversity_outage(points: &[OutagePoint], min_count: u64, window_decades: Option<f64>) -> Result<DiversityEstimate> {
    let floor = points.iter().filter(|p| p.count >= min_count).map(|p| p.threshold).fold(f64::INFINITY, f64::min);
    let ceil = window_decades.map_or(f64::INFINITY, |d| floor * 10f64.powf(d) * (1.0 + 1e-9));
    let (keep, drop): (Vec<&OutagePoint>, Vec<&OutagePoint>) = points.iter().filter(|p| p.threshold <= ceil).partition(|p| p.count >= min_count);
    let dropped = drop.iter().map(|p| p.threshold).collect();
    if keep.len() < 2 {
        return Err(Error::InsufficientData(format!("{} thresholds with at least {min_count} outages", keep.len())));
    }
    let lo = keep.iter().map(|p| p.threshold).fold(f64::INFINITY, f64::min);
    let hi = keep.iter().map(|p| p.threshold).fold(0.0, f64::max);
    if hi / lo < 99.999 {
        return Err(Error::InsufficientData(format!("usable thresholds span only {:.2} decades", (hi / lo).log10())));
    }
    let xs: Vec<f64> = keep.iter().map(|p| p.threshold.log10()).collect();
    let ys: Vec<f64> = keep.iter().map(|p| p.probability().log10()).collect();
    let (a, _, rms) = fit_line(&xs, &ys);
    Ok(DiversityEstimate {
        method: "outage_slope",
        diversity: a,
        residual: rms,
        points: keep.iter().map(|p| (p.threshold, p.probability())).collect(),
        dropped,
    })
}
