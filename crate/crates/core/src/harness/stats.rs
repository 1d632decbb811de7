use std::collections::BTreeMap;

use super::RunRecord;
use crate::error::{Error, Result};

/// Error summary of all replicates at one ladder point.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderSummary {
    pub t: u64,
    pub replicates: usize,
    pub mean_estimate: f64,
    pub mean_sq_error: f64,
    /// Standard error of `mean_sq_error` across replicates.
    pub se_sq_error: f64,
    pub median_sq_error: f64,
    pub q25_sq_error: f64,
    pub q75_sq_error: f64,
}

/// Mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-`T` summaries in increasing `T`. Records without a truth are skipped.
pub fn summarize(records: &[RunRecord]) -> Vec<LadderSummary> {
    let mut by_t: BTreeMap<u64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records {
        if let Some(e) = r.sq_error {
            let entry = by_t.entry(r.t).or_default();
            entry.0.push(e);
            entry.1.push(r.estimate);
        }
    }
    by_t.into_iter()
        .map(|(t, (mut errs, ests))| {
            let (mean_sq_error, se_sq_error) = mean_and_se(&errs);
            errs.sort_by(f64::total_cmp);
            LadderSummary {
                t,
                replicates: errs.len(),
                mean_estimate: ests.iter().sum::<f64>() / ests.len() as f64,
                mean_sq_error,
                se_sq_error,
                median_sq_error: quantile(&errs, 0.5),
                q25_sq_error: quantile(&errs, 0.25),
                q75_sq_error: quantile(&errs, 0.75),
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub std_error: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Least-squares slope of `log10(mean sq_error)` on `log10 T` over the
/// largest `tail_fraction` of ladder points (at least three).
pub fn fit_loglog_slope(records: &[RunRecord], tail_fraction: f64) -> Result<SlopeFit> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::param(format!("tail fraction must lie in (0, 1], got {tail_fraction}")));
    }
    let summary = summarize(records);
    let keep = ((summary.len() as f64 * tail_fraction).ceil() as usize).min(summary.len());
    if keep < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: keep });
    }
    let tail = &summary[summary.len() - keep..];
    let xs: Vec<f64> = tail.iter().map(|s| (s.t as f64).log10()).collect();
    let ys: Vec<f64> = tail.iter().map(|s| s.mean_sq_error.log10()).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::NonFiniteEstimate(f64::NEG_INFINITY));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let std_error = (rss / (n - 2.0) / sxx).sqrt();
    Ok(SlopeFit { slope, std_error, intercept, points: keep })
}
