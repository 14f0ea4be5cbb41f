use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Root-mean-square difference of two equal-length vectors.
pub fn rmse(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    if u.is_empty() {
        return Err(Error::InvalidArgument("rmse of empty vectors".into()));
    }
    let sum: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sum / u.len() as f64).sqrt())
}

/// Summary of a per-camera (or per-curve) error vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation, `1/(C-1)`; 0 for a single value.
    pub sd: f64,
    pub max: f64,
    pub p95: f64,
    pub time_ms: f64,
}

/// Quantile `q` in `[0,1]` of sorted data, interpolating linearly between
/// order statistics at rank `q·(C−1)`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn summarize(h: &[f64], elapsed: std::time::Duration) -> Result<SummaryStats> {
    if h.is_empty() {
        return Err(Error::InvalidArgument("cannot summarize an empty result vector".into()));
    }
    if let Some(bad) = h.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("result vector entry {bad}")));
    }
    let mut sorted = h.to_vec();
    sorted.sort_by(f64::total_cmp);
    let c = h.len() as f64;
    let mean = sorted.iter().sum::<f64>() / c;
    let sd = if h.len() > 1 {
        (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (c - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(SummaryStats {
        count: h.len(),
        mean,
        median: quantile_sorted(&sorted, 0.5),
        sd,
        max: sorted[sorted.len() - 1],
        p95: quantile_sorted(&sorted, 0.95),
        time_ms: elapsed.as_secs_f64() * 1e3,
    })
}
