//! Log-log rate fits of a TV curve over a window of checkpoints.

use serde::{Deserialize, Serialize};

use super::tv::TvSeries;
use crate::diagnostics::least_squares;
use crate::error::{Error, Result};

/// A window point must sit this many noise floors above zero.
pub const FLOOR_MULTIPLE: f64 = 5.0;
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub window: (usize, usize),
    pub r_squared: f64,
    pub points: usize,
}

/// OLS of `ln tv` on `ln n` for checkpoints in `[lo, hi]`.
///
/// Refuses windows where some TV value is within `FLOOR_MULTIPLE` noise
/// floors of zero, since the plug-in bias would flatten the slope.
pub fn fit_rate(series: &TvSeries, window: (usize, usize)) -> Result<RateFit> {
    let (lo, hi) = window;
    if lo > hi {
        return Err(Error::Fit(format!("empty window [{lo}, {hi}]")));
    }
    let rows: Vec<_> = series.rows.iter().filter(|r| r.n >= lo && r.n <= hi).collect();
    if rows.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "window [{lo}, {hi}] holds {} checkpoints; need at least {MIN_FIT_POINTS}",
            rows.len()
        )));
    }
    let threshold = FLOOR_MULTIPLE * series.noise_floor;
    if let Some(r) = rows.iter().find(|r| r.tv <= threshold || r.tv <= 0.0) {
        return Err(Error::Fit(format!(
            "tv {:.3e} at n={} is within {FLOOR_MULTIPLE} noise floors ({threshold:.3e})",
            r.tv, r.n
        )));
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| ((r.n as f64).ln(), r.tv.ln())).collect();
    let (slope, intercept, r_squared) = least_squares(&points);
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Ok(RateFit {
        slope,
        intercept,
        slope_stderr: (rss / (k - 2.0) / sxx).sqrt(),
        window,
        r_squared,
        points: points.len(),
    })
}
