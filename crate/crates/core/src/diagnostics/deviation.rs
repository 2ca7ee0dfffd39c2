//! Sub-Gaussian tail check for normalized additive functionals of the
//! auxiliary chain: `P(|n^{-1/2} sum_j (f(Y_j) - pi_Y f)| > x)` against `exp(-x^2 / (C sigma^2))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{check_len, FiniteDistribution, KernelMatrix};
use crate::samplers::seeded_stream;

/// Grid points with fewer exceedances than this are left out of the fit.
pub const MIN_EXCEEDANCES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Slope of `ln P` against `x^2`.
    pub slope: f64,
    pub intercept: f64,
    /// `C = -1 / (slope * sigma^2)`.
    pub c: f64,
    pub r_squared: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub n: usize,
    pub replicas: usize,
    /// `pi_Y((f - pi_Y f)^2)`.
    pub sigma2: f64,
    pub x_grid: Vec<f64>,
    pub tail_probs: Vec<f64>,
    pub exceedances: Vec<usize>,
    pub fit: Option<TailFit>,
    pub warnings: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
pub fn deviation_check(
    p_y: &KernelMatrix,
    pi_y: &FiniteDistribution,
    y0: usize,
    f: &[f64],
    n: usize,
    x_grid: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<DeviationReport> {
    check_len(p_y.size(), f.len())?;
    check_len(p_y.size(), pi_y.len())?;
    if f.iter().any(|v| v.abs() > 1.0) {
        return Err(Error::Argument("test function must satisfy |f| <= 1".into()));
    }
    if n == 0 || replicas == 0 || y0 >= p_y.size() {
        return Err(Error::Argument(
            "need n >= 1, replicas >= 1 and a valid start".into(),
        ));
    }
    let mean = pi_y.expectation(|s| f[s]);
    let sigma2 = pi_y.expectation(|s| (f[s] - mean).powi(2));
    let centered: Vec<f64> = f.iter().map(|v| v - mean).collect();
    let scale = (n as f64).sqrt();
    let sums: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded_stream(seed, r);
            let mut y = y0;
            let mut acc = 0.0;
            for _ in 0..n {
                y = p_y.sample(y, &mut rng);
                acc += centered[y];
            }
            (acc / scale).abs()
        })
        .collect();
    // tolerance guards rounding noise when f is constant
    let exceedances: Vec<usize> = x_grid
        .iter()
        .map(|x| sums.iter().filter(|s| **s > x + 1e-12).count())
        .collect();
    let tail_probs: Vec<f64> = exceedances.iter().map(|c| *c as f64 / replicas as f64).collect();
    let mut warnings = Vec::new();
    let usable: Vec<(f64, f64)> = x_grid
        .iter()
        .zip(&exceedances)
        .zip(&tail_probs)
        .filter(|((_, c), _)| **c >= MIN_EXCEEDANCES)
        .map(|((x, _), p)| (x * x, p.ln()))
        .collect();
    if usable.len() < x_grid.len() {
        warnings.push(format!(
            "{} grid points have fewer than {MIN_EXCEEDANCES} exceedances; widen the grid or add replicas",
            x_grid.len() - usable.len()
        ));
    }
    let fit = if usable.len() >= 3 {
        let (slope, intercept, r_squared) = least_squares(&usable);
        Some(TailFit {
            slope,
            intercept,
            c: if slope < 0.0 && sigma2 > 0.0 {
                -1.0 / (slope * sigma2)
            } else {
                f64::INFINITY
            },
            r_squared,
            points: usable.len(),
        })
    } else {
        warnings.push("too few usable tail points for a fit".into());
        None
    };
    Ok(DeviationReport {
        n,
        replicas,
        sigma2,
        x_grid: x_grid.to_vec(),
        tail_probs,
        exceedances,
        fit,
        warnings,
    })
}

/// Slope, intercept and R² of an ordinary least-squares line.
pub(crate) fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, intercept, r_squared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::TwoStateAux;

    #[test]
    fn constant_function_never_deviates() {
        let aux = TwoStateAux::new(0.3, 0.3, 1).unwrap();
        let r = deviation_check(
            &aux.kernel(),
            &aux.stationary(),
            0,
            &[0.5, 0.5],
            50,
            &[0.1, 0.5],
            1000,
            1,
        )
        .unwrap();
        assert!(r.tail_probs.iter().all(|p| *p == 0.0));
        assert!(r.fit.is_none());
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn iid_indicator_has_sub_gaussian_tail() {
        let pi = FiniteDistribution::new(vec![0.3, 0.7]).unwrap();
        let p_y = KernelMatrix::constant(&pi);
        let grid = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
        let r = deviation_check(&p_y, &pi, 0, &[1.0, 0.0], 200, &grid, 200_000, 4).unwrap();
        let fit = r.fit.unwrap();
        assert!(fit.r_squared > 0.9, "{fit:?}");
        assert!((r.sigma2 - 0.21).abs() < 1e-12);
    }

    #[test]
    fn ergodic_chain_sign_tail_is_linear_in_square() {
        let aux = TwoStateAux::new(0.3, 0.3, 1).unwrap();
        let grid: Vec<f64> = (0..9).map(|i| 0.5 + 0.25 * i as f64).collect();
        let r = deviation_check(
            &aux.kernel(),
            &aux.stationary(),
            0,
            &[1.0, -1.0],
            100,
            &grid,
            200_000,
            6,
        )
        .unwrap();
        let fit = r.fit.unwrap();
        assert!(fit.r_squared > 0.9, "{fit:?}");
        assert!(fit.c.is_finite() && fit.c > 0.0);
    }

    #[test]
    fn rejects_unbounded_test_function() {
        let aux = TwoStateAux::new(0.3, 0.3, 1).unwrap();
        assert!(deviation_check(&aux.kernel(), &aux.stationary(), 0, &[2.0, 0.0], 5, &[1.0], 10, 0).is_err());
    }

    #[test]
    fn least_squares_recovers_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 - 2.0 * i as f64)).collect();
        let (s, c, r2) = least_squares(&pts);
        assert!((s + 2.0).abs() < 1e-12 && (c - 3.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
