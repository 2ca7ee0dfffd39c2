//! Computable surrogates for the quantities that control convergence:
//! `B_n`, the `1/n` behaviour of the auxiliary empirical measure, the tail
//! functional `phi / w^2`, sub-Gaussian deviations, and ergodic-sum MSE.

mod bn;
mod deviation;
mod mse;
mod phi;

pub use bn::{
    assumption_y_check, b_n_exact, b_n_monte_carlo, b_n_sequence, marginal_bound, max_quadratic_sign,
    AssumptionReport, BnMethod, BnReport, MAX_EXACT_STATES,
};
pub use deviation::{deviation_check, DeviationReport, TailFit, MIN_EXCEEDANCES};
pub use mse::{aggregate_mse, ergodic_mse, ErgodicAccumulator, MseRow, MseSeries, MIN_MSE_REPLICAS};
pub use phi::{geometric_grid, phi_tail_check, phi_tail_check_density, PhiProfile, PolynomialTail};

pub(crate) use deviation::least_squares;

/// Values at or below this are rounding residue, not growth.
pub const NEGLIGIBLE: f64 = 1e-9;

/// Whether `values` is nondecreasing over the points with `x >= x_max / 10`
/// and at least doubles there, ending above `NEGLIGIBLE`.
pub fn grows_over_top_decade(xs: &[f64], values: &[f64]) -> bool {
    let Some(x_max) = xs.iter().copied().reduce(f64::max) else {
        return false;
    };
    let top: Vec<f64> = xs
        .iter()
        .zip(values)
        .filter(|(x, _)| **x >= x_max / 10.0)
        .map(|(_, v)| *v)
        .collect();
    if top.len() < 2 || top.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let monotone = top.windows(2).all(|p| p[1] >= p[0] * (1.0 - 1e-12));
    let last = top[top.len() - 1];
    monotone && last >= 2.0 * top[0] && last > NEGLIGIBLE
}

#[cfg(test)]
mod tests {
    use super::grows_over_top_decade;

    #[test]
    fn growth_flag() {
        let xs = [1.0, 10.0, 100.0, 200.0, 400.0, 1000.0];
        assert!(grows_over_top_decade(&xs, &[5.0, 4.0, 1.0, 2.0, 4.0, 10.0]));
        assert!(!grows_over_top_decade(&xs, &[1.0, 2.0, 3.0, 3.1, 3.2, 3.3]));
        assert!(!grows_over_top_decade(&xs, &[1.0, 2.0, 3.0, 9.0, 8.0, 30.0]));
        assert!(!grows_over_top_decade(&[], &[]));
        // accumulated rounding in an exactly zero sequence
        assert!(!grows_over_top_decade(
            &xs,
            &[0.0, 1e-15, 1e-14, 4e-13, 2e-12, 2e-11]
        ));
    }
}
