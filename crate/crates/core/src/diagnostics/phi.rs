//! The tail functional `phi(x) = pi_Y({z : w(z) <= w(x)})` and its ratio to `w(x)^2`.

use serde::{Deserialize, Serialize};

use super::grows_over_top_decade;
use crate::error::{Error, Result};
use crate::prob::{check_len, FiniteDistribution, WeightFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiProfile {
    pub grid: Vec<f64>,
    pub phi: Vec<f64>,
    /// `phi / w^2`; infinite where `w` vanishes.
    pub ratio: Vec<f64>,
    /// Supremum of the finite ratios.
    pub sup_ratio: f64,
    /// The ratio keeps growing over the top decade of the grid.
    pub growing: bool,
}

impl PhiProfile {
    fn from_parts(grid: Vec<f64>, phi: Vec<f64>, weights: &[f64], check_growth: bool) -> Self {
        let ratio: Vec<f64> = phi
            .iter()
            .zip(weights)
            .map(|(p, w)| if *w > 0.0 { p / (w * w) } else { f64::INFINITY })
            .collect();
        let sup_ratio = ratio
            .iter()
            .copied()
            .filter(|r| r.is_finite())
            .fold(0.0, f64::max);
        let growing = check_growth && grows_over_top_decade(&grid, &ratio);
        Self {
            grid,
            phi,
            ratio,
            sup_ratio,
            growing,
        }
    }
}

/// Exact profile on a finite space; the grid is the list of state indices.
pub fn phi_tail_check(w: &WeightFunction, pi_y: &FiniteDistribution) -> Result<PhiProfile> {
    check_len(w.len(), pi_y.len())?;
    let s = w.len();
    let phi = (0..s)
        .map(|x| {
            (0..s)
                .filter(|z| w.value(*z) <= w.value(x))
                .map(|z| pi_y.get(z))
                .sum::<f64>()
                .min(1.0)
        })
        .collect();
    let grid = (0..s).map(|x| x as f64).collect();
    Ok(PhiProfile::from_parts(grid, phi, w.values(), false))
}

/// Profile for a density on `[lower, ∞)`: `pi_Y` mass is integrated by the
/// midpoint rule after mapping `z = lower + t / (1 - t)`, `t in [0, 1)`.
pub fn phi_tail_check_density(
    w: impl Fn(f64) -> f64,
    aux_density: impl Fn(f64) -> f64,
    lower: f64,
    cells: usize,
    grid: &[f64],
) -> Result<PhiProfile> {
    if cells == 0 || grid.is_empty() {
        return Err(Error::Argument(
            "need at least one cell and one grid point".into(),
        ));
    }
    let h = 1.0 / cells as f64;
    let mut atoms: Vec<(f64, f64)> = (0..cells)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            let z = lower + t / (1.0 - t);
            let jacobian = 1.0 / ((1.0 - t) * (1.0 - t));
            (w(z), aux_density(z) * jacobian * h)
        })
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut prefix = Vec::with_capacity(atoms.len());
    let mut acc = 0.0;
    for (_, m) in &atoms {
        acc += m;
        prefix.push(acc);
    }
    let weights: Vec<f64> = grid.iter().map(|x| w(*x)).collect();
    let phi = weights
        .iter()
        .map(|wx| {
            let count = atoms.partition_point(|(wz, _)| wz <= wx);
            if count == 0 {
                0.0
            } else {
                prefix[count - 1].min(1.0)
            }
        })
        .collect();
    Ok(PhiProfile::from_parts(grid.to_vec(), phi, &weights, true))
}

/// Polynomial-tail family on `[0, ∞)`: `pi(x) = (α-1)(1+x)^{-α}` and the
/// tempered `pi_Y(x) = (Tα-1)(1+x)^{-Tα}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialTail {
    pub alpha: f64,
    pub temperature: f64,
}

impl PolynomialTail {
    pub fn new(alpha: f64, temperature: f64) -> Result<Self> {
        if !(alpha > 1.0) || !(temperature > 0.0 && temperature < 1.0) || temperature * alpha <= 1.0 {
            return Err(Error::Argument(format!(
                "need alpha > 1, T in (0, 1) and T * alpha > 1, got alpha={alpha} T={temperature}"
            )));
        }
        Ok(Self { alpha, temperature })
    }

    /// Temperature above which `phi / w^2` stays bounded.
    pub fn critical_temperature(&self) -> f64 {
        (1.0 + 2.0 * self.alpha) / (3.0 * self.alpha)
    }

    pub fn target_density(&self, x: f64) -> f64 {
        (self.alpha - 1.0) * (1.0 + x).powf(-self.alpha)
    }

    pub fn aux_density(&self, x: f64) -> f64 {
        let ta = self.temperature * self.alpha;
        (ta - 1.0) * (1.0 + x).powf(-ta)
    }

    pub fn weight(&self, x: f64) -> f64 {
        self.target_density(x) / self.aux_density(x)
    }

    /// Tail mass `pi_Y([x, ∞)) = (1+x)^{-(Tα-1)}`, which equals `phi(x)`
    /// because `w` decreases.
    pub fn phi_closed_form(&self, x: f64) -> f64 {
        (1.0 + x).powf(1.0 - self.temperature * self.alpha)
    }

    pub fn profile(&self, grid: &[f64], cells: usize) -> Result<PhiProfile> {
        phi_tail_check_density(|x| self.weight(x), |x| self.aux_density(x), 0.0, cells, grid)
    }
}

/// `points` geometrically spaced values from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|i| lo * (ratio * i as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_profile_sorts_by_weight() {
        let w = WeightFunction::from_values(vec![2.0, 0.5, 1.0]).unwrap();
        let pi_y = FiniteDistribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let p = phi_tail_check(&w, &pi_y).unwrap();
        assert_eq!(p.phi, vec![1.0, 0.5, 0.8]);
        assert!((p.ratio[1] - 2.0).abs() < 1e-15);
        assert!((p.sup_ratio - 2.0).abs() < 1e-15);
        assert!(!p.growing);
    }

    #[test]
    fn unit_weights_give_unit_profile() {
        let pi_y = FiniteDistribution::new(vec![0.1, 0.6, 0.3]).unwrap();
        let p = phi_tail_check(&WeightFunction::uniform(3), &pi_y).unwrap();
        assert!(p.phi.iter().all(|v| (v - 1.0).abs() < 1e-15));
        assert!((p.sup_ratio - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phi_is_monotone_in_weight() {
        let w = WeightFunction::from_values(vec![0.3, 4.0, 1.0, 1.0, 2.5, 0.0]).unwrap();
        let pi_y = FiniteDistribution::new(vec![0.1, 0.2, 0.1, 0.2, 0.3, 0.1]).unwrap();
        let p = phi_tail_check(&w, &pi_y).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if w.value(i) <= w.value(j) {
                    assert!(p.phi[i] <= p.phi[j]);
                }
            }
            assert!((0.0..=1.0).contains(&p.phi[i]));
        }
        assert!(p.ratio[5].is_infinite());
    }

    #[test]
    fn quadrature_matches_closed_tail_mass() {
        let grid = geometric_grid(1.0, 1e3, 13);
        for t in [0.6, 0.9] {
            let demo = PolynomialTail::new(3.0, t).unwrap();
            let profile = demo.profile(&grid, 200_000).unwrap();
            for (x, phi) in grid.iter().zip(&profile.phi) {
                let exact = demo.phi_closed_form(*x);
                assert!((phi - exact).abs() < 0.02 * exact, "T={t} x={x} {phi} vs {exact}");
            }
        }
    }

    #[test]
    fn growth_flag_flips_at_critical_temperature() {
        let grid = geometric_grid(1.0, 1e3, 13);
        let demo = PolynomialTail::new(3.0, 0.9).unwrap();
        assert!((demo.critical_temperature() - 7.0 / 9.0).abs() < 1e-15);
        assert!(!demo.profile(&grid, 200_000).unwrap().growing);
        let demo = PolynomialTail::new(3.0, 0.6).unwrap();
        assert!(demo.profile(&grid, 200_000).unwrap().growing);
        assert!(PolynomialTail::new(3.0, 0.3).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = geometric_grid(1.0, 1000.0, 4);
        assert!((g[3] - 1000.0).abs() < 1e-9 && (g[1] - 10.0).abs() < 1e-12);
    }
}
