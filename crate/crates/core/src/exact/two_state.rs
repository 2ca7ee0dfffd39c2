//! The two-state auxiliary chain on `{+1, -1}`, stored as indices `0` and `1`.

use serde::{Deserialize, Serialize};

use super::stationary::propagate_all;
use crate::error::{Error, Result};
use crate::prob::{FiniteDistribution, KernelMatrix};

/// Index of a spin in `{+1, -1}`.
pub fn spin_index(spin: i8) -> Result<usize> {
    match spin {
        1 => Ok(0),
        -1 => Ok(1),
        other => Err(Error::Argument(format!("spin must be +1 or -1, got {other}"))),
    }
}

/// `P_Y = [[1-a, a], [b, 1-b]]` started from `y0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoStateAux {
    pub a: f64,
    pub b: f64,
    pub y0: i8,
}

impl TwoStateAux {
    pub fn new(a: f64, b: f64, y0: i8) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Argument(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        spin_index(y0)?;
        Ok(Self { a, b, y0 })
    }

    pub fn kernel(&self) -> KernelMatrix {
        KernelMatrix::new(vec![vec![1.0 - self.a, self.a], vec![self.b, 1.0 - self.b]])
            .expect("valid two-state rows")
    }

    pub fn stationary(&self) -> FiniteDistribution {
        let s = self.a + self.b;
        FiniteDistribution::new(vec![self.b / s, self.a / s]).expect("valid masses")
    }

    /// The non-unit eigenvalue `1 - a - b`.
    pub fn lambda2(&self) -> f64 {
        1.0 - self.a - self.b
    }

    pub fn start(&self) -> FiniteDistribution {
        FiniteDistribution::point(2, spin_index(self.y0).expect("validated")).expect("two states")
    }

    /// `E pi_hat_{Y,n}({-1}) - pi_Y({-1})` in closed form.
    pub fn cesaro_gap(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Argument("the empirical measure needs n >= 1".into()));
        }
        let lambda = self.lambda2();
        if lambda == 0.0 {
            return Err(Error::DegenerateSpectrum(
                "a + b = 1 gives a zero eigenvalue; use cesaro_gap_direct".into(),
            ));
        }
        let s = self.a + self.b;
        let start_minus = if self.y0 == -1 { 1.0 } else { 0.0 };
        let coefficient = start_minus - self.a / s;
        let geometric = (lambda - lambda.powi(n as i32 + 1)) / (1.0 - lambda);
        Ok(coefficient * geometric / n as f64)
    }

    /// The same gap by averaging the propagated marginals.
    pub fn cesaro_gap_direct(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Argument("the empirical measure needs n >= 1".into()));
        }
        let target = self.stationary().get(1);
        let laws = propagate_all(&self.start(), &self.kernel(), n)?;
        let sum: f64 = laws[1..].iter().map(|p| p.get(1) - target).sum();
        Ok(sum / n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;

    #[test]
    fn eigenvalues_match_generic_solver() {
        for (a, b) in [(0.2, 0.3), (0.9, 0.8), (1.0 / 3.0, 1.0 / 3.0), (0.05, 0.6)] {
            let aux = TwoStateAux::new(a, b, -1).unwrap();
            let m = Matrix2::new(1.0 - a, a, b, 1.0 - b);
            let mut eig: Vec<f64> = m.eigenvalues().unwrap().iter().copied().collect();
            eig.sort_by(|x, y| y.total_cmp(x));
            assert!((eig[0] - 1.0).abs() < 1e-12);
            assert!((eig[1] - aux.lambda2()).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_orientation() {
        let aux = TwoStateAux::new(0.2, 0.6, 1).unwrap();
        let pi = aux.stationary();
        assert!((pi.get(1) - 0.25).abs() < 1e-15);
        assert!(aux.kernel().stationarity_residual(&pi).unwrap() < 1e-15);
    }

    #[test]
    fn hand_evaluated_gap() {
        let aux = TwoStateAux::new(1.0 / 3.0, 1.0 / 3.0, -1).unwrap();
        assert!((aux.cesaro_gap(1).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn gap_decays_like_one_over_n() {
        let aux = TwoStateAux::new(1.0 / 3.0, 1.0 / 3.0, -1).unwrap();
        for n in [1000usize, 10_000, 100_000] {
            let scaled = aux.cesaro_gap(n).unwrap() * n as f64;
            assert!((scaled - 0.5 * 0.5).abs() < 1e-9, "{scaled}");
        }
    }

    #[test]
    fn closed_form_matches_direct_averaging_on_grid() {
        let grid = [0.05, 0.2, 0.35, 0.6, 0.85, 0.95];
        for &a in &grid {
            for &b in &grid {
                if (a + b - 1.0f64).abs() < 1e-9 {
                    continue;
                }
                for y0 in [1, -1] {
                    let aux = TwoStateAux::new(a, b, y0).unwrap();
                    let laws = propagate_all(&aux.start(), &aux.kernel(), 10_000).unwrap();
                    let target = aux.stationary().get(1);
                    let mut sum = 0.0;
                    for (n, law) in laws.iter().enumerate().skip(1) {
                        sum += law.get(1) - target;
                        let direct = sum / n as f64;
                        let closed = aux.cesaro_gap(n).unwrap();
                        assert!((closed - direct).abs() < 1e-12, "a={a} b={b} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let aux = TwoStateAux::new(0.4, 0.6, -1).unwrap();
        assert!(matches!(aux.cesaro_gap(3), Err(Error::DegenerateSpectrum(_))));
        assert!(aux.cesaro_gap_direct(3).unwrap().abs() < 1e-15);
        assert!(TwoStateAux::new(0.0, 0.5, 1).is_err());
        assert!(TwoStateAux::new(0.3, 0.5, 0).is_err());
        assert!(TwoStateAux::new(0.3, 0.5, 1).unwrap().cesaro_gap(0).is_err());
    }
}
