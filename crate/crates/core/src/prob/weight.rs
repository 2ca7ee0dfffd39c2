use serde::{Deserialize, Serialize};

use super::distribution::{check_len, FiniteDistribution};
use crate::error::{Error, Result};

/// Importance weight `w = pi / pi_Y` tabulated on a finite state space, with
/// its supremum cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    values: Vec<f64>,
    sup: f64,
}

impl WeightFunction {
    /// Builds `w(s) = target(s) / aux(s)`. States outside the target support get
    /// weight 0; target mass on an auxiliary-null state makes `w` unbounded.
    pub fn from_densities(target: &FiniteDistribution, aux: &FiniteDistribution) -> Result<Self> {
        check_len(target.len(), aux.len())?;
        let mut values = Vec::with_capacity(target.len());
        for (s, (p, q)) in target.probs().iter().zip(aux.probs()).enumerate() {
            if *p == 0.0 {
                values.push(0.0);
            } else if *q == 0.0 {
                return Err(Error::Domain(format!(
                    "state {s} has target mass {p} but no auxiliary mass: weight is unbounded"
                )));
            } else {
                values.push(p / q);
            }
        }
        Self::from_values(values)
    }

    /// Unnormalized weights; only proportionality matters for resampling.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("empty weight table".into()));
        }
        if let Some((s, w)) = values
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::Domain(format!("weight at state {s} is {w}")));
        }
        let sup = values.iter().copied().fold(0.0, f64::max);
        Ok(Self { values, sup })
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            values: vec![1.0; len],
            sup: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, state: usize) -> f64 {
        self.values[state]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `|w|_inf`.
    pub fn sup(&self) -> f64 {
        self.sup
    }

    /// Reweights `base` by `w` and normalizes: the measure `w * base / base(w)`.
    pub fn tilt(&self, base: &FiniteDistribution) -> Result<FiniteDistribution> {
        check_len(self.len(), base.len())?;
        FiniteDistribution::from_weights(
            base.probs()
                .iter()
                .zip(&self.values)
                .map(|(p, w)| p * w)
                .collect(),
        )
    }

    /// Metropolis ratio `1 ∧ w(z)/w(x)` used by the equi-energy move.
    pub fn acceptance(&self, from: usize, to: usize) -> Result<f64> {
        acceptance_ratio(self.value(from), self.value(to))
    }
}

/// `1 ∧ w_to / w_from`; a zero weight at the current state is a domain error.
pub fn acceptance_ratio(w_from: f64, w_to: f64) -> Result<f64> {
    if w_from <= 0.0 {
        return Err(Error::Domain("current state has zero importance weight".into()));
    }
    Ok((w_to / w_from).min(1.0))
}
