use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability mass function over the states `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FiniteDistribution {
    probs: Vec<f64>,
}

impl FiniteDistribution {
    /// Tolerance on the total mass.
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is {p}, expected a finite non-negative mass"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > Self::TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total:.17}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Normalizes non-negative weights into a distribution.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Ok(Self {
            probs: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn point(len: usize, state: usize) -> Result<Self> {
        if state >= len {
            return Err(Error::Dimension {
                expected: len,
                got: state + 1,
            });
        }
        let mut probs = vec![0.0; len];
        probs[state] = 1.0;
        Ok(Self { probs })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        Ok(Self {
            probs: vec![1.0 / len as f64; len],
        })
    }

    /// Wraps the output of an exact linear computation without re-validating
    /// the total mass; callers guarantee non-negativity and unit mass up to
    /// rounding.
    pub(crate) fn from_computed(probs: Vec<f64>) -> Self {
        debug_assert!(probs.iter().all(|p| p.is_finite()));
        Self {
            probs: probs.into_iter().map(|p| p.max(0.0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, state: usize) -> f64 {
        self.probs[state]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub fn expectation(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.probs.iter().enumerate().map(|(i, p)| p * f(i)).sum()
    }

    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        check_len(self.len(), other.len())?;
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(p, q)| (p - q).abs())
            .sum())
    }

    /// Draws a state by inverse-CDF lookup of `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> usize {
        sample_index(&self.probs, u)
    }

    /// Marginal over the first factor of a row-major product space `len = outer * inner`.
    pub fn outer_marginal(&self, inner: usize) -> Result<Self> {
        if inner == 0 || !self.len().is_multiple_of(inner) {
            return Err(Error::Dimension {
                expected: inner,
                got: self.len(),
            });
        }
        Ok(Self::from_computed(
            self.probs.chunks(inner).map(|c| c.iter().sum()).collect(),
        ))
    }

    /// Marginal over the second factor of a row-major product space.
    pub fn inner_marginal(&self, inner: usize) -> Result<Self> {
        if inner == 0 || !self.len().is_multiple_of(inner) {
            return Err(Error::Dimension {
                expected: inner,
                got: self.len(),
            });
        }
        let mut out = vec![0.0; inner];
        for chunk in self.probs.chunks(inner) {
            for (o, p) in out.iter_mut().zip(chunk) {
                *o += p;
            }
        }
        Ok(Self::from_computed(out))
    }
}

impl TryFrom<Vec<f64>> for FiniteDistribution {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<FiniteDistribution> for Vec<f64> {
    fn from(d: FiniteDistribution) -> Self {
        d.probs
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}

/// Inverse-CDF lookup by linear scan. Falls back to the last state with
/// positive mass when rounding leaves `u` beyond the accumulated total.
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

/// Total-variation distance `(1/2) * sum |p_i - q_i|`.
pub fn tv_distance(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    Ok(0.5 * p.l1_distance(q)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist(v: &[f64]) -> FiniteDistribution {
        FiniteDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&dist(&[0.5, 0.5]), &dist(&[0.5, 0.5])).unwrap(), 0.0);
        assert_eq!(tv_distance(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap(), 1.0);
        let tv = tv_distance(&dist(&[0.7, 0.3]), &dist(&[0.5, 0.5])).unwrap();
        assert!((tv - 0.2).abs() < 1e-15);
    }

    #[test]
    fn tv_length_mismatch() {
        let err = tv_distance(&dist(&[1.0]), &dist(&[0.5, 0.5])).unwrap_err();
        assert!(matches!(err, Error::Dimension { expected: 1, got: 2 }));
    }

    #[test]
    fn rejects_bad_masses() {
        assert!(FiniteDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(FiniteDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(FiniteDistribution::new(vec![]).is_err());
        assert!(FiniteDistribution::new(vec![f64::NAN, 1.0]).is_err());
        assert!(FiniteDistribution::new(vec![0.25; 4]).is_ok());
    }

    #[test]
    fn marginals_of_product_space() {
        let joint = dist(&[0.375, 0.25, 0.125, 0.25]);
        assert_eq!(joint.outer_marginal(2).unwrap().probs(), &[0.625, 0.375]);
        assert_eq!(joint.inner_marginal(2).unwrap().probs(), &[0.5, 0.5]);
    }

    fn arb_pair(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        (1..=max_len).prop_flat_map(|n| {
            (
                prop::collection::vec(0.0f64..1.0, n),
                prop::collection::vec(0.0f64..1.0, n),
                prop::collection::vec(0.0f64..1.0, n),
            )
        })
    }

    fn normalize(v: Vec<f64>) -> FiniteDistribution {
        let mut v = v;
        v[0] += 1e-3;
        FiniteDistribution::from_weights(v).unwrap()
    }

    proptest! {
        #[test]
        fn tv_is_a_bounded_symmetric_metric((a, b, c) in arb_pair(12)) {
            let (p, q, r) = (normalize(a), normalize(b), normalize(c));
            let pq = tv_distance(&p, &q).unwrap();
            let qp = tv_distance(&q, &p).unwrap();
            prop_assert!((0.0..=1.0 + 1e-15).contains(&pq));
            prop_assert_eq!(pq, qp);
            let pr = tv_distance(&p, &r).unwrap();
            let rq = tv_distance(&r, &q).unwrap();
            prop_assert!(pq <= pr + rq + 1e-15);
        }

        #[test]
        fn tv_matches_sign_vector_maximum((a, b, _) in arb_pair(12)) {
            let (p, q) = (normalize(a), normalize(b));
            let s = p.len();
            let mut best = f64::NEG_INFINITY;
            for mask in 0u32..(1 << s) {
                let v: f64 = (0..s)
                    .map(|i| {
                        let f = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
                        f * (p.get(i) - q.get(i))
                    })
                    .sum();
                best = best.max(v);
            }
            let tv = tv_distance(&p, &q).unwrap();
            prop_assert!((tv - 0.5 * best).abs() < 1e-14);
        }
    }
}
