//! Weighted empirical measure with an append-only Fenwick index.
//!
//! Weights are stored raw; normalization happens only when sampling or
//! integrating, so proportional weights are enough.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct WeightedEmpirical<S> {
    states: Vec<S>,
    weights: Vec<f64>,
    // 1-based Fenwick array; tree[0] is unused.
    tree: Vec<f64>,
    total: f64,
}

impl<S> Default for WeightedEmpirical<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S> WeightedEmpirical<S> {
    pub fn new() -> Self {
        Self::with_capacity(0)
    }

    pub fn with_capacity(capacity: usize) -> Self {
        let mut tree = Vec::with_capacity(capacity + 1);
        tree.push(0.0);
        Self {
            states: Vec::with_capacity(capacity),
            weights: Vec::with_capacity(capacity),
            tree,
            total: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Running sum of all pushed weights.
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn entries(&self) -> impl Iterator<Item = (&S, f64)> {
        self.states.iter().zip(self.weights.iter().copied())
    }

    /// Appends `(state, weight)` in `O(log n)`.
    pub fn push(&mut self, state: S, weight: f64) -> Result<()> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::Domain(format!(
                "reservoir weight must be finite and non-negative, got {weight}"
            )));
        }
        let i = self.states.len() + 1;
        let low = i & i.wrapping_neg();
        let mut node = weight;
        let mut j = i - 1;
        while j > i - low {
            node += self.tree[j];
            j &= j - 1;
        }
        self.tree.push(node);
        self.states.push(state);
        self.weights.push(weight);
        self.total += weight;
        Ok(())
    }

    /// Sum of the first `count` weights.
    pub fn prefix_sum(&self, count: usize) -> f64 {
        let mut i = count.min(self.len());
        let mut acc = 0.0;
        while i > 0 {
            acc += self.tree[i];
            i &= i - 1;
        }
        acc
    }

    /// Normalized mass of entry `index`.
    pub fn probability(&self, index: usize) -> f64 {
        if self.total > 0.0 {
            self.weights[index] / self.total
        } else {
            0.0
        }
    }

    /// Entry index selected by `u` in `[0, 1)`: the first entry whose
    /// cumulative weight exceeds `u * total`.
    pub fn index_at(&self, u: f64) -> Result<usize> {
        let n = self.len();
        if n == 0 {
            return Err(Error::State("cannot sample from an empty reservoir".into()));
        }
        let total = self.prefix_sum(n);
        if total <= 0.0 {
            return Err(Error::State(
                "cannot sample from a reservoir with zero total weight".into(),
            ));
        }
        let mut remaining = u * total;
        let mut pos = 0usize;
        let mut step = 1usize << (usize::BITS - 1 - n.leading_zeros());
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= remaining {
                pos = next;
                remaining -= self.tree[next];
            }
            step >>= 1;
        }
        if pos < n {
            Ok(pos)
        } else {
            Ok(self
                .weights
                .iter()
                .rposition(|w| *w > 0.0)
                .expect("positive total implies a positive weight"))
        }
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        self.index_at(rng.random::<f64>())
    }

    /// `sum_j w_j f(s_j) / sum_j w_j`.
    pub fn expectation(&self, f: impl Fn(&S) -> f64) -> Result<f64> {
        if self.is_empty() || self.total <= 0.0 {
            return Err(Error::State("expectation under an empty reservoir".into()));
        }
        let acc: f64 = self.entries().map(|(s, w)| w * f(s)).sum();
        Ok(acc / self.total)
    }
}

impl<S: Clone> WeightedEmpirical<S> {
    /// Draws a stored state with probability proportional to its weight.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<S> {
        let i = self.sample_index(rng)?;
        Ok(self.states[i].clone())
    }
}
