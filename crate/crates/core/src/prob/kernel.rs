use rand::Rng;
use serde::{Deserialize, Serialize};

use super::distribution::{check_len, sample_index, FiniteDistribution};
use crate::error::{Error, Result};

/// Row-stochastic transition matrix; row `i` is the law of the next state from `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct KernelMatrix {
    size: usize,
    entries: Vec<f64>,
    cumulative: Vec<f64>,
}

impl KernelMatrix {
    pub const TOLERANCE: f64 = FiniteDistribution::TOLERANCE;

    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::InvalidKernel("empty kernel".into()));
        }
        let mut entries = Vec::with_capacity(size * size);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != size {
                return Err(Error::InvalidKernel(format!(
                    "row {i} has {} entries, expected {size}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        Self::from_flat(size, entries)
    }

    pub fn from_flat(size: usize, entries: Vec<f64>) -> Result<Self> {
        check_len(size * size, entries.len())?;
        for (i, row) in entries.chunks(size).enumerate() {
            FiniteDistribution::new(row.to_vec())
                .map_err(|e| Error::InvalidKernel(format!("row {i}: {e}")))?;
        }
        Ok(Self::from_computed(size, entries))
    }

    /// Wraps exact arithmetic output; rows are stochastic up to rounding.
    pub(crate) fn from_computed(size: usize, entries: Vec<f64>) -> Self {
        let entries: Vec<f64> = entries.into_iter().map(|p| p.max(0.0)).collect();
        let cumulative = entries
            .chunks(size)
            .flat_map(|row| {
                row.iter().scan(0.0, |acc, p| {
                    *acc += p;
                    Some(*acc)
                })
            })
            .collect();
        Self {
            size,
            entries,
            cumulative,
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut entries = vec![0.0; size * size];
        for i in 0..size {
            entries[i * size + i] = 1.0;
        }
        Self::from_computed(size, entries)
    }

    /// Kernel whose every row is `dist`.
    pub fn constant(dist: &FiniteDistribution) -> Self {
        let size = dist.len();
        let entries = (0..size).flat_map(|_| dist.probs().iter().copied()).collect();
        Self::from_computed(size, entries)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.size + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.entries[from * self.size..(from + 1) * self.size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.size)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// `pK` for a row vector `p`.
    pub fn apply(&self, p: &FiniteDistribution) -> Result<FiniteDistribution> {
        check_len(self.size, p.len())?;
        Ok(FiniteDistribution::from_computed(self.apply_slice(p.probs())))
    }

    pub(crate) fn apply_slice(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size];
        for (pi, row) in p.iter().zip(self.rows()) {
            if *pi == 0.0 {
                continue;
            }
            for (o, k) in out.iter_mut().zip(row) {
                *o += pi * k;
            }
        }
        out
    }

    /// Matrix product `self * other` (first `self`, then `other`).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_len(self.size, other.size)?;
        let n = self.size;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        Ok(Self::from_computed(n, out))
    }

    pub fn power(&self, exponent: usize) -> Self {
        let mut result = Self::identity(self.size);
        let mut base = self.clone();
        let mut e = exponent;
        while e > 0 {
            if e & 1 == 1 {
                result = result.compose(&base).expect("same size");
            }
            e >>= 1;
            if e > 0 {
                base = base.compose(&base).expect("same size");
            }
        }
        result
    }

    /// Draws the next state from row `from`.
    pub fn sample<R: Rng + ?Sized>(&self, from: usize, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.quantile(from, u)
    }

    pub fn quantile(&self, from: usize, u: f64) -> usize {
        let cum = &self.cumulative[from * self.size..(from + 1) * self.size];
        let last = cum[self.size - 1];
        let target = u * last;
        match cum.iter().position(|c| target < *c) {
            Some(j) => j,
            None => sample_index(self.row(from), 2.0),
        }
    }

    /// Whether every state reaches every other state through positive entries.
    pub fn check_irreducible(&self) -> Result<()> {
        let n = self.size;
        for forward in [true, false] {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    let edge = if forward { self.get(i, j) } else { self.get(j, i) };
                    if edge > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            if let Some(missing) = seen.iter().position(|s| !s) {
                let (from, to) = if forward { (0, missing) } else { (missing, 0) };
                return Err(Error::Reducible { from, to });
            }
        }
        Ok(())
    }

    /// `|| pi K - pi ||_1`.
    pub fn stationarity_residual(&self, pi: &FiniteDistribution) -> Result<f64> {
        self.apply(pi)?.l1_distance(pi)
    }
}

impl TryFrom<Vec<Vec<f64>>> for KernelMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<KernelMatrix> for Vec<Vec<f64>> {
    fn from(k: KernelMatrix) -> Self {
        k.to_rows()
    }
}

/// Metropolis-Hastings kernel for `target` built from a proposal matrix.
pub fn metropolis_kernel(target: &FiniteDistribution, proposal: &KernelMatrix) -> Result<KernelMatrix> {
    check_len(target.len(), proposal.size())?;
    let n = target.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        let pi_i = target.get(i);
        let mut stay = 1.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let q = proposal.get(i, j);
            if q == 0.0 {
                continue;
            }
            let accept = if pi_i == 0.0 {
                1.0
            } else {
                let back = proposal.get(j, i);
                (target.get(j) * back / (pi_i * q)).min(1.0)
            };
            entries[i * n + j] = q * accept;
            stay -= q * accept;
        }
        entries[i * n + i] = stay.max(0.0);
    }
    Ok(KernelMatrix::from_computed(n, entries))
}
