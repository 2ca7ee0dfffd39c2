//! Mean squared error of normalized ergodic sums,
//! `E (n^{-1/2} sum_{i<=n} (f(X_i) - pi f))^2`, over replicated runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fewer replicas than this attach a precision warning.
pub const MIN_MSE_REPLICAS: usize = 100;

/// Streams `f(X_1), f(X_2), ...` of one run and records the squared
/// normalized sum at each checkpoint.
#[derive(Debug, Clone)]
pub struct ErgodicAccumulator {
    pi_f: f64,
    checkpoints: Vec<usize>,
    next: usize,
    count: usize,
    sum: f64,
    squares: Vec<f64>,
}

impl ErgodicAccumulator {
    pub fn new(pi_f: f64, checkpoints: &[usize]) -> Result<Self> {
        if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::Argument(
                "checkpoints must be positive and strictly increasing".into(),
            ));
        }
        Ok(Self {
            pi_f,
            checkpoints: checkpoints.to_vec(),
            next: 0,
            count: 0,
            sum: 0.0,
            squares: Vec::with_capacity(checkpoints.len()),
        })
    }

    pub fn push(&mut self, value: f64) {
        self.count += 1;
        self.sum += value - self.pi_f;
        if self.next < self.checkpoints.len() && self.count == self.checkpoints[self.next] {
            self.squares.push(self.sum * self.sum / self.count as f64);
            self.next += 1;
        }
    }

    pub fn is_complete(&self) -> bool {
        self.next == self.checkpoints.len()
    }

    /// Squared normalized sums, one per checkpoint.
    pub fn finish(self) -> Result<Vec<f64>> {
        if !self.is_complete() {
            return Err(Error::Argument(format!(
                "run of length {} stops before checkpoint {}",
                self.count, self.checkpoints[self.next]
            )));
        }
        Ok(self.squares)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub n: usize,
    pub mse: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseSeries {
    pub rows: Vec<MseRow>,
    pub replicas: usize,
    pub warnings: Vec<String>,
}

impl MseSeries {
    /// Largest over smallest MSE among checkpoints with `n >= n_min`.
    pub fn spread_from(&self, n_min: usize) -> Option<f64> {
        let tail: Vec<f64> = self.rows.iter().filter(|r| r.n >= n_min).map(|r| r.mse).collect();
        let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
        (tail.len() >= 2 && min > 0.0).then(|| max / min)
    }
}

/// Averages per-replica squared sums into an MSE series with standard errors.
pub fn aggregate_mse(checkpoints: &[usize], per_replica: &[Vec<f64>]) -> Result<MseSeries> {
    let r = per_replica.len();
    if r == 0 {
        return Err(Error::Argument("no replicas".into()));
    }
    for v in per_replica {
        if v.len() != checkpoints.len() {
            return Err(Error::Dimension {
                expected: checkpoints.len(),
                got: v.len(),
            });
        }
    }
    let rf = r as f64;
    let rows = checkpoints
        .iter()
        .enumerate()
        .map(|(k, n)| {
            let mean = per_replica.iter().map(|v| v[k]).sum::<f64>() / rf;
            let var = if r > 1 {
                per_replica.iter().map(|v| (v[k] - mean).powi(2)).sum::<f64>() / (rf - 1.0)
            } else {
                0.0
            };
            MseRow {
                n: *n,
                mse: mean,
                stderr: (var / rf).sqrt(),
            }
        })
        .collect();
    let mut warnings = Vec::new();
    if r < MIN_MSE_REPLICAS {
        warnings.push(format!("only {r} replicas; MSE estimates are imprecise"));
    }
    Ok(MseSeries {
        rows,
        replicas: r,
        warnings,
    })
}

/// MSE series from stored traces.
pub fn ergodic_mse<S>(
    traces: &[Vec<S>],
    f: impl Fn(&S) -> f64,
    pi_f: f64,
    checkpoints: &[usize],
) -> Result<MseSeries> {
    let per_replica = traces
        .iter()
        .map(|trace| {
            let mut acc = ErgodicAccumulator::new(pi_f, checkpoints)?;
            for x in trace {
                if acc.is_complete() {
                    break;
                }
                acc.push(f(x));
            }
            acc.finish()
        })
        .collect::<Result<Vec<_>>>()?;
    aggregate_mse(checkpoints, &per_replica)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_function_has_zero_mse() {
        let traces = vec![vec![1u8, 2, 3, 4]; 5];
        let s = ergodic_mse(&traces, |_| 0.7, 0.7, &[1, 2, 4]).unwrap();
        assert!(s.rows.iter().all(|r| r.mse == 0.0));
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn iid_sums_approach_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = 0.3;
        let traces: Vec<Vec<bool>> = (0..4000)
            .map(|_| (0..256).map(|_| rng.random::<f64>() < p).collect())
            .collect();
        let s = ergodic_mse(&traces, |x| f64::from(u8::from(*x)), p, &[16, 64, 256]).unwrap();
        for row in &s.rows {
            assert!((row.mse - p * (1.0 - p)).abs() < 4.0 * row.stderr, "{row:?}");
        }
        assert!(s.warnings.is_empty());
        assert!(s.spread_from(16).unwrap() < 1.2);
    }

    #[test]
    fn short_trace_and_bad_grid_rejected() {
        let traces = vec![vec![0.0f64; 3]];
        assert!(ergodic_mse(&traces, |x| *x, 0.0, &[2, 4]).is_err());
        assert!(ErgodicAccumulator::new(0.0, &[4, 4]).is_err());
        assert!(ErgodicAccumulator::new(0.0, &[0, 4]).is_err());
    }
}
