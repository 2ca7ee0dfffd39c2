//! Total-variation curves with bootstrap errors, and their CSV form.

use std::path::Path;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::marginals::MarginalEstimates;
use crate::error::{Error, Result};
use crate::prob::{check_len, tv_distance, FiniteDistribution};
use crate::samplers::seeded_stream;

/// Bootstrap resamples per checkpoint.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvRow {
    pub n: usize,
    pub tv: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvSeries {
    pub rows: Vec<TvRow>,
    /// `sqrt(S / R)`, the order of the plug-in bias; zero for exact series.
    pub noise_floor: f64,
}

impl TvSeries {
    pub fn new(rows: Vec<TvRow>, noise_floor: f64) -> Result<Self> {
        if rows.windows(2).any(|p| p[0].n >= p[1].n) {
            return Err(Error::Argument(
                "series checkpoints must increase strictly".into(),
            ));
        }
        if rows.iter().any(|r| !(0.0..=1.0 + 1e-12).contains(&r.tv)) {
            return Err(Error::Argument("total variation must lie in [0, 1]".into()));
        }
        Ok(Self { rows, noise_floor })
    }

    /// A noise-free series from exact laws.
    pub fn exact(ns: &[usize], laws: &[FiniteDistribution], target: &FiniteDistribution) -> Result<Self> {
        check_len(ns.len(), laws.len())?;
        let rows = ns
            .iter()
            .zip(laws)
            .map(|(n, law)| {
                Ok(TvRow {
                    n: *n,
                    tv: tv_distance(law, target)?,
                    stderr: 0.0,
                })
            })
            .collect::<Result<_>>()?;
        Self::new(rows, 0.0)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        for row in &self.rows {
            w.serialize(row).map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads `n,tv,stderr` rows; the noise floor is not stored in the file.
    pub fn read_csv(path: impl AsRef<Path>, noise_floor: f64) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<TvRow>, _>>()
            .map_err(|e| csv_error(path, e))?;
        Self::new(rows, noise_floor)
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!("checked io kind"),
        }
    } else {
        Error::Serialization(format!("{}: {e}", path.display()))
    }
}

/// Resamples `R` replicas with replacement, which for categorical data is a
/// multinomial draw with the observed frequencies.
fn bootstrap_counts<R: Rng + ?Sized>(probs: &[f64], replicas: u64, rng: &mut R) -> Vec<u64> {
    let mut left = replicas;
    let mut mass = 1.0;
    let mut out = Vec::with_capacity(probs.len());
    for (i, p) in probs.iter().enumerate() {
        let c = if i + 1 == probs.len() || left == 0 {
            left
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(left, q).expect("valid binomial").sample(rng)
        };
        out.push(c);
        left -= c;
        mass -= p;
    }
    out
}

/// TV of each checkpoint's histogram from `target`, with bootstrap standard errors.
pub fn tv_curve(est: &MarginalEstimates, target: &FiniteDistribution, seed: u64) -> Result<TvSeries> {
    check_len(est.states, target.len())?;
    let r = est.replicas();
    let mut rows = Vec::with_capacity(est.checkpoints.len());
    for (k, n) in est.checkpoints.iter().enumerate() {
        let p_hat = est.distribution(k);
        let tv = tv_distance(&p_hat, target)?;
        let mut rng = seeded_stream(seed, k as u64);
        let draws: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
            .map(|_| {
                let counts = bootstrap_counts(p_hat.probs(), r as u64, &mut rng);
                let q =
                    FiniteDistribution::from_computed(counts.iter().map(|c| *c as f64 / r as f64).collect());
                tv_distance(&q, target).expect("same length")
            })
            .collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
        rows.push(TvRow {
            n: *n,
            tv,
            stderr: var.sqrt(),
        });
    }
    TvSeries::new(rows, (est.states as f64 / r as f64).sqrt())
}
