//! Named bundles of acceptance criteria, run by `amcmc suite`.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::write_json;
use super::criteria::{run_criterion, CriterionOutcome};
use crate::error::{Error, Result};

pub const SUITES: &[(&str, &[u8])] = &[
    ("exact-verify", &[3, 4, 8, 9]),
    ("irmcmc-rate", &[2, 7]),
    ("ee-rate", &[5]),
    ("ladder-rate", &[6]),
    ("counterexample", &[1]),
    ("diagnostics", &[10]),
];

pub fn suite_criteria(name: &str) -> Result<&'static [u8]> {
    SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, ids)| *ids)
        .ok_or_else(|| Error::UnknownSuite(name.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub outcomes: Vec<CriterionOutcome>,
}

/// Runs every criterion of the suite. With `out`, writes `verdicts.json`
/// and one `criterion-<id>-<curve>.csv` per TV curve the criteria produce.
pub fn run_suite(name: &str, seed: u64, out: Option<&Path>) -> Result<SuiteReport> {
    let ids = suite_criteria(name)?;
    let outcomes = ids
        .iter()
        .map(|id| run_criterion(*id, seed))
        .collect::<Result<Vec<_>>>()?;
    let report = SuiteReport {
        suite: name.to_string(),
        seed,
        passed: outcomes.iter().all(|o| o.passed),
        outcomes,
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for o in &report.outcomes {
            for (label, series) in &o.series {
                series.write_csv(dir.join(format!("criterion-{}-{label}.csv", o.id)))?;
            }
        }
        write_json(&dir.join("verdicts.json"), &report)?;
    }
    Ok(report)
}
