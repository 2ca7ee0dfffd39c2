//! Exact computations on a finite model file, behind `amcmc exact`.
//!
//! The file holds a finite `[model]` table (as in experiment configs) and
//!
//! ```toml
//! [exact]
//! n = 32          # horizon
//! epsilon = 0.3   # optional, default 0.5
//! x0 = 0          # optional, default 0
//! y0 = 0          # optional, default 0
//! ```

use std::fs;
use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use super::config::ModelSpec;
use super::marginals::dyadic_checkpoints;
use crate::diagnostics::{assumption_y_check, b_n_exact, b_n_sequence, marginal_bound, phi_tail_check};
use crate::error::{Error, Result};
use crate::exact::{
    ee_joint_kernel, eta_oracle, eta_sequence, exact_irmcmc_law, modified_ee_joint_kernel,
    stationary_distribution,
};
use crate::prob::{tv_distance, FiniteDistribution};
use crate::samplers::FiniteModel;

pub const EXACT_OPS: &[&str] = &[
    "stationary",
    "eta",
    "b-n",
    "irmcmc-law",
    "ee-joint",
    "assumption",
    "phi",
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactParams {
    pub n: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub x0: usize,
    #[serde(default)]
    pub y0: usize,
}

fn default_epsilon() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactFile {
    pub model: ModelSpec,
    pub exact: ExactParams,
}

impl ExactFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }
}

/// Runs one named operation and returns its result as JSON.
pub fn run_exact_op(file: &ExactFile, op: &str) -> Result<Value> {
    let model = file.model.finite_model()?;
    let p = &file.exact;
    let s = model.size();
    for (name, v) in [("x0", p.x0), ("y0", p.y0)] {
        if v >= s {
            return Err(Error::Config(format!(
                "{name} = {v} is not a state index in 0..{s}"
            )));
        }
    }
    if !(p.epsilon > 0.0 && p.epsilon < 1.0) {
        return Err(Error::Config(format!(
            "epsilon must lie in (0, 1), got {}",
            p.epsilon
        )));
    }
    let value = match op {
        "stationary" => stationary(&model)?,
        "eta" => {
            let eta = eta_oracle(model.aux(), p.y0, model.weights(), p.n)?;
            json!({ "n": p.n, "eta": eta, "tv_to_target": tv_distance(&eta, model.target())? })
        }
        "b-n" => {
            let report = b_n_exact(model.aux(), p.y0, model.weights(), model.aux_target(), p.n)?;
            let seq = b_n_sequence(model.aux(), p.y0, model.weights(), model.aux_target(), p.n)?;
            json!({
                "report": report,
                "marginal_bound": marginal_bound(p.epsilon, &seq, p.n)?,
            })
        }
        "irmcmc-law" => {
            let etas = eta_sequence(model.aux(), p.y0, model.weights(), p.n)?;
            let law = exact_irmcmc_law(model.base(), p.epsilon, &etas, p.x0, p.n)?;
            json!({ "n": p.n, "law": law, "tv_to_target": tv_distance(&law, model.target())? })
        }
        "ee-joint" => {
            let pure = joint_summary(
                &stationary_distribution(&ee_joint_kernel(model.aux(), model.target(), model.aux_target())?)?,
                s,
            )?;
            let modified = joint_summary(
                &stationary_distribution(&modified_ee_joint_kernel(
                    model.base(),
                    model.aux(),
                    model.target(),
                    model.aux_target(),
                    p.epsilon,
                )?)?,
                s,
            )?;
            json!({ "proposal_only": pure, "modified": modified, "target": model.target() })
        }
        "assumption" => {
            let grid = dyadic_checkpoints(1, p.n.max(1));
            json!(assumption_y_check(
                model.aux(),
                p.y0,
                model.weights(),
                model.aux_target(),
                &grid
            )?)
        }
        "phi" => json!(phi_tail_check(model.weights(), model.aux_target())?),
        other => {
            return Err(Error::Argument(format!(
                "unknown exact op `{other}`; expected one of {}",
                EXACT_OPS.join(", ")
            )))
        }
    };
    Ok(json!({ "op": op, "result": value }))
}

fn stationary(model: &FiniteModel) -> Result<Value> {
    let base = stationary_distribution(model.base())?;
    let aux = stationary_distribution(model.aux())?;
    Ok(json!({
        "base": base,
        "aux": aux,
        "base_error": base.l1_distance(model.target())?,
        "aux_error": aux.l1_distance(model.aux_target())?,
    }))
}

/// Joint law over x-major pairs and its x-marginal.
fn joint_summary(joint: &FiniteDistribution, s: usize) -> Result<Value> {
    Ok(json!({ "joint": joint, "x_marginal": joint.outer_marginal(s)? }))
}
