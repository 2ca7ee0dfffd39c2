//! TOML experiment files and the runner behind `amcmc run`.
//!
//! ```toml
//! [model]
//! kind = "finite"                 # or "mixture"
//! target = [0.5, 0.5]
//! aux_target = [0.5, 0.5]
//! base = [[0.5, 0.5], [0.5, 0.5]]
//! aux = [[0.667, 0.333], [0.333, 0.667]]
//!
//! [algorithm]
//! kind = "irmcmc"                 # "ee" or "modified-ee"
//! epsilon = 0.3
//! x0 = 0
//! y0 = 1
//!
//! [experiment]
//! n_max = 4096
//! checkpoints = [16, 64, 256]     # optional, dyadic 1..=n_max by default
//! replicas = 10000
//! seed = 7
//! output = "results/example"
//! fit_window = [16, 4096]         # optional
//! ```
//!
//! A mixture model replaces the matrices with `components`
//! (`{ weight, mean, sd }` tables), `temperature`, `interval = [lo, hi]`,
//! `base = { kind = "random-walk", step = 1.0 }` or `{ kind = "exact-draw" }`,
//! `aux_step`, and `bins`, the histogram resolution used for TV.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::fit::{fit_rate, RateFit};
use super::marginals::{check_checkpoints, dyadic_checkpoints, estimate_marginals, MarginalEstimates};
use super::tv::{tv_curve, TvSeries};
use crate::error::{Error, Result};
use crate::prob::{FiniteDistribution, KernelMatrix};
use crate::samplers::{Algorithm, BaseMove, ChainConfig, Component, FiniteModel, MixtureDemo};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Finite {
        target: Vec<f64>,
        aux_target: Vec<f64>,
        base: Vec<Vec<f64>>,
        aux: Vec<Vec<f64>>,
    },
    Mixture {
        components: Vec<Component>,
        temperature: f64,
        interval: (f64, f64),
        base: BaseMove,
        aux_step: f64,
        bins: usize,
    },
}

impl ModelSpec {
    pub fn finite_model(&self) -> Result<FiniteModel> {
        match self {
            Self::Finite {
                target,
                aux_target,
                base,
                aux,
            } => FiniteModel::new(
                FiniteDistribution::new(target.clone())?,
                FiniteDistribution::new(aux_target.clone())?,
                KernelMatrix::new(base.clone())?,
                KernelMatrix::new(aux.clone())?,
            ),
            Self::Mixture { .. } => Err(Error::Config("operation needs a finite model".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub kind: Algorithm,
    pub epsilon: f64,
    pub x0: f64,
    pub y0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub n_max: usize,
    #[serde(default)]
    pub checkpoints: Option<Vec<usize>>,
    pub replicas: usize,
    pub seed: u64,
    pub output: PathBuf,
    #[serde(default)]
    pub fit_window: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub algorithm: AlgorithmSpec,
    pub experiment: ExperimentSpec,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn checkpoints(&self) -> Vec<usize> {
        self.experiment
            .checkpoints
            .clone()
            .unwrap_or_else(|| dyadic_checkpoints(1, self.experiment.n_max))
    }

    fn validate(&self) -> Result<()> {
        let eps = self.algorithm.epsilon;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Config(format!("epsilon must lie in (0, 1), got {eps}")));
        }
        if self.experiment.replicas == 0 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        let checkpoints = self.checkpoints();
        check_checkpoints(&checkpoints)?;
        if checkpoints.last().is_some_and(|c| *c > self.experiment.n_max) {
            return Err(Error::Config(format!(
                "checkpoint {} exceeds n_max = {}",
                checkpoints[checkpoints.len() - 1],
                self.experiment.n_max
            )));
        }
        if let ModelSpec::Mixture { bins, .. } = self.model {
            if bins == 0 {
                return Err(Error::Config("bins must be at least 1".into()));
            }
        }
        Ok(())
    }
}

fn state_index(value: f64, what: &str, states: usize) -> Result<usize> {
    if value.fract() != 0.0 || value < 0.0 || value >= states as f64 {
        return Err(Error::Config(format!(
            "{what} = {value} is not a state index in 0..{states}"
        )));
    }
    Ok(value as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub replicas: usize,
    pub seed: u64,
    pub states: usize,
    pub noise_floor: f64,
    pub series: TvSeries,
    pub fit: Option<RateFit>,
    pub warnings: Vec<String>,
}

/// Runs the experiment and writes `tv.csv` and `summary.json` into the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    let checkpoints = config.checkpoints();
    let exp = &config.experiment;
    let alg = &config.algorithm;
    let (estimates, target): (MarginalEstimates, FiniteDistribution) = match &config.model {
        ModelSpec::Finite { .. } => {
            let model = config.model.finite_model()?;
            let s = model.size();
            let cfg = ChainConfig {
                algorithm: alg.kind,
                epsilon: alg.epsilon,
                x0: state_index(alg.x0, "x0", s)?,
                y0: state_index(alg.y0, "y0", s)?,
                record_aux: false,
            };
            let est = estimate_marginals(&model, &cfg, &checkpoints, exp.replicas, exp.seed, s, |x| x)?;
            (est, model.target().clone())
        }
        ModelSpec::Mixture {
            components,
            temperature,
            interval,
            base,
            aux_step,
            bins,
        } => {
            let demo = MixtureDemo::new(components.clone(), *temperature, *interval, *base, *aux_step)?;
            let cfg = ChainConfig {
                algorithm: alg.kind,
                epsilon: alg.epsilon,
                x0: alg.x0,
                y0: alg.y0,
                record_aux: false,
            };
            let est = estimate_marginals(&demo, &cfg, &checkpoints, exp.replicas, exp.seed, *bins, |x| {
                demo.bin_of(x, *bins)
            })?;
            (est, demo.bin_probabilities(*bins)?)
        }
    };
    let series = tv_curve(&estimates, &target, exp.seed)?;
    let mut warnings = Vec::new();
    if estimates.low_precision() {
        warnings.push("a single replica gives point-mass estimates only".to_string());
    }
    let fit = match exp.fit_window {
        Some(window) => match fit_rate(&series, window) {
            Ok(f) => Some(f),
            Err(e) => {
                warnings.push(e.to_string());
                None
            }
        },
        None => None,
    };
    let summary = ExperimentSummary {
        algorithm: alg.kind,
        epsilon: alg.epsilon,
        replicas: exp.replicas,
        seed: exp.seed,
        states: target.len(),
        noise_floor: series.noise_floor,
        series,
        fit,
        warnings,
    };
    fs::create_dir_all(&exp.output).map_err(|e| Error::io(&exp.output, e))?;
    summary.series.write_csv(exp.output.join("tv.csv"))?;
    write_json(&exp.output.join("summary.json"), &summary)?;
    Ok(summary)
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Serialization(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_config(output: &Path) -> String {
        format!(
            r#"
[model]
kind = "finite"
target = [0.5, 0.5]
aux_target = [0.5, 0.5]
base = [[0.5, 0.5], [0.5, 0.5]]
aux = [[0.6, 0.4], [0.4, 0.6]]

[algorithm]
kind = "irmcmc"
epsilon = 0.3
x0 = 0
y0 = 1

[experiment]
n_max = 64
replicas = 2000
seed = 5
output = "{}"
fit_window = [4, 64]
"#,
            output.display()
        )
    }

    #[test]
    fn finite_run_writes_identical_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let config = ExperimentConfig::from_toml_str(&finite_config(&out)).unwrap();
        assert_eq!(config.checkpoints(), vec![1, 2, 4, 8, 16, 32, 64]);
        let summary = run_experiment(&config).unwrap();
        assert_eq!(summary.series.rows.len(), 7);
        // the tail sits at the noise floor, so the fit is refused with a warning
        assert!(summary.fit.is_none() && !summary.warnings.is_empty());
        let first = (
            fs::read(out.join("tv.csv")).unwrap(),
            fs::read(out.join("summary.json")).unwrap(),
        );
        run_experiment(&config).unwrap();
        assert_eq!(first.0, fs::read(out.join("tv.csv")).unwrap());
        assert_eq!(first.1, fs::read(out.join("summary.json")).unwrap());
    }

    #[test]
    fn mixture_run() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!(
            r#"
[model]
kind = "mixture"
components = [{{ weight = 0.5, mean = -2.0, sd = 0.5 }}, {{ weight = 0.5, mean = 2.0, sd = 0.5 }}]
temperature = 0.3
interval = [-6.0, 6.0]
base = {{ kind = "random-walk", step = 0.5 }}
aux_step = 2.0
bins = 6

[algorithm]
kind = "ee"
epsilon = 0.2
x0 = -2.0
y0 = -2.0

[experiment]
n_max = 32
replicas = 50
seed = 1
output = "{}"
"#,
            dir.path().display()
        );
        let config = ExperimentConfig::from_toml_str(&text).unwrap();
        let summary = run_experiment(&config).unwrap();
        assert_eq!(summary.states, 6);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let out = Path::new("unused");
        let base = finite_config(out);
        for (from, to) in [
            ("epsilon = 0.3", "epsilon = 1.0"),
            ("replicas = 2000", "replicas = 0"),
            ("n_max = 64", "n_max = 64\ncheckpoints = [8, 128]"),
            ("seed = 5", "seed = 5\nsed = 1"),
            ("kind = \"irmcmc\"", "kind = \"gibbs\""),
        ] {
            let text = base.replace(from, to);
            assert!(
                matches!(ExperimentConfig::from_toml_str(&text), Err(Error::Config(_))),
                "{to}"
            );
        }
        let bad_start = ExperimentConfig::from_toml_str(&base.replace("x0 = 0", "x0 = 0.5")).unwrap();
        assert!(run_experiment(&bad_start).is_err());
        assert!(matches!(
            ExperimentConfig::load("/nonexistent/config.toml"),
            Err(Error::Io { .. })
        ));
    }
}
