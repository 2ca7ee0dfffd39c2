//! Replicated experiments: marginal histograms, TV curves, rate fits,
//! TOML-configured runs and the acceptance criteria.

pub mod config;
pub mod criteria;
pub mod exact_ops;
pub mod fit;
pub mod marginals;
pub mod models;
pub mod suite;
pub mod tv;

pub use config::{run_experiment, ExperimentConfig, ExperimentSummary, ModelSpec};
pub use criteria::{run_criterion, CriterionOutcome, CRITERIA, DEFAULT_SEED};
pub use exact_ops::{run_exact_op, ExactFile, EXACT_OPS};
pub use fit::{fit_rate, RateFit};
pub use marginals::{dyadic_checkpoints, estimate_ladder_marginals, estimate_marginals, MarginalEstimates};
pub use suite::{run_suite, suite_criteria, SuiteReport, SUITES};
pub use tv::{tv_curve, TvRow, TvSeries};
