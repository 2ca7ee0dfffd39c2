//! The ten acceptance criteria, each a self-contained check that reports a
//! verdict, a one-line summary and structured data.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::fit::fit_rate;
use super::marginals::{dyadic_checkpoints, estimate_ladder_marginals, estimate_marginals};
use super::models::{ee_rate_model, example_model, single_level_ladder, tempered_ladder, EXAMPLE_EPSILON};
use super::tv::{tv_curve, TvSeries};
use crate::diagnostics::{
    aggregate_mse, assumption_y_check, b_n_sequence, geometric_grid, marginal_bound, ErgodicAccumulator,
    PolynomialTail,
};
use crate::error::{Error, Result};
use crate::exact::{
    cesaro_eta_sequence, ee_joint_kernel, ee_joint_stationary_closed_form, eta_sequence, exact_irmcmc_laws,
    k_theta_exact, mix_kernels, p_theta_kernel, pi_theta, spin_index, stationary_distribution,
    two_state_joint_kernel, TwoStateAux,
};
use crate::prob::random::{random_distribution, random_kernel, random_weights};
use crate::prob::{
    metropolis_kernel, tv_distance, FiniteDistribution, KernelMatrix, WeightFunction, WeightedEmpirical,
};
use crate::samplers::{seeded_stream, Algorithm, Chain, ChainConfig, ChainRng, ChainState};

pub const DEFAULT_SEED: u64 = 2024;

/// Identifier, short name and runtime budget of every criterion.
pub const CRITERIA: [(u8, &str, Duration); 10] = [
    (1, "counterexample stationary law", Duration::from_secs(1)),
    (2, "importance-resampling rate 1/n", Duration::from_secs(5)),
    (3, "bias bound and marginal bound", Duration::from_secs(30)),
    (4, "frozen-measure kernel", Duration::from_secs(10)),
    (5, "equi-energy rate bound", Duration::from_secs(300)),
    (6, "tempering ladder", Duration::from_secs(600)),
    (7, "ergodic mse bounded", Duration::from_secs(120)),
    (8, "one-step kernel conformance", Duration::from_secs(60)),
    (9, "independent metropolis invariance", Duration::from_secs(1)),
    (10, "diagnostics sanity", Duration::from_secs(60)),
];

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub data: Value,
    /// Excluded from result files so that they stay byte-identical across runs.
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub budget: Duration,
    /// TV curves behind the verdict, written as CSV by the suites.
    #[serde(skip)]
    pub series: Vec<(String, TvSeries)>,
}

impl CriterionOutcome {
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }

    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {}: {} ({:.2}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

struct Check {
    passed: bool,
    detail: String,
    data: Value,
    series: Vec<(String, TvSeries)>,
}

pub fn run_criterion(id: u8, seed: u64) -> Result<CriterionOutcome> {
    let &(_, name, budget) = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .ok_or_else(|| Error::Argument(format!("no criterion {id}; valid ids are 1..=10")))?;
    let start = Instant::now();
    let check = match id {
        1 => counterexample()?,
        2 => irmcmc_rate()?,
        3 => bias_and_marginal_bounds(seed)?,
        4 => frozen_measure_kernel(seed)?,
        5 => ee_rate(seed)?,
        6 => ladder(seed)?,
        7 => ergodic_mse_bounded(seed)?,
        8 => kernel_conformance(seed)?,
        9 => independent_metropolis(seed)?,
        _ => diagnostics_sanity()?,
    };
    Ok(CriterionOutcome {
        id,
        name,
        passed: check.passed,
        detail: check.detail,
        data: check.data,
        elapsed: start.elapsed(),
        budget,
        series: check.series,
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn fmt_probs(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|v| format!("{v:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn counterexample() -> Result<Check> {
    let aux = TwoStateAux::new(1.0 / 3.0, 1.0 / 3.0, 1)?;
    let pi_x = FiniteDistribution::new(vec![2.0 / 3.0, 1.0 / 3.0])?;
    let k = ee_joint_kernel(&aux.kernel(), &pi_x, &aux.stationary())?;
    let joint = stationary_distribution(&k)?;
    let marginal = joint.outer_marginal(2)?;
    let joint_err = max_abs_diff(joint.probs(), &[3.0 / 8.0, 0.25, 1.0 / 8.0, 0.25]);
    let marginal_err = max_abs_diff(marginal.probs(), &[5.0 / 8.0, 3.0 / 8.0]);
    let grid = [0.1, 0.3, 0.5, 0.7, 0.9];
    let mut grid_err: f64 = 0.0;
    for &a in &grid {
        for &b in &grid {
            let aux = TwoStateAux::new(a, b, 1)?;
            for &c in &grid {
                for &d in &grid {
                    let solved = stationary_distribution(&two_state_joint_kernel(&aux, c, d)?)?;
                    let closed = ee_joint_stationary_closed_form(a, b, c, d)?;
                    grid_err = grid_err.max(max_abs_diff(solved.probs(), closed.probs()));
                }
            }
        }
    }
    let passed = joint_err <= 1e-12 && marginal_err <= 1e-12 && grid_err <= 1e-12;
    Ok(Check {
        passed,
        detail: format!(
            "joint {}, x-marginal {}, closed-form error {grid_err:.1e} over 625 cases",
            fmt_probs(joint.probs()),
            fmt_probs(marginal.probs())
        ),
        data: json!({
            "joint": joint.probs(),
            "x_marginal": marginal.probs(),
            "joint_error": joint_err,
            "marginal_error": marginal_err,
            "closed_form_error": grid_err,
        }),
        series: Vec::new(),
    })
}

fn irmcmc_rate() -> Result<Check> {
    let (model, aux) = example_model()?;
    let n_max = 4096;
    let etas = cesaro_eta_sequence(&aux.kernel(), spin_index(aux.y0)?, n_max)?;
    let laws = exact_irmcmc_laws(model.base(), EXAMPLE_EPSILON, &etas, 0, n_max + 1)?;
    let pi = model.target();
    let mut identity_err: f64 = 0.0;
    for n in 1..=n_max {
        let tv = tv_distance(&laws[n + 1], pi)?;
        identity_err = identity_err.max((tv - EXAMPLE_EPSILON * aux.cesaro_gap(n)?.abs()).abs());
    }
    let ns = dyadic_checkpoints(16, n_max);
    let selected: Vec<_> = ns.iter().map(|n| laws[*n].clone()).collect();
    let series = TvSeries::exact(&ns, &selected, pi)?;
    let fit = fit_rate(&series, (16, n_max))?;
    let passed = identity_err <= 1e-12 && (fit.slope + 1.0).abs() <= 0.05;
    Ok(Check {
        passed,
        detail: format!(
            "max |TV - eps |gap|| = {identity_err:.1e}, slope {:.4} over [16, {n_max}]",
            fit.slope
        ),
        data: json!({ "identity_error": identity_err, "fit": fit, "series": &series }),
        series: vec![("exact".to_string(), series)],
    })
}

fn bias_and_marginal_bounds(seed: u64) -> Result<Check> {
    let mut rng = seeded_stream(seed, 3);
    let n_max = 10;
    let mut eta_slack = f64::INFINITY;
    let mut marginal_slack = f64::INFINITY;
    for _ in 0..20 {
        let p_y = random_kernel(2, 0.05, &mut rng);
        let pi_y = stationary_distribution(&p_y)?;
        let w = WeightFunction::from_values(random_weights(2, 0.2, 5.0, &mut rng))?;
        let pi = w.tilt(&pi_y)?;
        let p = metropolis_kernel(&pi, &random_kernel(2, 0.05, &mut rng))?;
        let eps = rng.random_range(0.1..0.9);
        let (x0, y0) = (rng.random_range(0..2), rng.random_range(0..2));
        let etas = eta_sequence(&p_y, y0, &w, n_max)?;
        let b = b_n_sequence(&p_y, y0, &w, &pi_y, n_max)?;
        for n in 1..=n_max {
            let eta = etas.get(n).expect("sequence covers n");
            eta_slack = eta_slack.min(b[n + 1] - tv_distance(eta, &pi)?);
        }
        let laws = exact_irmcmc_laws(&p, eps, &etas, x0, n_max)?;
        for (n, law) in laws.iter().enumerate() {
            marginal_slack = marginal_slack.min(marginal_bound(eps, &b, n)? - tv_distance(law, &pi)?);
        }
    }
    let passed = eta_slack >= -1e-10 && marginal_slack >= -1e-10;
    Ok(Check {
        passed,
        detail: format!("min slack: TV(eta_n) vs B_n {eta_slack:.3e}, marginal bound {marginal_slack:.3e}"),
        data: json!({ "eta_slack": eta_slack, "marginal_slack": marginal_slack, "models": 20, "n_max": n_max }),
        series: Vec::new(),
    })
}

fn frozen_measure_kernel(seed: u64) -> Result<Check> {
    let mut rng = seeded_stream(seed, 4);
    let mut residual: f64 = 0.0;
    let mut excess = f64::NEG_INFINITY;
    for _ in 0..100 {
        let s = rng.random_range(2..=6);
        let p = random_kernel(s, 0.0, &mut rng);
        let theta = random_distribution(s, 0.0, &mut rng);
        for eps in [0.1, 0.5, 0.9] {
            let target = pi_theta(&p, &theta, eps, 1e-15)?;
            let kernel = p_theta_kernel(&p, &theta, eps)?;
            residual = residual.max(kernel.apply(&target)?.l1_distance(&target)?);
            for x in 0..s {
                let mut law = FiniteDistribution::point(s, x)?;
                for n in 0..=20 {
                    let bound = 2.0 * (1.0 - eps).powi(n);
                    excess = excess.max(tv_distance(&law, &target)? - bound);
                    law = kernel.apply(&law)?;
                }
            }
        }
    }
    let passed = residual <= 1e-10 && excess <= 1e-10;
    Ok(Check {
        passed,
        detail: format!("max invariance residual {residual:.1e}, max TV excess over 2(1-eps)^n {excess:.1e}"),
        data: json!({ "residual": residual, "max_excess": excess, "models": 100 }),
        series: Vec::new(),
    })
}

fn ee_rate(seed: u64) -> Result<Check> {
    let ee = ee_rate_model()?;
    let cfg = ChainConfig {
        algorithm: Algorithm::Ee,
        epsilon: ee.epsilon,
        x0: ee.start,
        y0: ee.start,
        record_aux: false,
    };
    let checkpoints = dyadic_checkpoints(64, 4096);
    let est = estimate_marginals(&ee.model, &cfg, &checkpoints, 100_000, seed, 4, |x| x)?;
    let pi = ee.model.target();
    let deviations: Vec<Vec<f64>> = (0..checkpoints.len())
        .map(|k| {
            let d = est.distribution(k);
            (0..4).map(|s| d.get(s) - pi.get(s)).collect()
        })
        .collect();
    // one constant for every |f| <= 1, tight at the first checkpoint
    let c = deviations[0].iter().map(|d| d.abs()).fold(0.0, f64::max) * (checkpoints[0] as f64).sqrt();
    let mut worst = f64::INFINITY;
    let mut violations = Vec::new();
    for (k, n) in checkpoints.iter().enumerate().skip(1) {
        let se = est.stderr(k);
        for s in 0..4 {
            let margin = c / (*n as f64).sqrt() + 3.0 * se[s] - deviations[k][s].abs();
            worst = worst.min(margin);
            if margin < 0.0 {
                violations.push(json!({ "n": n, "state": s, "margin": margin }));
            }
        }
    }
    Ok(Check {
        passed: violations.is_empty(),
        detail: format!(
            "C = {c:.4}, min margin {worst:.2e}, {} violations",
            violations.len()
        ),
        data: json!({
            "c": c,
            "checkpoints": checkpoints,
            "deviations": deviations,
            "min_margin": worst,
            "violations": violations,
        }),
        series: Vec::new(),
    })
}

fn ladder(seed: u64) -> Result<Check> {
    // one level against the exact importance-resampling law
    let spec1 = single_level_ladder()?;
    let replicas = 1_000_000;
    let est = estimate_ladder_marginals(&spec1, &[8], replicas, seed)?;
    let w = spec1.weights()?.remove(0);
    let etas = eta_sequence(&spec1.kernels[0], spec1.starts[0], &w, 8)?;
    let exact = exact_irmcmc_laws(&spec1.kernels[1], spec1.epsilon, &etas, spec1.starts[1], 8)?.remove(8);
    let mc = est[1].distribution(0);
    let mut worst_z: f64 = 0.0;
    for s in 0..exact.len() {
        let q = exact.get(s);
        let sigma = (q * (1.0 - q) / replicas as f64).sqrt();
        let dev = (mc.get(s) - q).abs();
        worst_z = worst_z.max(if sigma > 0.0 {
            dev / sigma
        } else if dev > 0.0 {
            f64::INFINITY
        } else {
            0.0
        });
    }
    let single_ok = worst_z <= 3.0;

    // two levels: Monte Carlo TV curves and slope fits
    let spec = tempered_ladder()?;
    let checkpoints = dyadic_checkpoints(1, 4096);
    let window = (32, 256);
    let levels = estimate_ladder_marginals(&spec, &checkpoints, 100_000, seed.wrapping_add(1))?;
    let mut level_data = Vec::new();
    let mut fits_ok = true;
    let mut summary = Vec::new();
    let mut curves = Vec::new();
    for (l, est) in levels.iter().enumerate() {
        let series = tv_curve(est, &spec.targets[l], seed.wrapping_add(10 + l as u64))?;
        let fit = if l == 0 {
            None
        } else {
            Some(fit_rate(&series, window))
        };
        let verdict = match &fit {
            None => Value::Null,
            Some(Ok(f)) => {
                let ok = (f.slope + 1.0).abs() <= 0.15;
                fits_ok &= ok;
                summary.push(format!("level {l} slope {:.3}", f.slope));
                json!({ "fit": f, "passed": ok })
            }
            Some(Err(e)) => {
                fits_ok = false;
                summary.push(format!("level {l} fit refused"));
                json!({ "error": e.to_string(), "passed": false })
            }
        };
        level_data.push(json!({ "level": l, "series": &series, "slope_test": verdict }));
        curves.push((format!("level-{l}"), series));
    }
    Ok(Check {
        passed: single_ok && fits_ok,
        detail: format!(
            "one level at n=8: max |z| {worst_z:.2}; two levels over [{}, {}]: {}",
            window.0,
            window.1,
            summary.join(", ")
        ),
        data: json!({
            "single_level": { "exact": exact.probs(), "monte_carlo": mc.probs(), "max_z": worst_z, "replicas": replicas },
            "window": window,
            "levels": level_data,
        }),
        series: curves,
    })
}

fn ergodic_mse_bounded(seed: u64) -> Result<Check> {
    let (model, aux) = example_model()?;
    let cfg = ChainConfig {
        algorithm: Algorithm::Irmcmc,
        epsilon: EXAMPLE_EPSILON,
        x0: 0,
        y0: spin_index(aux.y0)?,
        record_aux: false,
    };
    let checkpoints = dyadic_checkpoints(16, 1 << 14);
    let n_max = *checkpoints.last().expect("non-empty");
    let pi_f = model.target().get(0);
    let per_replica = (0..10_000u64)
        .into_par_iter()
        .map(|r| {
            let mut chain = Chain::new(&model, &cfg, ChainRng::for_replica(seed, r))?;
            let mut acc = ErgodicAccumulator::new(pi_f, &checkpoints)?;
            for _ in 0..n_max {
                acc.push(if chain.step()? == 0 { 1.0 } else { 0.0 });
            }
            acc.finish()
        })
        .collect::<Result<Vec<_>>>()?;
    let series = aggregate_mse(&checkpoints, &per_replica)?;
    let ratio = series.spread_from(n_max / 100).unwrap_or(f64::INFINITY);
    Ok(Check {
        passed: ratio < 3.0,
        detail: format!("max/min MSE over n >= {} is {ratio:.3}", n_max / 100),
        data: json!({ "ratio": ratio, "series": series }),
        series: Vec::new(),
    })
}

fn kernel_conformance(seed: u64) -> Result<Check> {
    let model = ee_rate_model()?.model;
    let eps = 0.3;
    let draws = 100_000;
    let mut rng = seeded_stream(seed, 8);
    let aux_states: Vec<usize> = (0..40).map(|_| rng.random_range(0..4)).collect();
    let y = 2;
    let w = model.weights();
    let mut worst_z: f64 = 0.0;
    let mut failures = Vec::new();
    for algorithm in [Algorithm::Irmcmc, Algorithm::Ee, Algorithm::ModifiedEe] {
        let mut reservoir = WeightedEmpirical::new();
        for s in &aux_states {
            let weight = if algorithm == Algorithm::Irmcmc {
                w.value(*s)
            } else {
                1.0
            };
            reservoir.push(*s, weight)?;
        }
        let mut theta = vec![0.0; 4];
        for (s, weight) in reservoir.entries() {
            theta[*s] += weight / reservoir.total_weight();
        }
        let theta = FiniteDistribution::new(theta)?;
        let exact = match algorithm {
            Algorithm::Irmcmc => p_theta_kernel(model.base(), &theta, eps)?,
            Algorithm::Ee => mix_kernels(model.base(), &k_theta_exact(&theta, w)?, eps)?,
            Algorithm::ModifiedEe => mix_kernels(
                model.base(),
                &k_theta_exact(&FiniteDistribution::point(4, y)?, w)?,
                eps,
            )?,
        };
        for x in 0..4 {
            let snapshot = ChainState::new(algorithm, eps, x, y)?.with_reservoir(reservoir.clone());
            let mut counts = [0u64; 4];
            for _ in 0..draws {
                counts[snapshot.propose_main(&model, &mut rng)?] += 1;
            }
            for (z, count) in counts.iter().enumerate() {
                let q = exact.get(x, z);
                let sigma = (q * (1.0 - q) / draws as f64).sqrt();
                let dev = (*count as f64 / draws as f64 - q).abs();
                let z_score = if sigma > 0.0 {
                    dev / sigma
                } else if dev > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                worst_z = worst_z.max(z_score);
                if z_score > 3.0 {
                    failures.push(json!({ "algorithm": algorithm, "from": x, "to": z, "z": z_score }));
                }
            }
        }
    }
    Ok(Check {
        passed: failures.is_empty(),
        detail: format!(
            "48 entries, max |z| {worst_z:.2}, {} beyond 3 sigma",
            failures.len()
        ),
        data: json!({ "max_z": worst_z, "failures": failures, "draws_per_row": draws }),
        series: Vec::new(),
    })
}

fn independent_metropolis(seed: u64) -> Result<Check> {
    let mut rng = seeded_stream(seed, 9);
    let mut residual: f64 = 0.0;
    for _ in 0..50 {
        let s = rng.random_range(2..=8);
        let pi = random_distribution(s, 0.05, &mut rng);
        let pi_y = random_distribution(s, 0.05, &mut rng);
        let w = WeightFunction::from_densities(&pi, &pi_y)?;
        let k = k_theta_exact(&pi_y, &w)?;
        residual = residual.max(k.apply(&pi)?.l1_distance(&pi)?);
    }
    Ok(Check {
        passed: residual <= 1e-12,
        detail: format!("max ||pi K - pi||_1 = {residual:.1e} over 50 models"),
        data: json!({ "residual": residual, "models": 50 }),
        series: Vec::new(),
    })
}

fn diagnostics_sanity() -> Result<Check> {
    let n_grid = dyadic_checkpoints(2, 1024);
    let w = WeightFunction::uniform(2);
    let uniform = FiniteDistribution::uniform(2)?;
    let stuck = assumption_y_check(&KernelMatrix::identity(2), 0, &w, &uniform, &n_grid)?;
    let rates: Vec<f64> = (0..10).map(|i| 0.05 + 0.1 * i as f64).collect();
    let mut flagged = Vec::new();
    for &a in &rates {
        for &b in &rates {
            let aux = TwoStateAux::new(a, b, -1)?;
            let report = assumption_y_check(&aux.kernel(), 1, &w, &aux.stationary(), &n_grid)?;
            if report.unbounded {
                flagged.push((a, b));
            }
        }
    }
    let grid = geometric_grid(1.0, 1e3, 13);
    let above = PolynomialTail::new(3.0, 0.9)?.profile(&grid, 200_000)?;
    let below = PolynomialTail::new(3.0, 0.6)?.profile(&grid, 200_000)?;
    let passed = stuck.unbounded && flagged.is_empty() && !above.growing && below.growing;
    Ok(Check {
        passed,
        detail: format!(
            "identity flagged: {}, ergodic kernels flagged: {}/100, growth at T=0.9: {}, at T=0.6: {}",
            stuck.unbounded,
            flagged.len(),
            above.growing,
            below.growing
        ),
        data: json!({
            "identity": stuck,
            "flagged_ergodic": flagged,
            "phi_above_critical": above,
            "phi_below_critical": below,
        }),
        series: Vec::new(),
    })
}
