//! Monte Carlo checks of the samplers against exact laws and closed forms.

use std::time::Instant;

use amcmc::exact::{
    cesaro_eta_sequence, exact_irmcmc_law, propagate, spin_index, unit_weight_ladder_laws, TwoStateAux,
};
use amcmc::harness::models::{ee_rate_model, example_model, lazy_metropolis, EXAMPLE_EPSILON};
use amcmc::harness::{estimate_ladder_marginals, estimate_marginals};
use amcmc::prob::{FiniteDistribution, KernelMatrix};
use amcmc::samplers::{run_chain, Algorithm, ChainConfig, ChainRng, ChainState, FiniteModel, LadderSpec};

fn config(algorithm: Algorithm, epsilon: f64, x0: usize, y0: usize) -> ChainConfig<usize> {
    ChainConfig {
        algorithm,
        epsilon,
        x0,
        y0,
        record_aux: false,
    }
}

/// Every coordinate within three multinomial standard errors of `exact`.
fn assert_within_3_sigma(estimate: &FiniteDistribution, exact: &FiniteDistribution, replicas: usize) {
    for (i, (p, q)) in estimate.probs().iter().zip(exact.probs()).enumerate() {
        let sigma = (q * (1.0 - q) / replicas as f64).sqrt();
        assert!(
            (p - q).abs() <= 3.0 * sigma + 1e-12,
            "state {i}: {p} vs {q} (sigma {sigma:.2e})"
        );
    }
}

/// Counterexample pair: `pi_X = (2/3, 1/3)`, auxiliary flips at rate 1/3.
fn counterexample_model() -> FiniteModel {
    let aux = TwoStateAux::new(1.0 / 3.0, 1.0 / 3.0, -1).unwrap();
    let pi_x = FiniteDistribution::new(vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
    FiniteModel::new(
        pi_x.clone(),
        aux.stationary(),
        KernelMatrix::constant(&pi_x),
        aux.kernel(),
    )
    .unwrap()
}

#[test]
fn zero_epsilon_is_the_base_chain() {
    let rate = ee_rate_model().unwrap();
    let replicas = 20_000;
    for alg in [Algorithm::Irmcmc, Algorithm::Ee, Algorithm::ModifiedEe] {
        let est =
            estimate_marginals(&rate.model, &config(alg, 0.0, 3, 3), &[8], replicas, 17, 4, |x| x).unwrap();
        let start = FiniteDistribution::point(4, 3).unwrap();
        let exact = propagate(&start, rate.model.base(), 8).unwrap();
        assert_within_3_sigma(&est.distribution(0), &exact, replicas);
    }
}

#[test]
fn example_marginal_at_64_matches_closed_form() {
    let (model, aux) = example_model().unwrap();
    let y0 = spin_index(aux.y0).unwrap();
    let replicas = 100_000;
    let cfg = config(Algorithm::Irmcmc, EXAMPLE_EPSILON, 0, y0);
    let est = estimate_marginals(&model, &cfg, &[64], replicas, 23, 2, |x| x).unwrap();
    // L(X_64)(-1) - pi(-1) = eps * (E theta_hat_63(-1) - pi_Y(-1))
    let gap = aux.cesaro_gap(63).unwrap();
    let p_minus = 0.5 + EXAMPLE_EPSILON * gap;
    let closed = FiniteDistribution::new(vec![1.0 - p_minus, p_minus]).unwrap();
    let etas = cesaro_eta_sequence(&aux.kernel(), y0, 64).unwrap();
    let law = exact_irmcmc_law(model.base(), EXAMPLE_EPSILON, &etas, 0, 64).unwrap();
    assert!(law.l1_distance(&closed).unwrap() < 1e-14);
    assert_within_3_sigma(&est.distribution(0), &closed, replicas);
}

fn ee_acceptance_frequency(pi_x: [f64; 2], trials: usize) -> f64 {
    let pi_y = FiniteDistribution::uniform(2).unwrap();
    let pi_x = FiniteDistribution::new(pi_x.to_vec()).unwrap();
    let model = FiniteModel::new(
        pi_x.clone(),
        pi_y.clone(),
        KernelMatrix::constant(&pi_x),
        KernelMatrix::constant(&pi_y),
    )
    .unwrap();
    let mut rng = ChainRng::from_seed(5);
    let mut moved = 0usize;
    for _ in 0..trials {
        // the empty reservoir proposes y0 = 1 on every step
        let mut s = ChainState::new(Algorithm::Ee, 1.0, 0, 1).unwrap();
        s.step(&model, &mut rng).unwrap();
        moved += usize::from(s.x() == 1);
    }
    moved as f64 / trials as f64
}

#[test]
fn equi_energy_acceptance_frequencies() {
    let trials = 100_000;
    // w = (1.6, 0.4): ratio 0.25
    let f = ee_acceptance_frequency([0.8, 0.2], trials);
    let sigma = (0.25 * 0.75 / trials as f64).sqrt();
    assert!((f - 0.25).abs() <= 3.0 * sigma, "{f}");
    // w = (0.5, 1.5): ratio 3
    assert_eq!(ee_acceptance_frequency([0.25, 0.75], trials), 1.0);
}

#[test]
fn proposal_from_current_auxiliary_state_has_the_table_transitions() {
    let model = counterexample_model();
    let steps = 1_000_000;
    let cfg = ChainConfig {
        record_aux: true,
        ..config(Algorithm::ModifiedEe, 1.0, 0, 1)
    };
    let trace = run_chain(&model, &cfg, steps, 41).unwrap();
    let ys = trace.y.unwrap();
    // from (x, y) = (+1, -1): x accepts the move to -1 w.p. c = 1/2, y flips w.p. b = 1/3
    let (b, c) = (1.0 / 3.0, 0.5);
    let expected = [(1.0 - c) * b, (1.0 - c) * (1.0 - b), c * b, c * (1.0 - b)];
    let mut counts = [0u64; 4];
    for i in 1..steps {
        if trace.x[i - 1] == 0 && ys[i - 1] == 1 {
            let to = 2 * trace.x[i] + ys[i];
            counts[to] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    let chi2: f64 = counts
        .iter()
        .zip(expected)
        .map(|(o, p)| {
            let e = p * total as f64;
            (*o as f64 - e).powi(2) / e
        })
        .sum();
    // 99.9% quantile of chi-square with 3 degrees of freedom
    assert!(chi2 < 16.27, "chi2 {chi2:.2} from {counts:?}");

    let plus = trace.x.iter().filter(|x| **x == 0).count() as f64 / steps as f64;
    assert!((plus - 0.625).abs() < 0.005, "long-run P(X = +1) = {plus}");
}

#[test]
fn auxiliary_path_ignores_the_main_chain() {
    let rate = ee_rate_model().unwrap();
    let traces: Vec<_> = [
        (Algorithm::Irmcmc, 0.2),
        (Algorithm::Ee, 0.9),
        (Algorithm::ModifiedEe, 0.5),
    ]
    .into_iter()
    .map(|(alg, eps)| {
        let cfg = ChainConfig {
            record_aux: true,
            ..config(alg, eps, 0, 3)
        };
        run_chain(&rate.model, &cfg, 5000, 8).unwrap().y.unwrap()
    })
    .collect();
    assert_eq!(traces[0], traces[1]);
    assert_eq!(traces[0], traces[2]);
}

#[test]
fn million_equi_energy_steps_within_a_second() {
    let rate = ee_rate_model().unwrap();
    let cfg = config(Algorithm::Ee, rate.epsilon, rate.start, rate.start);
    let started = Instant::now();
    let trace = run_chain(&rate.model, &cfg, 1_000_000, 3).unwrap();
    let elapsed = started.elapsed();
    assert_eq!(trace.x.len(), 1_000_000);
    assert!(elapsed.as_secs_f64() < 1.0, "{elapsed:?}");
}

#[test]
fn unit_weight_ladder_matches_exact_laws() {
    let pi = FiniteDistribution::new(vec![0.5, 0.3, 0.2]).unwrap();
    let kernel = lazy_metropolis(&pi, 0.7).unwrap();
    let spec = LadderSpec {
        targets: vec![pi.clone(); 3],
        kernels: vec![kernel.clone(); 3],
        starts: vec![2, 1, 2],
        epsilon: 0.6,
        weight_bound: None,
    };
    let replicas = 200_000;
    let est = estimate_ladder_marginals(&spec, &[8], replicas, 13).unwrap();
    let exact = unit_weight_ladder_laws(&spec.kernels, &spec.starts, spec.epsilon, 8).unwrap();
    for (level, laws) in exact.iter().enumerate() {
        assert_within_3_sigma(&est[level].distribution(0), &laws[8], replicas);
    }
}
