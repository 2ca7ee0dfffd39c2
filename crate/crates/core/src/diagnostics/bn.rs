//! The bias/second-moment bound `B_n` of the auxiliary empirical measure, and
//! the `1/n` check on its two ingredients.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grows_over_top_decade;
use crate::error::{Error, Result};
use crate::prob::{check_len, FiniteDistribution, KernelMatrix, WeightFunction};
use crate::samplers::seeded_stream;

/// Largest state space for exhaustive sign-vector maximization.
pub const MAX_EXACT_STATES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BnMethod {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnReport {
    pub n: usize,
    /// `sup_{|f| <= 1} E pi_hat(f - pi_Y f) = || E pi_hat - pi_Y ||_1`.
    pub bias_sup: f64,
    /// `sup_{|f| <= 1} E (pi_hat(f) - pi_Y(f))^2`.
    pub second_moment_sup: f64,
    pub first_term: f64,
    pub second_term: f64,
    pub b_n: f64,
    pub method: BnMethod,
}

impl BnReport {
    fn new(n: usize, w_sup: f64, bias_sup: f64, second_moment_sup: f64, method: BnMethod) -> Self {
        let first_term = w_sup * bias_sup;
        let second_term = 2.0 * w_sup * w_sup * second_moment_sup;
        Self {
            n,
            bias_sup,
            second_moment_sup,
            first_term,
            second_term,
            b_n: first_term + second_term,
            method,
        }
    }
}

/// `max_{f in {-1,1}^S} f^T M f`, which is the maximum over the whole cube
/// when `M` is positive semi-definite.
pub fn max_quadratic_sign(m: &[Vec<f64>]) -> Result<f64> {
    let s = m.len();
    if s > MAX_EXACT_STATES {
        return Err(Error::Budget(format!(
            "sign enumeration over {s} states exceeds {MAX_EXACT_STATES}"
        )));
    }
    for row in m {
        check_len(s, row.len())?;
    }
    if s == 0 {
        return Ok(0.0);
    }
    // f and -f give the same value, so fix the first sign.
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << (s - 1)) {
        let sign = |i: usize| {
            if i == 0 || mask & (1 << (i - 1)) == 0 {
                1.0
            } else {
                -1.0
            }
        };
        let mut value = 0.0;
        for (i, row) in m.iter().enumerate() {
            let fi = sign(i);
            for (j, mij) in row.iter().enumerate() {
                value += fi * sign(j) * mij;
            }
        }
        best = best.max(value);
    }
    Ok(best)
}

/// `|w|_∞` for the weight normalized so that `pi_Y(w) = 1`.
fn normalized_sup(w: &WeightFunction, pi_y: &FiniteDistribution) -> Result<f64> {
    check_len(w.len(), pi_y.len())?;
    let scale = pi_y.expectation(|s| w.value(s));
    if scale <= 0.0 {
        return Err(Error::Domain("weight vanishes on the auxiliary support".into()));
    }
    Ok(w.sup() / scale)
}

fn check_inputs(p_y: &KernelMatrix, y0: usize, pi_y: &FiniteDistribution) -> Result<()> {
    check_len(p_y.size(), pi_y.len())?;
    if y0 >= p_y.size() {
        return Err(Error::Argument(format!(
            "start state {y0} outside 0..{}",
            p_y.size()
        )));
    }
    Ok(())
}

/// Exact mean and second-moment matrix of `pi_hat_{Y,n} - pi_Y`.
fn exact_moments(
    p_y: &KernelMatrix,
    y0: usize,
    pi_y: &FiniteDistribution,
    n: usize,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let s = p_y.size();
    let mut marginals = Vec::with_capacity(n);
    let mut law = vec![0.0; s];
    law[y0] = 1.0;
    for _ in 0..n {
        law = p_y.apply_slice(&law);
        marginals.push(law.clone());
    }
    // cumulative[L - 1] = sum_{lag=1..L} P^lag, stored flat
    let mut cumulative: Vec<Vec<f64>> = Vec::with_capacity(n.saturating_sub(1));
    let mut power = p_y.clone();
    for lag in 1..n {
        let mut next: Vec<f64> = power.rows().flatten().copied().collect();
        if let Some(prev) = cumulative.last() {
            for (x, p) in next.iter_mut().zip(prev) {
                *x += p;
            }
        }
        cumulative.push(next);
        if lag + 1 < n {
            power = power.compose(p_y).expect("same size");
        }
    }
    let mut cross = vec![vec![0.0; s]; s];
    for (i, mu) in marginals.iter().enumerate().take(n.saturating_sub(1)) {
        let c = &cumulative[n - 2 - i];
        for a in 0..s {
            if mu[a] == 0.0 {
                continue;
            }
            for (b, x) in cross[a].iter_mut().enumerate() {
                *x += mu[a] * c[a * s + b];
            }
        }
    }
    let nf = n as f64;
    let mean: Vec<f64> = (0..s)
        .map(|a| marginals.iter().map(|m| m[a]).sum::<f64>() / nf)
        .collect();
    let pi = pi_y.probs();
    let mut moment = vec![vec![0.0; s]; s];
    for a in 0..s {
        for b in 0..s {
            let diag = if a == b { mean[a] * nf } else { 0.0 };
            let raw = (diag + cross[a][b] + cross[b][a]) / (nf * nf);
            moment[a][b] = raw - mean[a] * pi[b] - pi[a] * mean[b] + pi[a] * pi[b];
        }
    }
    let bias = mean.iter().zip(pi).map(|(m, p)| m - p).collect();
    (bias, moment)
}

/// Exact `B_n` from the marginals of the auxiliary chain. `w` may be given up
/// to a constant; it is normalized against `pi_Y`. `n = 0` returns the
/// convention `B_0 = 1`.
pub fn b_n_exact(
    p_y: &KernelMatrix,
    y0: usize,
    w: &WeightFunction,
    pi_y: &FiniteDistribution,
    n: usize,
) -> Result<BnReport> {
    check_inputs(p_y, y0, pi_y)?;
    if p_y.size() > MAX_EXACT_STATES {
        return Err(Error::Budget(format!(
            "exact B_n needs at most {MAX_EXACT_STATES} states; use b_n_monte_carlo"
        )));
    }
    let w_sup = normalized_sup(w, pi_y)?;
    if n == 0 {
        return Ok(BnReport {
            n,
            bias_sup: 1.0,
            second_moment_sup: 1.0,
            first_term: 1.0,
            second_term: 0.0,
            b_n: 1.0,
            method: BnMethod::Exact,
        });
    }
    let (bias, moment) = exact_moments(p_y, y0, pi_y, n);
    let bias_sup = bias.iter().map(|x| x.abs()).sum();
    let second = max_quadratic_sign(&moment)?.max(0.0);
    Ok(BnReport::new(n, w_sup, bias_sup, second, BnMethod::Exact))
}

/// `B_{-1}, B_0, ..., B_{n_max}` with `B_{-1} = B_0 = 1`.
pub fn b_n_sequence(
    p_y: &KernelMatrix,
    y0: usize,
    w: &WeightFunction,
    pi_y: &FiniteDistribution,
    n_max: usize,
) -> Result<Vec<f64>> {
    let mut out = vec![1.0, 1.0];
    for n in 1..=n_max {
        out.push(b_n_exact(p_y, y0, w, pi_y, n)?.b_n);
    }
    Ok(out)
}

/// `sum_{l=0..n} (1 - eps)^{n-l} B_{l-1}` from a sequence starting at `B_{-1}`.
pub fn marginal_bound(eps: f64, b_seq: &[f64], n: usize) -> Result<f64> {
    if b_seq.len() < n + 1 {
        return Err(Error::Argument(format!(
            "bound at step {n} needs B_(-1)..B_({}), only {} supplied",
            n as i64 - 1,
            b_seq.len()
        )));
    }
    Ok((0..=n).map(|l| (1.0 - eps).powi((n - l) as i32) * b_seq[l]).sum())
}

/// Monte Carlo `B_n` for state spaces too large for exact enumeration. The
/// quadratic supremum comes from a greedy sign search, so it may fall short
/// of the true maximum.
pub fn b_n_monte_carlo(
    p_y: &KernelMatrix,
    y0: usize,
    w: &WeightFunction,
    pi_y: &FiniteDistribution,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<BnReport> {
    check_inputs(p_y, y0, pi_y)?;
    if n == 0 || replicas < 2 {
        return Err(Error::Argument("need n >= 1 and at least two replicas".into()));
    }
    let w_sup = normalized_sup(w, pi_y)?;
    let s = p_y.size();
    let pi = pi_y.probs();
    let deviations: Vec<Vec<f64>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded_stream(seed, r);
            let mut counts = vec![0.0; s];
            let mut y = y0;
            for _ in 0..n {
                y = p_y.sample(y, &mut rng);
                counts[y] += 1.0;
            }
            counts.iter().zip(pi).map(|(c, p)| c / n as f64 - p).collect()
        })
        .collect();
    let rf = replicas as f64;
    let bias: Vec<f64> = (0..s)
        .map(|a| deviations.iter().map(|d| d[a]).sum::<f64>() / rf)
        .collect();
    let mut moment = vec![vec![0.0; s]; s];
    for d in &deviations {
        for a in 0..s {
            for b in 0..s {
                moment[a][b] += d[a] * d[b] / rf;
            }
        }
    }
    let second = if s <= MAX_EXACT_STATES {
        max_quadratic_sign(&moment)?
    } else {
        greedy_sign_search(&moment, seed)
    };
    let bias_sup = bias.iter().map(|x| x.abs()).sum();
    Ok(BnReport::new(
        n,
        w_sup,
        bias_sup,
        second.max(0.0),
        BnMethod::MonteCarlo,
    ))
}

fn greedy_sign_search(m: &[Vec<f64>], seed: u64) -> f64 {
    let s = m.len();
    let mut rng = seeded_stream(seed, u64::MAX);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..16 {
        let mut f: Vec<f64> = (0..s)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        loop {
            let mut improved = false;
            for i in 0..s {
                // change in f^T M f from flipping f_i
                let off: f64 = (0..s)
                    .filter(|j| *j != i)
                    .map(|j| (m[i][j] + m[j][i]) * f[j])
                    .sum();
                if -2.0 * f[i] * off > 1e-15 {
                    f[i] = -f[i];
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        let value: f64 = (0..s)
            .map(|i| (0..s).map(|j| f[i] * m[i][j] * f[j]).sum::<f64>())
            .sum();
        best = best.max(value);
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub n_grid: Vec<usize>,
    /// `n * sup E pi_hat(f - pi_Y f)` per grid point.
    pub scaled_bias: Vec<f64>,
    /// `n * sup E (pi_hat(f) - pi_Y(f))^2` per grid point.
    pub scaled_second_moment: Vec<f64>,
    /// `n * B_n` per grid point.
    pub scaled_b_n: Vec<f64>,
    pub max_scaled_bias: f64,
    pub max_scaled_second_moment: f64,
    /// Either scaled sequence keeps growing over the top decade of the grid.
    pub unbounded: bool,
}

/// Checks that both ingredients of `B_n` decay like `1/n` along `n_grid`.
pub fn assumption_y_check(
    p_y: &KernelMatrix,
    y0: usize,
    w: &WeightFunction,
    pi_y: &FiniteDistribution,
    n_grid: &[usize],
) -> Result<AssumptionReport> {
    if n_grid.is_empty() || n_grid.windows(2).any(|p| p[0] >= p[1]) || n_grid[0] == 0 {
        return Err(Error::Argument(
            "n grid must be positive and strictly increasing".into(),
        ));
    }
    let reports: Vec<BnReport> = n_grid
        .par_iter()
        .map(|n| b_n_exact(p_y, y0, w, pi_y, *n))
        .collect::<Result<_>>()?;
    let scale = |f: fn(&BnReport) -> f64| -> Vec<f64> { reports.iter().map(|r| r.n as f64 * f(r)).collect() };
    let scaled_bias = scale(|r| r.bias_sup);
    let scaled_second_moment = scale(|r| r.second_moment_sup);
    let scaled_b_n = scale(|r| r.b_n);
    let xs: Vec<f64> = n_grid.iter().map(|n| *n as f64).collect();
    let unbounded =
        grows_over_top_decade(&xs, &scaled_bias) || grows_over_top_decade(&xs, &scaled_second_moment);
    Ok(AssumptionReport {
        n_grid: n_grid.to_vec(),
        max_scaled_bias: scaled_bias.iter().copied().fold(0.0, f64::max),
        max_scaled_second_moment: scaled_second_moment.iter().copied().fold(0.0, f64::max),
        scaled_bias,
        scaled_second_moment,
        scaled_b_n,
        unbounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{eta_sequence, stationary_distribution, TwoStateAux};
    use crate::prob::random::{random_distribution, random_kernel, random_weights};
    use crate::prob::tv_distance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Brute-force moments over every auxiliary path.
    fn brute_moments(p_y: &KernelMatrix, y0: usize, pi: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let s = p_y.size();
        let mut bias = vec![0.0; s];
        let mut moment = vec![vec![0.0; s]; s];
        let total = s.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut y = y0;
            let mut prob = 1.0;
            let mut counts = vec![0.0; s];
            for _ in 0..n {
                let next = c % s;
                c /= s;
                prob *= p_y.get(y, next);
                counts[next] += 1.0;
                y = next;
            }
            let d: Vec<f64> = counts.iter().zip(pi).map(|(k, p)| k / n as f64 - p).collect();
            for a in 0..s {
                bias[a] += prob * d[a];
                for b in 0..s {
                    moment[a][b] += prob * d[a] * d[b];
                }
            }
        }
        (bias, moment)
    }

    #[test]
    fn exact_moments_match_path_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for s in [2usize, 3] {
            let p_y = random_kernel(s, 0.0, &mut rng);
            let pi = stationary_distribution(&p_y).unwrap();
            for n in 1..=7 {
                let (bias, moment) = exact_moments(&p_y, 1, &pi, n);
                let (b2, m2) = brute_moments(&p_y, 1, pi.probs(), n);
                for a in 0..s {
                    assert!((bias[a] - b2[a]).abs() < 1e-12);
                    for b in 0..s {
                        assert!((moment[a][b] - m2[a][b]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn iid_stationary_start_has_no_bias() {
        let pi = FiniteDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let p_y = KernelMatrix::constant(&pi);
        let w = WeightFunction::uniform(3);
        for n in [1usize, 4, 16, 64] {
            let r = b_n_exact(&p_y, 0, &w, &pi, n).unwrap();
            assert!(r.first_term < 1e-15, "{}", r.first_term);
            // max_f Var_pi(f) / n, attained at a sign vector
            let var = (0..8u32)
                .map(|mask| {
                    let f: Vec<f64> = (0..3)
                        .map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 })
                        .collect();
                    let mean = pi.expectation(|s| f[s]);
                    pi.expectation(|s| (f[s] - mean).powi(2))
                })
                .fold(0.0, f64::max);
            assert!((r.second_moment_sup - var / n as f64).abs() < 1e-14);
            assert!((r.second_term - 2.0 * var / n as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn bias_term_tracks_cesaro_gap() {
        let aux = TwoStateAux::new(0.2, 0.5, -1).unwrap();
        let pi = aux.stationary();
        let w = WeightFunction::uniform(2);
        let lambda = aux.lambda2();
        let limit = 2.0 * (aux.b / (aux.a + aux.b)) * lambda.abs() / (1.0 - lambda);
        for n in [10usize, 100, 1000] {
            let r = b_n_exact(&aux.kernel(), 1, &w, &pi, n).unwrap();
            let gap = 2.0 * aux.cesaro_gap(n).unwrap().abs();
            assert!((r.first_term - gap).abs() < 1e-12);
        }
        let r = b_n_exact(&aux.kernel(), 1, &w, &pi, 1000).unwrap();
        assert!((1000.0 * r.first_term - limit).abs() < 1e-6);
    }

    #[test]
    fn eta_within_b_n_on_random_two_state_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let p_y = random_kernel(2, 0.0, &mut rng);
            let pi_y = stationary_distribution(&p_y).unwrap();
            let w = WeightFunction::from_values(random_weights(2, 0.2, 5.0, &mut rng)).unwrap();
            let pi = w.tilt(&pi_y).unwrap();
            let etas = eta_sequence(&p_y, 0, &w, 10).unwrap();
            for n in 1..=10 {
                let b = b_n_exact(&p_y, 0, &w, &pi_y, n).unwrap();
                let tv = tv_distance(etas.get(n).unwrap(), &pi).unwrap();
                assert!(tv <= b.b_n + 1e-10, "n={n} tv={tv} b={}", b.b_n);
            }
        }
    }

    #[test]
    fn sign_maximum_dominates_random_test_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let p_y = random_kernel(4, 0.0, &mut rng);
        let pi = stationary_distribution(&p_y).unwrap();
        let (_, moment) = exact_moments(&p_y, 2, &pi, 9);
        let best = max_quadratic_sign(&moment).unwrap();
        for _ in 0..1000 {
            let f: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let v: f64 = (0..4)
                .map(|i| (0..4).map(|j| f[i] * moment[i][j] * f[j]).sum::<f64>())
                .sum();
            assert!(v <= best + 1e-15);
        }
    }

    #[test]
    fn linear_supremum_is_l1_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let mu: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let l1: f64 = mu.iter().map(|x: &f64| x.abs()).sum();
            let at_sign: f64 = mu.iter().map(|x| x * x.signum()).sum();
            assert!((l1 - at_sign).abs() < 1e-15);
            for _ in 0..20 {
                let v: f64 = mu.iter().map(|x| x * rng.random_range(-1.0..=1.0)).sum();
                assert!(v <= l1 + 1e-15);
            }
        }
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p_y = random_kernel(3, 0.2, &mut rng);
        let pi = stationary_distribution(&p_y).unwrap();
        let w = WeightFunction::from_values(vec![1.0, 2.0, 0.5]).unwrap();
        let exact = b_n_exact(&p_y, 0, &w, &pi, 20).unwrap();
        let mc = b_n_monte_carlo(&p_y, 0, &w, &pi, 20, 200_000, 9).unwrap();
        assert_eq!(mc.method, BnMethod::MonteCarlo);
        assert!((mc.second_moment_sup - exact.second_moment_sup).abs() < 0.05 * exact.second_moment_sup);
        assert!((mc.bias_sup - exact.bias_sup).abs() < 0.01);
        let big = random_kernel(13, 0.1, &mut rng);
        let big_pi = random_distribution(13, 0.1, &mut rng);
        assert!(matches!(
            b_n_exact(&big, 0, &WeightFunction::uniform(13), &big_pi, 3),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn sequence_and_marginal_bound() {
        let aux = TwoStateAux::new(0.3, 0.4, 1).unwrap();
        let w = WeightFunction::uniform(2);
        let seq = b_n_sequence(&aux.kernel(), 0, &w, &aux.stationary(), 5).unwrap();
        assert_eq!(seq.len(), 7);
        assert_eq!(&seq[..2], &[1.0, 1.0]);
        assert_eq!(marginal_bound(0.5, &seq, 0).unwrap(), 1.0);
        assert!((marginal_bound(0.5, &seq, 1).unwrap() - 1.5).abs() < 1e-15);
        assert!(marginal_bound(0.5, &seq, 7).is_err());
    }

    #[test]
    fn identity_kernel_is_flagged_and_ergodic_kernels_pass() {
        let grid: Vec<usize> = (1..=10).map(|k| 1usize << k).collect();
        let uniform = FiniteDistribution::uniform(2).unwrap();
        let w = WeightFunction::uniform(2);
        let stuck = assumption_y_check(&KernelMatrix::identity(2), 0, &w, &uniform, &grid).unwrap();
        assert!(stuck.unbounded);
        for (a, b) in [(0.05, 0.05), (0.95, 0.95), (0.3, 0.6)] {
            let aux = TwoStateAux::new(a, b, -1).unwrap();
            let r = assumption_y_check(&aux.kernel(), 1, &w, &aux.stationary(), &grid).unwrap();
            assert!(!r.unbounded, "a={a} b={b}");
        }
        assert!(assumption_y_check(&KernelMatrix::identity(2), 0, &w, &uniform, &[4, 2]).is_err());
    }
}
