//! Exact laws of the resampling measure and of the IRMCMC main chain.
//!
//! `eta_n = E theta_hat_n` is obtained by enumerating every auxiliary path
//! `Y_1..Y_n`; `eta_0 = δ_{y0}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{check_len, FiniteDistribution, KernelMatrix, WeightFunction};

/// Largest number of auxiliary paths an enumeration may visit.
pub const PATH_BUDGET: f64 = 2e7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaSequence {
    etas: Vec<FiniteDistribution>,
}

impl EtaSequence {
    pub fn new(etas: Vec<FiniteDistribution>) -> Result<Self> {
        if let Some(first) = etas.first() {
            for e in &etas {
                check_len(first.len(), e.len())?;
            }
        }
        Ok(Self { etas })
    }

    pub fn len(&self) -> usize {
        self.etas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.etas.is_empty()
    }

    pub fn get(&self, k: usize) -> Option<&FiniteDistribution> {
        self.etas.get(k)
    }

    pub fn as_slice(&self) -> &[FiniteDistribution] {
        &self.etas
    }
}

fn check_budget(states: usize, depth: usize) -> Result<()> {
    let paths = (states as f64).powi(depth as i32);
    if paths > PATH_BUDGET {
        return Err(Error::Budget(format!(
            "{states}^{depth} auxiliary paths exceed the enumeration budget"
        )));
    }
    Ok(())
}

fn check_start(p_y: &KernelMatrix, w: &WeightFunction, y0: usize) -> Result<()> {
    check_len(p_y.size(), w.len())?;
    if y0 >= p_y.size() {
        return Err(Error::Argument(format!(
            "start state {y0} outside 0..{}",
            p_y.size()
        )));
    }
    Ok(())
}

struct Enumeration<'a> {
    p_y: &'a KernelMatrix,
    w: &'a WeightFunction,
    depth: usize,
    acc: Vec<f64>,
    sums: Vec<Vec<f64>>,
}

impl Enumeration<'_> {
    fn visit(&mut self, y: usize, level: usize, prob: f64, total: f64) -> Result<()> {
        if level > 0 {
            if total <= 0.0 {
                return Err(Error::Domain(
                    "an auxiliary path carries zero total weight".into(),
                ));
            }
            let scale = prob / total;
            for (s, a) in self.sums[level].iter_mut().zip(&self.acc) {
                *s += scale * a;
            }
        }
        if level == self.depth {
            return Ok(());
        }
        for next in 0..self.p_y.size() {
            let q = self.p_y.get(y, next);
            if q == 0.0 {
                continue;
            }
            let wn = self.w.value(next);
            self.acc[next] += wn;
            self.visit(next, level + 1, prob * q, total + wn)?;
            self.acc[next] -= wn;
        }
        Ok(())
    }
}

/// `eta_0, ..., eta_n` in one depth-first pass over the auxiliary paths.
pub fn eta_sequence(p_y: &KernelMatrix, y0: usize, w: &WeightFunction, n: usize) -> Result<EtaSequence> {
    check_start(p_y, w, y0)?;
    check_budget(p_y.size(), n)?;
    let s = p_y.size();
    let mut e = Enumeration {
        p_y,
        w,
        depth: n,
        acc: vec![0.0; s],
        sums: vec![vec![0.0; s]; n + 1],
    };
    e.visit(y0, 0, 1.0, 0.0)?;
    let mut etas = vec![FiniteDistribution::point(s, y0)?];
    etas.extend(e.sums.into_iter().skip(1).map(FiniteDistribution::from_computed));
    EtaSequence::new(etas)
}

/// Exact `eta_n = E theta_hat_n` by path enumeration.
pub fn eta_oracle(p_y: &KernelMatrix, y0: usize, w: &WeightFunction, n: usize) -> Result<FiniteDistribution> {
    let seq = eta_sequence(p_y, y0, w, n)?;
    Ok(seq.etas.into_iter().last().expect("at least eta_0"))
}

/// Unweighted case `w ≡ 1`: `eta_k = (1/k) sum_{i=1..k} δ_{y0} P_Y^i`.
pub fn cesaro_eta_sequence(p_y: &KernelMatrix, y0: usize, n: usize) -> Result<EtaSequence> {
    let s = p_y.size();
    let mut law = FiniteDistribution::point(s, y0)?.into_vec();
    let mut sum = vec![0.0; s];
    let mut etas = vec![FiniteDistribution::point(s, y0)?];
    for k in 1..=n {
        law = p_y.apply_slice(&law);
        for (a, b) in sum.iter_mut().zip(&law) {
            *a += b;
        }
        etas.push(FiniteDistribution::from_computed(
            sum.iter().map(|v| v / k as f64).collect(),
        ));
    }
    EtaSequence::new(etas)
}

fn check_law_inputs(p: &KernelMatrix, eps: f64, etas: &EtaSequence, x0: usize, n: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Argument(format!("epsilon must lie in [0, 1], got {eps}")));
    }
    if x0 >= p.size() {
        return Err(Error::Argument(format!(
            "start state {x0} outside 0..{}",
            p.size()
        )));
    }
    if n > 0 && etas.len() < n {
        return Err(Error::Argument(format!(
            "law at step {n} needs eta_0..eta_{}, only {} supplied",
            n - 1,
            etas.len()
        )));
    }
    for e in etas.as_slice() {
        check_len(p.size(), e.len())?;
    }
    Ok(())
}

/// `L(X_n)` from the regeneration decomposition:
/// `(1-eps)^n δ_{x0} P^n + sum_{k=1..n} eps (1-eps)^{n-k} eta_{k-1} P^{n-k}`.
pub fn exact_irmcmc_law(
    p: &KernelMatrix,
    eps: f64,
    etas: &EtaSequence,
    x0: usize,
    n: usize,
) -> Result<FiniteDistribution> {
    check_law_inputs(p, eps, etas, x0, n)?;
    let s = p.size();
    let mut total = vec![0.0; s];
    let mut add = |start: &[f64], steps: usize, coefficient: f64| {
        if coefficient == 0.0 {
            return;
        }
        let mut v = start.to_vec();
        for _ in 0..steps {
            v = p.apply_slice(&v);
        }
        for (t, x) in total.iter_mut().zip(&v) {
            *t += coefficient * x;
        }
    };
    let start = FiniteDistribution::point(s, x0)?;
    add(start.probs(), n, (1.0 - eps).powi(n as i32));
    for k in 1..=n {
        add(
            etas.etas[k - 1].probs(),
            n - k,
            eps * (1.0 - eps).powi((n - k) as i32),
        );
    }
    Ok(FiniteDistribution::from_computed(total))
}

/// `L(X_0), ..., L(X_n)` via `L(X_k) = (1-eps) L(X_{k-1}) P + eps eta_{k-1}`.
pub fn exact_irmcmc_laws(
    p: &KernelMatrix,
    eps: f64,
    etas: &EtaSequence,
    x0: usize,
    n: usize,
) -> Result<Vec<FiniteDistribution>> {
    check_law_inputs(p, eps, etas, x0, n)?;
    let mut law = FiniteDistribution::point(p.size(), x0)?.into_vec();
    let mut out = vec![FiniteDistribution::from_computed(law.clone())];
    for k in 1..=n {
        let moved = p.apply_slice(&law);
        law = moved
            .iter()
            .zip(etas.etas[k - 1].probs())
            .map(|(m, e)| (1.0 - eps) * m + eps * e)
            .collect();
        out.push(FiniteDistribution::from_computed(law.clone()));
    }
    Ok(out)
}

/// `L(X_n)` averaged over every auxiliary path `Y_1..Y_{n-1}`: given the
/// path, the main chain is a time-inhomogeneous Markov chain with kernels
/// `P_{theta_hat_{k-1}}`.
pub fn irmcmc_law_enumerated(
    p: &KernelMatrix,
    p_y: &KernelMatrix,
    w: &WeightFunction,
    eps: f64,
    x0: usize,
    y0: usize,
    n: usize,
) -> Result<FiniteDistribution> {
    check_start(p_y, w, y0)?;
    check_len(p.size(), p_y.size())?;
    if x0 >= p.size() {
        return Err(Error::Argument(format!(
            "start state {x0} outside 0..{}",
            p.size()
        )));
    }
    let s = p.size();
    let aux_steps = n.saturating_sub(1);
    check_budget(s, aux_steps)?;
    let mut total = vec![0.0; s];
    let mut path = Vec::with_capacity(aux_steps);
    enumerate_paths(p_y, y0, aux_steps, 1.0, &mut path, &mut |path, prob| {
        let mut law = vec![0.0; s];
        law[x0] = 1.0;
        let mut theta = vec![0.0; s];
        theta[y0] = 1.0;
        let mut weighted = vec![0.0; s];
        let mut weight_sum = 0.0;
        for k in 1..=n {
            if k >= 2 {
                let y = path[k - 2];
                weighted[y] += w.value(y);
                weight_sum += w.value(y);
                if weight_sum <= 0.0 {
                    return Err(Error::Domain(
                        "an auxiliary path carries zero total weight".into(),
                    ));
                }
                theta = weighted.iter().map(|v| v / weight_sum).collect();
            }
            let moved = p.apply_slice(&law);
            law = moved
                .iter()
                .zip(&theta)
                .map(|(m, t)| (1.0 - eps) * m + eps * t)
                .collect();
        }
        for (t, l) in total.iter_mut().zip(&law) {
            *t += prob * l;
        }
        Ok(())
    })?;
    Ok(FiniteDistribution::from_computed(total))
}

fn enumerate_paths(
    p_y: &KernelMatrix,
    y: usize,
    remaining: usize,
    prob: f64,
    path: &mut Vec<usize>,
    leaf: &mut impl FnMut(&[usize], f64) -> Result<()>,
) -> Result<()> {
    if remaining == 0 {
        return leaf(path, prob);
    }
    for next in 0..p_y.size() {
        let q = p_y.get(y, next);
        if q == 0.0 {
            continue;
        }
        path.push(next);
        enumerate_paths(p_y, next, remaining - 1, prob * q, path, leaf)?;
        path.pop();
    }
    Ok(())
}
