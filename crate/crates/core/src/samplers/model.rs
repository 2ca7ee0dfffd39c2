use std::f64::consts::PI;
use std::fmt::Debug;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{check_len, FiniteDistribution, KernelMatrix, WeightFunction};

/// What an adaptive sampler needs from a problem: a target-invariant base
/// move `P`, the auxiliary move `P_Y`, and the importance weight `w = pi / pi_Y`.
pub trait Model: Sync {
    type State: Copy + PartialEq + Debug + Send + Sync;

    fn base_step<R: Rng + ?Sized>(&self, x: Self::State, rng: &mut R) -> Self::State;

    fn aux_step<R: Rng + ?Sized>(&self, y: Self::State, rng: &mut R) -> Self::State;

    fn weight(&self, x: Self::State) -> f64;

    /// An upper bound on `w`.
    fn weight_sup(&self) -> f64;
}

/// Tolerance used when checking that a kernel leaves its declared target invariant.
pub const INVARIANCE_TOLERANCE: f64 = 1e-9;

/// Finite-state instantiation: target `pi`, auxiliary target `pi_Y`, base
/// kernel `P` and auxiliary kernel `P_Y` on states `0..S`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "FiniteModelParts", into = "FiniteModelParts")]
pub struct FiniteModel {
    target: FiniteDistribution,
    aux_target: FiniteDistribution,
    base: KernelMatrix,
    aux: KernelMatrix,
    weights: WeightFunction,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteModelParts {
    pub target: FiniteDistribution,
    pub aux_target: FiniteDistribution,
    pub base: KernelMatrix,
    pub aux: KernelMatrix,
}

impl FiniteModel {
    pub fn new(
        target: FiniteDistribution,
        aux_target: FiniteDistribution,
        base: KernelMatrix,
        aux: KernelMatrix,
    ) -> Result<Self> {
        let s = target.len();
        check_len(s, aux_target.len())?;
        check_len(s, base.size())?;
        check_len(s, aux.size())?;
        let r = base.stationarity_residual(&target)?;
        if r > INVARIANCE_TOLERANCE {
            return Err(Error::Config(format!(
                "base kernel does not leave the target invariant (residual {r:.3e})"
            )));
        }
        let r = aux.stationarity_residual(&aux_target)?;
        if r > INVARIANCE_TOLERANCE {
            return Err(Error::Config(format!(
                "auxiliary kernel does not leave the auxiliary target invariant (residual {r:.3e})"
            )));
        }
        let weights = WeightFunction::from_densities(&target, &aux_target)?;
        Ok(Self {
            target,
            aux_target,
            base,
            aux,
            weights,
        })
    }

    pub fn size(&self) -> usize {
        self.target.len()
    }

    pub fn target(&self) -> &FiniteDistribution {
        &self.target
    }

    pub fn aux_target(&self) -> &FiniteDistribution {
        &self.aux_target
    }

    pub fn base(&self) -> &KernelMatrix {
        &self.base
    }

    pub fn aux(&self) -> &KernelMatrix {
        &self.aux
    }

    pub fn weights(&self) -> &WeightFunction {
        &self.weights
    }
}

impl TryFrom<FiniteModelParts> for FiniteModel {
    type Error = Error;

    fn try_from(p: FiniteModelParts) -> Result<Self> {
        Self::new(p.target, p.aux_target, p.base, p.aux)
    }
}

impl From<FiniteModel> for FiniteModelParts {
    fn from(m: FiniteModel) -> Self {
        Self {
            target: m.target,
            aux_target: m.aux_target,
            base: m.base,
            aux: m.aux,
        }
    }
}

impl Model for FiniteModel {
    type State = usize;

    fn base_step<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        self.base.sample(x, rng)
    }

    fn aux_step<R: Rng + ?Sized>(&self, y: usize, rng: &mut R) -> usize {
        self.aux.sample(y, rng)
    }

    fn weight(&self, x: usize) -> f64 {
        self.weights.value(x)
    }

    fn weight_sup(&self) -> f64 {
        self.weights.sup()
    }
}

/// One Gaussian component: mixture weight, mean, standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Base move of the continuous demo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BaseMove {
    /// Random-walk Metropolis with Gaussian increments.
    RandomWalk { step: f64 },
    /// Independent exact draw from the target (`P(x, .) = pi`).
    ExactDraw,
}

const QUADRATURE_INTERVALS: usize = 20_000;

/// Gaussian mixture target on a truncation interval with tempered auxiliary
/// target `pi_Y ∝ pi^T`, `T` in `(0, 1)`. Both densities are normalized on the
/// interval, so `w = pi / pi_Y` is bounded.
#[derive(Debug, Clone)]
pub struct MixtureDemo {
    components: Vec<Component>,
    temperature: f64,
    lower: f64,
    upper: f64,
    base: BaseMove,
    aux_step: f64,
    log_norm: f64,
    log_aux_norm: f64,
    weight_sup: f64,
    normals: Vec<Normal<f64>>,
    component_cdf: Vec<f64>,
}

impl MixtureDemo {
    pub fn new(
        components: Vec<Component>,
        temperature: f64,
        (lower, upper): (f64, f64),
        base: BaseMove,
        aux_step: f64,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Config("mixture needs at least one component".into()));
        }
        if components
            .iter()
            .any(|c| !(c.weight > 0.0) || !(c.sd > 0.0) || !c.mean.is_finite())
        {
            return Err(Error::Config(
                "mixture components need positive weight and sd".into(),
            ));
        }
        if !(temperature > 0.0 && temperature < 1.0) {
            return Err(Error::Config(format!(
                "temperature must lie in (0, 1), got {temperature}"
            )));
        }
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::Config(
                "truncation interval must be finite and non-empty".into(),
            ));
        }
        if let BaseMove::RandomWalk { step } = base {
            if !(step > 0.0) {
                return Err(Error::Config("random-walk step must be positive".into()));
            }
        }
        if !(aux_step > 0.0) {
            return Err(Error::Config("auxiliary step must be positive".into()));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        let components: Vec<Component> = components
            .into_iter()
            .map(|c| Component {
                weight: c.weight / total,
                ..c
            })
            .collect();
        let normals = components
            .iter()
            .map(|c| Normal::new(c.mean, c.sd).expect("validated sd"))
            .collect();
        let component_cdf = components
            .iter()
            .scan(0.0, |acc, c| {
                *acc += c.weight;
                Some(*acc)
            })
            .collect();
        let mut demo = Self {
            components,
            temperature,
            lower,
            upper,
            base,
            aux_step,
            log_norm: 0.0,
            log_aux_norm: 0.0,
            weight_sup: 0.0,
            normals,
            component_cdf,
        };
        let z = simpson(|x| demo.unnormalized(x), lower, upper, QUADRATURE_INTERVALS);
        let z_aux = simpson(
            |x| demo.unnormalized(x).powf(temperature),
            lower,
            upper,
            QUADRATURE_INTERVALS,
        );
        demo.log_norm = z.ln();
        demo.log_aux_norm = z_aux.ln();
        // w = pi~^(1-T) * Z_T / Z, and pi~ is at most the sum of component peaks.
        let peak: f64 = demo
            .components
            .iter()
            .map(|c| c.weight / (c.sd * (2.0 * PI).sqrt()))
            .sum();
        demo.weight_sup = ((1.0 - temperature) * peak.ln() + demo.log_aux_norm - demo.log_norm).exp();
        Ok(demo)
    }

    /// Two well-separated modes at ±3 on `[-8, 8]`, tempered at `T = 0.5`.
    pub fn bimodal(base: BaseMove) -> Self {
        Self::new(
            vec![
                Component {
                    weight: 0.5,
                    mean: -3.0,
                    sd: 0.7,
                },
                Component {
                    weight: 0.5,
                    mean: 3.0,
                    sd: 0.7,
                },
            ],
            0.5,
            (-8.0, 8.0),
            base,
            2.0,
        )
        .expect("valid demo parameters")
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    fn unnormalized(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let z = (x - c.mean) / c.sd;
                c.weight * (-0.5 * z * z).exp() / (c.sd * (2.0 * PI).sqrt())
            })
            .sum()
    }

    fn inside(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn target_density(&self, x: f64) -> f64 {
        if !self.inside(x) {
            return 0.0;
        }
        (self.unnormalized(x).ln() - self.log_norm).exp()
    }

    pub fn aux_density(&self, x: f64) -> f64 {
        if !self.inside(x) {
            return 0.0;
        }
        (self.temperature * self.unnormalized(x).ln() - self.log_aux_norm).exp()
    }

    /// Target mass of `bins` equal-width cells covering the interval.
    pub fn bin_probabilities(&self, bins: usize) -> Result<FiniteDistribution> {
        if bins == 0 {
            return Err(Error::Config("need at least one bin".into()));
        }
        let width = (self.upper - self.lower) / bins as f64;
        let masses = (0..bins)
            .map(|b| {
                let lo = self.lower + b as f64 * width;
                simpson(|x| self.target_density(x), lo, lo + width, 200)
            })
            .collect();
        FiniteDistribution::from_weights(masses)
    }

    pub fn bin_of(&self, x: f64, bins: usize) -> usize {
        let t = (x - self.lower) / (self.upper - self.lower);
        ((t * bins as f64) as usize).min(bins - 1)
    }

    fn exact_draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let u: f64 = rng.random();
            let k = self
                .component_cdf
                .iter()
                .position(|c| u < *c)
                .unwrap_or(self.components.len() - 1);
            let x = self.normals[k].sample(rng);
            if self.inside(x) {
                return x;
            }
        }
    }

    fn metropolis<R: Rng + ?Sized>(
        &self,
        x: f64,
        step: f64,
        log_density: impl Fn(f64) -> f64,
        rng: &mut R,
    ) -> f64 {
        let z: f64 = rand_distr::StandardNormal.sample(rng);
        let proposal = x + step * z;
        let u: f64 = rng.random();
        if !self.inside(proposal) {
            return x;
        }
        if u.ln() < log_density(proposal) - log_density(x) {
            proposal
        } else {
            x
        }
    }
}

impl Model for MixtureDemo {
    type State = f64;

    fn base_step<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        match self.base {
            BaseMove::ExactDraw => self.exact_draw(rng),
            BaseMove::RandomWalk { step } => self.metropolis(x, step, |v| self.unnormalized(v).ln(), rng),
        }
    }

    fn aux_step<R: Rng + ?Sized>(&self, y: f64, rng: &mut R) -> f64 {
        let t = self.temperature;
        self.metropolis(y, self.aux_step, |v| t * self.unnormalized(v).ln(), rng)
    }

    fn weight(&self, x: f64) -> f64 {
        if !self.inside(x) {
            return 0.0;
        }
        ((1.0 - self.temperature) * self.unnormalized(x).ln() + self.log_aux_norm - self.log_norm).exp()
    }

    fn weight_sup(&self) -> f64 {
        self.weight_sup
    }
}

/// Composite Simpson rule with an even number of intervals.
pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn finite_model_rejects_non_invariant_base() {
        let pi = FiniteDistribution::new(vec![0.25, 0.75]).unwrap();
        let k = KernelMatrix::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let good = KernelMatrix::constant(&pi);
        assert!(matches!(
            FiniteModel::new(pi.clone(), pi.clone(), k, good.clone()),
            Err(Error::Config(_))
        ));
        assert!(FiniteModel::new(pi.clone(), pi.clone(), good.clone(), good).is_ok());
    }

    #[test]
    fn mixture_densities_are_normalized_and_weight_bounded() {
        let demo = MixtureDemo::bimodal(BaseMove::RandomWalk { step: 1.0 });
        let (a, b) = demo.interval();
        let z = simpson(|x| demo.target_density(x), a, b, 40_000);
        let z_aux = simpson(|x| demo.aux_density(x), a, b, 40_000);
        assert!((z - 1.0).abs() < 1e-9, "{z}");
        assert!((z_aux - 1.0).abs() < 1e-9, "{z_aux}");
        let grid_max = (0..=16_000)
            .map(|i| demo.weight(a + (b - a) * i as f64 / 16_000.0))
            .fold(0.0, f64::max);
        assert!(grid_max <= demo.weight_sup());
        for x in [-5.0, -3.0, 0.0, 1.5, 7.9] {
            let ratio = demo.target_density(x) / demo.aux_density(x);
            assert!((ratio - demo.weight(x)).abs() <= 1e-9 * ratio);
        }
        let bins = demo.bin_probabilities(16).unwrap();
        assert!((bins.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_draw_matches_target_mass_on_left_half() {
        let demo = MixtureDemo::bimodal(BaseMove::ExactDraw);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let draws = 100_000;
        let left = (0..draws).filter(|_| demo.base_step(0.0, &mut rng) < 0.0).count();
        let freq = left as f64 / draws as f64;
        assert!((freq - 0.5).abs() < 4.0 * (0.25f64 / draws as f64).sqrt());
    }
}
