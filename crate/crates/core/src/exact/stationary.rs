use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::prob::{check_len, FiniteDistribution, KernelMatrix};

/// Solves `pi K = pi`, `sum pi = 1` by dense LU on `K^T - I` with its last
/// row replaced by the normalization constraint.
pub fn stationary_distribution(k: &KernelMatrix) -> Result<FiniteDistribution> {
    k.check_irreducible()?;
    let s = k.size();
    let mut a = DMatrix::from_fn(s, s, |i, j| k.get(j, i) - f64::from(u8::from(i == j)));
    for j in 0..s {
        a[(s - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(s);
    rhs[s - 1] = 1.0;
    let solution = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidKernel("singular stationary system".into()))?;
    Ok(FiniteDistribution::from_computed(
        solution.iter().copied().collect(),
    ))
}

/// `p K^n` by repeated vector-matrix products.
pub fn propagate(p: &FiniteDistribution, k: &KernelMatrix, n: usize) -> Result<FiniteDistribution> {
    check_len(k.size(), p.len())?;
    let mut v = p.probs().to_vec();
    for _ in 0..n {
        v = k.apply_slice(&v);
    }
    Ok(FiniteDistribution::from_computed(v))
}

/// `p, pK, ..., pK^n`.
pub fn propagate_all(p: &FiniteDistribution, k: &KernelMatrix, n: usize) -> Result<Vec<FiniteDistribution>> {
    check_len(k.size(), p.len())?;
    let mut out = Vec::with_capacity(n + 1);
    let mut v = p.probs().to_vec();
    out.push(p.clone());
    for _ in 0..n {
        v = k.apply_slice(&v);
        out.push(FiniteDistribution::from_computed(v.clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_state(a: f64, b: f64) -> KernelMatrix {
        KernelMatrix::new(vec![vec![1.0 - a, a], vec![b, 1.0 - b]]).unwrap()
    }

    #[test]
    fn symmetric_two_state_is_uniform() {
        let pi = stationary_distribution(&two_state(1.0 / 3.0, 1.0 / 3.0)).unwrap();
        assert!((pi.get(0) - 0.5).abs() < 1e-15 && (pi.get(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn general_two_state_closed_form() {
        for (a, b) in [(0.1, 0.7), (0.9, 0.2), (0.5, 0.5), (0.05, 0.95)] {
            let pi = stationary_distribution(&two_state(a, b)).unwrap();
            assert!((pi.get(0) - b / (a + b)).abs() < 1e-12);
            assert!((pi.get(1) - a / (a + b)).abs() < 1e-12);
        }
    }

    #[test]
    fn reducible_kernel_rejected() {
        assert!(matches!(
            stationary_distribution(&KernelMatrix::identity(3)),
            Err(Error::Reducible { .. })
        ));
    }

    #[test]
    fn propagate_examples() {
        let k = two_state(0.2, 0.3);
        let p = FiniteDistribution::new(vec![0.4, 0.6]).unwrap();
        assert_eq!(propagate(&p, &k, 0).unwrap(), p);
        let (a, b) = (0.2, 0.3);
        let lambda: f64 = 1.0 - a - b;
        let start = FiniteDistribution::point(2, 1).unwrap();
        for n in 0..40 {
            let q = propagate(&start, &k, n).unwrap();
            let expected = a / (a + b) + b / (a + b) * lambda.powi(n as i32);
            assert!((q.get(1) - expected).abs() < 1e-12);
        }
        let all = propagate_all(&start, &k, 10).unwrap();
        assert_eq!(all.len(), 11);
        assert_eq!(all[10], propagate(&start, &k, 10).unwrap());
        assert!(propagate(&FiniteDistribution::uniform(3).unwrap(), &k, 1).is_err());
    }

    fn random_kernel() -> impl Strategy<Value = KernelMatrix> {
        (2usize..7).prop_flat_map(|s| {
            prop::collection::vec(prop::collection::vec(0.01f64..1.0, s), s).prop_map(|rows| {
                let rows = rows
                    .into_iter()
                    .map(|r| {
                        let t: f64 = r.iter().sum();
                        r.into_iter().map(|x| x / t).collect()
                    })
                    .collect();
                KernelMatrix::new(rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn stationary_is_a_fixed_point_of_propagation(k in random_kernel(), n in 1usize..1000) {
            let pi = stationary_distribution(&k).unwrap();
            prop_assert!(k.stationarity_residual(&pi).unwrap() <= 1e-12);
            let moved = propagate(&pi, &k, n).unwrap();
            prop_assert!(moved.l1_distance(&pi).unwrap() <= n as f64 * 1e-12);
        }
    }
}
