//! Monte Carlo replay of a measurement on randomly prepared states.

use crate::discriminate::Povm;
use crate::error::{Error, Result};
use crate::model::DiscriminationInstance;
use crate::rng::SplitMix64;

/// Largest tolerated drift of `Σ Π_k − I` and of each outcome distribution.
pub const PROBABILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub trials: u64,
    /// `counts[i][k]`: state `i` prepared, outcome `k` observed (`k = 0` is
    /// inconclusive, `k = i + 1` identifies state `i`).
    pub counts: Vec<Vec<u64>>,
    pub empirical_success: f64,
    pub misidentifications: u64,
    /// `Σ η_i Tr(Π_{i+1} ρ_i)`.
    pub predicted_success: f64,
    pub seed: u64,
}

impl SimReport {
    /// Binomial standard error of the empirical success rate.
    pub fn standard_error(&self) -> f64 {
        let p = self.predicted_success.clamp(0.0, 1.0);
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Index of the first cumulative weight exceeding `u`.
fn invert(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    // Round-off left `u` past the last bucket: take the last nonzero one.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

pub fn outcome_distributions(instance: &DiscriminationInstance, povm: &Povm) -> Result<Vec<Vec<f64>>> {
    let n = instance.dim();
    if povm.len() != instance.len() + 1 {
        return Err(Error::InvalidArgument(format!(
            "{} operators for {} states",
            povm.len(),
            instance.len()
        )));
    }
    if let Some(bad) = povm.operators.iter().find(|o| o.shape() != (n, n)) {
        return Err(Error::AmbientMismatch { left: n, right: bad.rows() });
    }
    let residual = povm.completeness_residual();
    if residual > PROBABILITY_TOL {
        return Err(Error::IncompletePovm { residual });
    }
    instance
        .states()
        .enumerate()
        .map(|(i, rho)| {
            let raw: Vec<f64> = povm
                .operators
                .iter()
                .map(|o| o.trace_product(rho.matrix()).re)
                .collect();
            let sum: f64 = raw.iter().sum();
            if (sum - 1.0).abs() > PROBABILITY_TOL {
                return Err(Error::ProbabilitySum { state: i, sum });
            }
            let clamped: Vec<f64> = raw.iter().map(|&p| p.max(0.0)).collect();
            let total: f64 = clamped.iter().sum();
            Ok(clamped.into_iter().map(|p| p / total).collect())
        })
        .collect()
}

/// Draws a state by prior, then an outcome by the Born rule, `trials`
/// times. Both draws invert cumulative sums in index order.
pub fn run_simulation(
    instance: &DiscriminationInstance,
    povm: &Povm,
    trials: u64,
    seed: u64,
) -> Result<SimReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let probs = outcome_distributions(instance, povm)?;
    let priors = instance.priors();
    let total_prior: f64 = priors.iter().sum();
    let m = instance.len();
    let mut counts = vec![vec![0u64; m + 1]; m];
    let mut rng = SplitMix64::new(seed);
    for _ in 0..trials {
        let i = invert(&priors, rng.next_f64() * total_prior);
        let k = invert(&probs[i], rng.next_f64());
        counts[i][k] += 1;
    }
    let hits: u64 = (0..m).map(|i| counts[i][i + 1]).sum();
    let misidentifications = (0..m)
        .map(|i| (1..=m).filter(|&k| k != i + 1).map(|k| counts[i][k]).sum::<u64>())
        .sum();
    let predicted_success = (0..m).map(|i| priors[i] * probs[i][i + 1]).sum();
    Ok(SimReport {
        trials,
        counts,
        empirical_success: hits as f64 / trials as f64,
        misidentifications,
        predicted_success,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_instance, Tolerances};
    use crate::numkit::ComplexMatrix;

    fn orthogonal_pair() -> DiscriminationInstance {
        validate_instance(
            2,
            vec![
                (0.3, ComplexMatrix::diag_real(&[1.0, 0.0])),
                (0.7, ComplexMatrix::diag_real(&[0.0, 1.0])),
            ],
            &Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn trivial_povm_never_succeeds() {
        let inst = orthogonal_pair();
        let z = ComplexMatrix::zeros(2, 2);
        let povm = Povm::new(vec![ComplexMatrix::identity(2), z.clone(), z]);
        let r = run_simulation(&inst, &povm, 1000, 1).unwrap();
        assert_eq!(r.empirical_success, 0.0);
        assert_eq!(r.misidentifications, 0);
        assert_eq!(r.counts.iter().flatten().sum::<u64>(), 1000);
    }

    #[test]
    fn projective_povm_always_succeeds() {
        let inst = orthogonal_pair();
        let povm = Povm::new(vec![
            ComplexMatrix::zeros(2, 2),
            ComplexMatrix::diag_real(&[1.0, 0.0]),
            ComplexMatrix::diag_real(&[0.0, 1.0]),
        ]);
        let r = run_simulation(&inst, &povm, 100_000, 3).unwrap();
        assert_eq!(r.empirical_success, 1.0);
        assert_eq!(r.misidentifications, 0);
        let frac0 = r.counts[0].iter().sum::<u64>() as f64 / 1e5;
        assert!((frac0 - 0.3).abs() < 4.0 * (0.21f64 / 1e5).sqrt());
    }

    #[test]
    fn same_seed_same_report() {
        let inst = orthogonal_pair();
        let h = ComplexMatrix::identity(2).scale(0.5);
        let povm = Povm::new(vec![h.clone(), ComplexMatrix::zeros(2, 2), h]);
        let a = run_simulation(&inst, &povm, 5000, 11).unwrap();
        let b = run_simulation(&inst, &povm, 5000, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, run_simulation(&inst, &povm, 5000, 12).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        let inst = orthogonal_pair();
        let z = ComplexMatrix::zeros(2, 2);
        let short = Povm::new(vec![ComplexMatrix::identity(2).scale(0.9), z.clone(), z.clone()]);
        assert!(matches!(
            run_simulation(&inst, &short, 10, 0),
            Err(Error::IncompletePovm { .. })
        ));
        let ok = Povm::new(vec![ComplexMatrix::identity(2), z.clone(), z]);
        assert!(run_simulation(&inst, &ok, 0, 0).is_err());
    }

    #[test]
    fn tiny_negative_probabilities_are_clamped() {
        let inst = orthogonal_pair();
        let eps = 1e-10;
        let povm = Povm::new(vec![
            ComplexMatrix::diag_real(&[eps, -eps]),
            ComplexMatrix::diag_real(&[1.0 - eps, 0.0]),
            ComplexMatrix::diag_real(&[0.0, 1.0 + eps]),
        ]);
        let probs = outcome_distributions(&inst, &povm).unwrap();
        assert!(probs.iter().flatten().all(|&p| p >= 0.0));
        assert!(probs.iter().all(|row| (row.iter().sum::<f64>() - 1.0).abs() < 1e-15));
    }
}
