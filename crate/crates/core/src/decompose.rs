//! Splitting mixed states into a part that can be discriminated (the core)
//! and a part lying in the other states' supports.
//!
//! For each state `ρ_i`, `Mix(ρ_i) = supp(ρ_i) ∩ Σ_{j≠i} supp(ρ_j)`. The state
//! is split uniquely as `ρ_i = ρ̂_i + ρ̃_i` with `supp(ρ̂_i) = Mix(ρ_i)` and
//! `supp(ρ̃_i) ∩ Mix(ρ_i) = {0}`; `ρ̃_i` is the core and `ρ̃_0 = Σ_i ρ̂_i`
//! collects the rest. The instance is discriminable iff every core is
//! nonzero.

use crate::error::{Error, Result};
use crate::model::{ensemble_of, DensityOperator, DiscriminationInstance, Tolerances};
use crate::numkit::{self, ComplexMatrix};
use crate::subspace::{self, Subspace};

/// Splits `rho` into `(rho1, rho2)` with `supp(rho1) = m_space`,
/// `rho1 + rho2 = rho` and `supp(rho2) ∩ m_space = {0}`.
///
/// Factors `rho = ΨΨ†` with the eigen-ensemble and hands over to
/// [`split_by_factor`].
pub fn split_by_subspace(
    rho: &DensityOperator,
    m_space: &Subspace,
    tol: &Tolerances,
) -> Result<(DensityOperator, DensityOperator)> {
    if m_space.ambient_dim() != rho.dim() {
        return Err(Error::AmbientMismatch {
            left: rho.dim(),
            right: m_space.ambient_dim(),
        });
    }
    let supp = subspace::support(rho, tol)?;
    let residual = subspace::containment_residual(&supp, m_space)?;
    if residual > tol.containment() {
        return Err(Error::NotContained { residual });
    }
    if m_space.is_zero() {
        return Ok((DensityOperator::zero(rho.dim()), rho.clone()));
    }
    if m_space.dim() == supp.dim() {
        return Ok((rho.clone(), DensityOperator::zero(rho.dim())));
    }
    let psi = ensemble_of(rho, tol)?.vectors().clone();
    split_by_factor(&psi, m_space, tol)
}

/// The same split for an explicit factorization `ρ = ΨΨ†`. Columns of `Ψ`
/// need not be independent.
///
/// Solves `Ψ x_j = b_j` for every basis vector `b_j` of `m_space`,
/// orthonormalizes the `x_j` into `U_1`, completes to a unitary
/// `(U_1 U_2)` and returns `(Ψ U_1 U_1† Ψ†, Ψ U_2 U_2† Ψ†)`.
pub fn split_by_factor(
    psi: &ComplexMatrix,
    m_space: &Subspace,
    tol: &Tolerances,
) -> Result<(DensityOperator, DensityOperator)> {
    let n = psi.rows();
    if m_space.ambient_dim() != n {
        return Err(Error::AmbientMismatch {
            left: n,
            right: m_space.ambient_dim(),
        });
    }
    let rho = psi * &psi.adjoint();
    let supp = subspace::support_of_matrix(&rho.hermitian_part(), tol)?;
    let residual = subspace::containment_residual(&supp, m_space)?;
    if residual > tol.containment() {
        return Err(Error::NotContained { residual });
    }
    let k = m_space.dim();
    if k == 0 {
        return Ok((
            DensityOperator::zero(n),
            DensityOperator::from_psd_unchecked(rho),
        ));
    }
    if k == supp.dim() {
        return Ok((
            DensityOperator::from_psd_unchecked(rho),
            DensityOperator::zero(n),
        ));
    }

    let largest = numkit::hermitian_eig(&rho, true)?.max_abs_value();
    let sv_cutoff = tol.cutoffs().threshold(largest).sqrt();
    let mut coeffs = Vec::with_capacity(k);
    for b in m_space.basis().columns() {
        coeffs.push(numkit::least_squares_solve(psi, &b, sv_cutoff)?.solution);
    }
    let scale = coeffs.iter().map(|x| numkit::norm(x)).fold(0.0, f64::max);
    let u1 = numkit::gram_schmidt(&coeffs, 1e-8 * scale)?;
    if u1.len() != k {
        return Err(Error::RankDeficient {
            expected: k,
            got: u1.len(),
        });
    }
    let p = psi.cols();
    let u = numkit::complete_to_unitary(&ComplexMatrix::from_columns(p, &u1))?;
    let a = psi * &u.submatrix(0, 0, p, k);
    let b = psi * &u.submatrix(0, k, p, p - k);
    Ok((
        DensityOperator::from_psd_unchecked(&a * &a.adjoint()),
        DensityOperator::from_psd_unchecked(&b * &b.adjoint()),
    ))
}

fn supports(instance: &DiscriminationInstance, tol: &Tolerances) -> Result<Vec<Subspace>> {
    instance
        .states()
        .map(|rho| subspace::support(rho, tol))
        .collect()
}

fn others_sum(supports: &[Subspace], i: usize, tol: &Tolerances) -> Result<Subspace> {
    let others: Vec<&Subspace> = supports
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, s)| s)
        .collect();
    subspace::sum(&others, tol)
}

/// `Mix(ρ_i)` for the 0-based state index `i`.
pub fn mix_space(
    instance: &DiscriminationInstance,
    i: usize,
    tol: &Tolerances,
) -> Result<Subspace> {
    if i >= instance.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: instance.len(),
        });
    }
    let supp = supports(instance, tol)?;
    let others = others_sum(&supp, i, tol)?;
    subspace::intersect(&supp[i], &others, tol)
}

#[derive(Debug, Clone)]
pub struct CoreSplit {
    /// `ρ̃_1 .. ρ̃_m`.
    pub cores: Vec<DensityOperator>,
    /// `ρ̂_1 .. ρ̂_m`.
    pub residues: Vec<DensityOperator>,
    /// `ρ̃_0 = Σ ρ̂_i`; its trace may exceed one.
    pub core0: DensityOperator,
    pub mix_spaces: Vec<Subspace>,
    /// Distance of each intersection spectrum from its threshold.
    pub mix_margins: Vec<Option<f64>>,
}

impl CoreSplit {
    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.core0.dim()
    }

    pub fn core_traces(&self) -> Vec<f64> {
        self.cores.iter().map(|c| c.trace()).collect()
    }

    pub fn mix_dims(&self) -> Vec<usize> {
        self.mix_spaces.iter().map(|s| s.dim()).collect()
    }

    /// `dim supp(ρ̃_i)` for `i = 0..=m`, core 0 first.
    pub fn core_support_dims(&self, tol: &Tolerances) -> Result<Vec<usize>> {
        std::iter::once(&self.core0)
            .chain(&self.cores)
            .map(|c| Ok(subspace::support(c, tol)?.dim()))
            .collect()
    }
}

pub fn core_split(instance: &DiscriminationInstance, tol: &Tolerances) -> Result<CoreSplit> {
    let supp = supports(instance, tol)?;
    let n = instance.dim();
    let mut cores = Vec::with_capacity(instance.len());
    let mut residues = Vec::with_capacity(instance.len());
    let mut mix_spaces = Vec::with_capacity(instance.len());
    let mut mix_margins = Vec::with_capacity(instance.len());
    let mut core0 = ComplexMatrix::zeros(n, n);
    for (i, rho) in instance.states().enumerate() {
        let others = others_sum(&supp, i, tol)?;
        let mix = subspace::intersect_detailed(&supp[i], &others, tol)?;
        // The part supported on Mix is the residue; the remainder is the core.
        let (residue, core) = split_by_subspace(rho, &mix.space, tol)?;
        core0 = &core0 + residue.matrix();
        cores.push(core);
        residues.push(residue);
        mix_spaces.push(mix.space);
        mix_margins.push(mix.margin);
    }
    Ok(CoreSplit {
        cores,
        residues,
        core0: DensityOperator::from_psd_unchecked(core0),
        mix_spaces,
        mix_margins,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    /// State `i` can be identified with nonzero probability.
    pub per_state: Vec<bool>,
    pub feasible: bool,
    pub core_traces: Vec<f64>,
    pub margins: Vec<Option<f64>>,
}

impl Feasibility {
    pub fn zero_cores(&self) -> Vec<usize> {
        self.per_state
            .iter()
            .enumerate()
            .filter(|(_, &ok)| !ok)
            .map(|(i, _)| i)
            .collect()
    }
}

/// A state is discriminable iff its core has trace above the rank cutoff.
pub fn feasible(split: &CoreSplit, tol: &Tolerances) -> Feasibility {
    let threshold = tol.cutoffs().threshold(1.0);
    let core_traces = split.core_traces();
    let per_state: Vec<bool> = core_traces.iter().map(|&t| t > threshold).collect();
    Feasibility {
        feasible: per_state.iter().all(|&b| b),
        per_state,
        core_traces,
        margins: split.mix_margins.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{random_instance, validate_instance};
    use crate::numkit::C64;
    use crate::rng::SplitMix64;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn span(n: usize, vs: &[Vec<C64>]) -> Subspace {
        Subspace::span(n, vs, 1e-10).unwrap()
    }

    fn dist(a: &DensityOperator, b: &ComplexMatrix) -> f64 {
        (a.matrix() - b).frobenius_norm()
    }

    #[test]
    fn split_diagonal_state() {
        let rho = DensityOperator::from_psd_unchecked(ComplexMatrix::diag_real(&[0.5, 0.5]));
        let m = span(2, &[vec![c(1.0), c(0.0)]]);
        let (r1, r2) = split_by_subspace(&rho, &m, &tol()).unwrap();
        assert!(dist(&r1, &ComplexMatrix::diag_real(&[0.5, 0.0])) < 1e-14);
        assert!(dist(&r2, &ComplexMatrix::diag_real(&[0.0, 0.5])) < 1e-14);
    }

    #[test]
    fn split_non_orthogonal_pieces() {
        // ρ = |0><0| + |+><+| (unnormalized) = [[3/2, 1/2], [1/2, 1/2]].
        // Hand construction: ρ1 = |0><0|, ρ2 = (e0 + e1)(e0 + e1)† / 2.
        let rho = DensityOperator::from_psd_unchecked(ComplexMatrix::from_real(
            2,
            2,
            &[1.5, 0.5, 0.5, 0.5],
        ));
        let m = span(2, &[vec![c(1.0), c(0.0)]]);
        let (r1, r2) = split_by_subspace(&rho, &m, &tol()).unwrap();
        assert!(dist(&r1, &ComplexMatrix::diag_real(&[1.0, 0.0])) < 1e-12);
        assert!(dist(&r2, &ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5])) < 1e-12);
    }

    #[test]
    fn split_full_and_zero_subspace() {
        let inst = random_instance(4, 2, &[2], 3).unwrap();
        let rho = inst.state(0);
        let supp = subspace::support(rho, &tol()).unwrap();
        let (r1, r2) = split_by_subspace(rho, &supp, &tol()).unwrap();
        assert_eq!(&r1, rho);
        assert_eq!(r2.trace(), 0.0);
        let (r1, r2) = split_by_subspace(rho, &Subspace::zero(4), &tol()).unwrap();
        assert_eq!(r1.trace(), 0.0);
        assert_eq!(&r2, rho);
    }

    #[test]
    fn split_rejects_subspace_outside_support() {
        let rho = DensityOperator::pure(&[c(1.0), c(0.0)]);
        let m = span(2, &[vec![c(0.0), c(1.0)]]);
        assert!(matches!(
            split_by_subspace(&rho, &m, &tol()),
            Err(Error::NotContained { .. })
        ));
    }

    #[test]
    fn split_is_unique_under_factor_remix() {
        let mut rng = SplitMix64::new(17);
        for seed in 0..10 {
            let inst = random_instance(5, 2, &[3], seed).unwrap();
            let rho = inst.state(0);
            let psi = ensemble_of(rho, &tol()).unwrap().vectors().clone();
            let coeffs: Vec<Vec<C64>> = (0..2)
                .map(|_| (0..3).map(|_| rng.complex_normal()).collect())
                .collect();
            let m = Subspace::span(5, &coeffs.iter().map(|x| psi.matvec(x)).collect::<Vec<_>>(), 1e-10).unwrap();
            let (a1, _) = split_by_factor(&psi, &m, &tol()).unwrap();
            let w_raw: Vec<Vec<C64>> = (0..3)
                .map(|_| (0..3).map(|_| rng.complex_normal()).collect())
                .collect();
            let w = ComplexMatrix::from_columns(3, &numkit::gram_schmidt(&w_raw, 1e-10).unwrap());
            let (b1, b2) = split_by_factor(&(&psi * &w), &m, &tol()).unwrap();
            assert!((a1.matrix() - b1.matrix()).frobenius_norm() < 1e-7);
            assert!((&(b1.matrix() + b2.matrix()) - rho.matrix()).frobenius_norm() < 1e-8);
        }
    }

    fn dim3_pair() -> DiscriminationInstance {
        validate_instance(
            3,
            vec![
                (0.5, ComplexMatrix::diag_real(&[0.5, 0.5, 0.0])),
                (0.5, ComplexMatrix::diag_real(&[0.5, 0.0, 0.5])),
            ],
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn mix_space_examples() {
        let orth = validate_instance(
            2,
            vec![
                (0.5, ComplexMatrix::diag_real(&[1.0, 0.0])),
                (0.5, ComplexMatrix::diag_real(&[0.0, 1.0])),
            ],
            &tol(),
        )
        .unwrap();
        assert!(mix_space(&orth, 0, &tol()).unwrap().is_zero());

        let rho = ComplexMatrix::diag_real(&[0.5, 0.5, 0.0]);
        let same = validate_instance(3, vec![(0.5, rho.clone()), (0.5, rho)], &tol()).unwrap();
        assert_eq!(mix_space(&same, 1, &tol()).unwrap().dim(), 2);

        let mix = mix_space(&dim3_pair(), 0, &tol()).unwrap();
        let e0 = span(3, &[vec![c(1.0), c(0.0), c(0.0)]]);
        assert!(mix.projector_distance(&e0).unwrap() < 1e-12);

        assert!(matches!(
            mix_space(&orth, 2, &tol()),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn core_split_examples() {
        let orth = validate_instance(
            2,
            vec![
                (0.5, ComplexMatrix::diag_real(&[1.0, 0.0])),
                (0.5, ComplexMatrix::diag_real(&[0.0, 1.0])),
            ],
            &tol(),
        )
        .unwrap();
        let s = core_split(&orth, &tol()).unwrap();
        assert_eq!(&s.cores[0], orth.state(0));
        assert_eq!(s.core0.trace(), 0.0);
        assert!(feasible(&s, &tol()).feasible);

        let rho = ComplexMatrix::diag_real(&[0.5, 0.5, 0.0]);
        let same = validate_instance(3, vec![(0.5, rho.clone()), (0.5, rho.clone())], &tol()).unwrap();
        let s = core_split(&same, &tol()).unwrap();
        assert_eq!(s.core_traces(), vec![0.0, 0.0]);
        assert!(dist(&s.core0, &rho.scale(2.0)) < 1e-14);
        let f = feasible(&s, &tol());
        assert_eq!(f.per_state, vec![false, false]);
        assert_eq!(f.zero_cores(), vec![0, 1]);

        let s = core_split(&dim3_pair(), &tol()).unwrap();
        assert!(dist(&s.cores[0], &ComplexMatrix::diag_real(&[0.0, 0.5, 0.0])) < 1e-12);
        assert!(dist(&s.cores[1], &ComplexMatrix::diag_real(&[0.0, 0.0, 0.5])) < 1e-12);
        assert!(dist(&s.core0, &ComplexMatrix::diag_real(&[1.0, 0.0, 0.0])) < 1e-12);
    }

    #[test]
    fn pure_state_inside_mixed_support() {
        // ρ1 = |+><+| lies inside supp(ρ2) = C^2: ρ1 has no core, ρ2 keeps one.
        let plus = DensityOperator::pure(&[c(1.0), c(1.0)]).into_matrix();
        let inst = validate_instance(
            2,
            vec![(0.5, plus), (0.5, ComplexMatrix::from_real(2, 2, &[0.7, 0.1, 0.1, 0.3]))],
            &tol(),
        )
        .unwrap();
        let s = core_split(&inst, &tol()).unwrap();
        assert_eq!(s.mix_dims(), vec![1, 1]);
        let f = feasible(&s, &tol());
        assert_eq!(f.per_state, vec![false, true]);
        assert!(!f.feasible);
    }

    #[test]
    fn core_split_invariants_on_random_instances() {
        let t = tol();
        for seed in 0..40 {
            let mut rng = SplitMix64::new(seed);
            let dim = 2 + (rng.next_u64() % 5) as usize;
            let m = 2 + (rng.next_u64() % 2) as usize;
            let ranks: Vec<usize> = (0..m).map(|_| 1 + (rng.next_u64() as usize) % dim.min(3)).collect();
            let inst = random_instance(dim, m, &ranks, seed).unwrap();
            let s = core_split(&inst, &t).unwrap();
            let mut sum0 = ComplexMatrix::zeros(dim, dim);
            for i in 0..m {
                let recon = s.cores[i].matrix() + s.residues[i].matrix();
                assert!((&recon - inst.state(i).matrix()).frobenius_norm() < 1e-8);
                let hat_supp = subspace::support(&s.residues[i], &t).unwrap();
                assert!(hat_supp.projector_distance(&s.mix_spaces[i]).unwrap() < 1e-8);
                let core_supp = subspace::support(&s.cores[i], &t).unwrap();
                assert!(subspace::intersect(&core_supp, &s.mix_spaces[i], &t).unwrap().is_zero());
                sum0 = &sum0 + s.residues[i].matrix();
            }
            assert_eq!(&sum0.hermitian_part(), s.core0.matrix());
            let all: Vec<Subspace> = inst.states().map(|r| subspace::support(r, &t).unwrap()).collect();
            let total = subspace::sum(&all.iter().collect::<Vec<_>>(), &t).unwrap();
            let dims = s.core_support_dims(&t).unwrap();
            assert_eq!(total.dim(), dims.iter().sum::<usize>(), "seed {seed}");
        }
    }
}
