//! Problem-domain types: density operators, discrimination instances,
//! ensembles and set instances.

use std::fmt;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::numkit::{self, ComplexMatrix, Cutoffs, C64};
use crate::rng::SplitMix64;

/// Deviation allowed in unit traces and the prior sum.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Numerical knobs shared by the whole pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute eigenvalue cutoff for support and rank decisions.
    pub rank_abs: f64,
    /// Cutoff relative to the largest eigenvalue.
    pub rank_rel: f64,
    /// Allowed negative eigenvalue / anti-Hermitian residual.
    pub psd: f64,
    /// Two subspaces share a direction when `1 - cos^2(angle) <= intersect`.
    pub intersect: f64,
    pub solver_gap: f64,
    pub verify: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_abs: 1e-10,
            rank_rel: 1e-9,
            psd: 1e-9,
            intersect: 1e-8,
            solver_gap: 1e-7,
            verify: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn cutoffs(&self) -> Cutoffs {
        Cutoffs {
            abs: self.rank_abs,
            rel: self.rank_rel,
        }
    }

    /// Residual norm below which a unit vector counts as lying inside a
    /// subspace. This is `sin(angle)` for the same angle that `intersect`
    /// bounds through `sin^2`.
    pub fn containment(&self) -> f64 {
        self.intersect.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.rank_abs,
            self.rank_rel,
            self.psd,
            self.intersect,
            self.solver_gap,
            self.verify,
        ];
        if all.iter().all(|&x| x > 0.0 && x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("tolerances must be positive".into()))
        }
    }
}

/// Hermitian PSD operator, possibly subnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Checks Hermiticity, positivity and `Tr <= 1` at the given tolerance.
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let mut violations = Vec::new();
        check_operator(&matrix, None, tol, &mut violations);
        if let Some(v) = violations.into_iter().next() {
            return Err(ValidationError { violations: vec![v] }.into());
        }
        let trace = matrix.trace().re;
        if trace > 1.0 + NORMALIZATION_TOL {
            return Err(ValidationError {
                violations: vec![Violation {
                    kind: ViolationKind::Trace,
                    index: None,
                    residual: trace - 1.0,
                }],
            }
            .into());
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    /// Wraps a computed PSD matrix without checks; the matrix is hermitized.
    /// Used for parts of states (cores, residues, their sums) whose trace
    /// may exceed one.
    pub fn from_psd_unchecked(matrix: ComplexMatrix) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    /// Pure state `|v><v| / <v|v>`.
    pub fn pure(v: &[C64]) -> Self {
        let n = numkit::norm(v);
        let u: Vec<C64> = v.iter().map(|z| z / n).collect();
        Self::from_psd_unchecked(ComplexMatrix::outer(&u, &u))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Numerical rank at the given cutoffs.
    pub fn rank(&self, tol: &Tolerances) -> Result<usize> {
        let eig = numkit::hermitian_eig(&self.matrix, true)?;
        Ok(eig.above_cutoff(tol.cutoffs()).len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Shape,
    NonFinite,
    NotHermitian,
    NotPsd,
    Trace,
    NonPositivePrior,
    PriorSum,
    TooFewStates,
    EmptySet,
}

impl ViolationKind {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Shape => "shape",
            Self::NonFinite => "non_finite",
            Self::NotHermitian => "not_hermitian",
            Self::NotPsd => "not_psd",
            Self::Trace => "trace",
            Self::NonPositivePrior => "non_positive_prior",
            Self::PriorSum => "prior_sum",
            Self::TooFewStates => "too_few_states",
            Self::EmptySet => "empty_set",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Offending state (or set) index, when the violation is local to one.
    pub index: Option<usize>,
    pub residual: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{} at index {} (residual {:e})", self.kind.code(), i, self.residual),
            None => write!(f, "{} (residual {:e})", self.kind.code(), self.residual),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl ValidationError {
    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid instance: ")?;
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn check_operator(
    m: &ComplexMatrix,
    index: Option<usize>,
    tol: &Tolerances,
    out: &mut Vec<Violation>,
) -> bool {
    if !m.is_square() {
        out.push(Violation {
            kind: ViolationKind::Shape,
            index,
            residual: m.rows().abs_diff(m.cols()) as f64,
        });
        return false;
    }
    if !m.is_finite() {
        out.push(Violation {
            kind: ViolationKind::NonFinite,
            index,
            residual: f64::NAN,
        });
        return false;
    }
    let herm = m.hermitian_residual();
    if herm > tol.psd {
        out.push(Violation {
            kind: ViolationKind::NotHermitian,
            index,
            residual: herm,
        });
        return false;
    }
    let min = numkit::hermitian_eig(m, true)
        .map(|e| e.values.first().copied().unwrap_or(0.0))
        .unwrap_or(f64::NEG_INFINITY);
    if min < -tol.psd {
        out.push(Violation {
            kind: ViolationKind::NotPsd,
            index,
            residual: -min,
        });
        return false;
    }
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateEntry {
    pub prior: f64,
    pub state: DensityOperator,
}

/// `m >= 2` normalized states on a common space, with positive priors
/// summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationInstance {
    dim: usize,
    entries: Vec<StateEntry>,
}

impl DiscriminationInstance {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[StateEntry] {
        &self.entries
    }

    pub fn priors(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.prior).collect()
    }

    pub fn state(&self, i: usize) -> &DensityOperator {
        &self.entries[i].state
    }

    pub fn states(&self) -> impl Iterator<Item = &DensityOperator> {
        self.entries.iter().map(|e| &e.state)
    }
}

/// Validates raw `(prior, matrix)` pairs. Every problem found is reported,
/// each with the offending index and residual magnitude.
pub fn validate_instance(
    dim: usize,
    raw: Vec<(f64, ComplexMatrix)>,
    tol: &Tolerances,
) -> Result<DiscriminationInstance, ValidationError> {
    let mut violations = Vec::new();
    if raw.len() < 2 {
        violations.push(Violation {
            kind: ViolationKind::TooFewStates,
            index: None,
            residual: raw.len() as f64,
        });
    }
    for (i, (prior, m)) in raw.iter().enumerate() {
        if !(*prior > 0.0) || !prior.is_finite() {
            violations.push(Violation {
                kind: ViolationKind::NonPositivePrior,
                index: Some(i),
                residual: *prior,
            });
        }
        if m.shape() != (dim, dim) {
            violations.push(Violation {
                kind: ViolationKind::Shape,
                index: Some(i),
                residual: (m.rows().abs_diff(dim) + m.cols().abs_diff(dim)) as f64,
            });
            continue;
        }
        if check_operator(m, Some(i), tol, &mut violations) {
            let tr = m.trace().re;
            if (tr - 1.0).abs() > NORMALIZATION_TOL {
                violations.push(Violation {
                    kind: ViolationKind::Trace,
                    index: Some(i),
                    residual: (tr - 1.0).abs(),
                });
            }
        }
    }
    let sum: f64 = raw.iter().map(|(p, _)| p).sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL || !sum.is_finite() {
        violations.push(Violation {
            kind: ViolationKind::PriorSum,
            index: None,
            residual: (sum - 1.0).abs(),
        });
    }
    if !violations.is_empty() {
        return Err(ValidationError { violations });
    }
    Ok(DiscriminationInstance {
        dim,
        entries: raw
            .into_iter()
            .map(|(prior, m)| StateEntry {
                prior,
                state: DensityOperator::from_psd_unchecked(m),
            })
            .collect(),
    })
}

/// Random instance: state `i` is `ΨΨ† / Tr(ΨΨ†)` for a `dim x ranks[i]`
/// complex Gaussian `Ψ`; priors are uniform on the simplex. A single rank is
/// broadcast to all states.
pub fn random_instance(
    dim: usize,
    m: usize,
    ranks: &[usize],
    seed: u64,
) -> Result<DiscriminationInstance> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 states, got {m}")));
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let ranks: Vec<usize> = match ranks.len() {
        1 => vec![ranks[0]; m],
        n if n == m => ranks.to_vec(),
        n => {
            return Err(Error::InvalidArgument(format!(
                "{n} ranks given for {m} states"
            )))
        }
    };
    if let Some(&r) = ranks.iter().find(|&&r| r == 0 || r > dim) {
        return Err(Error::InvalidArgument(format!(
            "rank {r} not in 1..={dim}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut entries = Vec::with_capacity(m);
    let priors = rng.simplex(m);
    for (&rank, prior) in ranks.iter().zip(priors) {
        let psi = ComplexMatrix::from_fn(dim, rank, |_, _| rng.complex_normal());
        entries.push(StateEntry {
            prior,
            state: DensityOperator::from_psd_unchecked(normalized_gram(&psi)),
        });
    }
    Ok(DiscriminationInstance { dim, entries })
}

/// `ΨΨ† / Tr(ΨΨ†)`.
pub fn normalized_gram(psi: &ComplexMatrix) -> ComplexMatrix {
    let rho = psi * &psi.adjoint();
    let tr = rho.trace().re;
    rho.scale(1.0 / tr)
}

/// Unnormalized vectors `|ψ̃_k>` with `Σ_k |ψ̃_k><ψ̃_k| = ρ`; the weights are
/// the squared norms.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    /// One column per vector.
    vectors: ComplexMatrix,
}

impl Ensemble {
    pub fn from_vectors(vectors: ComplexMatrix) -> Self {
        Self { vectors }
    }

    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.cols() == 0
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| numkit::norm(&self.vectors.column(k)).powi(2))
            .collect()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        &self.vectors * &self.vectors.adjoint()
    }
}

/// Eigen-ensemble of `rho`: `sqrt(λ_k) v_k` over eigenvalues above the rank
/// cutoff.
pub fn ensemble_of(rho: &DensityOperator, tol: &Tolerances) -> Result<Ensemble> {
    let eig = numkit::hermitian_eig(rho.matrix(), true)?;
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -tol.psd.max(numkit::NEGATIVE_CLAMP * eig.max_abs_value()) {
        return Err(numkit::LinalgError::NotPsd { min_eig: min }.into());
    }
    let keep = eig.above_cutoff(tol.cutoffs());
    let mut v = eig.vectors.select_columns(&keep);
    for (j, &k) in keep.iter().enumerate() {
        let s = eig.values[k].sqrt();
        for i in 0..v.rows() {
            v[(i, j)] *= s;
        }
    }
    Ok(Ensemble { vectors: v })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetMember {
    pub prior: f64,
    pub state: DensityOperator,
}

/// States partitioned into sets; the task is to name the set.
#[derive(Debug, Clone, PartialEq)]
pub struct SetInstance {
    dim: usize,
    sets: Vec<Vec<SetMember>>,
}

impl SetInstance {
    /// Set membership is positional: the same operator may appear in two
    /// sets and is not detected.
    pub fn new(
        dim: usize,
        sets: Vec<Vec<(f64, ComplexMatrix)>>,
        tol: &Tolerances,
    ) -> Result<Self, ValidationError> {
        let mut violations = Vec::new();
        if sets.len() < 2 {
            violations.push(Violation {
                kind: ViolationKind::TooFewStates,
                index: None,
                residual: sets.len() as f64,
            });
        }
        let mut flat = 0usize;
        let mut total = 0.0;
        for (s, set) in sets.iter().enumerate() {
            if set.is_empty() {
                violations.push(Violation {
                    kind: ViolationKind::EmptySet,
                    index: Some(s),
                    residual: 0.0,
                });
            }
            for (prior, m) in set {
                total += prior;
                if !(*prior > 0.0) || !prior.is_finite() {
                    violations.push(Violation {
                        kind: ViolationKind::NonPositivePrior,
                        index: Some(flat),
                        residual: *prior,
                    });
                }
                if m.shape() != (dim, dim) {
                    violations.push(Violation {
                        kind: ViolationKind::Shape,
                        index: Some(flat),
                        residual: (m.rows().abs_diff(dim) + m.cols().abs_diff(dim)) as f64,
                    });
                } else if check_operator(m, Some(flat), tol, &mut violations) {
                    let tr = m.trace().re;
                    if (tr - 1.0).abs() > NORMALIZATION_TOL {
                        violations.push(Violation {
                            kind: ViolationKind::Trace,
                            index: Some(flat),
                            residual: (tr - 1.0).abs(),
                        });
                    }
                }
                flat += 1;
            }
        }
        if (total - 1.0).abs() > NORMALIZATION_TOL || !total.is_finite() {
            violations.push(Violation {
                kind: ViolationKind::PriorSum,
                index: None,
                residual: (total - 1.0).abs(),
            });
        }
        if !violations.is_empty() {
            return Err(ValidationError { violations });
        }
        Ok(Self {
            dim,
            sets: sets
                .into_iter()
                .map(|set| {
                    set.into_iter()
                        .map(|(prior, m)| SetMember {
                            prior,
                            state: DensityOperator::from_psd_unchecked(m),
                        })
                        .collect()
                })
                .collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sets(&self) -> &[Vec<SetMember>] {
        &self.sets
    }
}

/// A set instance folded into a state instance.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedSets {
    pub instance: DiscriminationInstance,
    /// For merged state `i`, the flat (enumeration-order) indices of the
    /// members of set `i`.
    pub members: Vec<Vec<usize>>,
}

/// Replaces set `i` by the state `Σ_k (η_ik / η'_i) σ_ik` with prior
/// `η'_i = Σ_k η_ik`.
pub fn merge_sets(s: &SetInstance) -> Result<MergedSets> {
    let mut entries = Vec::with_capacity(s.sets.len());
    let mut members = Vec::with_capacity(s.sets.len());
    let mut flat = 0usize;
    for (i, set) in s.sets.iter().enumerate() {
        if set.is_empty() {
            return Err(ValidationError {
                violations: vec![Violation {
                    kind: ViolationKind::EmptySet,
                    index: Some(i),
                    residual: 0.0,
                }],
            }
            .into());
        }
        let total: f64 = set.iter().map(|m| m.prior).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument(format!("set {i} has zero total prior")));
        }
        let mut rho = ComplexMatrix::zeros(s.dim, s.dim);
        let mut idx = Vec::with_capacity(set.len());
        for m in set {
            rho = &rho + &m.state.matrix().scale(m.prior / total);
            idx.push(flat);
            flat += 1;
        }
        entries.push(StateEntry {
            prior: total,
            state: DensityOperator::from_psd_unchecked(rho),
        });
        members.push(idx);
    }
    Ok(MergedSets {
        instance: DiscriminationInstance {
            dim: s.dim,
            entries,
        },
        members,
    })
}
