//! Optimal unambiguous discrimination: the full pipeline, an analytic upper
//! bound, measurement synthesis and measurement checks.

use crate::decompose::{core_split, feasible, CoreSplit, Feasibility};
use crate::error::{Error, Result};
use crate::model::{DiscriminationInstance, Tolerances};
use crate::numkit::{self, ComplexMatrix};
use crate::sdp::{self, build_gram, solve_gram_sdp, Certificate, GammaSolution, GramBuild, SolverConfig};

/// `Σ η_i Tr ρ̃_i − sqrt(m/(m−1) · Σ_{i≠j} η_i η_j F²(ρ̃_i, ρ̃_j))`, the sum
/// running over ordered pairs. Fidelities use the unnormalized cores.
pub fn upper_bound(split: &CoreSplit, priors: &[f64]) -> Result<f64> {
    let m = split.len();
    if priors.len() != m {
        return Err(Error::InvalidArgument(format!("{} priors for {m} cores", priors.len())));
    }
    if m < 2 {
        return Err(Error::InvalidArgument("the bound needs at least two states".into()));
    }
    let lead: f64 = split
        .cores
        .iter()
        .zip(priors)
        .map(|(c, e)| e * c.trace())
        .sum();
    let mut cross = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            let f = numkit::fidelity(split.cores[i].matrix(), split.cores[j].matrix())?;
            cross += 2.0 * priors[i] * priors[j] * f * f;
        }
    }
    let mf = m as f64;
    Ok(lead - (mf / (mf - 1.0) * cross).sqrt())
}

#[derive(Debug, Clone)]
pub struct OptimizeReport {
    pub feasibility: Feasibility,
    pub split: CoreSplit,
    pub gram: Option<GramBuild>,
    pub solution: Option<GammaSolution>,
    pub certificate: Option<Certificate>,
    /// `γ_i`, all zero when infeasible.
    pub gammas: Vec<f64>,
    /// Optimal success probability `P = Σ η_i γ_i`.
    pub success: f64,
    pub upper_bound: f64,
    pub converged: bool,
}

impl OptimizeReport {
    pub fn feasible(&self) -> bool {
        self.feasibility.feasible
    }

    pub fn core_traces(&self) -> &[f64] {
        &self.feasibility.core_traces
    }
}

pub fn optimize(
    instance: &DiscriminationInstance,
    cfg: &SolverConfig,
    tol: &Tolerances,
) -> Result<OptimizeReport> {
    tol.validate()?;
    let priors = instance.priors();
    let split = core_split(instance, tol)?;
    let feasibility = feasible(&split, tol);
    let bound = upper_bound(&split, &priors)?;
    if !feasibility.feasible {
        return Ok(OptimizeReport {
            gammas: vec![0.0; instance.len()],
            feasibility,
            split,
            gram: None,
            solution: None,
            certificate: None,
            success: 0.0,
            upper_bound: bound,
            converged: true,
        });
    }
    let gram = build_gram(&split, &priors, tol)?;
    let solution = solve_gram_sdp(&gram.problem, cfg)?;
    let certificate = sdp::check_solution(&gram.problem, &solution, tol)?;
    Ok(OptimizeReport {
        gammas: solution.gammas.clone(),
        success: solution.objective,
        converged: solution.converged,
        feasibility,
        split,
        gram: Some(gram),
        solution: Some(solution),
        certificate: Some(certificate),
        upper_bound: bound,
    })
}

/// Measurement operators `Π_0, Π_1, .., Π_m`; `Π_0` is the inconclusive
/// outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    pub operators: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(operators: Vec<ComplexMatrix>) -> Self {
        Self { operators }
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.operators.first().map_or(0, |o| o.rows())
    }

    /// `‖Σ Π_k − I‖_F`.
    pub fn completeness_residual(&self) -> f64 {
        let n = self.dim();
        let sum = self
            .operators
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, o| &acc + o);
        (&sum - &ComplexMatrix::identity(n)).frobenius_norm()
    }
}

/// Builds the measurement from a Gram solution through the reciprocal frame
/// `Φ = Ψ̃ X̃⁻¹`: `Π_i = Φ B_i Φ†` with `B_i` holding `Γ̃_i` in block `i`,
/// and `Π_0 = I − Σ Π_i`.
pub fn synthesize_povm(
    instance: &DiscriminationInstance,
    gram: &GramBuild,
    g: &GammaSolution,
    tol: &Tolerances,
) -> Result<Povm> {
    let p = &gram.problem;
    let cert = sdp::check_solution(p, g, tol)?;
    if !cert.feasible {
        let min_eig = cert
            .min_eig_blocks
            .iter()
            .copied()
            .fold(cert.min_eig_slack, f64::min);
        return Err(Error::InfeasibleSolution { min_eig });
    }
    let psi = gram.stacked_vectors();
    let n = instance.dim();
    if psi.rows() != n {
        return Err(Error::AmbientMismatch { left: n, right: psi.rows() });
    }
    let xinv = numkit::inverse_hpd(&p.xtilde).ok_or(Error::GramNotPositiveDefinite {
        min_eig: numkit::min_eigenvalue(&p.xtilde)?,
    })?;
    let phi = &psi * &xinv;
    let mut ops = Vec::with_capacity(g.blocks.len() + 1);
    let mut rest = ComplexMatrix::identity(n);
    for (i, block) in g.blocks.iter().enumerate() {
        let f = phi.submatrix(0, p.offset(i + 1), n, block.rows());
        let pi = (&(&f * block) * &f.adjoint()).hermitian_part();
        rest = &rest - &pi;
        ops.push(pi);
    }
    ops.insert(0, rest.hermitian_part());
    Ok(Povm::new(ops))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PovmVerification {
    /// `max_{i≠j} |Tr(Π_i ρ_j)|` over conclusive outcomes.
    pub max_cross: f64,
    /// `max_{i≠j} |Tr(Π_i ρ̃_j)|`.
    pub max_core_cross: f64,
    /// `max_i |Tr(Π_i ρ̃_0)|`.
    pub max_core0: f64,
    pub min_eigenvalue: f64,
    pub completeness: f64,
    /// `Tr(Π_i ρ_i)`.
    pub successes: Vec<f64>,
    pub direct_ok: bool,
    pub core_ok: bool,
    pub unambiguous: bool,
}

pub fn verify_povm(
    instance: &DiscriminationInstance,
    split: &CoreSplit,
    povm: &Povm,
    tol: &Tolerances,
) -> Result<PovmVerification> {
    let m = instance.len();
    let n = instance.dim();
    if povm.len() != m + 1 {
        return Err(Error::InvalidArgument(format!(
            "{} operators for {m} states",
            povm.len()
        )));
    }
    if let Some(bad) = povm.operators.iter().find(|o| o.shape() != (n, n)) {
        return Err(Error::AmbientMismatch { left: n, right: bad.rows() });
    }
    if split.len() != m || split.dim() != n {
        return Err(Error::AmbientMismatch { left: n, right: split.dim() });
    }
    let tr = |a: &ComplexMatrix, b: &ComplexMatrix| a.trace_product(b).norm();
    let mut max_cross = 0.0f64;
    let mut max_core_cross = 0.0f64;
    let mut max_core0 = 0.0f64;
    let mut successes = Vec::with_capacity(m);
    for i in 0..m {
        let pi = &povm.operators[i + 1];
        for j in 0..m {
            if i == j {
                successes.push(pi.trace_product(instance.state(j).matrix()).re);
            } else {
                max_cross = max_cross.max(tr(pi, instance.state(j).matrix()));
                max_core_cross = max_core_cross.max(tr(pi, split.cores[j].matrix()));
            }
        }
        max_core0 = max_core0.max(tr(pi, split.core0.matrix()));
    }
    let mut min_eigenvalue = f64::INFINITY;
    for o in &povm.operators {
        min_eigenvalue = min_eigenvalue.min(numkit::min_eigenvalue(&o.hermitian_part())?);
    }
    let completeness = povm.completeness_residual();
    let v = tol.verify;
    let valid = min_eigenvalue >= -v && completeness <= v;
    let direct_ok = max_cross <= v;
    let core_ok = max_core_cross <= v && max_core0 <= v;
    Ok(PovmVerification {
        max_cross,
        max_core_cross,
        max_core0,
        min_eigenvalue,
        completeness,
        successes,
        direct_ok,
        core_ok,
        unambiguous: valid && direct_ok,
    })
}
