//! The Gram-matrix semidefinite program for optimal success probability.
//!
//! With `Ψ̃` the concatenated ensembles of `ρ̃_0, ρ̃_1, .., ρ̃_m` and
//! `X̃ = Ψ̃†Ψ̃`, the optimum is
//!
//! ```text
//! max Σ_i η_i Tr Γ̃_i   s.t.   Γ̃ = diag(0, Γ̃_1, .., Γ̃_m) ⪰ 0,   X̃ − Γ̃ ⪰ 0.
//! ```

use crate::decompose::CoreSplit;
use crate::error::{Error, Result};
use crate::model::{ensemble_of, Ensemble, Tolerances};
use crate::numkit::{self, ComplexMatrix, Cutoffs, C64, HERMITIAN_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct GramProblem {
    pub xtilde: ComplexMatrix,
    /// `n_0, n_1, .., n_m`; block 0 belongs to `ρ̃_0`.
    pub block_sizes: Vec<usize>,
    /// `η_1 .. η_m`.
    pub priors: Vec<f64>,
}

impl GramProblem {
    pub fn new(xtilde: ComplexMatrix, block_sizes: Vec<usize>, priors: Vec<f64>) -> Result<Self> {
        if block_sizes.len() != priors.len() + 1 {
            return Err(Error::BlockMismatch(format!(
                "{} block sizes for {} priors",
                block_sizes.len(),
                priors.len()
            )));
        }
        let n: usize = block_sizes.iter().sum();
        if xtilde.shape() != (n, n) {
            return Err(Error::BlockMismatch(format!(
                "Gram matrix is {:?}, blocks sum to {n}",
                xtilde.shape()
            )));
        }
        if !xtilde.is_finite() || xtilde.hermitian_residual() > HERMITIAN_TOL {
            return Err(Error::InvalidArgument("Gram matrix is not Hermitian".into()));
        }
        if priors.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument("priors must be positive".into()));
        }
        Ok(Self {
            xtilde: xtilde.hermitian_part(),
            block_sizes,
            priors,
        })
    }

    pub fn num_states(&self) -> usize {
        self.priors.len()
    }

    pub fn dim(&self) -> usize {
        self.xtilde.rows()
    }

    /// Row offset of block `b` (0 for `ρ̃_0`, `i` for state `i`).
    pub fn offset(&self, b: usize) -> usize {
        self.block_sizes[..b].iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct GramBuild {
    pub problem: GramProblem,
    /// Eigen-ensembles of `ρ̃_0, .., ρ̃_m`, in block order.
    pub ensembles: Vec<Ensemble>,
}

impl GramBuild {
    /// `Ψ̃`: all ensemble vectors as columns.
    pub fn stacked_vectors(&self) -> ComplexMatrix {
        let n = self.ensembles[0].vectors().rows();
        self.ensembles
            .iter()
            .fold(ComplexMatrix::zeros(n, 0), |acc, e| acc.hcat(e.vectors()))
    }
}

pub fn build_gram(split: &CoreSplit, priors: &[f64], tol: &Tolerances) -> Result<GramBuild> {
    if priors.len() != split.len() {
        return Err(Error::InvalidArgument(format!(
            "{} priors for {} cores",
            priors.len(),
            split.len()
        )));
    }
    let ensembles = std::iter::once(&split.core0)
        .chain(&split.cores)
        .map(|c| ensemble_of(c, tol))
        .collect::<Result<Vec<_>>>()?;
    let block_sizes = ensembles.iter().map(Ensemble::len).collect();
    let mut build = GramBuild {
        problem: GramProblem {
            xtilde: ComplexMatrix::zeros(0, 0),
            block_sizes,
            priors: priors.to_vec(),
        },
        ensembles,
    };
    let psi = build.stacked_vectors();
    build.problem.xtilde = (&psi.adjoint() * &psi).hermitian_part();
    Ok(build)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mu_initial: f64,
    pub mu_shrink: f64,
    pub gap_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub step_backtrack: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mu_initial: 1.0,
            mu_shrink: 0.2,
            gap_tol: 1e-7,
            max_outer: 60,
            max_inner: 200,
            step_backtrack: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.mu_initial > 0.0
            && self.mu_shrink > 0.0
            && self.mu_shrink < 1.0
            && self.gap_tol > 0.0
            && self.step_backtrack > 0.0
            && self.step_backtrack < 1.0
            && self.max_outer > 0
            && self.max_inner > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bad solver config {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaSolution {
    /// `Γ̃_1 .. Γ̃_m`.
    pub blocks: Vec<ComplexMatrix>,
    /// `γ_i = Tr Γ̃_i`.
    pub gammas: Vec<f64>,
    pub objective: f64,
    /// Smallest eigenvalue of `X̃ − Γ̃`.
    pub min_eig_slack: f64,
    pub min_eig_blocks: Vec<f64>,
    pub converged: bool,
    /// Newton steps taken.
    pub iterations: usize,
    pub final_mu: f64,
}

/// Real coordinates of a Hermitian `n x n` matrix in an orthonormal basis:
/// diagonal entries, then `√2 Re h_kl` and `√2 Im h_kl` for `k < l`.
fn herm_to_coords(h: &ComplexMatrix, out: &mut Vec<f64>) {
    let n = h.rows();
    for k in 0..n {
        out.push(h[(k, k)].re);
    }
    for k in 0..n {
        for l in (k + 1)..n {
            let z = h[(k, l)] + h[(l, k)].conj();
            out.push(z.re / std::f64::consts::SQRT_2);
            out.push(z.im / std::f64::consts::SQRT_2);
        }
    }
}

fn herm_from_coords(n: usize, c: &[f64]) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        h[(k, k)] = C64::new(c[k], 0.0);
    }
    let mut t = n;
    for k in 0..n {
        for l in (k + 1)..n {
            let z = C64::new(c[t], c[t + 1]) / std::f64::consts::SQRT_2;
            h[(k, l)] = z;
            h[(l, k)] = z.conj();
            t += 2;
        }
    }
    h
}

struct Barrier<'a> {
    p: &'a GramProblem,
    offsets: Vec<usize>,
}

struct Point {
    value: f64,
    s_inv_sqrt: ComplexMatrix,
    s_inv: ComplexMatrix,
    g_inv_sqrt: Vec<ComplexMatrix>,
    g_inv: Vec<ComplexMatrix>,
}

impl<'a> Barrier<'a> {
    fn new(p: &'a GramProblem) -> Self {
        let offsets = (0..=p.num_states()).map(|b| p.offset(b)).collect();
        Self { p, offsets }
    }

    fn slack(&self, gammas: &[ComplexMatrix]) -> ComplexMatrix {
        let mut s = self.p.xtilde.clone();
        for (i, g) in gammas.iter().enumerate() {
            let o = self.offsets[i + 1];
            let n = g.rows();
            let block = &s.submatrix(o, o, n, n) - g;
            s.set_submatrix(o, o, &block);
        }
        s
    }

    fn linear(&self, gammas: &[ComplexMatrix]) -> f64 {
        gammas
            .iter()
            .zip(&self.p.priors)
            .map(|(g, eta)| eta * g.trace().re)
            .sum()
    }

    /// Barrier value, or `None` outside the open feasible set.
    fn value(&self, gammas: &[ComplexMatrix], mu: f64) -> Option<f64> {
        let mut logs = numkit::log_det_hpd(&self.slack(gammas))?;
        for g in gammas {
            logs += numkit::log_det_hpd(g)?;
        }
        Some(self.linear(gammas) + mu * logs)
    }

    fn point(&self, gammas: &[ComplexMatrix], mu: f64) -> Result<Option<Point>> {
        let Some(value) = self.value(gammas, mu) else {
            return Ok(None);
        };
        let inv_pair = |m: &ComplexMatrix| -> Result<Option<(ComplexMatrix, ComplexMatrix)>> {
            let eig = numkit::hermitian_eig(m, true)?;
            if eig.values.iter().any(|&x| !(x > 0.0)) {
                return Ok(None);
            }
            Ok(Some((eig.map_values(|x| 1.0 / x.sqrt()), eig.map_values(|x| 1.0 / x))))
        };
        let Some((s_inv_sqrt, s_inv)) = inv_pair(&self.slack(gammas))? else {
            return Ok(None);
        };
        let mut g_inv_sqrt = Vec::with_capacity(gammas.len());
        let mut g_inv = Vec::with_capacity(gammas.len());
        for g in gammas {
            let Some((a, b)) = inv_pair(g)? else {
                return Ok(None);
            };
            g_inv_sqrt.push(a);
            g_inv.push(b);
        }
        Ok(Some(Point {
            value,
            s_inv_sqrt,
            s_inv,
            g_inv_sqrt,
            g_inv,
        }))
    }

    /// Newton direction for maximizing the barrier at `pt`, with the
    /// squared Newton decrement.
    ///
    /// The negative Hessian is `JᵀJ` with one block row per log-det term,
    /// `√μ · S^{-1/2} Δ S^{-1/2}` and `√μ · Γ_i^{-1/2} Δ_i Γ_i^{-1/2}`;
    /// the system is solved through a QR factorization of `J`.
    fn newton(&self, pt: &Point, mu: f64) -> Option<(Vec<ComplexMatrix>, f64)> {
        let p = self.p;
        let m = p.num_states();
        let n = p.dim();
        let sizes = &p.block_sizes[1..];
        let cols: usize = sizes.iter().map(|k| k * k).sum();
        let rows = n * n + cols;
        let sm = mu.sqrt();

        let mut grad = Vec::with_capacity(cols);
        for i in 0..m {
            let (o, k) = (self.offsets[i + 1], sizes[i]);
            let g = &(&ComplexMatrix::identity(k).scale(p.priors[i]) - &pt.s_inv.submatrix(o, o, k, k).scale(mu))
                + &pt.g_inv[i].scale(mu);
            herm_to_coords(&g, &mut grad);
        }

        let mut jac = vec![0.0; rows * cols];
        let mut col = 0;
        let mut row2 = n * n;
        let mut buf = Vec::with_capacity(n * n);
        for i in 0..m {
            let (o, k) = (self.offsets[i + 1], sizes[i]);
            let w = pt.s_inv_sqrt.submatrix(0, o, n, k);
            let wa = w.adjoint();
            let gi = &pt.g_inv_sqrt[i];
            let mut unit = vec![0.0; k * k];
            for t in 0..k * k {
                unit[t] = 1.0;
                let e = herm_from_coords(k, &unit);
                unit[t] = 0.0;
                buf.clear();
                herm_to_coords(&(&(&w * &e) * &wa), &mut buf);
                for (r, v) in buf.iter().enumerate() {
                    jac[r * cols + col] = sm * v;
                }
                buf.clear();
                herm_to_coords(&(&(gi * &e) * gi), &mut buf);
                for (r, v) in buf.iter().enumerate() {
                    jac[(row2 + r) * cols + col] = sm * v;
                }
                col += 1;
            }
            row2 += k * k;
        }
        let (d, dec) = numkit::real_normal_solve(&jac, rows, cols, &grad)?;
        let mut dirs = Vec::with_capacity(m);
        let mut t = 0;
        for &k in sizes {
            dirs.push(herm_from_coords(k, &d[t..t + k * k]));
            t += k * k;
        }
        Some((dirs, dec))
    }
}

fn step(gammas: &[ComplexMatrix], dirs: &[ComplexMatrix], t: f64) -> Vec<ComplexMatrix> {
    gammas
        .iter()
        .zip(dirs)
        .map(|(g, d)| (g + &d.scale(t)).hermitian_part())
        .collect()
}

/// Solves the Gram program with a log-det barrier path-following method.
///
/// Each barrier subproblem is maximized by damped Newton steps, then `μ`
/// shrinks geometrically. Stops once `μ·θ < gap_tol`, with `θ` the barrier
/// parameter (total size of the slack and variable blocks), and the last
/// objective change is below `gap_tol`. On budget exhaustion the last
/// (strictly feasible) iterate is returned with `converged = false`.
pub fn solve_gram_sdp(p: &GramProblem, cfg: &SolverConfig) -> Result<GammaSolution> {
    cfg.validate()?;
    if let Some(i) = p.block_sizes[1..].iter().position(|&k| k == 0) {
        return Err(Error::EmptyBlock { index: i });
    }
    let eig = numkit::hermitian_eig(&p.xtilde, true)?;
    let lam_min = eig.values.first().copied().unwrap_or(0.0);
    if lam_min <= Cutoffs::default().threshold(eig.max_abs_value()) {
        return Err(Error::GramNotPositiveDefinite { min_eig: lam_min });
    }

    let barrier = Barrier::new(p);
    let eps = 0.1 * lam_min;
    let mut gammas: Vec<ComplexMatrix> = p.block_sizes[1..]
        .iter()
        .map(|&k| ComplexMatrix::identity(k).scale(eps))
        .collect();
    let theta = (p.dim() + p.block_sizes[1..].iter().sum::<usize>()) as f64;
    let mut mu = cfg.mu_initial;
    let mut iterations = 0;
    let mut prev_obj = barrier.linear(&gammas);
    let mut converged = false;

    'outer: for _ in 0..cfg.max_outer {
        let mut centered = false;
        for _ in 0..cfg.max_inner {
            let Some(pt) = barrier.point(&gammas, mu)? else {
                break 'outer;
            };
            let Some((dirs, dec)) = barrier.newton(&pt, mu) else {
                break;
            };
            let lam2 = dec / mu;
            if lam2 <= 1e-10 {
                centered = true;
                break;
            }
            iterations += 1;
            // Damped Newton: a step of 1/(1+λ) stays inside the domain of a
            // self-concordant barrier.
            let lam = lam2.sqrt();
            let mut t = if lam > 0.25 { 1.0 / (1.0 + lam) } else { 1.0 };
            let slack = 1e-13 * (1.0 + pt.value.abs());
            let mut accepted = false;
            while t > 1e-12 {
                let cand = step(&gammas, &dirs, t);
                if let Some(v) = barrier.value(&cand, mu) {
                    if v >= pt.value + 0.25 * t * dec - slack {
                        gammas = cand;
                        accepted = true;
                        break;
                    }
                }
                t *= cfg.step_backtrack;
            }
            if !accepted {
                // No progress is possible at this precision.
                centered = lam2 <= 1e-6;
                break;
            }
        }
        let obj = barrier.linear(&gammas);
        if centered && mu * theta < cfg.gap_tol && (obj - prev_obj).abs() < cfg.gap_tol {
            converged = true;
            break;
        }
        prev_obj = obj;
        mu *= cfg.mu_shrink;
    }

    let mut blocks = gammas;
    for b in &mut blocks {
        *b = b.hermitian_part();
    }
    let gammas_tr: Vec<f64> = blocks.iter().map(|g| g.trace().re).collect();
    let slack = barrier.slack(&blocks);
    Ok(GammaSolution {
        objective: gammas_tr.iter().zip(&p.priors).map(|(g, e)| g * e).sum(),
        gammas: gammas_tr,
        min_eig_slack: numkit::min_eigenvalue(&slack)?,
        min_eig_blocks: blocks
            .iter()
            .map(numkit::min_eigenvalue)
            .collect::<std::result::Result<_, _>>()?,
        blocks,
        converged,
        iterations,
        final_mu: mu,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub min_eig_slack: f64,
    pub min_eig_blocks: Vec<f64>,
    pub objective: f64,
    pub feasible: bool,
}

/// Recomputes the certificates of `g` from scratch.
pub fn check_solution(p: &GramProblem, g: &GammaSolution, tol: &Tolerances) -> Result<Certificate> {
    if g.blocks.len() != p.num_states() {
        return Err(Error::BlockMismatch(format!(
            "{} blocks for {} states",
            g.blocks.len(),
            p.num_states()
        )));
    }
    for (i, b) in g.blocks.iter().enumerate() {
        let k = p.block_sizes[i + 1];
        if b.shape() != (k, k) {
            return Err(Error::BlockMismatch(format!(
                "block {i} is {:?}, expected {k}x{k}",
                b.shape()
            )));
        }
    }
    let barrier = Barrier::new(p);
    let min_eig_slack = numkit::min_eigenvalue(&barrier.slack(&g.blocks).hermitian_part())?;
    let min_eig_blocks = g
        .blocks
        .iter()
        .map(|b| numkit::min_eigenvalue(&b.hermitian_part()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let feasible =
        min_eig_slack >= -tol.psd && min_eig_blocks.iter().all(|&x| x >= -tol.psd);
    Ok(Certificate {
        min_eig_slack,
        min_eig_blocks,
        objective: barrier.linear(&g.blocks),
        feasible,
    })
}

/// Upper limit on grid points visited by [`oracle_grid_search`].
pub const GRID_BUDGET: f64 = 2e7;

/// Brute-force lower bound on the optimum over diagonal `Γ̃`.
///
/// Every diagonal entry of blocks `1..=m` runs over an even grid on
/// `[0, X̃_kk]`. Feasibility is downward closed, so the last coordinate is
/// located by bisection on its grid instead of being scanned.
pub fn oracle_grid_search(p: &GramProblem, resolution: usize) -> Result<f64> {
    let start = p.block_sizes[0];
    let vars = p.dim() - start;
    if vars > 4 {
        return Err(Error::GridTooLarge(format!("{vars} diagonal entries, at most 4")));
    }
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    if vars == 0 {
        return Ok(0.0);
    }
    let points = ((resolution + 1) as f64).powi(vars as i32 - 1) * (resolution as f64).log2().ceil().max(1.0);
    if points > GRID_BUDGET {
        return Err(Error::GridTooLarge(format!("{points:.0} evaluations")));
    }
    let mut weight = Vec::with_capacity(vars);
    for (i, &k) in p.block_sizes[1..].iter().enumerate() {
        weight.extend(std::iter::repeat(p.priors[i]).take(k));
    }
    let top: Vec<f64> = (start..p.dim()).map(|k| p.xtilde[(k, k)].re).collect();
    let feasible = |d: &[f64]| -> Result<bool> {
        let mut s = p.xtilde.clone();
        for (j, &x) in d.iter().enumerate() {
            s[(start + j, start + j)] -= C64::new(x, 0.0);
        }
        Ok(numkit::min_eigenvalue(&s)? >= -1e-12)
    };
    let value = |d: &[f64]| d.iter().zip(&weight).map(|(x, w)| x * w).sum::<f64>();
    let res = resolution as f64;
    let mut best = 0.0f64;
    let mut idx = vec![0usize; vars - 1];
    let mut d = vec![0.0; vars];
    loop {
        for (j, &i) in idx.iter().enumerate() {
            d[j] = top[j] * i as f64 / res;
        }
        d[vars - 1] = 0.0;
        if feasible(&d)? {
            let (mut lo, mut hi) = (0usize, resolution);
            let last = top[vars - 1];
            while lo < hi {
                let mid = (lo + hi + 1) / 2;
                d[vars - 1] = last * mid as f64 / res;
                if feasible(&d)? {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            d[vars - 1] = last * lo as f64 / res;
            best = best.max(value(&d));
        }
        let mut j = 0;
        while j < idx.len() {
            idx[j] += 1;
            if idx[j] <= resolution {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == idx.len() {
            break;
        }
    }
    Ok(best)
}
