//! Browser bindings for three small demos: the success curve of two pure
//! states, the core split of two qutrit mixtures, and a Monte Carlo run of
//! the optimal measurement.

use serde_json::json;
use udisc::decompose::{core_split, feasible};
use udisc::discriminate::{optimize, synthesize_povm, verify_povm};
use udisc::model::validate_instance;
use udisc::numkit::{ComplexMatrix, C64};
use udisc::sdp::SolverConfig;
use udisc::simulate::run_simulation;
use udisc::{DiscriminationInstance, Tolerances};
use wasm_bindgen::prelude::*;

fn real(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

fn check_prior(eta1: f64) -> Result<(), String> {
    if eta1 > 0.0 && eta1 < 1.0 {
        Ok(())
    } else {
        Err(format!("prior {eta1} must lie strictly between 0 and 1"))
    }
}

/// `|0>` and `s|0> + sqrt(1 - s^2)|1>`.
fn pure_pair(eta1: f64, overlap: f64) -> Result<DiscriminationInstance, String> {
    check_prior(eta1)?;
    if !(0.0..=1.0).contains(&overlap) {
        return Err(format!("overlap {overlap} must lie in [0, 1]"));
    }
    let a = real(&[1.0, 0.0]);
    let b = real(&[overlap, (1.0 - overlap * overlap).sqrt()]);
    validate_instance(
        2,
        vec![(eta1, ComplexMatrix::outer(&a, &a)), (1.0 - eta1, ComplexMatrix::outer(&b, &b))],
        &Tolerances::default(),
    )
    .map_err(|e| e.to_string())
}

/// Samples `points` overlaps evenly in `[0, 1]` and returns
/// `[s, P, bound]` triples, flattened.
#[wasm_bindgen]
pub fn pure_pair_curve(eta1: f64, points: usize) -> Result<Vec<f64>, String> {
    if points < 2 {
        return Err("need at least 2 points".into());
    }
    let tol = Tolerances::default();
    let mut out = Vec::with_capacity(3 * points);
    for k in 0..points {
        let s = k as f64 / (points - 1) as f64;
        let r = optimize(&pure_pair(eta1, s)?, &SolverConfig::default(), &tol).map_err(|e| e.to_string())?;
        out.extend([s, r.success, r.upper_bound]);
    }
    Ok(out)
}

/// Two qutrit states sharing weight `w` on `|2>`:
/// `ρ_1 = (1-w)|0><0| + w|2><2|` and `ρ_2 = (1-w)|b><b| + w|2><2|` with
/// `b = cos θ|0> + sin θ|1>`. Returns a JSON summary.
#[wasm_bindgen]
pub fn mixed_split(theta: f64, w: f64) -> Result<String, String> {
    if !(0.0..=1.0).contains(&w) || !theta.is_finite() {
        return Err(format!("need finite theta and w in [0, 1], got {theta}, {w}"));
    }
    let tol = Tolerances::default();
    let a = real(&[1.0, 0.0, 0.0]);
    let b = real(&[theta.cos(), theta.sin(), 0.0]);
    let shared = ComplexMatrix::diag_real(&[0.0, 0.0, w]);
    let rho = |v: &[C64]| &ComplexMatrix::outer(v, v).scale(1.0 - w) + &shared;
    let inst = validate_instance(3, vec![(0.5, rho(&a)), (0.5, rho(&b))], &tol).map_err(|e| e.to_string())?;
    let split = core_split(&inst, &tol).map_err(|e| e.to_string())?;
    let f = feasible(&split, &tol);
    let r = optimize(&inst, &SolverConfig::default(), &tol).map_err(|e| e.to_string())?;
    Ok(json!({
        "core_traces": split.core_traces(),
        "mix_dims": split.mix_dims(),
        "core0_trace": split.core0.trace(),
        "feasible": f.feasible,
        "success": r.success,
        "upper_bound": r.upper_bound,
    })
    .to_string())
}

/// Synthesizes the optimal measurement for a pure pair and replays it.
#[wasm_bindgen]
pub fn simulate_pair(eta1: f64, overlap: f64, trials: u32, seed: u32) -> Result<String, String> {
    let tol = Tolerances::default();
    let inst = pure_pair(eta1, overlap)?;
    let r = optimize(&inst, &SolverConfig::default(), &tol).map_err(|e| e.to_string())?;
    let (Some(gram), Some(sol)) = (&r.gram, &r.solution) else {
        return Err("identical states cannot be told apart".into());
    };
    let povm = synthesize_povm(&inst, gram, sol, &tol).map_err(|e| e.to_string())?;
    let v = verify_povm(&inst, &r.split, &povm, &tol).map_err(|e| e.to_string())?;
    let sim = run_simulation(&inst, &povm, u64::from(trials), u64::from(seed)).map_err(|e| e.to_string())?;
    Ok(json!({
        "success": r.success,
        "unambiguous": v.unambiguous,
        "counts": sim.counts,
        "empirical_success": sim.empirical_success,
        "standard_error": sim.standard_error(),
        "misidentifications": sim.misidentifications,
    })
    .to_string())
}
