use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Serialize;
use udisc::decompose::{core_split, feasible, CoreSplit, Feasibility};
use udisc::discriminate::{optimize, synthesize_povm, upper_bound, verify_povm, OptimizeReport, Povm};
use udisc::model::random_instance;
use udisc::sdp::SolverConfig;
use udisc::simulate::run_simulation;
use udisc::Tolerances;

use crate::args::{Cli, Command, GenArgs, GlobalOpts};
use crate::files::{self, matrix_to_data, Loaded, MatrixData};
use crate::report::{emit, reals, FloatStyle, Real, REPORT_FORMAT};
use crate::{CliError, EXIT_INFEASIBLE, EXIT_OK, EXIT_SOLVER};

/// What a command produced: text for standard output and the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

#[derive(Serialize)]
struct TolReport {
    rank_abs: Real,
    rank_rel: Real,
    psd: Real,
    intersect: Real,
    solver_gap: Real,
    verify: Real,
}

impl From<&Tolerances> for TolReport {
    fn from(t: &Tolerances) -> Self {
        Self {
            rank_abs: Real(t.rank_abs),
            rank_rel: Real(t.rank_rel),
            psd: Real(t.psd),
            intersect: Real(t.intersect),
            solver_gap: Real(t.solver_gap),
            verify: Real(t.verify),
        }
    }
}

#[derive(Serialize)]
struct Report<'a, B: Serialize> {
    format: &'static str,
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<String>,
    tolerances: TolReport,
    #[serde(flatten)]
    body: &'a B,
}

struct Ctx<'a> {
    command: &'static str,
    input: Option<&'a Path>,
    tol: Tolerances,
    cfg: SolverConfig,
    opts: &'a GlobalOpts,
}

impl Ctx<'_> {
    fn report<B: Serialize>(&self, body: &B, code: i32) -> Result<Outcome, CliError> {
        let r = Report {
            format: REPORT_FORMAT,
            command: self.command,
            input: self.input.map(|p| p.display().to_string()),
            tolerances: TolReport::from(&self.tol),
            body,
        };
        Ok(Outcome {
            stdout: emit(&r, FloatStyle::Report)?,
            code,
        })
    }

    fn load(&self) -> Result<Loaded, CliError> {
        let path = self.input.expect("command takes an instance");
        let text = read_text(path)?;
        files::parse_instance(&text, &self.tol, self.opts.normalize_priors)
    }

    fn write_matrices<T: Serialize>(&self, x: &T) -> Result<Option<String>, CliError> {
        match &self.opts.output {
            None => Ok(None),
            Some(path) => {
                write_text(path, &emit(x, FloatStyle::Exact)?)?;
                Ok(Some(path.display().to_string()))
            }
        }
    }

    fn reject_output(&self) -> Result<(), CliError> {
        if self.opts.output.is_some() {
            return Err(CliError::Input(format!("--output is not used by {}", self.command)));
        }
        Ok(())
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    let mut text = String::new();
    let res = if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(text)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn tolerances(opts: &GlobalOpts) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::default();
    if let Some(x) = opts.tol_rank {
        tol.rank_rel = x;
    }
    if let Some(x) = opts.tol_psd {
        tol.psd = x;
    }
    if let Some(x) = opts.gap_tol {
        tol.solver_gap = x;
    }
    tol.validate()?;
    Ok(tol)
}

fn solver_config(opts: &GlobalOpts) -> Result<SolverConfig, CliError> {
    let mut cfg = SolverConfig::default();
    if let Some(x) = opts.gap_tol {
        cfg.gap_tol = x;
    }
    if let Some(n) = opts.max_iter {
        cfg.max_outer = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let (command, input): (&'static str, Option<&Path>) = match &cli.command {
        Command::Decompose(a) => ("decompose", Some(&a.instance)),
        Command::Check(a) => ("check", Some(&a.instance)),
        Command::Bound(a) => ("bound", Some(&a.instance)),
        Command::Solve(a) => ("solve", Some(&a.instance)),
        Command::Synth(a) => ("synth", Some(&a.instance)),
        Command::Simulate(a) => ("simulate", Some(&a.instance)),
        Command::Gen(_) => ("gen", None),
    };
    let ctx = Ctx {
        command,
        input,
        tol: tolerances(&cli.global)?,
        cfg: solver_config(&cli.global)?,
        opts: &cli.global,
    };
    match &cli.command {
        Command::Decompose(_) => decompose(&ctx),
        Command::Check(_) => check(&ctx),
        Command::Bound(_) => bound(&ctx),
        Command::Solve(_) => solve(&ctx),
        Command::Synth(_) => synth(&ctx),
        Command::Simulate(a) => simulate(&ctx, a.povm.as_deref()),
        Command::Gen(g) => gen(&ctx, g),
    }
}

#[derive(Serialize)]
struct StateSplit {
    index: usize,
    prior: Real,
    core_trace: Real,
    residue_trace: Real,
    core_rank: usize,
    mix_dim: usize,
    mix_margin: Option<Real>,
}

#[derive(Serialize)]
struct DecomposeBody {
    num_states: usize,
    dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    sets: Option<Vec<Vec<usize>>>,
    states: Vec<StateSplit>,
    core0_trace: Real,
    core0_rank: usize,
    support_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrices: Option<String>,
}

#[derive(Serialize)]
struct SplitFile {
    format: &'static str,
    dim: usize,
    core0: MatrixData,
    cores: Vec<MatrixData>,
    residues: Vec<MatrixData>,
}

fn decompose(ctx: &Ctx) -> Result<Outcome, CliError> {
    let loaded = ctx.load()?;
    let inst = &loaded.instance;
    let split = core_split(inst, &ctx.tol)?;
    let ranks = split.core_support_dims(&ctx.tol)?;
    let mix = split.mix_dims();
    let states = (0..inst.len())
        .map(|i| StateSplit {
            index: i,
            prior: Real(inst.entries()[i].prior),
            core_trace: Real(split.cores[i].trace()),
            residue_trace: Real(split.residues[i].trace()),
            core_rank: ranks[i + 1],
            mix_dim: mix[i],
            mix_margin: split.mix_margins[i].map(Real),
        })
        .collect();
    let matrices = ctx.write_matrices(&SplitFile {
        format: "udisc-split/1",
        dim: inst.dim(),
        core0: matrix_to_data(split.core0.matrix()),
        cores: split.cores.iter().map(|c| matrix_to_data(c.matrix())).collect(),
        residues: split.residues.iter().map(|c| matrix_to_data(c.matrix())).collect(),
    })?;
    let body = DecomposeBody {
        num_states: inst.len(),
        dim: inst.dim(),
        sets: loaded.sets.clone(),
        states,
        core0_trace: Real(split.core0.trace()),
        core0_rank: ranks[0],
        support_dim: ranks.iter().sum(),
        matrices,
    };
    ctx.report(&body, EXIT_OK)
}

#[derive(Serialize)]
struct Verdict {
    index: usize,
    discriminable: bool,
    core_trace: Real,
}

#[derive(Serialize)]
struct CheckBody {
    feasible: bool,
    states: Vec<Verdict>,
    zero_cores: Vec<usize>,
}

fn verdicts(f: &Feasibility) -> CheckBody {
    CheckBody {
        feasible: f.feasible,
        states: f
            .per_state
            .iter()
            .zip(&f.core_traces)
            .enumerate()
            .map(|(index, (&ok, &t))| Verdict {
                index,
                discriminable: ok,
                core_trace: Real(t),
            })
            .collect(),
        zero_cores: f.zero_cores(),
    }
}

fn infeasible_code(f: &Feasibility) -> i32 {
    if f.feasible {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    }
}

fn check(ctx: &Ctx) -> Result<Outcome, CliError> {
    ctx.reject_output()?;
    let inst = ctx.load()?.instance;
    let f = feasible(&core_split(&inst, &ctx.tol)?, &ctx.tol);
    ctx.report(&verdicts(&f), infeasible_code(&f))
}

#[derive(Serialize)]
struct BoundBody {
    priors: Vec<Real>,
    core_traces: Vec<Real>,
    upper_bound: Real,
}

fn bound(ctx: &Ctx) -> Result<Outcome, CliError> {
    ctx.reject_output()?;
    let inst = ctx.load()?.instance;
    let split: CoreSplit = core_split(&inst, &ctx.tol)?;
    let priors = inst.priors();
    let body = BoundBody {
        upper_bound: Real(upper_bound(&split, &priors)?),
        priors: reals(&priors),
        core_traces: reals(&split.core_traces()),
    };
    ctx.report(&body, EXIT_OK)
}

#[derive(Serialize)]
struct CertReport {
    feasible: bool,
    min_eig_slack: Real,
    min_eig_blocks: Vec<Real>,
}

#[derive(Serialize)]
struct SolveBody {
    feasible: bool,
    zero_cores: Vec<usize>,
    success: Real,
    upper_bound: Real,
    gammas: Vec<Real>,
    converged: bool,
    iterations: usize,
    final_mu: Option<Real>,
    certificate: Option<CertReport>,
}

fn solve_body(r: &OptimizeReport) -> SolveBody {
    SolveBody {
        feasible: r.feasible(),
        zero_cores: r.feasibility.zero_cores(),
        success: Real(r.success),
        upper_bound: Real(r.upper_bound),
        gammas: reals(&r.gammas),
        converged: r.converged,
        iterations: r.solution.as_ref().map_or(0, |s| s.iterations),
        final_mu: r.solution.as_ref().map(|s| Real(s.final_mu)),
        certificate: r.certificate.as_ref().map(|c| CertReport {
            feasible: c.feasible,
            min_eig_slack: Real(c.min_eig_slack),
            min_eig_blocks: reals(&c.min_eig_blocks),
        }),
    }
}

/// Exit code of a finished optimization.
fn solve_code(r: &OptimizeReport) -> i32 {
    if !r.feasible() {
        EXIT_INFEASIBLE
    } else if !r.converged || !r.certificate.as_ref().is_some_and(|c| c.feasible) {
        EXIT_SOLVER
    } else {
        EXIT_OK
    }
}

#[derive(Serialize)]
struct GammaFile {
    format: &'static str,
    block_sizes: Vec<usize>,
    blocks: Vec<MatrixData>,
}

fn solve(ctx: &Ctx) -> Result<Outcome, CliError> {
    let inst = ctx.load()?.instance;
    let r = optimize(&inst, &ctx.cfg, &ctx.tol)?;
    if let (Some(sol), Some(gram)) = (&r.solution, &r.gram) {
        ctx.write_matrices(&GammaFile {
            format: "udisc-gamma/1",
            block_sizes: gram.problem.block_sizes.clone(),
            blocks: sol.blocks.iter().map(matrix_to_data).collect(),
        })?;
    }
    ctx.report(&solve_body(&r), solve_code(&r))
}

#[derive(Serialize)]
struct MeasurementReport {
    outcomes: usize,
    completeness: Real,
    min_eigenvalue: Real,
    max_cross: Real,
    max_core_cross: Real,
    successes: Vec<Real>,
    unambiguous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
}

#[derive(Serialize)]
struct SynthBody {
    #[serde(flatten)]
    solve: SolveBody,
    measurement: Option<MeasurementReport>,
}

type Synthesized = (OptimizeReport, Option<Povm>, i32);

/// Optimizes and builds the measurement. `None` when the instance is
/// infeasible or the solver failed; the code tells which.
fn synthesized(ctx: &Ctx, inst: &udisc::DiscriminationInstance) -> Result<Synthesized, CliError> {
    let r = optimize(inst, &ctx.cfg, &ctx.tol)?;
    let code = solve_code(&r);
    if code != EXIT_OK {
        return Ok((r, None, code));
    }
    let povm = synthesize_povm(inst, r.gram.as_ref().unwrap(), r.solution.as_ref().unwrap(), &ctx.tol)?;
    Ok((r, Some(povm), code))
}

fn synth(ctx: &Ctx) -> Result<Outcome, CliError> {
    let inst = ctx.load()?.instance;
    let (r, povm, mut code) = synthesized(ctx, &inst)?;
    let measurement = match povm {
        None => None,
        Some(povm) => {
            let v = verify_povm(&inst, &r.split, &povm, &ctx.tol)?;
            if !v.unambiguous {
                code = EXIT_SOLVER;
            }
            let output = ctx.write_matrices(&files::povm_to_file(&povm.operators))?;
            Some(MeasurementReport {
                outcomes: povm.len(),
                completeness: Real(v.completeness),
                min_eigenvalue: Real(v.min_eigenvalue),
                max_cross: Real(v.max_cross),
                max_core_cross: Real(v.max_core_cross),
                successes: reals(&v.successes),
                unambiguous: v.unambiguous,
                output,
            })
        }
    };
    ctx.report(
        &SynthBody {
            solve: solve_body(&r),
            measurement,
        },
        code,
    )
}

#[derive(Serialize)]
struct SimulateBody {
    povm_source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    solve: Option<SolveBody>,
    trials: u64,
    seed: u64,
    counts: Vec<Vec<u64>>,
    empirical_success: Real,
    predicted_success: Real,
    standard_error: Real,
    misidentifications: u64,
}

#[derive(Serialize)]
struct NoMeasurement {
    povm_source: &'static str,
    solve: SolveBody,
}

fn simulate(ctx: &Ctx, povm_path: Option<&Path>) -> Result<Outcome, CliError> {
    ctx.reject_output()?;
    let inst = ctx.load()?.instance;
    let (source, solve, povm) = match povm_path {
        Some(path) => ("file", None, Povm::new(files::parse_povm(&read_text(path)?)?)),
        None => {
            let (r, povm, code) = synthesized(ctx, &inst)?;
            match povm {
                Some(p) => ("synthesized", Some(solve_body(&r)), p),
                None => {
                    let body = NoMeasurement {
                        povm_source: "synthesized",
                        solve: solve_body(&r),
                    };
                    return ctx.report(&body, code);
                }
            }
        }
    };
    let sim = run_simulation(&inst, &povm, ctx.opts.trials, ctx.opts.seed)?;
    let body = SimulateBody {
        povm_source: source,
        solve,
        trials: sim.trials,
        seed: sim.seed,
        standard_error: Real(sim.standard_error()),
        empirical_success: Real(sim.empirical_success),
        predicted_success: Real(sim.predicted_success),
        misidentifications: sim.misidentifications,
        counts: sim.counts,
    };
    ctx.report(&body, EXIT_OK)
}

#[derive(Serialize)]
struct GenBody {
    dim: usize,
    m: usize,
    ranks: Vec<usize>,
    seed: u64,
    output: String,
}

fn gen(ctx: &Ctx, g: &GenArgs) -> Result<Outcome, CliError> {
    let inst = random_instance(g.dim, g.m, &g.ranks, ctx.opts.seed)?;
    let text = emit(&files::instance_to_file(&inst), FloatStyle::Exact)?;
    let Some(path): Option<&PathBuf> = ctx.opts.output.as_ref() else {
        return Ok(Outcome {
            stdout: text,
            code: EXIT_OK,
        });
    };
    write_text(path, &text)?;
    let body = GenBody {
        dim: g.dim,
        m: g.m,
        ranks: g.ranks.clone(),
        seed: ctx.opts.seed,
        output: path.display().to_string(),
    };
    ctx.report(&body, EXIT_OK)
}
