use proptest::prelude::*;

use udisc::decompose::{core_split, feasible};
use udisc::discriminate::{optimize, synthesize_povm, upper_bound, verify_povm, Povm};
use udisc::model::{ensemble_of, merge_sets, random_instance, SetInstance};
use udisc::numkit::{self, ComplexMatrix, C64};
use udisc::rng::SplitMix64;
use udisc::sdp::{build_gram, check_solution, solve_gram_sdp, GramProblem, SolverConfig};
use udisc::simulate::run_simulation;
use udisc::subspace::{self, Subspace};
use udisc::{DensityOperator, DiscriminationInstance, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn instance(seed: u64) -> DiscriminationInstance {
    let mut rng = SplitMix64::new(seed);
    let n = 2 + (rng.next_u64() % 5) as usize;
    let m = 2 + (rng.next_u64() % 2) as usize;
    let ranks: Vec<usize> = (0..m).map(|_| 1 + (rng.next_u64() as usize) % n.min(3)).collect();
    random_instance(n, m, &ranks, rng.next_u64()).unwrap()
}

/// Random instances whose ranks leave room for every core.
fn feasible_instance(seed: u64) -> DiscriminationInstance {
    let mut rng = SplitMix64::new(seed);
    let m = 2 + (rng.next_u64() % 2) as usize;
    let ranks: Vec<usize> = (0..m).map(|_| 1 + (rng.next_u64() % 2) as usize).collect();
    let extra = (rng.next_u64() % 2) as usize;
    let n = (ranks.iter().sum::<usize>() - 1 + extra).clamp(2, 6);
    let n = n.max(*ranks.iter().max().unwrap() + 1);
    random_instance(n, m, &ranks, rng.next_u64()).unwrap()
}

fn supports(inst: &DiscriminationInstance) -> Vec<Subspace> {
    inst.states().map(|s| subspace::support(s, &tol()).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ensemble_reconstructs_state(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = SplitMix64::new(seed);
        let r = 1 + (rng.next_u64() as usize) % n;
        let g = ComplexMatrix::from_fn(n, r, |_, _| rng.complex_normal());
        let rho = DensityOperator::from_psd_unchecked((&g * &g.adjoint()).scale(0.1));
        let e = ensemble_of(&rho, &tol()).unwrap();
        prop_assert_eq!(e.len(), r);
        prop_assert!((&e.reconstruct() - rho.matrix()).frobenius_norm() <= 1e-9);
    }

    #[test]
    fn random_instance_is_reproducible(seed in any::<u64>()) {
        prop_assert_eq!(instance(seed), instance(seed));
    }

    #[test]
    fn merge_preserves_mass(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let n = 2 + (rng.next_u64() % 4) as usize;
        let sizes: Vec<usize> = (0..2 + (rng.next_u64() % 2) as usize).map(|_| 1 + (rng.next_u64() % 3) as usize).collect();
        let mut priors = rng.simplex(sizes.iter().sum()).into_iter();
        let sets = sizes
            .iter()
            .map(|&k| {
                (0..k)
                    .map(|_| {
                        let g = ComplexMatrix::from_fn(n, 1, |_, _| rng.complex_normal());
                        let rho = &g * &g.adjoint();
                        (priors.next().unwrap(), rho.scale(1.0 / rho.trace().re))
                    })
                    .collect()
            })
            .collect();
        let merged = merge_sets(&SetInstance::new(n, sets, &tol()).unwrap()).unwrap();
        prop_assert!((merged.instance.priors().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for s in merged.instance.states() {
            prop_assert!((s.trace() - 1.0).abs() <= 1e-9);
            prop_assert!(numkit::min_eigenvalue(s.matrix()).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn intersection_and_sum_containment(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = SplitMix64::new(seed);
        let t = tol();
        let draw = |rng: &mut SplitMix64| {
            let k = 1 + (rng.next_u64() as usize) % n;
            let v: Vec<Vec<C64>> = (0..k).map(|_| (0..n).map(|_| rng.complex_normal()).collect()).collect();
            Subspace::span(n, &v, 1e-10).unwrap()
        };
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let i = subspace::intersect(&a, &b, &t).unwrap();
        let s = subspace::sum(&[&a, &b], &t).unwrap();
        prop_assert!(subspace::contains(&a, &i, &t).unwrap() && subspace::contains(&b, &i, &t).unwrap());
        prop_assert!(subspace::contains(&s, &a, &t).unwrap() && subspace::contains(&s, &b, &t).unwrap());
    }

    #[test]
    fn core_split_round_trip(seed in any::<u64>()) {
        let inst = instance(seed);
        let t = tol();
        let split = core_split(&inst, &t).unwrap();
        for i in 0..inst.len() {
            let sum = split.cores[i].matrix() + split.residues[i].matrix();
            prop_assert!((&sum - inst.state(i).matrix()).frobenius_norm() <= 1e-8);
            let hat = subspace::support(&split.residues[i], &t).unwrap();
            prop_assert!(hat.projector_distance(&split.mix_spaces[i]).unwrap() <= 1e-8);
            let core = subspace::support(&split.cores[i], &t).unwrap();
            prop_assert!(subspace::intersect(&core, &split.mix_spaces[i], &t).unwrap().is_zero());
        }
        let all = supports(&inst);
        let total = subspace::sum(&all.iter().collect::<Vec<_>>(), &t).unwrap();
        prop_assert_eq!(total.dim(), split.core_support_dims(&t).unwrap().iter().sum::<usize>());
    }

    #[test]
    fn feasibility_is_the_span_condition(seed in any::<u64>()) {
        let inst = instance(seed);
        let t = tol();
        let f = feasible(&core_split(&inst, &t).unwrap(), &t);
        let all = supports(&inst);
        for i in 0..inst.len() {
            let others: Vec<&Subspace> = (0..inst.len()).filter(|&j| j != i).map(|j| &all[j]).collect();
            let span = subspace::sum(&others, &t).unwrap();
            prop_assert_eq!(f.per_state[i], !subspace::contains(&span, &all[i], &t).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_is_sound_and_below_bound(seed in any::<u64>()) {
        let inst = feasible_instance(seed);
        let t = tol();
        let r = optimize(&inst, &SolverConfig::default(), &t).unwrap();
        prop_assume!(r.feasible());
        prop_assert!(r.converged);
        prop_assert!(check_solution(&r.gram.as_ref().unwrap().problem, r.solution.as_ref().unwrap(), &t).unwrap().feasible);
        prop_assert!(r.success <= r.upper_bound + 1e-6);
        prop_assert_eq!(upper_bound(&r.split, &inst.priors()).unwrap(), r.upper_bound);
    }

    #[test]
    fn objective_scales_with_priors(seed in any::<u64>(), scale in 0.2f64..5.0) {
        let inst = feasible_instance(seed);
        let t = tol();
        let split = core_split(&inst, &t).unwrap();
        prop_assume!(feasible(&split, &t).feasible);
        let p = build_gram(&split, &inst.priors(), &t).unwrap().problem;
        let scaled = GramProblem::new(p.xtilde.clone(), p.block_sizes.clone(), p.priors.iter().map(|x| x * scale).collect()).unwrap();
        let a = solve_gram_sdp(&p, &SolverConfig::default()).unwrap().objective;
        let b = solve_gram_sdp(&scaled, &SolverConfig::default()).unwrap().objective;
        prop_assert!((b - scale * a).abs() <= 1e-6 * scale.max(1.0));
    }

    #[test]
    fn synthesized_measurement_is_sound(seed in any::<u64>()) {
        let inst = feasible_instance(seed);
        let t = tol();
        let r = optimize(&inst, &SolverConfig::default(), &t).unwrap();
        prop_assume!(r.feasible());
        let sol = r.solution.as_ref().unwrap();
        let povm = synthesize_povm(&inst, r.gram.as_ref().unwrap(), sol, &t).unwrap();
        let v = verify_povm(&inst, &r.split, &povm, &t).unwrap();
        prop_assert!(v.unambiguous && v.core_ok);
        for (s, g) in v.successes.iter().zip(&sol.gammas) {
            prop_assert!((s - g).abs() <= 1e-6);
        }
        let sim = run_simulation(&inst, &povm, 2000, seed).unwrap();
        prop_assert_eq!(sim.misidentifications, 0);
        prop_assert_eq!(&sim, &run_simulation(&inst, &povm, 2000, seed).unwrap());
    }

    /// Perturbing a conclusive operator either inside the joint kernel of
    /// the other states or along a random direction must move the direct and
    /// the core conditions together.
    #[test]
    fn core_and_direct_conditions_agree(seed in any::<u64>(), kind in 0usize..3) {
        let inst = feasible_instance(seed);
        let t = tol();
        let r = optimize(&inst, &SolverConfig::default(), &t).unwrap();
        prop_assume!(r.feasible());
        let mut povm: Povm = synthesize_povm(&inst, r.gram.as_ref().unwrap(), r.solution.as_ref().unwrap(), &t).unwrap();
        let n = inst.dim();
        let mut rng = SplitMix64::new(seed ^ 0xabcd);
        let v: Vec<C64> = match kind {
            0 => vec![C64::new(0.0, 0.0); n],
            1 => {
                let all = supports(&inst);
                let others: Vec<&Subspace> = all.iter().skip(1).collect();
                let kernel = subspace::sum(&others, &t).unwrap().complement();
                if kernel.is_zero() {
                    vec![C64::new(0.0, 0.0); n]
                } else {
                    kernel.basis().column(0)
                }
            }
            _ => (0..n).map(|_| rng.complex_normal()).collect(),
        };
        let bump = ComplexMatrix::outer(&v, &v).scale(1e-3);
        povm.operators[1] = &povm.operators[1] + &bump;
        povm.operators[0] = &povm.operators[0] - &bump;
        let check = verify_povm(&inst, &r.split, &povm, &t).unwrap();
        prop_assert_eq!(check.direct_ok, check.core_ok);
        prop_assert_eq!(check.direct_ok, kind != 2);
    }
}
