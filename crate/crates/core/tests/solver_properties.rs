use ctt_core::milp::{MilpModel, Origin, Sense, VarKind, VarTag};
use ctt_core::solver::{
    branch_and_bound, branch_and_bound_with, brute_force_model, solve_lp, CallbackAction,
    LpProblem, LpStatus, SolveConfig, SolveStatus,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random pure integer model with at most 12 variables.
fn random_model(seed: u64) -> MilpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = MilpModel::new("random", "none");
    let n = rng.gen_range(1..=12);
    let vars: Vec<_> = (0..n)
        .map(|j| {
            if rng.gen_bool(0.8) {
                m.add_binary(format!("b{j}"), VarTag::Generic).unwrap()
            } else {
                m.add_variable(
                    format!("i{j}"),
                    VarKind::Integer,
                    0.0,
                    rng.gen_range(1..=3) as f64,
                    VarTag::Generic,
                )
                .unwrap()
            }
        })
        .collect();
    for i in 0..rng.gen_range(1..=8) {
        let mut terms = Vec::new();
        for &v in &vars {
            if rng.gen_bool(0.5) {
                terms.push((rng.gen_range(-3..=4) as f64, v));
            }
        }
        let sense = [Sense::Le, Sense::Ge, Sense::Eq][rng.gen_range(0..3)];
        let rhs = rng.gen_range(-2..=4) as f64;
        m.add_constraint(format!("r{i}"), terms, sense, rhs, Origin::Imported)
            .unwrap();
    }
    let obj: Vec<_> = vars
        .iter()
        .map(|&v| (rng.gen_range(-5..=6) as f64, v))
        .collect();
    m.set_objective(obj, rng.gen_range(-3..=3) as f64).unwrap();
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn bounds_bracket_the_true_optimum(seed in any::<u64>()) {
        let model = random_model(seed);
        let oracle = brute_force_model(&model).unwrap();
        let lp = solve_lp(&LpProblem::from_model(&model)).unwrap();
        let r = branch_and_bound(&model, &SolveConfig::default()).unwrap();
        match oracle {
            None => prop_assert_eq!(r.status, SolveStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(lp.status, LpStatus::Optimal);
                prop_assert!(lp.objective <= best.objective + 1e-6);
                prop_assert_eq!(r.status, SolveStatus::Optimal);
                prop_assert!((r.objective().unwrap() - best.objective).abs() < 1e-6);
                prop_assert!(r.lower_bound <= best.objective + 1e-6);
            }
        }
    }

    #[test]
    fn limited_runs_keep_a_valid_bound(seed in any::<u64>(), limit in 1u64..6) {
        let model = random_model(seed);
        let cfg = SolveConfig { node_limit: Some(limit), ..SolveConfig::default() };
        let r = branch_and_bound(&model, &cfg).unwrap();
        if let Some(best) = brute_force_model(&model).unwrap() {
            prop_assert!(r.lower_bound <= best.objective + 1e-6);
            if let Some(obj) = r.objective() {
                prop_assert!(r.lower_bound <= obj + 1e-6);
            }
        }
    }

    #[test]
    fn cutoff_at_optimum_leaves_nothing_better(seed in any::<u64>()) {
        let model = random_model(seed);
        if let Some(best) = brute_force_model(&model).unwrap() {
            let cfg = SolveConfig { cutoff: Some(best.objective), ..SolveConfig::default() };
            let r = branch_and_bound(&model, &cfg).unwrap();
            prop_assert!(r.incumbent.is_none());
            prop_assert!(matches!(r.status, SolveStatus::CutOff | SolveStatus::Infeasible));
            prop_assert!(r.lower_bound >= best.objective - 1.0);
        }
    }

    #[test]
    fn incumbents_strictly_improve_and_runs_repeat(seed in any::<u64>()) {
        let model = random_model(seed);
        let run = || {
            let mut seen = Vec::new();
            let r = branch_and_bound_with(
                &model,
                &SolveConfig::default(),
                &mut |s, p| {
                    seen.push((s.objective, p.lower_bound));
                    CallbackAction::Continue
                },
                None,
            )
            .unwrap();
            (r.nodes, r.lp_iterations, r.objective(), seen)
        };
        let (nodes, iters, obj, seen) = run();
        for w in seen.windows(2) {
            prop_assert!(w[1].0 < w[0].0);
        }
        for &(o, lb) in &seen {
            prop_assert!(lb <= o + 1e-9);
        }
        prop_assert_eq!((nodes, iters, obj, seen), run());
    }
}
