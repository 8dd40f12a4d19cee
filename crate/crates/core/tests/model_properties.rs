use ctt_core::evaluation::{evaluate, gap, parse_solution, write_solution, Solution};
use ctt_core::formulations::{
    build_monolithic, build_surface, build_surface2, encode_solution, SurfaceOptions,
};
use ctt_core::instance::{build_multirooms, parse_ctt, write_ctt, MultiRoomPolicy};
use ctt_core::milp::{export_mps, parse_mps};
use ctt_core::solver::{for_each_timetable, solve_lp, LpProblem, LpStatus};
use ctt_core::testing::{random_instance, Shape};
use proptest::prelude::*;

fn some_timetables(seed: u64, limit: usize) -> Vec<Solution> {
    let inst = random_instance(seed, &Shape::TINY);
    let mut out = Vec::new();
    for_each_timetable(&inst, |t| {
        if out.len() < limit {
            out.push(t.clone());
        }
    })
    .unwrap();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instance_files_round_trip(seed in 0u64..10_000) {
        let inst = random_instance(seed, &Shape::SMALL);
        prop_assert_eq!(parse_ctt(&write_ctt(&inst)).unwrap(), inst);
    }

    #[test]
    fn mps_round_trip_keeps_the_relaxation(seed in 0u64..10_000, stratified in any::<bool>()) {
        let inst = random_instance(seed, &Shape::TINY);
        let opts = SurfaceOptions { stratified, ..SurfaceOptions::default() };
        for model in [build_monolithic(&inst), build_surface(&inst, &opts).unwrap()] {
            let text = export_mps(&model);
            let back = parse_mps(&text).unwrap();
            prop_assert_eq!(back.num_vars(), model.num_vars());
            prop_assert_eq!(back.num_constraints(), model.num_constraints());
            prop_assert_eq!(export_mps(&back), text);
            let a = solve_lp(&LpProblem::from_model(&model)).unwrap();
            let b = solve_lp(&LpProblem::from_model(&back)).unwrap();
            prop_assert_eq!(a.status, b.status);
            if a.status == LpStatus::Optimal {
                prop_assert!((a.objective - b.objective).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn encoded_timetables_are_feasible_and_priced(seed in 0u64..500) {
        let inst = random_instance(seed, &Shape::TINY);
        let mono = build_monolithic(&inst);
        let surface = build_surface(&inst, &SurfaceOptions::default()).unwrap();
        let multirooms = build_multirooms(&inst, MultiRoomPolicy::MedianSplit);
        let surface2 = build_surface2(&inst, &multirooms).unwrap();
        for t in some_timetables(seed, 20) {
            let cost = evaluate(&inst, &t).1 as f64;
            let x = encode_solution(&inst, &mono, &t, None);
            prop_assert!(mono.is_feasible(&x));
            prop_assert!((mono.objective_value(&x) - cost).abs() < 1e-9);
            let s = encode_solution(&inst, &surface, &t, None);
            prop_assert!(surface.is_feasible(&s));
            prop_assert!(surface.objective_value(&s) <= cost + 1e-9);
            let s2 = encode_solution(&inst, &surface2, &t, Some(&multirooms));
            prop_assert!(surface2.is_feasible(&s2));
            prop_assert!(surface2.objective_value(&s2) <= cost + 1e-9);
        }
    }

    #[test]
    fn solution_files_round_trip(seed in 0u64..500) {
        let inst = random_instance(seed, &Shape::TINY);
        for t in some_timetables(seed, 5) {
            let back = parse_solution(&inst, &write_solution(&inst, &t)).unwrap();
            prop_assert_eq!(back.normalized(), t.normalized());
        }
    }

    #[test]
    fn gap_is_a_rounded_percentage(upper in 0i64..1_000_000, frac in 0.0f64..=1.0) {
        let lower = (upper as f64 * frac).floor() as i64;
        let g = gap(upper, lower).unwrap();
        prop_assert!((0.0..=100.0).contains(&g));
        prop_assert_eq!(gap(upper, upper).unwrap(), 0.0);
        if upper > 0 {
            let exact = 100.0 * (upper - lower) as f64 / upper as f64;
            prop_assert!((g - exact).abs() <= 0.05 + 1e-9);
        }
        prop_assert!(gap(lower, upper).is_err() || lower == upper);
    }
}
