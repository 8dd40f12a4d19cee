//! Fixtures shared by the benchmarks.

use ctt_core::control::{run, StrategyConfig};
use ctt_core::formulations::{build_monolithic, PeriodAssignment};
use ctt_core::instance::{parse_ctt, Instance};
use ctt_core::milp::MilpModel;
use ctt_core::testing::{random_instance, Shape, TOY_CTT};

pub fn toy() -> Instance {
    parse_ctt(TOY_CTT).expect("toy instance parses")
}

/// Generated instances of the given shape.
pub fn corpus(shape: &Shape, seeds: &[u64]) -> Vec<Instance> {
    seeds.iter().map(|&s| random_instance(s, shape)).collect()
}

pub fn monolithic_models(instances: &[Instance]) -> Vec<MilpModel> {
    instances.iter().map(build_monolithic).collect()
}

/// A surface basis for `inst` taken from a known timetable.
pub fn toy_basis(inst: &Instance) -> PeriodAssignment {
    let config = StrategyConfig::one_cpu_unit().node_limited(500, 200, Some(2000));
    let report = run(inst, &config).expect("default strategy runs");
    let sol = report.solution.expect("toy has a timetable");
    PeriodAssignment::from_solution(inst, &sol)
}
