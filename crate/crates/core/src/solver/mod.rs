//! Exact solving at desk scale: a bounded-variable primal simplex, a
//! best-bound branch-and-bound with cutoff and limits, exhaustive oracles
//! for tiny problems, and a file-based adapter for external solvers.

mod bnb;
mod brute;
mod external;
pub mod lp;
mod presolve;

pub use bnb::{branch_and_bound, branch_and_bound_with, CallbackAction, Progress, Separator};
pub use brute::{
    brute_force_instance, brute_force_model, enumerate_surface_assignments, for_each_timetable,
    BruteError, InstanceOptimum, BRUTE_FORCE_LIMIT,
};
pub use external::{external_solve, AdapterConfig, ExternalError};
pub use lp::{solve_lp, LpError, LpProblem, LpResult, LpStatus};

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{MilpModel, MilpSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Wall-clock limit; `None` runs until another criterion stops.
    pub time_limit: Option<Duration>,
    /// Nodes whose bound reaches this value are pruned.
    pub cutoff: Option<f64>,
    /// Stop once `incumbent - bound <= gap_target * |incumbent|`.
    pub gap_target: Option<f64>,
    pub node_limit: Option<u64>,
    /// Clique separation at the root node.
    pub separation: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            time_limit: None,
            cutoff: None,
            gap_target: None,
            node_limit: None,
            separation: true,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if let Some(t) = self.time_limit {
            if t.is_zero() {
                return Err(SolverError::InvalidConfig(
                    "time limit must be positive".into(),
                ));
            }
        }
        if let Some(g) = self.gap_target {
            if !(0.0..1.0).contains(&g) {
                return Err(SolverError::InvalidConfig(format!(
                    "gap target {g} outside [0, 1)"
                )));
            }
        }
        if self.cutoff.is_some_and(f64::is_nan) {
            return Err(SolverError::InvalidConfig("cutoff is NaN".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveStatus {
    /// The incumbent is optimal.
    Optimal,
    /// An incumbent exists and the gap target or a callback stopped the search.
    Feasible,
    /// The model has no integral solution.
    Infeasible,
    /// Every solution, if any, is at least as costly as the cutoff.
    CutOff,
    Unbounded,
    /// A time or node limit was hit.
    LimitReached,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::CutOff => "cut-off",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::LimitReached => "limit-reached",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub incumbent: Option<MilpSolution>,
    /// Valid lower bound on the optimum; `+inf` when the model is
    /// infeasible.
    pub lower_bound: f64,
    pub nodes: u64,
    pub wall_time: Duration,
    pub lp_iterations: u64,
}

impl SolveResult {
    pub fn objective(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|s| s.objective)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("integer variable `{0}` is unbounded")]
    UnboundedInteger(String),
}

/// Integer variables must have finite bounds for branching to terminate.
fn check_bounded(model: &MilpModel) -> Result<(), SolverError> {
    match model
        .variables()
        .iter()
        .find(|v| v.kind.is_integral() && !(v.lower.is_finite() && v.upper.is_finite()))
    {
        Some(v) => Err(SolverError::UnboundedInteger(v.name.clone())),
        None => Ok(()),
    }
}
