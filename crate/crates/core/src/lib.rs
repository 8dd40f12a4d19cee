//! Curriculum-based course timetabling with objective-restricted surface
//! models and value-restricted dives.
//!
//! The crate is organised bottom-up:
//!
//! * [`instance`] parses `.ctt` files and derives the conflict graph and
//!   multi-room aggregations.
//! * [`evaluation`] scores complete timetables and checks hard constraints.
//! * [`milp`] is a small, solver-independent model layer with MPS export.
//! * [`formulations`] builds the monolithic, surface and dive models, the
//!   cut families, and decodes solver output back into timetables.
//! * [`solver`] contains a bounded-variable primal simplex, a best-bound
//!   branch-and-bound, exhaustive oracles and a file-based adapter for
//!   external MILP solvers.
//! * [`control`] runs the anytime and contract strategies and keeps the
//!   global bounds ledger.

pub mod control;
pub mod evaluation;
pub mod formulations;
pub mod instance;
pub mod milp;
pub mod solver;
pub mod testing;

pub use control::{BoundsLedger, DiveKind, RunReport, StrategyConfig, StrategyKind, SurfaceKind};

pub use evaluation::{PenaltyVector, Placement, Solution};
pub use formulations::{DayAssignment, Neighborhood, PeriodAssignment};
pub use instance::{ConflictGraph, Course, Curriculum, Instance, MultiRoom, Room, WeightVector};
pub use milp::{MilpModel, MilpSolution, SolutionStatus};
pub use solver::{SolveConfig, SolveResult, SolveStatus};
