//! Anytime and contract strategies: search the surface for period
//! assignments and lower bounds, dive into value-restricted models for
//! timetables, and keep the best of both in a bounds ledger.
//!
//! Dives run one at a time. Under [`Clock::Nodes`] every budget and
//! timestamp counts branch-and-bound nodes, so runs repeat exactly.

mod config;
mod ledger;
mod report;

use std::time::Instant;

use thiserror::Error;

use crate::formulations::{
    build_monolithic_with, build_surface, build_surface2, decode_monolithic, decode_surface,
    CliqueSeparator, FormulationError, Neighborhood, PeriodAssignment, SurfaceOptions,
};
use crate::instance::{build_multirooms, Instance};
use crate::milp::{MilpModel, MilpSolution};
use crate::solver::{
    branch_and_bound, branch_and_bound_with, CallbackAction, Progress, Separator, SolveStatus,
    SolverError,
};

pub use crate::formulations::DiveKind;
pub use config::{
    Clock, StrategyConfig, StrategyKind, SurfaceKind, CPU_UNIT_SECONDS, DEFAULT_DIVE_GAP_STOP,
};
pub use ledger::{verify_events, BoundsLedger, EventKind, LedgerEvent, Provenance, UpperRecord};
pub use report::{DiveOutcome, DiveRecord, RunReport, RunStatus};

use report::SurfaceSummary;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("invalid strategy configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("bounds ledger: {0}")]
    Ledger(String),
}

/// Sorts dives by kind rank in `kinds_order`, then by the surface objective
/// of their source, then latest discovery first. The sort is stable; kinds
/// missing from `kinds_order` go last.
pub fn order_dives(mut pending: Vec<Neighborhood>, kinds_order: &[DiveKind]) -> Vec<Neighborhood> {
    let rank = |k: DiveKind| {
        kinds_order
            .iter()
            .position(|&o| o == k)
            .unwrap_or(kinds_order.len())
    };
    pending.sort_by(|a, b| {
        rank(a.kind)
            .cmp(&rank(b.kind))
            .then(a.source_objective.total_cmp(&b.source_objective))
            .then(b.discovery.cmp(&a.discovery))
    });
    pending
}

/// Runs the strategy named in `config`.
pub fn run(inst: &Instance, config: &StrategyConfig) -> Result<RunReport, ControlError> {
    match config.strategy {
        StrategyKind::Anytime => run_anytime(inst, config),
        StrategyKind::Contract => run_contract(inst, config),
    }
}

/// Searches the surface for its whole budget, then dives on the collected
/// solutions: kind by kind, cheapest source first.
pub fn run_contract(inst: &Instance, config: &StrategyConfig) -> Result<RunReport, ControlError> {
    expect_strategy(config, StrategyKind::Contract)?;
    let mut runner = Runner::new(inst, config)?;
    let surface = runner.surface_model()?;
    let mut found: Vec<(PeriodAssignment, f64)> = Vec::new();
    let summary = runner.search_surface(&surface, |_, assignment, objective| {
        found.push((assignment, objective));
        Ok(CallbackAction::Continue)
    })?;
    let mut pending = Vec::new();
    for &kind in &config.dive_sequence {
        for (i, (a, obj)) in found.iter().enumerate() {
            pending.push(Neighborhood::from_surface(kind, a, *obj, i));
        }
    }
    let total = pending.len();
    let mut skipped = 0;
    for (i, nb) in order_dives(pending, &config.dive_sequence)
        .iter()
        .enumerate()
    {
        if !runner.dive(nb)? {
            skipped = total - i;
            break;
        }
    }
    Ok(runner.finish(summary, skipped))
}

/// Dives on every improving surface solution the moment it is found, then
/// resumes the surface search.
pub fn run_anytime(inst: &Instance, config: &StrategyConfig) -> Result<RunReport, ControlError> {
    expect_strategy(config, StrategyKind::Anytime)?;
    let mut runner = Runner::new(inst, config)?;
    let surface = runner.surface_model()?;
    let mut found = 0;
    let mut skipped = 0;
    let summary = runner.search_surface(&surface, |runner, assignment, objective| {
        for (i, &kind) in config.dive_sequence.iter().enumerate() {
            let nb = Neighborhood::from_surface(kind, &assignment, objective, found);
            if !runner.dive(&nb)? {
                skipped += config.dive_sequence.len() - i;
                return Ok(CallbackAction::Stop);
            }
        }
        found += 1;
        Ok(if runner.exhausted() {
            CallbackAction::Stop
        } else {
            CallbackAction::Continue
        })
    })?;
    Ok(runner.finish(summary, skipped))
}

fn expect_strategy(config: &StrategyConfig, kind: StrategyKind) -> Result<(), ControlError> {
    config.validate()?;
    if config.strategy != kind {
        return Err(ControlError::InvalidConfig(format!(
            "expected the {} strategy, got {}",
            kind.name(),
            config.strategy.name()
        )));
    }
    Ok(())
}

struct Runner<'a> {
    inst: &'a Instance,
    config: &'a StrategyConfig,
    ledger: BoundsLedger,
    start: Instant,
    surface_nodes: u64,
    dive_nodes: u64,
    /// Full model the dives restrict.
    base: MilpModel,
    dives: Vec<DiveRecord>,
}

impl<'a> Runner<'a> {
    fn new(inst: &'a Instance, config: &'a StrategyConfig) -> Result<Runner<'a>, ControlError> {
        Ok(Runner {
            inst,
            config,
            ledger: BoundsLedger::new(),
            start: Instant::now(),
            surface_nodes: 0,
            dive_nodes: 0,
            base: build_monolithic_with(inst, config.implied_cuts)?,
            dives: Vec::new(),
        })
    }

    fn now(&self) -> f64 {
        match self.config.clock {
            Clock::Wall => self.start.elapsed().as_secs_f64(),
            Clock::Nodes => (self.surface_nodes + self.dive_nodes) as f64,
        }
    }

    fn remaining(&self) -> Option<f64> {
        self.config.total_budget.map(|t| t - self.now())
    }

    fn exhausted(&self) -> bool {
        self.remaining().is_some_and(|r| r <= 0.0)
    }

    /// The smaller of `budget` and what is left of the total.
    fn budget(&self, budget: Option<f64>) -> Option<f64> {
        match (budget, self.remaining()) {
            (Some(b), Some(r)) => Some(b.min(r)),
            (b, r) => b.or(r),
        }
    }

    fn surface_model(&self) -> Result<MilpModel, ControlError> {
        Ok(match self.config.surface {
            SurfaceKind::Surface => build_surface(self.inst, &SurfaceOptions::default())?,
            SurfaceKind::Surface2(policy) => {
                build_surface2(self.inst, &build_multirooms(self.inst, policy))?
            }
        })
    }

    /// Solves the surface, passing each improving solution to `on_solution`
    /// and posting bounds to the ledger.
    fn search_surface<F>(
        &mut self,
        surface: &MilpModel,
        mut on_solution: F,
    ) -> Result<SurfaceSummary, ControlError>
    where
        F: FnMut(&mut Runner<'a>, PeriodAssignment, f64) -> Result<CallbackAction, ControlError>,
    {
        let mut cfg = self.config.limits(self.budget(self.config.surface_budget));
        cfg.separation = self.config.separation;
        let mut separator = CliqueSeparator::new(self.inst);
        let sep: Option<&mut dyn Separator> = if cfg.separation {
            Some(&mut separator)
        } else {
            None
        };
        let mut solutions = 0;
        let mut failure = None;
        let mut callback = |sol: &MilpSolution, progress: &Progress| {
            self.surface_nodes = progress.nodes;
            let step = (|| {
                let assignment = decode_surface(self.inst, surface, sol)?;
                assignment.validate(self.inst)?;
                let now = self.now();
                self.ledger.log(
                    now,
                    EventKind::SurfaceSolution,
                    Some(sol.objective),
                    Some(Provenance::Surface),
                );
                self.ledger
                    .offer_lower(progress.lower_bound, now, Provenance::Surface)?;
                solutions += 1;
                on_solution(&mut *self, assignment, sol.objective)
            })();
            step.unwrap_or_else(|e| {
                failure = Some(e);
                CallbackAction::Stop
            })
        };
        let result = branch_and_bound_with(surface, &cfg, &mut callback, sep)?;
        if let Some(e) = failure {
            return Err(e);
        }
        self.surface_nodes = result.nodes;
        let now = self.now();
        self.ledger.log(
            now,
            EventKind::SurfaceFinished,
            Some(result.lower_bound),
            Some(Provenance::Surface),
        );
        if result.status == SolveStatus::Infeasible {
            self.ledger.mark_infeasible(now, Provenance::Surface);
        } else {
            self.ledger
                .offer_lower(result.lower_bound, now, Provenance::Surface)?;
        }
        Ok(SurfaceSummary {
            status: result.status,
            solutions,
            nodes: result.nodes,
        })
    }

    /// Runs one dive with the current best objective as cutoff. Returns
    /// `false` without diving once the total budget is spent.
    fn dive(&mut self, nb: &Neighborhood) -> Result<bool, ControlError> {
        if self.exhausted() {
            return Ok(false);
        }
        let provenance = Provenance::Dive(nb.kind);
        let cutoff = self.ledger.best_upper().map(|u| u.value);
        let mut cfg = self
            .config
            .limits(self.budget(self.config.dive_budgets.get(&nb.kind).copied()));
        cfg.cutoff = cutoff.map(|c| c as f64);
        cfg.gap_target = Some(self.config.dive_gap_stop);
        cfg.separation = false;
        let start = self.now();
        self.ledger.log(
            start,
            EventKind::DiveStarted,
            Some(nb.source_objective),
            Some(provenance),
        );
        let model = nb.restrict(self.inst, &self.base)?;
        let result = branch_and_bound(&model, &cfg)?;
        self.dive_nodes += result.nodes;
        let end = self.now();
        let mut objective = None;
        let outcome = match &result.incumbent {
            Some(inc) => {
                let timetable = decode_monolithic(self.inst, &model, inc)?;
                let value = inc.objective.round().max(0.0) as u64;
                self.ledger
                    .offer_upper(self.inst, timetable, value, end, provenance)?;
                objective = Some(value);
                DiveOutcome::Improved
            }
            None => match result.status {
                SolveStatus::CutOff => DiveOutcome::CutOff,
                SolveStatus::Infeasible if cutoff.is_some() => DiveOutcome::CutOff,
                SolveStatus::Infeasible => DiveOutcome::Infeasible,
                _ => DiveOutcome::Exhausted,
            },
        };
        let kind = if outcome == DiveOutcome::CutOff {
            EventKind::DiveCutOff
        } else {
            EventKind::DiveFinished
        };
        self.ledger
            .log(end, kind, objective.map(|o| o as f64), Some(provenance));
        self.dives.push(DiveRecord {
            kind: nb.kind,
            source_objective: nb.source_objective,
            discovery: nb.discovery,
            cutoff,
            outcome,
            objective,
            status: result.status,
            nodes: result.nodes,
            start,
            end,
        });
        Ok(true)
    }

    fn finish(self, summary: SurfaceSummary, skipped: usize) -> RunReport {
        debug_assert!(self.ledger.verify().is_ok());
        RunReport::new(
            &self.inst.name,
            self.config.strategy,
            self.config.surface,
            self.config.clock,
            &self.ledger,
            summary,
            self.dives,
            skipped,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulations::{Basis, DayAssignment};

    fn nb(kind: DiveKind, cost: f64, discovery: usize) -> Neighborhood {
        Neighborhood {
            kind,
            basis: Basis::Days(DayAssignment {
                periods_per_day: 1,
                days: Vec::new(),
            }),
            source_objective: cost,
            discovery,
        }
    }

    fn key(v: &[Neighborhood]) -> Vec<(DiveKind, f64, usize)> {
        v.iter()
            .map(|n| (n.kind, n.source_objective, n.discovery))
            .collect()
    }

    #[test]
    fn cheaper_sources_first() {
        let out = order_dives(
            vec![
                nb(DiveKind::PeriodFixed, 40.0, 0),
                nb(DiveKind::PeriodFixed, 20.0, 1),
            ],
            &[DiveKind::PeriodFixed],
        );
        assert_eq!(out[0].source_objective, 20.0);
        let single = order_dives(
            vec![nb(DiveKind::DayFixed, 1.0, 0)],
            &[DiveKind::PeriodFixed],
        );
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn kinds_then_cost_then_latest() {
        let order = [DiveKind::PeriodFixed, DiveKind::DayFixed];
        let out = order_dives(
            vec![
                nb(DiveKind::DayFixed, 1.0, 0),
                nb(DiveKind::PeriodFixed, 5.0, 0),
                nb(DiveKind::DayDecomp, 0.0, 0),
                nb(DiveKind::PeriodFixed, 3.0, 1),
                nb(DiveKind::PeriodFixed, 3.0, 2),
            ],
            &order,
        );
        assert_eq!(
            key(&out),
            vec![
                (DiveKind::PeriodFixed, 3.0, 2),
                (DiveKind::PeriodFixed, 3.0, 1),
                (DiveKind::PeriodFixed, 5.0, 0),
                (DiveKind::DayFixed, 1.0, 0),
                (DiveKind::DayDecomp, 0.0, 0),
            ]
        );
    }

    #[test]
    fn wrong_strategy_is_rejected() {
        let inst = crate::testing::figure_two(2);
        let config = StrategyConfig::one_cpu_unit();
        assert!(matches!(
            run_anytime(&inst, &config),
            Err(ControlError::InvalidConfig(_))
        ));
    }
}
