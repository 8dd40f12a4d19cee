use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::evaluation::{gap, PenaltyVector, Solution};
use crate::formulations::DiveKind;
use crate::solver::SolveStatus;

use super::config::{Clock, StrategyKind, SurfaceKind};
use super::ledger::{BoundsLedger, LedgerEvent, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    /// The best timetable meets the lower bound.
    Optimal,
    Feasible,
    /// No timetable found within the budgets.
    Unknown,
    /// The surface, a relaxation, has no solution.
    Infeasible,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Optimal => "optimal",
            RunStatus::Feasible => "feasible",
            RunStatus::Unknown => "unknown",
            RunStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiveOutcome {
    /// Found a timetable better than the cutoff.
    Improved,
    /// Every node was pruned by the cutoff.
    CutOff,
    /// Stopped by its budget without a better timetable.
    Exhausted,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiveRecord {
    pub kind: DiveKind,
    pub source_objective: f64,
    pub discovery: usize,
    /// Best upper bound at dispatch.
    pub cutoff: Option<u64>,
    pub outcome: DiveOutcome,
    pub objective: Option<u64>,
    pub status: SolveStatus,
    pub nodes: u64,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    pub strategy: StrategyKind,
    pub surface: SurfaceKind,
    pub clock: Clock,
    pub status: RunStatus,
    pub objective: Option<u64>,
    pub penalties: Option<PenaltyVector>,
    pub lower_bound: Option<u64>,
    pub lower_bound_provenance: Option<Provenance>,
    /// Percent; absent without a timetable.
    pub gap: Option<f64>,
    pub surface_status: SolveStatus,
    pub surface_solutions: usize,
    pub surface_nodes: u64,
    pub dives: Vec<DiveRecord>,
    /// Dives never started because the total budget ran out.
    pub dives_skipped: usize,
    pub events: Vec<LedgerEvent>,
    pub solution: Option<Solution>,
}

/// Surface search outcome needed to build a report.
pub(crate) struct SurfaceSummary {
    pub status: SolveStatus,
    pub solutions: usize,
    pub nodes: u64,
}

impl RunReport {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        instance: &str,
        strategy: StrategyKind,
        surface: SurfaceKind,
        clock: Clock,
        ledger: &BoundsLedger,
        summary: SurfaceSummary,
        dives: Vec<DiveRecord>,
        dives_skipped: usize,
    ) -> RunReport {
        let upper = ledger.best_upper();
        let lower = ledger.best_lower();
        // no recorded bound still means zero, as every penalty is nonnegative
        let lb = if ledger.is_infeasible() {
            None
        } else {
            Some(lower.map_or(0, |l| l.0))
        };
        let gap = match (upper, lb) {
            (Some(u), Some(l)) => gap(u.value as i64, l as i64).ok(),
            _ => None,
        };
        let status = match (upper, lb) {
            _ if ledger.is_infeasible() => RunStatus::Infeasible,
            (Some(u), Some(l)) if u.value == l => RunStatus::Optimal,
            (Some(_), _) => RunStatus::Feasible,
            (None, _) => RunStatus::Unknown,
        };
        RunReport {
            instance: instance.to_string(),
            strategy,
            surface,
            clock,
            status,
            objective: upper.map(|u| u.value),
            penalties: upper.map(|u| u.penalties),
            lower_bound: lb,
            lower_bound_provenance: lower.map(|l| l.2),
            gap,
            surface_status: summary.status,
            surface_solutions: summary.solutions,
            surface_nodes: summary.nodes,
            dives,
            dives_skipped,
            events: ledger.history().to_vec(),
            solution: upper.map(|u| u.solution.clone()),
        }
    }

    fn time(&self, t: f64) -> String {
        match self.clock {
            Clock::Wall => format!("{t:.3}s"),
            Clock::Nodes => format!("{t:.0}n"),
        }
    }

    /// Human-readable summary followed by the event timeline.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "instance     {}", self.instance);
        let _ = writeln!(
            s,
            "strategy     {} on {}",
            self.strategy.name(),
            self.surface.name()
        );
        let _ = writeln!(s, "status       {}", self.status.name());
        match (self.objective, self.penalties) {
            (Some(o), Some(p)) => {
                let _ = writeln!(s, "objective    {o} ({p})");
            }
            _ => {
                let _ = writeln!(s, "objective    -");
            }
        }
        match (self.lower_bound, self.lower_bound_provenance) {
            (Some(l), Some(p)) => {
                let _ = writeln!(s, "lower bound  {l} ({p})");
            }
            (Some(l), None) => {
                let _ = writeln!(s, "lower bound  {l}");
            }
            _ => {
                let _ = writeln!(s, "lower bound  -");
            }
        }
        if let Some(g) = self.gap {
            let _ = writeln!(s, "gap          {g:.1}%");
        }
        let _ = writeln!(
            s,
            "surface      {}, {} solutions, {} nodes",
            self.surface_status.name(),
            self.surface_solutions,
            self.surface_nodes
        );
        let count = |o: DiveOutcome| self.dives.iter().filter(|d| d.outcome == o).count();
        let _ = writeln!(
            s,
            "dives        {} run, {} improved, {} cut off, {} skipped",
            self.dives.len(),
            count(DiveOutcome::Improved),
            count(DiveOutcome::CutOff),
            self.dives_skipped
        );
        let _ = writeln!(s, "timeline");
        for e in &self.events {
            let _ = write!(s, "  {:>10}  {:<16}", self.time(e.time), e.kind.name());
            if let Some(v) = e.value {
                let _ = write!(s, "  {v}");
            }
            if let Some(p) = e.provenance {
                let _ = write!(s, "  {p}");
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(text: &str) -> Result<RunReport, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Checks the event log for monotone, non-crossing bounds.
    pub fn verify_events(&self) -> Result<(), String> {
        super::ledger::verify_events(&self.events)
    }

    /// One JSON object per ledger event.
    pub fn events_jsonl(&self) -> String {
        let mut s = String::new();
        for e in &self.events {
            s.push_str(&serde_json::to_string(e).expect("event serialises"));
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::ledger::tests::overfull;
    use crate::control::ledger::EventKind;
    use crate::solver::brute_force_instance;

    fn summary() -> SurfaceSummary {
        SurfaceSummary {
            status: SolveStatus::Feasible,
            solutions: 1,
            nodes: 3,
        }
    }

    fn report(ledger: &BoundsLedger) -> RunReport {
        RunReport::new(
            "fig2",
            StrategyKind::Contract,
            SurfaceKind::Surface,
            Clock::Nodes,
            ledger,
            summary(),
            Vec::new(),
            0,
        )
    }

    #[test]
    fn empty_ledger_reports_bound_alone() {
        let mut l = BoundsLedger::new();
        l.offer_lower(6.0, 1.0, Provenance::Surface).unwrap();
        let r = report(&l);
        assert_eq!((r.objective, r.lower_bound, r.gap), (None, Some(6), None));
        assert_eq!(r.status, RunStatus::Unknown);
        assert!(!r.to_text().contains("gap"));
    }

    #[test]
    fn gap_and_round_trip() {
        let inst = overfull();
        let best = brute_force_instance(&inst).unwrap().unwrap();
        let mut l = BoundsLedger::new();
        let p = Provenance::Dive(DiveKind::PeriodFixed);
        l.offer_upper(&inst, best.solution.clone(), best.objective, 2.0, p)
            .unwrap();
        l.offer_lower(5.0, 3.0, Provenance::Surface).unwrap();
        let r = report(&l);
        assert_eq!(
            (r.objective, r.lower_bound, r.gap),
            (Some(9), Some(5), Some(44.4))
        );
        assert!(r.to_text().contains("gap          44.4%"));
        assert_eq!(RunReport::from_json(&r.to_json()).unwrap(), r);
        let lines: Vec<LedgerEvent> = r
            .events_jsonl()
            .lines()
            .map(|line| serde_json::from_str(line).unwrap())
            .collect();
        assert_eq!(lines, r.events);
        assert_eq!(lines[0].kind, EventKind::UpperBound);
    }

    #[test]
    fn infeasible_has_no_bound() {
        let mut l = BoundsLedger::new();
        l.mark_infeasible(0.0, Provenance::Surface);
        let r = report(&l);
        assert_eq!(
            (r.status, r.lower_bound, r.gap),
            (RunStatus::Infeasible, None, None)
        );
    }
}
