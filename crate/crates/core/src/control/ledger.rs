use serde::{Deserialize, Serialize};

use crate::evaluation::{check_hard, evaluate, PenaltyVector, Solution};
use crate::formulations::DiveKind;
use crate::instance::Instance;

use super::ControlError;

/// Where a bound came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Surface,
    Dive(DiveKind),
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Surface => f.write_str("surface"),
            Provenance::Dive(k) => write!(f, "{} dive", k.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    SurfaceSolution,
    SurfaceFinished,
    LowerBound,
    UpperBound,
    DiveStarted,
    DiveFinished,
    DiveCutOff,
    Infeasible,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::SurfaceSolution => "surface-solution",
            EventKind::SurfaceFinished => "surface-finished",
            EventKind::LowerBound => "lower-bound",
            EventKind::UpperBound => "upper-bound",
            EventKind::DiveStarted => "dive-started",
            EventKind::DiveFinished => "dive-finished",
            EventKind::DiveCutOff => "dive-cut-off",
            EventKind::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEvent {
    /// Seconds or nodes since the start of the run.
    pub time: f64,
    pub kind: EventKind,
    pub value: Option<f64>,
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperRecord {
    pub value: u64,
    pub penalties: PenaltyVector,
    pub time: f64,
    pub provenance: Provenance,
    pub solution: Solution,
}

/// Best bounds seen so far and the log of how they got there.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundsLedger {
    lower: Option<(u64, f64, Provenance)>,
    upper: Option<UpperRecord>,
    infeasible: bool,
    history: Vec<LedgerEvent>,
}

impl BoundsLedger {
    pub fn new() -> BoundsLedger {
        BoundsLedger::default()
    }

    /// Best lower bound, its time and provenance.
    pub fn best_lower(&self) -> Option<(u64, f64, Provenance)> {
        self.lower
    }

    pub fn best_upper(&self) -> Option<&UpperRecord> {
        self.upper.as_ref()
    }

    pub fn is_infeasible(&self) -> bool {
        self.infeasible
    }

    pub fn history(&self) -> &[LedgerEvent] {
        &self.history
    }

    /// Appends an event that does not change a bound.
    pub fn log(
        &mut self,
        time: f64,
        kind: EventKind,
        value: Option<f64>,
        provenance: Option<Provenance>,
    ) {
        self.history.push(LedgerEvent {
            time,
            kind,
            value,
            provenance,
        });
    }

    /// Records that the instance has no feasible timetable.
    pub fn mark_infeasible(&mut self, time: f64, provenance: Provenance) {
        self.infeasible = true;
        self.log(time, EventKind::Infeasible, None, Some(provenance));
    }

    /// Offers a valid lower bound on the optimum. Values are rounded up to
    /// the next integer, since objectives are integral, and negative values
    /// carry no information. Returns whether the bound improved.
    pub fn offer_lower(
        &mut self,
        value: f64,
        time: f64,
        provenance: Provenance,
    ) -> Result<bool, ControlError> {
        if value.is_nan() {
            return Err(ControlError::Ledger("lower bound is NaN".into()));
        }
        if value <= 0.0 || value == f64::INFINITY {
            return Ok(false);
        }
        let rounded = (value - 1e-6).ceil().max(0.0) as u64;
        if self.lower.is_some_and(|(v, _, _)| rounded <= v) {
            return Ok(false);
        }
        if let Some(up) = &self.upper {
            if rounded > up.value {
                return Err(ControlError::Ledger(format!(
                    "lower bound {rounded} from {provenance} exceeds upper bound {}",
                    up.value
                )));
            }
        }
        self.lower = Some((rounded, time, provenance));
        self.log(
            time,
            EventKind::LowerBound,
            Some(rounded as f64),
            Some(provenance),
        );
        Ok(true)
    }

    /// Offers a timetable claimed to cost `claimed`. The timetable must be
    /// hard-feasible and its recomputed objective must equal the claim.
    /// Returns whether the upper bound improved.
    pub fn offer_upper(
        &mut self,
        inst: &Instance,
        solution: Solution,
        claimed: u64,
        time: f64,
        provenance: Provenance,
    ) -> Result<bool, ControlError> {
        let violations = check_hard(inst, &solution);
        if let Some(v) = violations.first() {
            return Err(ControlError::Ledger(format!(
                "{provenance} produced an infeasible timetable: {v}"
            )));
        }
        let (penalties, objective) = evaluate(inst, &solution);
        if objective != claimed {
            return Err(ControlError::Ledger(format!(
                "{provenance} claimed objective {claimed}, the timetable costs {objective}"
            )));
        }
        if self.upper.as_ref().is_some_and(|u| objective >= u.value) {
            return Ok(false);
        }
        if let Some((lb, _, _)) = self.lower {
            if lb > objective {
                return Err(ControlError::Ledger(format!(
                    "upper bound {objective} from {provenance} is below lower bound {lb}"
                )));
            }
        }
        self.upper = Some(UpperRecord {
            value: objective,
            penalties,
            time,
            provenance,
            solution: solution.normalized(),
        });
        self.log(
            time,
            EventKind::UpperBound,
            Some(objective as f64),
            Some(provenance),
        );
        Ok(true)
    }

    /// Replays the history and checks that lower bounds never decrease,
    /// upper bounds never increase, time never runs backwards and the
    /// bounds never cross.
    pub fn verify(&self) -> Result<(), String> {
        verify_events(&self.history)
    }
}

/// The checks of [`BoundsLedger::verify`] on a bare event log.
pub fn verify_events(events: &[LedgerEvent]) -> Result<(), String> {
    {
        let mut lo = f64::NEG_INFINITY;
        let mut up = f64::INFINITY;
        let mut t = f64::NEG_INFINITY;
        for (i, e) in events.iter().enumerate() {
            if e.time < t {
                return Err(format!("event {i} goes back in time"));
            }
            t = e.time;
            match (e.kind, e.value) {
                (EventKind::LowerBound, Some(v)) if v > lo => lo = v,
                (EventKind::UpperBound, Some(v)) if v < up => up = v,
                (EventKind::LowerBound | EventKind::UpperBound, _) => {
                    return Err(format!("event {i} does not improve its bound"));
                }
                _ => {}
            }
            if lo > up {
                return Err(format!("bounds cross at event {i}: {lo} > {up}"));
            }
        }
        Ok(())
    }
}
