use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::formulations::DiveKind;
use crate::instance::MultiRoomPolicy;
use crate::solver::SolveConfig;

use super::ControlError;

/// Seconds in one CPU unit of the reference benchmark machine.
pub const CPU_UNIT_SECONDS: f64 = 780.0;

/// Per-dive gap at which a dive stops early.
pub const DEFAULT_DIVE_GAP_STOP: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    /// Dive on every improving surface solution as soon as it is found.
    Anytime,
    /// Search the surface first, then dive on the collected solutions.
    Contract,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Anytime => "anytime",
            StrategyKind::Contract => "contract",
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "anytime" => Ok(StrategyKind::Anytime),
            "contract" => Ok(StrategyKind::Contract),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    /// Time-period assignment with clique cuts, rooms aggregated away.
    Surface,
    /// As `Surface`, with rooms grouped into multi-rooms.
    Surface2(MultiRoomPolicy),
}

impl SurfaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SurfaceKind::Surface => "surface",
            SurfaceKind::Surface2(_) => "surface2",
        }
    }
}

/// What budgets are measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clock {
    /// Wall-clock seconds.
    Wall,
    /// Branch-and-bound nodes, summed over every search. Runs are
    /// reproducible bit for bit.
    Nodes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub strategy: StrategyKind,
    pub surface: SurfaceKind,
    /// Dive kinds in dispatch order, cheapest first.
    pub dive_sequence: Vec<DiveKind>,
    pub clock: Clock,
    /// Surface budget; `None` is unlimited.
    pub surface_budget: Option<f64>,
    /// Budget of a single dive, per kind; missing kinds are unlimited.
    pub dive_budgets: BTreeMap<DiveKind, f64>,
    /// Budget of the whole run; `None` is unlimited.
    pub total_budget: Option<f64>,
    /// A dive stops once its own relative gap falls to this value.
    pub dive_gap_stop: f64,
    /// Add implied-bound cuts to the model dives restrict.
    pub implied_cuts: bool,
    /// Separate clique cuts at the surface root.
    pub separation: bool,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig::one_cpu_unit()
    }
}

impl StrategyConfig {
    /// 600 s on `Surface`, then a single 180 s `PeriodFixed` dive.
    pub fn one_cpu_unit() -> StrategyConfig {
        StrategyConfig {
            strategy: StrategyKind::Contract,
            surface: SurfaceKind::Surface,
            dive_sequence: vec![DiveKind::PeriodFixed],
            clock: Clock::Wall,
            surface_budget: Some(600.0),
            dive_budgets: BTreeMap::from([(DiveKind::PeriodFixed, 180.0)]),
            total_budget: Some(CPU_UNIT_SECONDS),
            dive_gap_stop: DEFAULT_DIVE_GAP_STOP,
            implied_cuts: true,
            separation: true,
        }
    }

    /// 3420 s on `Surface2`, then `PeriodFixed` dives of 180 s and
    /// `DayFixed` dives of 3600 s.
    pub fn ten_cpu_units() -> StrategyConfig {
        StrategyConfig {
            surface: SurfaceKind::Surface2(MultiRoomPolicy::MedianSplit),
            dive_sequence: vec![DiveKind::PeriodFixed, DiveKind::DayFixed],
            surface_budget: Some(3420.0),
            dive_budgets: BTreeMap::from([
                (DiveKind::PeriodFixed, 180.0),
                (DiveKind::DayFixed, 3600.0),
            ]),
            total_budget: Some(10.0 * CPU_UNIT_SECONDS),
            ..StrategyConfig::one_cpu_unit()
        }
    }

    /// The preset closest to `units` CPU units, with every budget scaled to
    /// `units * 780` seconds.
    pub fn for_cpu_units(units: f64) -> Result<StrategyConfig, ControlError> {
        if !(units.is_finite() && units > 0.0) {
            return Err(ControlError::InvalidConfig(format!("{units} CPU units")));
        }
        let preset = if units < 10.0 {
            StrategyConfig::one_cpu_unit()
        } else {
            StrategyConfig::ten_cpu_units()
        };
        preset.scaled_to(units * CPU_UNIT_SECONDS)
    }

    /// Scales every budget by `total / total_budget`.
    pub fn scaled_to(mut self, total: f64) -> Result<StrategyConfig, ControlError> {
        let Some(old) = self.total_budget else {
            return Err(ControlError::InvalidConfig(
                "cannot scale an unlimited budget".into(),
            ));
        };
        if !(total.is_finite() && total > 0.0) {
            return Err(ControlError::InvalidConfig(format!("total budget {total}")));
        }
        let f = total / old;
        self.surface_budget = self.surface_budget.map(|b| b * f);
        for b in self.dive_budgets.values_mut() {
            *b *= f;
        }
        self.total_budget = Some(total);
        Ok(self)
    }

    /// Node budgets instead of seconds: `surface` nodes on the surface,
    /// `per_dive` nodes per dive and `total` overall.
    pub fn node_limited(
        mut self,
        surface: u64,
        per_dive: u64,
        total: Option<u64>,
    ) -> StrategyConfig {
        self.clock = Clock::Nodes;
        self.surface_budget = Some(surface as f64);
        self.dive_budgets = self
            .dive_sequence
            .iter()
            .map(|&k| (k, per_dive as f64))
            .collect();
        self.total_budget = total.map(|t| t as f64);
        self
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        let bad = |msg: String| Err(ControlError::InvalidConfig(msg));
        if self.dive_sequence.is_empty() {
            return bad("the dive sequence is empty".into());
        }
        let budgets = self
            .surface_budget
            .iter()
            .chain(self.dive_budgets.values())
            .chain(self.total_budget.iter());
        for &b in budgets {
            if !(b.is_finite() && b > 0.0) {
                return bad(format!("budget {b} is not positive"));
            }
        }
        if let Some(total) = self.total_budget {
            if self.surface_budget.is_none_or(|s| s > total) {
                return bad("the total budget is smaller than the surface budget".into());
            }
        }
        if !(0.0..1.0).contains(&self.dive_gap_stop) {
            return bad(format!(
                "dive gap stop {} is not in [0, 1)",
                self.dive_gap_stop
            ));
        }
        Ok(())
    }

    /// Solver limits for a search allowed `budget` units.
    pub(crate) fn limits(&self, budget: Option<f64>) -> SolveConfig {
        let mut cfg = SolveConfig::default();
        match (self.clock, budget) {
            (_, None) => {}
            (Clock::Wall, Some(b)) => cfg.time_limit = Some(Duration::from_secs_f64(b.max(1e-3))),
            (Clock::Nodes, Some(b)) => cfg.node_limit = Some((b.floor() as u64).max(1)),
        }
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_reported_splits() {
        let one = StrategyConfig::one_cpu_unit();
        assert_eq!(one.surface_budget, Some(600.0));
        assert_eq!(one.dive_budgets[&DiveKind::PeriodFixed], 180.0);
        one.validate().unwrap();
        let ten = StrategyConfig::ten_cpu_units();
        assert_eq!(
            ten.surface,
            SurfaceKind::Surface2(MultiRoomPolicy::MedianSplit)
        );
        assert_eq!(ten.surface_budget, Some(3420.0));
        assert_eq!(ten.dive_budgets[&DiveKind::DayFixed], 3600.0);
        ten.validate().unwrap();
    }

    #[test]
    fn scaling_is_proportional() {
        let half = StrategyConfig::for_cpu_units(0.5).unwrap();
        assert_eq!(half.total_budget, Some(390.0));
        assert_eq!(half.surface_budget, Some(300.0));
        assert_eq!(half.dive_budgets[&DiveKind::PeriodFixed], 90.0);
        let twenty = StrategyConfig::for_cpu_units(20.0).unwrap();
        assert_eq!(twenty.surface_budget, Some(6840.0));
        assert!(StrategyConfig::for_cpu_units(0.0).is_err());
    }

    #[test]
    fn invariants_are_checked() {
        let mut c = StrategyConfig::one_cpu_unit();
        c.dive_sequence.clear();
        assert!(c.validate().is_err());
        let mut c = StrategyConfig::one_cpu_unit();
        c.total_budget = Some(100.0);
        assert!(c.validate().is_err());
        let mut c = StrategyConfig::one_cpu_unit();
        c.dive_gap_stop = 1.0;
        assert!(c.validate().is_err());
        let c = StrategyConfig::one_cpu_unit().node_limited(100, 50, None);
        c.validate().unwrap();
        assert_eq!(c.limits(Some(7.9)).node_limit, Some(7));
    }

    #[test]
    fn json_round_trip() {
        let c = StrategyConfig::ten_cpu_units();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<StrategyConfig>(&text).unwrap(), c);
    }
}
