//! Integer programming formulations of the timetabling problem, dive
//! restrictions, cut families, and translation between timetables and
//! model values.

mod cuts;
mod monolithic;
mod restrict;
mod surface;

pub use cuts::{
    add_clique_cuts, add_implied_bound_cuts, add_pattern_cuts, enumerate_patterns, pattern_cut_lhs,
    separate_cliques, CliqueSeparator, ViolatedClique,
};
pub use monolithic::{build_monolithic, build_monolithic_with, MONOLITHIC_ORIGINS};
pub use restrict::{restrict_day_fixed, restrict_period_fixed, DayFixedVariant};
pub use surface::{
    build_surface, build_surface2, surface2_origins, surface_origins, SurfaceOptions,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluation::{self, isolated_lectures, Solution};
use crate::instance::{Instance, MultiRoom};
use crate::milp::{
    MilpError, MilpModel, MilpSolution, Origin, Sense, SolutionStatus, VarId, VarKind, VarTag,
    TOLERANCE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormulationError {
    #[error(transparent)]
    Model(#[from] MilpError),
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("courses {0:?} do not form a clique of the conflict graph")]
    NotAClique(Vec<usize>),
    #[error("pattern of length {found} does not match {expected} periods per day")]
    PatternLength { expected: usize, found: usize },
    #[error("pattern {pattern:?} has penalty {found}, expected {expected}")]
    PatternPenalty {
        pattern: Vec<i8>,
        expected: u32,
        found: u32,
    },
    #[error("model has no `{0}` variables")]
    MissingVariables(&'static str),
    #[error("cannot decode a solution with status {0:?}")]
    NoSolution(SolutionStatus),
    #[error("variable `{name}` has non-integral value {value}")]
    Fractional { name: String, value: f64 },
}

/// Times of every course, rooms left open.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodAssignment {
    pub periods_per_day: u32,
    pub num_periods: usize,
    /// For each course, the ascending list of its periods.
    pub times: Vec<Vec<usize>>,
}

impl PeriodAssignment {
    pub fn new(inst: &Instance, mut times: Vec<Vec<usize>>) -> PeriodAssignment {
        for t in &mut times {
            t.sort_unstable();
        }
        PeriodAssignment {
            periods_per_day: inst.periods_per_day,
            num_periods: inst.num_periods(),
            times,
        }
    }

    /// Forgets the rooms of a timetable.
    pub fn from_solution(inst: &Instance, sol: &Solution) -> PeriodAssignment {
        let times = sol
            .assignments
            .iter()
            .map(|ps| ps.iter().map(|pl| pl.period).collect())
            .collect();
        PeriodAssignment::new(inst, times)
    }

    pub fn is_set(&self, period: usize, course: usize) -> bool {
        self.times[course].binary_search(&period).is_ok()
    }

    /// Checks event counts, distinct periods, curriculum and teacher clashes,
    /// the room-count bound per period and unavailability.
    pub fn validate(&self, inst: &Instance) -> Result<(), FormulationError> {
        let bad = |m: String| Err(FormulationError::InvalidBasis(m));
        if self.times.len() != inst.courses.len() || self.num_periods != inst.num_periods() {
            return bad("basis does not match the instance".into());
        }
        let mut load = vec![0usize; self.num_periods];
        for (c, ts) in self.times.iter().enumerate() {
            if ts.len() != inst.courses[c].events as usize {
                return bad(format!(
                    "course #{c} has {} periods, needs {}",
                    ts.len(),
                    inst.courses[c].events
                ));
            }
            if ts.windows(2).any(|w| w[0] == w[1]) {
                return bad(format!("course #{c} repeats a period"));
            }
            for &p in ts {
                if p >= self.num_periods {
                    return bad(format!("course #{c} at period {p} outside the week"));
                }
                if !inst.is_available(c, p) {
                    return bad(format!("course #{c} at unavailable period {p}"));
                }
                load[p] += 1;
            }
        }
        if let Some(p) = load.iter().position(|&n| n > inst.rooms.len()) {
            return bad(format!("period {p} holds more events than rooms"));
        }
        let groups = inst
            .curricula
            .iter()
            .map(|u| u.courses.clone())
            .chain((0..inst.teachers().len()).map(|t| inst.teacher_courses(t)));
        for group in groups {
            for p in 0..self.num_periods {
                if group.iter().filter(|&&c| self.is_set(p, c)).count() > 1 {
                    return bad(format!("courses {group:?} clash at period {p}"));
                }
            }
        }
        Ok(())
    }
}

/// Number of events of every course on every day.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DayAssignment {
    pub periods_per_day: u32,
    /// `days[c][d]` events of course `c` on day `d`.
    pub days: Vec<Vec<u32>>,
}

impl DayAssignment {
    pub fn validate(&self, inst: &Instance) -> Result<(), FormulationError> {
        let bad = |m: String| Err(FormulationError::InvalidBasis(m));
        if self.days.len() != inst.courses.len() {
            return bad("basis does not match the instance".into());
        }
        for (c, ds) in self.days.iter().enumerate() {
            if ds.len() != inst.num_days() {
                return bad(format!("course #{c} lists {} days", ds.len()));
            }
            if let Some(d) = ds.iter().position(|&n| n > inst.periods_per_day) {
                return bad(format!(
                    "course #{c} has more events on day {d} than periods"
                ));
            }
            if ds.iter().sum::<u32>() != inst.courses[c].events {
                return bad(format!("course #{c} day counts do not sum to its events"));
            }
        }
        Ok(())
    }
}

/// Sums a period assignment over the periods of each day.
pub fn relax_to_days(basis: &PeriodAssignment) -> DayAssignment {
    let ppd = basis.periods_per_day.max(1) as usize;
    let num_days = basis.num_periods / ppd;
    let days = basis
        .times
        .iter()
        .map(|ts| {
            let mut d = vec![0u32; num_days];
            for &p in ts {
                d[p / ppd] += 1;
            }
            d
        })
        .collect();
    DayAssignment {
        periods_per_day: basis.periods_per_day,
        days,
    }
}

/// The kinds of value-restricted dive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiveKind {
    PeriodFixed,
    DayFixed,
    DayDecomp,
    DayFixedZeroStability,
}

impl DiveKind {
    pub fn name(self) -> &'static str {
        match self {
            DiveKind::PeriodFixed => "period-fixed",
            DiveKind::DayFixed => "day-fixed",
            DiveKind::DayDecomp => "day-decomp",
            DiveKind::DayFixedZeroStability => "day-fixed-zero-stability",
        }
    }
}

impl std::str::FromStr for DiveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "period-fixed" | "PeriodFixed" => Ok(DiveKind::PeriodFixed),
            "day-fixed" | "DayFixed" => Ok(DiveKind::DayFixed),
            "day-decomp" | "DayDecomp" => Ok(DiveKind::DayDecomp),
            "day-fixed-zero-stability" | "DayFixedZeroStability" => {
                Ok(DiveKind::DayFixedZeroStability)
            }
            other => Err(format!("unknown dive kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Periods(PeriodAssignment),
    Days(DayAssignment),
}

/// A dive: a restriction of the full model around a surface solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub kind: DiveKind,
    pub basis: Basis,
    /// Surface objective of the originating solution.
    pub source_objective: f64,
    /// Order in which the originating solution was found.
    pub discovery: usize,
}

impl Neighborhood {
    /// Derives a neighbourhood of `kind` from a surface solution.
    pub fn from_surface(
        kind: DiveKind,
        basis: &PeriodAssignment,
        source_objective: f64,
        discovery: usize,
    ) -> Neighborhood {
        let basis = match kind {
            DiveKind::PeriodFixed => Basis::Periods(basis.clone()),
            _ => Basis::Days(relax_to_days(basis)),
        };
        Neighborhood {
            kind,
            basis,
            source_objective,
            discovery,
        }
    }

    /// Restricts `monolithic` to this neighbourhood.
    pub fn restrict(
        &self,
        inst: &Instance,
        monolithic: &MilpModel,
    ) -> Result<MilpModel, FormulationError> {
        match (&self.basis, self.kind) {
            (Basis::Periods(b), DiveKind::PeriodFixed) => {
                restrict_period_fixed(inst, monolithic, b)
            }
            (Basis::Days(b), DiveKind::DayFixed) => {
                restrict_day_fixed(inst, monolithic, b, DayFixedVariant::Plain)
            }
            (Basis::Days(b), DiveKind::DayDecomp) => {
                restrict_day_fixed(inst, monolithic, b, DayFixedVariant::Decomp)
            }
            (Basis::Days(b), DiveKind::DayFixedZeroStability) => {
                restrict_day_fixed(inst, monolithic, b, DayFixedVariant::ZeroStability)
            }
            (_, kind) => Err(FormulationError::InvalidBasis(format!(
                "basis kind does not match {} dive",
                kind.name()
            ))),
        }
    }
}

/// Spread and compactness penalties of a period assignment, weighted as in
/// the surface objective.
pub fn surface_objective(inst: &Instance, basis: &PeriodAssignment) -> u64 {
    let sol = Solution {
        assignments: basis
            .times
            .iter()
            .map(|ts| {
                ts.iter()
                    .map(|&p| evaluation::Placement { period: p, room: 0 })
                    .collect()
            })
            .collect(),
    };
    let w = &inst.weights;
    w.spread as u64 * evaluation::penalty_min_days(inst, &sol)
        + w.compactness as u64 * evaluation::penalty_compactness(inst, &sol)
}

/// Variables meaning "course `c` meets at period `p`", grouped by `(p, c)`.
pub(crate) fn occupancy_index(model: &MilpModel) -> BTreeMap<(usize, usize), Vec<VarId>> {
    let mut index: BTreeMap<(usize, usize), Vec<VarId>> = BTreeMap::new();
    for (j, v) in model.variables().iter().enumerate() {
        let key = match v.tag {
            VarTag::Taught { period, course, .. }
            | VarTag::SetTimes { period, course }
            | VarTag::MultiTaught { period, course, .. } => (period, course),
            _ => continue,
        };
        index.entry(key).or_default().push(model.id_of(j));
    }
    index
}

/// Adds the day, minimum-days and isolation machinery shared by every
/// formulation. `occ(p, c)` lists the variables whose sum says course `c`
/// meets at period `p`. Returns the shortfall and singleton variables.
pub(crate) fn add_day_machinery(
    model: &mut MilpModel,
    inst: &Instance,
    occ: &dyn Fn(usize, usize) -> Vec<VarId>,
) -> Result<(Vec<VarId>, Vec<VarId>), MilpError> {
    let ppd = inst.periods_per_day as usize;
    let days = inst.num_days();
    let mut mdv = Vec::new();
    for (c, course) in inst.courses.iter().enumerate() {
        let mut schedule = Vec::with_capacity(days);
        for d in 0..days {
            let cs = model.add_binary(
                format!("CS_{d}_{c}"),
                VarTag::CourseSchedule { day: d, course: c },
            )?;
            schedule.push(cs);
            let mut lower = vec![(-1.0, cs)];
            for p in inst.day_periods(d) {
                let vars = occ(p, c);
                let terms = vars.iter().map(|&v| (1.0, v)).chain([(-1.0, cs)]);
                model.add_constraint(
                    format!("dayup_{c}_{d}_{p}"),
                    terms,
                    Sense::Le,
                    0.0,
                    Origin::DayUpper,
                )?;
                lower.extend(vars.iter().map(|&v| (1.0, v)));
            }
            model.add_constraint(
                format!("daylo_{c}_{d}"),
                lower,
                Sense::Ge,
                0.0,
                Origin::DayLower,
            )?;
        }
        let v = model.add_variable(
            format!("MDV_{c}"),
            VarKind::Integer,
            0.0,
            days as f64,
            VarTag::MinDaysViolation { course: c },
        )?;
        let terms = schedule.iter().map(|&cs| (1.0, cs)).chain([(1.0, v)]);
        model.add_constraint(
            format!("mindays_{c}"),
            terms,
            Sense::Ge,
            course.min_days as f64,
            Origin::MinDays,
        )?;
        mdv.push(v);
    }

    let mut singles = Vec::new();
    for (u, cur) in inst.curricula.iter().enumerate() {
        for d in 0..days {
            let periods: Vec<usize> = inst.day_periods(d).collect();
            let occupancy = |i: usize| -> Vec<VarId> {
                cur.courses
                    .iter()
                    .flat_map(|&c| occ(periods[i], c))
                    .collect()
            };
            for s in 0..ppd {
                let sv = model.add_binary(
                    format!("S_{u}_{d}_{s}"),
                    VarTag::Singleton {
                        curriculum: u,
                        day: d,
                        slot: s,
                    },
                )?;
                let mut terms: Vec<(f64, VarId)> =
                    occupancy(s).into_iter().map(|v| (1.0, v)).collect();
                if s > 0 {
                    terms.extend(occupancy(s - 1).into_iter().map(|v| (-1.0, v)));
                }
                if s + 1 < ppd {
                    terms.extend(occupancy(s + 1).into_iter().map(|v| (-1.0, v)));
                }
                terms.push((-1.0, sv));
                model.add_constraint(
                    format!("single_{u}_{d}_{s}"),
                    terms,
                    Sense::Le,
                    0.0,
                    Origin::SingletonCheck,
                )?;
                singles.push(sv);
            }
        }
    }
    Ok((mdv, singles))
}

/// Values of every tagged variable for a timetable. Multi-room variables
/// need the multi-rooms the model was built with.
pub fn encode_solution(
    inst: &Instance,
    model: &MilpModel,
    sol: &Solution,
    multirooms: Option<&[MultiRoom]>,
) -> Vec<f64> {
    let ppd = inst.periods_per_day as usize;
    let mut room_group = vec![usize::MAX; inst.rooms.len()];
    if let Some(ms) = multirooms {
        for (k, m) in ms.iter().enumerate() {
            for &r in &m.members {
                room_group[r] = k;
            }
        }
    }
    let placed = |c: usize| sol.assignments.get(c).map(Vec::as_slice).unwrap_or(&[]);
    let at = |p: usize, c: usize| placed(c).iter().any(|pl| pl.period == p);
    let busy: Vec<Vec<bool>> = inst
        .curricula
        .iter()
        .map(|u| {
            (0..inst.num_periods())
                .map(|p| u.courses.iter().any(|&c| at(p, c)))
                .collect()
        })
        .collect();
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    model
        .variables()
        .iter()
        .map(|v| match v.tag {
            VarTag::Taught {
                period,
                room,
                course,
            } => flag(
                placed(course)
                    .iter()
                    .any(|pl| pl.period == period && pl.room == room),
            ),
            VarTag::SetTimes { period, course } => flag(at(period, course)),
            VarTag::MultiTaught {
                period,
                multiroom,
                course,
            } => flag(
                placed(course)
                    .iter()
                    .any(|pl| pl.period == period && room_group[pl.room] == multiroom),
            ),
            VarTag::CourseSchedule { day, course } => {
                flag(placed(course).iter().any(|pl| pl.period / ppd == day))
            }
            VarTag::MinDaysViolation { course } => {
                let mut days: Vec<usize> =
                    placed(course).iter().map(|pl| pl.period / ppd).collect();
                days.sort_unstable();
                days.dedup();
                inst.courses[course]
                    .min_days
                    .saturating_sub(days.len() as u32) as f64
            }
            VarTag::Singleton {
                curriculum,
                day,
                slot,
            } => {
                let row = &busy[curriculum];
                let d = &row[day * ppd..(day + 1) * ppd];
                let alone =
                    d[slot] && !(slot > 0 && d[slot - 1]) && !(slot + 1 < ppd && d[slot + 1]);
                flag(alone)
            }
            VarTag::CourseRooms { room, course } => {
                flag(placed(course).iter().any(|pl| pl.room == room))
            }
            VarTag::MultiCourseRooms { multiroom, course } => flag(
                placed(course)
                    .iter()
                    .any(|pl| room_group[pl.room] == multiroom),
            ),
            VarTag::Generic => 0.0,
        })
        .collect()
}

fn usable(sol: &MilpSolution) -> Result<(), FormulationError> {
    match sol.status {
        SolutionStatus::Optimal | SolutionStatus::Feasible => Ok(()),
        s => Err(FormulationError::NoSolution(s)),
    }
}

fn binary_value(model: &MilpModel, sol: &MilpSolution, j: usize) -> Result<bool, FormulationError> {
    let x = sol.values[j];
    if (x - x.round()).abs() > TOLERANCE {
        return Err(FormulationError::Fractional {
            name: model.variables()[j].name.clone(),
            value: x,
        });
    }
    Ok(x > 0.5)
}

/// Reads a timetable off the `Taught` variables.
pub fn decode_monolithic(
    inst: &Instance,
    model: &MilpModel,
    sol: &MilpSolution,
) -> Result<Solution, FormulationError> {
    usable(sol)?;
    let mut out = Solution::empty(inst.courses.len());
    let mut any = false;
    for (j, v) in model.variables().iter().enumerate() {
        if let VarTag::Taught {
            period,
            room,
            course,
        } = v.tag
        {
            any = true;
            if binary_value(model, sol, j)? {
                out.place(course, period, room);
            }
        }
    }
    if !any {
        return Err(FormulationError::MissingVariables("Taught"));
    }
    Ok(out.normalized())
}

/// Reads the period assignment off `SetTimes`, `Taught` or multi-room
/// variables, whichever the model has.
pub fn decode_surface(
    inst: &Instance,
    model: &MilpModel,
    sol: &MilpSolution,
) -> Result<PeriodAssignment, FormulationError> {
    usable(sol)?;
    let index = occupancy_index(model);
    if index.is_empty() {
        return Err(FormulationError::MissingVariables("SetTimes"));
    }
    let mut times = vec![Vec::new(); inst.courses.len()];
    for (&(p, c), vars) in &index {
        let mut on = false;
        for v in vars {
            on |= binary_value(model, sol, v.index())?;
        }
        if on {
            times[c].push(p);
        }
    }
    Ok(PeriodAssignment::new(inst, times))
}

/// Isolation count of a daily pattern, shared with the cut generator.
pub(crate) fn pattern_penalty(pattern: &[i8]) -> u32 {
    let occupied: Vec<bool> = pattern.iter().map(|&a| a > 0).collect();
    isolated_lectures(&occupied)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse::tests_support::TOY;
    use crate::instance::parse_ctt;

    #[test]
    fn relax_counts_per_day() {
        let inst = parse_ctt(TOY).unwrap();
        let mut times = vec![Vec::new(); 4];
        times[0] = vec![0, 1];
        let b = PeriodAssignment::new(&inst, times);
        let d = relax_to_days(&b);
        assert_eq!(d.days[0], vec![2, 0, 0, 0, 0]);
        assert_eq!(d.days[1], vec![0; 5]);
    }

    #[test]
    fn period_assignment_validation() {
        let inst = parse_ctt(TOY).unwrap();
        let ok = PeriodAssignment::new(
            &inst,
            vec![
                vec![0, 4, 8],
                vec![1, 5, 9],
                vec![2, 6, 12, 16, 17],
                vec![3, 7, 13, 18, 19],
            ],
        );
        ok.validate(&inst).unwrap();
        let mut clash = ok.clone();
        clash.times[1] = vec![0, 5, 9];
        assert!(clash.validate(&inst).is_err());
        // TecCos is unavailable on day 3, period 2
        let mut forbidden = ok.clone();
        forbidden.times[2] = vec![2, 6, 14, 16, 17];
        assert!(forbidden
            .validate(&inst)
            .unwrap_err()
            .to_string()
            .contains("unavailable"));
    }

    #[test]
    fn dive_kind_names() {
        for k in [
            DiveKind::PeriodFixed,
            DiveKind::DayFixed,
            DiveKind::DayDecomp,
            DiveKind::DayFixedZeroStability,
        ] {
            assert_eq!(k.name().parse::<DiveKind>().unwrap(), k);
        }
    }
}
