//! Timetables, hard-constraint checking and the four soft penalties.

mod file;

pub use file::{parse_solution, write_solution, SolutionFileError};

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, WeightVector};

/// One event placed at a period in a room.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Placement {
    pub period: usize,
    pub room: usize,
}

/// A complete timetable: for each course, the placements of its events.
///
/// The container itself does not enforce event counts or distinct periods;
/// [`check_hard`] reports those.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Solution {
    pub assignments: Vec<Vec<Placement>>,
}

impl Solution {
    pub fn empty(num_courses: usize) -> Solution {
        Solution {
            assignments: vec![Vec::new(); num_courses],
        }
    }

    pub fn place(&mut self, course: usize, period: usize, room: usize) {
        self.assignments[course].push(Placement { period, room });
    }

    /// Sorts every course's placements so equal timetables compare equal.
    pub fn normalized(mut self) -> Solution {
        for a in &mut self.assignments {
            a.sort_unstable();
        }
        self
    }

    pub fn events(&self) -> impl Iterator<Item = (usize, Placement)> + '_ {
        self.assignments
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| (c, p)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PenaltyVector {
    pub capacity: u64,
    pub spread: u64,
    pub compactness: u64,
    pub stability: u64,
}

impl PenaltyVector {
    pub const fn new(capacity: u64, spread: u64, compactness: u64, stability: u64) -> Self {
        PenaltyVector {
            capacity,
            spread,
            compactness,
            stability,
        }
    }
}

impl std::ops::Add for PenaltyVector {
    type Output = PenaltyVector;

    fn add(self, o: PenaltyVector) -> PenaltyVector {
        PenaltyVector::new(
            self.capacity + o.capacity,
            self.spread + o.spread,
            self.compactness + o.compactness,
            self.stability + o.stability,
        )
    }
}

impl fmt::Display for PenaltyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "capacity={} spread={} compactness={} stability={}",
            self.capacity, self.spread, self.compactness, self.stability
        )
    }
}

/// A hard-constraint violation with its location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum HardViolation {
    EventCount {
        course: usize,
        expected: u32,
        actual: usize,
    },
    RoomClash {
        period: usize,
        room: usize,
    },
    CourseClash {
        course: usize,
        period: usize,
    },
    TeacherClash {
        teacher: usize,
        period: usize,
    },
    CurriculumClash {
        curriculum: usize,
        period: usize,
    },
    Unavailable {
        course: usize,
        period: usize,
    },
    UnknownRoomOrPeriod {
        course: usize,
        placement: Placement,
    },
}

impl HardViolation {
    pub fn kind(&self) -> &'static str {
        match self {
            HardViolation::EventCount { .. } => "event-count",
            HardViolation::RoomClash { .. } => "room-clash",
            HardViolation::CourseClash { .. } => "course-clash",
            HardViolation::TeacherClash { .. } => "teacher-clash",
            HardViolation::CurriculumClash { .. } => "curriculum-clash",
            HardViolation::Unavailable { .. } => "unavailable",
            HardViolation::UnknownRoomOrPeriod { .. } => "out-of-range",
        }
    }
}

impl fmt::Display for HardViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HardViolation::EventCount {
                course,
                expected,
                actual,
            } => write!(
                f,
                "event-count: course #{course} has {actual} events, expected {expected}"
            ),
            HardViolation::RoomClash { period, room } => {
                write!(f, "room-clash: room #{room} used twice at period {period}")
            }
            HardViolation::CourseClash { course, period } => {
                write!(f, "course-clash: course #{course} twice at period {period}")
            }
            HardViolation::TeacherClash { teacher, period } => {
                write!(
                    f,
                    "teacher-clash: teacher #{teacher} twice at period {period}"
                )
            }
            HardViolation::CurriculumClash { curriculum, period } => {
                write!(
                    f,
                    "curriculum-clash: curriculum #{curriculum} twice at period {period}"
                )
            }
            HardViolation::Unavailable { course, period } => {
                write!(
                    f,
                    "unavailable: course #{course} placed at forbidden period {period}"
                )
            }
            HardViolation::UnknownRoomOrPeriod { course, placement } => write!(
                f,
                "out-of-range: course #{course} at period {} room #{}",
                placement.period, placement.room
            ),
        }
    }
}

/// Lists every hard-constraint violation; an empty list means feasible.
pub fn check_hard(inst: &Instance, sol: &Solution) -> Vec<HardViolation> {
    let periods = inst.num_periods();
    let rooms = inst.rooms.len();
    let mut out = Vec::new();
    let mut room_use = vec![0u32; periods * rooms];
    let mut course_use = vec![vec![0u32; periods]; inst.courses.len()];
    for (c, course) in inst.courses.iter().enumerate() {
        let placed = sol.assignments.get(c).map(Vec::as_slice).unwrap_or(&[]);
        if placed.len() != course.events as usize {
            out.push(HardViolation::EventCount {
                course: c,
                expected: course.events,
                actual: placed.len(),
            });
        }
        for &pl in placed {
            if pl.period >= periods || pl.room >= rooms {
                out.push(HardViolation::UnknownRoomOrPeriod {
                    course: c,
                    placement: pl,
                });
                continue;
            }
            room_use[pl.period * rooms + pl.room] += 1;
            course_use[c][pl.period] += 1;
            if !inst.is_available(c, pl.period) {
                out.push(HardViolation::Unavailable {
                    course: c,
                    period: pl.period,
                });
            }
        }
    }
    for p in 0..periods {
        for r in 0..rooms {
            if room_use[p * rooms + r] > 1 {
                out.push(HardViolation::RoomClash { period: p, room: r });
            }
        }
        for (c, uses) in course_use.iter().enumerate() {
            if uses[p] > 1 {
                out.push(HardViolation::CourseClash {
                    course: c,
                    period: p,
                });
            }
        }
        for t in 0..inst.teachers().len() {
            let n: u32 = inst
                .teacher_courses(t)
                .iter()
                .map(|&c| course_use[c][p].min(1))
                .sum();
            if n > 1 {
                out.push(HardViolation::TeacherClash {
                    teacher: t,
                    period: p,
                });
            }
        }
        for (ui, u) in inst.curricula.iter().enumerate() {
            let n: u32 = u.courses.iter().map(|&c| course_use[c][p].min(1)).sum();
            if n > 1 {
                out.push(HardViolation::CurriculumClash {
                    curriculum: ui,
                    period: p,
                });
            }
        }
    }
    out
}

pub fn is_feasible(inst: &Instance, sol: &Solution) -> bool {
    check_hard(inst, sol).is_empty()
}

/// Students left without a seat, summed over events.
pub fn penalty_capacity(inst: &Instance, sol: &Solution) -> u64 {
    sol.events()
        .filter_map(|(c, pl)| {
            let room = inst.rooms.get(pl.room)?;
            Some(inst.courses[c].students.saturating_sub(room.capacity) as u64)
        })
        .sum()
}

/// Days short of each course's minimum working days, summed.
pub fn penalty_min_days(inst: &Instance, sol: &Solution) -> u64 {
    inst.courses
        .iter()
        .enumerate()
        .map(|(c, course)| {
            let days: BTreeSet<usize> = sol
                .assignments
                .get(c)
                .into_iter()
                .flatten()
                .map(|pl| inst.day_of(pl.period))
                .collect();
            course.min_days.saturating_sub(days.len() as u32) as u64
        })
        .sum()
}

/// Number of occupied slots in a day with no occupied neighbour.
pub fn isolated_lectures(day: &[bool]) -> u32 {
    (0..day.len())
        .filter(|&i| day[i] && !(i > 0 && day[i - 1]) && !(i + 1 < day.len() && day[i + 1]))
        .count() as u32
}

/// Isolated lectures in the daily timetables of every curriculum.
pub fn penalty_compactness(inst: &Instance, sol: &Solution) -> u64 {
    let periods = inst.num_periods();
    let ppd = inst.periods_per_day as usize;
    let mut total = 0u64;
    for u in &inst.curricula {
        let mut busy = vec![false; periods];
        for &c in &u.courses {
            for pl in sol.assignments.get(c).into_iter().flatten() {
                if pl.period < periods {
                    busy[pl.period] = true;
                }
            }
        }
        for day in busy.chunks(ppd.max(1)) {
            total += isolated_lectures(day) as u64;
        }
    }
    total
}

/// Rooms used by each course beyond the first, summed.
pub fn penalty_stability(inst: &Instance, sol: &Solution) -> u64 {
    (0..inst.courses.len())
        .map(|c| {
            let rooms: BTreeSet<usize> = sol
                .assignments
                .get(c)
                .into_iter()
                .flatten()
                .map(|pl| pl.room)
                .collect();
            rooms.len().saturating_sub(1) as u64
        })
        .sum()
}

pub fn penalties(inst: &Instance, sol: &Solution) -> PenaltyVector {
    PenaltyVector {
        capacity: penalty_capacity(inst, sol),
        spread: penalty_min_days(inst, sol),
        compactness: penalty_compactness(inst, sol),
        stability: penalty_stability(inst, sol),
    }
}

/// Weighted sum of penalties.
pub fn objective(w: &WeightVector, p: &PenaltyVector) -> u64 {
    w.capacity as u64 * p.capacity
        + w.spread as u64 * p.spread
        + w.compactness as u64 * p.compactness
        + w.stability as u64 * p.stability
}

/// Penalties and weighted objective of a solution under the instance weights.
pub fn evaluate(inst: &Instance, sol: &Solution) -> (PenaltyVector, u64) {
    let p = penalties(inst, sol);
    (p, objective(&inst.weights, &p))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GapError {
    #[error("lower bound {lower} is negative")]
    NegativeLower { lower: i64 },
    #[error("lower bound {lower} exceeds upper bound {upper}")]
    Crossed { upper: i64, lower: i64 },
}

/// Relative gap `100 (1 - lower / upper)` in percent, rounded half-up to one
/// decimal. A zero upper bound gives a zero gap.
pub fn gap(upper: i64, lower: i64) -> Result<f64, GapError> {
    if lower < 0 {
        return Err(GapError::NegativeLower { lower });
    }
    if lower > upper {
        return Err(GapError::Crossed { upper, lower });
    }
    if upper == 0 {
        return Ok(0.0);
    }
    // Round in integer arithmetic: tenths = floor(1000 (ub - lb) / ub + 1/2).
    let num = 2000 * (upper - lower) as i128 + upper as i128;
    let tenths = num / (2 * upper as i128);
    Ok(tenths as f64 / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Course, Curriculum, Room};

    fn inst(ppd: u32) -> Instance {
        let course = |id: &str, t: &str, e, md, s| Course {
            id: id.into(),
            teacher: t.into(),
            events: e,
            min_days: md,
            students: s,
        };
        Instance::new(
            "t",
            vec![
                course("a", "t1", 2, 2, 50),
                course("b", "t2", 2, 1, 10),
                course("c", "t1", 1, 1, 5),
            ],
            vec![
                Room {
                    id: "small".into(),
                    capacity: 40,
                },
                Room {
                    id: "big".into(),
                    capacity: 100,
                },
            ],
            vec![Curriculum {
                id: "u".into(),
                courses: vec![0, 1],
            }],
            2,
            ppd,
            [(2usize, 0usize)].into_iter().collect(),
            WeightVector::default(),
        )
        .unwrap()
    }

    #[test]
    fn capacity_overflow() {
        let i = inst(4);
        let mut s = Solution::empty(3);
        s.place(0, 0, 0);
        assert_eq!(penalty_capacity(&i, &s), 10);
        s.place(0, 1, 1);
        assert_eq!(penalty_capacity(&i, &s), 10);
    }

    #[test]
    fn min_days_is_clamped() {
        let i = inst(4);
        let mut s = Solution::empty(3);
        s.place(0, 0, 1);
        s.place(0, 1, 1);
        // b and c have no events and miss one day each
        assert_eq!(penalty_min_days(&i, &s), 1 + 2);
        let mut s = Solution::empty(3);
        s.place(0, 0, 1);
        s.place(0, 5, 1);
        s.place(0, 6, 1);
        s.place(1, 2, 0);
        s.place(2, 3, 0);
        assert_eq!(penalty_min_days(&i, &s), 0);
    }

    #[test]
    fn compactness_patterns() {
        assert_eq!(isolated_lectures(&[true, false, false, false]), 1);
        assert_eq!(isolated_lectures(&[true, true, false, false]), 0);
        assert_eq!(isolated_lectures(&[true, false, true, false]), 2);
        assert_eq!(isolated_lectures(&[true]), 1);
        assert_eq!(isolated_lectures(&[]), 0);
    }

    #[test]
    fn compactness_counts_curriculum_occupancy() {
        let i = inst(4);
        let mut s = Solution::empty(3);
        // a and b adjacent on day 0: neither isolated
        s.place(0, 0, 0);
        s.place(1, 1, 1);
        // a alone on day 1, b alone on day 1 but not adjacent
        s.place(0, 4, 0);
        s.place(1, 6, 0);
        assert_eq!(penalty_compactness(&i, &s), 2);
    }

    #[test]
    fn stability_counts_extra_rooms() {
        let i = inst(4);
        let mut s = Solution::empty(3);
        s.place(0, 0, 0);
        s.place(0, 1, 1);
        s.place(1, 2, 1);
        s.place(1, 3, 1);
        assert_eq!(penalty_stability(&i, &s), 1);
    }

    #[test]
    fn hard_violations() {
        let i = inst(4);
        let mut s = Solution::empty(3);
        s.place(0, 0, 0);
        s.place(0, 0, 1); // course clash
        s.place(1, 0, 0); // room clash, curriculum clash
        s.place(1, 3, 1);
        s.place(2, 0, 1); // unavailable, teacher clash with a, room clash
        let kinds: BTreeSet<&str> = check_hard(&i, &s).iter().map(|v| v.kind()).collect();
        assert_eq!(
            kinds,
            [
                "course-clash",
                "curriculum-clash",
                "room-clash",
                "teacher-clash",
                "unavailable"
            ]
            .into_iter()
            .collect()
        );
        let mut ok = Solution::empty(3);
        ok.place(0, 0, 1);
        ok.place(0, 4, 1);
        ok.place(1, 1, 0);
        ok.place(1, 2, 0);
        ok.place(2, 3, 0);
        assert!(check_hard(&i, &ok).is_empty());
        let mut short = ok.clone();
        short.assignments[2].clear();
        assert_eq!(
            check_hard(&i, &short),
            vec![HardViolation::EventCount {
                course: 2,
                expected: 1,
                actual: 0
            }]
        );
    }

    #[test]
    fn objective_examples() {
        assert_eq!(
            objective(
                &WeightVector::new(1, 5, 0, 1),
                &PenaltyVector::new(4, 0, 350, 1)
            ),
            5
        );
        assert_eq!(
            objective(
                &WeightVector::new(0, 0, 0, 0),
                &PenaltyVector::new(2294, 30, 350, 93)
            ),
            0
        );
        assert_eq!(
            objective(&WeightVector::default(), &PenaltyVector::default()),
            0
        );
    }

    #[test]
    fn gap_examples() {
        assert_eq!(gap(9, 5).unwrap(), 44.4);
        assert_eq!(gap(36, 35).unwrap(), 2.8);
        assert_eq!(gap(17, 17).unwrap(), 0.0);
        assert_eq!(gap(0, 0).unwrap(), 0.0);
        // 1 - 1/8 = 87.5 exactly, half-up keeps it
        assert_eq!(gap(8, 1).unwrap(), 87.5);
        // 1 - 1/16 = 93.75 -> 93.8
        assert_eq!(gap(16, 1).unwrap(), 93.8);
        assert!(gap(5, 9).is_err());
        assert!(gap(5, -1).is_err());
    }
}
