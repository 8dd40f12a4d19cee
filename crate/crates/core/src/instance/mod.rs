//! Problem instances: courses, rooms, curricula, periods and weights.

mod graph;
mod multiroom;
pub(crate) mod parse;
mod stats;

pub use graph::{ConflictGraph, EdgeReason};
pub use multiroom::{build_multirooms, MultiRoom, MultiRoomPolicy};
pub use parse::{parse_ctt, parse_ctt_with, write_ctt};
pub use stats::{instance_stats, InstanceStats};

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors produced while reading or validating an instance.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{}invalid instance: {violation}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Invalid {
        line: Option<usize>,
        violation: Violation,
    },
}

impl InstanceError {
    pub fn is_syntax(&self) -> bool {
        matches!(self, InstanceError::Syntax { .. })
    }
}

/// A violated instance invariant.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Violation {
    #[error("unknown course `{0}`")]
    UnknownCourse(String),
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("period {period} out of range for course `{course}` (instance has {periods} periods)")]
    PeriodOutOfRange {
        course: String,
        period: usize,
        periods: usize,
    },
    #[error("course `{0}` has no events")]
    NoEvents(String),
    #[error("course `{course}` has {events} events but only {available} usable periods")]
    TooManyEvents {
        course: String,
        events: u32,
        available: usize,
    },
    #[error("course `{course}` asks for {min_days} minimum days, outside 1..={days}")]
    MinDaysOutOfRange {
        course: String,
        min_days: u32,
        days: u32,
    },
    #[error("curriculum `{0}` is empty")]
    EmptyCurriculum(String),
    #[error("curriculum `{curriculum}` lists course `{course}` twice")]
    RepeatedCurriculumCourse { curriculum: String, course: String },
}

/// The four soft-constraint weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightVector {
    pub capacity: u32,
    pub spread: u32,
    pub compactness: u32,
    pub stability: u32,
}

impl WeightVector {
    /// Competition weights.
    pub const ITC2007: WeightVector = WeightVector::new(1, 5, 2, 1);
    /// Weights of the original four Udine instances, without room stability.
    pub const UDINE2003: WeightVector = WeightVector::new(1, 5, 2, 0);

    pub const fn new(capacity: u32, spread: u32, compactness: u32, stability: u32) -> Self {
        WeightVector {
            capacity,
            spread,
            compactness,
            stability,
        }
    }

    pub fn as_array(&self) -> [u32; 4] {
        [self.capacity, self.spread, self.compactness, self.stability]
    }
}

impl Default for WeightVector {
    fn default() -> Self {
        WeightVector::ITC2007
    }
}

impl std::str::FromStr for WeightVector {
    type Err = String;

    /// Parses `capacity,spread,compactness,stability`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(format!("expected four comma-separated weights, got `{s}`"));
        }
        let mut w = [0u32; 4];
        for (slot, part) in w.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| format!("weight `{part}` is not a non-negative integer"))?;
        }
        Ok(WeightVector::new(w[0], w[1], w[2], w[3]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Course {
    pub id: String,
    pub teacher: String,
    /// Number of weekly events.
    pub events: u32,
    pub min_days: u32,
    pub students: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Room {
    pub id: String,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Curriculum {
    pub id: String,
    /// Indices into [`Instance::courses`], in declaration order.
    pub courses: Vec<usize>,
}

/// A validated timetabling instance.
///
/// Periods are numbered globally `0..days * periods_per_day`; period `p`
/// lies on day `p / periods_per_day`. Instances are immutable once built and
/// can be shared freely between solver threads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    pub courses: Vec<Course>,
    pub rooms: Vec<Room>,
    pub curricula: Vec<Curriculum>,
    pub days: u32,
    pub periods_per_day: u32,
    /// Forbidden `(course index, period)` pairs.
    pub unavailability: BTreeSet<(usize, usize)>,
    pub weights: WeightVector,
    teachers: Vec<String>,
    course_teacher: Vec<usize>,
}

impl Instance {
    /// Builds and validates an instance. Curricula refer to courses by index.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        courses: Vec<Course>,
        rooms: Vec<Room>,
        curricula: Vec<Curriculum>,
        days: u32,
        periods_per_day: u32,
        unavailability: BTreeSet<(usize, usize)>,
        weights: WeightVector,
    ) -> Result<Instance, Violation> {
        let mut inst = Instance {
            name: name.into(),
            courses,
            rooms,
            curricula,
            days,
            periods_per_day,
            unavailability,
            weights,
            teachers: Vec::new(),
            course_teacher: Vec::new(),
        };
        inst.index_teachers();
        inst.validate()?;
        Ok(inst)
    }

    fn index_teachers(&mut self) {
        let mut by_name: HashMap<&str, usize> = HashMap::new();
        let mut teachers = Vec::new();
        let mut course_teacher = Vec::with_capacity(self.courses.len());
        for c in &self.courses {
            let next = teachers.len();
            let t = *by_name.entry(c.teacher.as_str()).or_insert_with(|| {
                teachers.push(c.teacher.clone());
                next
            });
            course_teacher.push(t);
        }
        self.teachers = teachers;
        self.course_teacher = course_teacher;
    }

    /// Checks every instance invariant.
    pub fn validate(&self) -> Result<(), Violation> {
        unique_ids("course", self.courses.iter().map(|c| c.id.as_str()))?;
        unique_ids("room", self.rooms.iter().map(|r| r.id.as_str()))?;
        unique_ids("curriculum", self.curricula.iter().map(|u| u.id.as_str()))?;
        let periods = self.num_periods();
        for &(c, p) in &self.unavailability {
            let course = self
                .courses
                .get(c)
                .ok_or_else(|| Violation::UnknownCourse(format!("#{c}")))?;
            if p >= periods {
                return Err(Violation::PeriodOutOfRange {
                    course: course.id.clone(),
                    period: p,
                    periods,
                });
            }
        }
        for (ci, c) in self.courses.iter().enumerate() {
            if c.events == 0 {
                return Err(Violation::NoEvents(c.id.clone()));
            }
            if c.min_days == 0 || c.min_days > self.days {
                return Err(Violation::MinDaysOutOfRange {
                    course: c.id.clone(),
                    min_days: c.min_days,
                    days: self.days,
                });
            }
            let available = self.available_periods(ci).count();
            if c.events as usize > available {
                return Err(Violation::TooManyEvents {
                    course: c.id.clone(),
                    events: c.events,
                    available,
                });
            }
        }
        for u in &self.curricula {
            if u.courses.is_empty() {
                return Err(Violation::EmptyCurriculum(u.id.clone()));
            }
            let mut seen = HashSet::new();
            for &c in &u.courses {
                let course = self
                    .courses
                    .get(c)
                    .ok_or_else(|| Violation::UnknownCourse(format!("#{c}")))?;
                if !seen.insert(c) {
                    return Err(Violation::RepeatedCurriculumCourse {
                        curriculum: u.id.clone(),
                        course: course.id.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn num_periods(&self) -> usize {
        (self.days * self.periods_per_day) as usize
    }

    pub fn num_days(&self) -> usize {
        self.days as usize
    }

    pub fn day_of(&self, period: usize) -> usize {
        period / self.periods_per_day as usize
    }

    /// Periods of day `d`, in order.
    pub fn day_periods(&self, day: usize) -> std::ops::Range<usize> {
        let n = self.periods_per_day as usize;
        day * n..(day + 1) * n
    }

    pub fn teachers(&self) -> &[String] {
        &self.teachers
    }

    /// Teacher index of a course.
    pub fn teacher_of(&self, course: usize) -> usize {
        self.course_teacher[course]
    }

    /// Courses taught by teacher `t`, in course order.
    pub fn teacher_courses(&self, teacher: usize) -> Vec<usize> {
        (0..self.courses.len())
            .filter(|&c| self.course_teacher[c] == teacher)
            .collect()
    }

    pub fn is_available(&self, course: usize, period: usize) -> bool {
        !self.unavailability.contains(&(course, period))
    }

    pub fn available_periods(&self, course: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_periods()).filter(move |&p| self.is_available(course, p))
    }

    pub fn course_index(&self, id: &str) -> Option<usize> {
        self.courses.iter().position(|c| c.id == id)
    }

    pub fn room_index(&self, id: &str) -> Option<usize> {
        self.rooms.iter().position(|r| r.id == id)
    }

    pub fn total_events(&self) -> u32 {
        self.courses.iter().map(|c| c.events).sum()
    }

    /// Curricula containing course `c`.
    pub fn curricula_of(&self, course: usize) -> Vec<usize> {
        self.curricula
            .iter()
            .enumerate()
            .filter(|(_, u)| u.courses.contains(&course))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn with_weights(mut self, weights: WeightVector) -> Instance {
        self.weights = weights;
        self
    }

    pub fn build_conflict_graph(&self) -> ConflictGraph {
        ConflictGraph::build(self)
    }
}

fn unique_ids<'a>(kind: &'static str, ids: impl Iterator<Item = &'a str>) -> Result<(), Violation> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Violation::DuplicateId {
                kind,
                id: id.to_string(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn course(id: &str, teacher: &str, events: u32) -> Course {
        Course {
            id: id.into(),
            teacher: teacher.into(),
            events,
            min_days: 1,
            students: 10,
        }
    }

    #[test]
    fn minimal_instance_is_valid() {
        let inst = Instance::new(
            "one",
            vec![course("c", "t", 1)],
            vec![Room {
                id: "r".into(),
                capacity: 10,
            }],
            vec![],
            1,
            1,
            BTreeSet::new(),
            WeightVector::default(),
        )
        .unwrap();
        assert_eq!(inst.num_periods(), 1);
        assert_eq!(inst.teachers(), &["t".to_string()]);
    }

    #[test]
    fn rejects_course_with_too_many_events() {
        let mut forbidden = BTreeSet::new();
        forbidden.insert((0, 0));
        let err = Instance::new(
            "x",
            vec![course("c", "t", 2)],
            vec![],
            vec![],
            1,
            2,
            forbidden,
            WeightVector::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Violation::TooManyEvents { available: 1, .. }));
    }

    #[test]
    fn rejects_duplicate_course_ids() {
        let err = Instance::new(
            "x",
            vec![course("c", "t", 1), course("c", "u", 1)],
            vec![],
            vec![],
            1,
            2,
            BTreeSet::new(),
            WeightVector::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Violation::DuplicateId { kind: "course", .. }));
    }

    #[test]
    fn weights_parse() {
        let w: WeightVector = "1,5,2,0".parse().unwrap();
        assert_eq!(w, WeightVector::UDINE2003);
        assert!("1,2".parse::<WeightVector>().is_err());
    }

    #[test]
    fn teachers_are_indexed_in_first_seen_order() {
        let inst = Instance::new(
            "x",
            vec![
                course("a", "t2", 1),
                course("b", "t1", 1),
                course("c", "t2", 1),
            ],
            vec![],
            vec![],
            1,
            3,
            BTreeSet::new(),
            WeightVector::default(),
        )
        .unwrap();
        assert_eq!(inst.teachers(), &["t2".to_string(), "t1".to_string()]);
        assert_eq!(inst.teacher_courses(0), vec![0, 2]);
        assert_eq!(inst.day_of(2), 0);
    }
}
