//! Solution files: one line per event, `courseId roomId day periodOfDay`.

use std::fmt::Write as _;

use thiserror::Error;

use super::Solution;
use crate::instance::Instance;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolutionFileError {
    #[error("line {line}: expected `course room day period`, found {found} fields")]
    Shape { line: usize, found: usize },
    #[error("line {line}: unknown course `{id}`")]
    UnknownCourse { line: usize, id: String },
    #[error("line {line}: unknown room `{id}`")]
    UnknownRoom { line: usize, id: String },
    #[error("line {line}: `{value}` is not a valid {what}")]
    BadNumber {
        line: usize,
        what: &'static str,
        value: String,
    },
    #[error("line {line}: day {day} period {period} is outside the week")]
    OutOfRange { line: usize, day: u32, period: u32 },
}

pub fn parse_solution(inst: &Instance, text: &str) -> Result<Solution, SolutionFileError> {
    let mut sol = Solution::empty(inst.courses.len());
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 4 {
            return Err(SolutionFileError::Shape {
                line,
                found: fields.len(),
            });
        }
        let course =
            inst.course_index(fields[0])
                .ok_or_else(|| SolutionFileError::UnknownCourse {
                    line,
                    id: fields[0].to_string(),
                })?;
        let room = inst
            .room_index(fields[1])
            .ok_or_else(|| SolutionFileError::UnknownRoom {
                line,
                id: fields[1].to_string(),
            })?;
        let number = |what: &'static str, s: &str| {
            s.parse::<u32>().map_err(|_| SolutionFileError::BadNumber {
                line,
                what,
                value: s.to_string(),
            })
        };
        let day = number("day", fields[2])?;
        let period = number("period", fields[3])?;
        if day >= inst.days || period >= inst.periods_per_day {
            return Err(SolutionFileError::OutOfRange { line, day, period });
        }
        sol.place(course, (day * inst.periods_per_day + period) as usize, room);
    }
    Ok(sol)
}

/// Writes events grouped by course, in period order.
pub fn write_solution(inst: &Instance, sol: &Solution) -> String {
    let ppd = inst.periods_per_day as usize;
    let mut out = String::new();
    for (c, placements) in sol.assignments.iter().enumerate() {
        let mut sorted = placements.clone();
        sorted.sort_unstable();
        for pl in sorted {
            let _ = writeln!(
                out,
                "{} {} {} {}",
                inst.courses[c].id,
                inst.rooms[pl.room].id,
                pl.period / ppd,
                pl.period % ppd
            );
        }
    }
    out
}
