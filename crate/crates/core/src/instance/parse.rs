//! Reader and writer for the ITC-2007 curriculum-based `.ctt` format.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use super::{Course, Curriculum, Instance, InstanceError, Room, Violation, WeightVector};

/// Parses a `.ctt` instance with the default competition weights.
pub fn parse_ctt(text: &str) -> Result<Instance, InstanceError> {
    parse_ctt_with(text, WeightVector::default())
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line as (1-based line number, tokens).
    fn next_tokens(&mut self) -> Result<(usize, Vec<&'a str>), InstanceError> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if !tokens.is_empty() {
                return Ok((i + 1, tokens));
            }
        }
        Err(syntax(self.last + 1, "unexpected end of file"))
    }
}

fn syntax(line: usize, message: impl Into<String>) -> InstanceError {
    InstanceError::Syntax {
        line,
        message: message.into(),
    }
}

fn invalid(line: usize, violation: Violation) -> InstanceError {
    InstanceError::Invalid {
        line: Some(line),
        violation,
    }
}

fn number<T: std::str::FromStr>(line: usize, token: &str, what: &str) -> Result<T, InstanceError> {
    token
        .parse()
        .map_err(|_| syntax(line, format!("expected {what}, found `{token}`")))
}

fn header<'a>(lines: &mut Lines<'a>, key: &str) -> Result<(usize, &'a str), InstanceError> {
    let (n, tokens) = lines.next_tokens()?;
    if tokens[0] != key {
        return Err(syntax(
            n,
            format!("expected `{key}`, found `{}`", tokens[0]),
        ));
    }
    if tokens.len() != 2 {
        return Err(syntax(n, format!("`{key}` takes exactly one value")));
    }
    Ok((n, tokens[1]))
}

fn section(lines: &mut Lines<'_>, key: &str) -> Result<(), InstanceError> {
    let (n, tokens) = lines.next_tokens()?;
    if tokens != [key] {
        return Err(syntax(
            n,
            format!("expected section `{key}`, found `{}`", tokens.join(" ")),
        ));
    }
    Ok(())
}

/// Parses a `.ctt` instance using the given soft-constraint weights.
pub fn parse_ctt_with(text: &str, weights: WeightVector) -> Result<Instance, InstanceError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };

    let (_, name) = header(&mut lines, "Name:")?;
    let (n, v) = header(&mut lines, "Courses:")?;
    let n_courses: usize = number(n, v, "course count")?;
    let (n, v) = header(&mut lines, "Rooms:")?;
    let n_rooms: usize = number(n, v, "room count")?;
    let (n, v) = header(&mut lines, "Days:")?;
    let days: u32 = number(n, v, "day count")?;
    let (n, v) = header(&mut lines, "Periods_per_day:")?;
    let periods_per_day: u32 = number(n, v, "periods per day")?;
    let (n, v) = header(&mut lines, "Curricula:")?;
    let n_curricula: usize = number(n, v, "curriculum count")?;
    let (n, v) = header(&mut lines, "Constraints:")?;
    let n_constraints: usize = number(n, v, "constraint count")?;

    section(&mut lines, "COURSES:")?;
    let mut courses = Vec::with_capacity(n_courses);
    let mut course_ids: HashMap<String, usize> = HashMap::new();
    for _ in 0..n_courses {
        let (n, t) = lines.next_tokens()?;
        if t.len() != 5 {
            return Err(syntax(
                n,
                "course line must be `id teacher lectures min_days students`",
            ));
        }
        let course = Course {
            id: t[0].to_string(),
            teacher: t[1].to_string(),
            events: number(n, t[2], "lecture count")?,
            min_days: number(n, t[3], "minimum working days")?,
            students: number(n, t[4], "student count")?,
        };
        if course_ids
            .insert(course.id.clone(), courses.len())
            .is_some()
        {
            return Err(invalid(
                n,
                Violation::DuplicateId {
                    kind: "course",
                    id: course.id,
                },
            ));
        }
        courses.push(course);
    }

    section(&mut lines, "ROOMS:")?;
    let mut rooms = Vec::with_capacity(n_rooms);
    for _ in 0..n_rooms {
        let (n, t) = lines.next_tokens()?;
        if t.len() != 2 {
            return Err(syntax(n, "room line must be `id capacity`"));
        }
        let room = Room {
            id: t[0].to_string(),
            capacity: number(n, t[1], "room capacity")?,
        };
        if rooms.iter().any(|r: &Room| r.id == room.id) {
            return Err(invalid(
                n,
                Violation::DuplicateId {
                    kind: "room",
                    id: room.id,
                },
            ));
        }
        rooms.push(room);
    }

    section(&mut lines, "CURRICULA:")?;
    let mut curricula = Vec::with_capacity(n_curricula);
    for _ in 0..n_curricula {
        let (n, t) = lines.next_tokens()?;
        if t.len() < 2 {
            return Err(syntax(n, "curriculum line must be `id count course...`"));
        }
        let count: usize = number(n, t[1], "curriculum size")?;
        if t.len() != count + 2 {
            return Err(syntax(
                n,
                format!(
                    "curriculum `{}` declares {count} courses but lists {}",
                    t[0],
                    t.len() - 2
                ),
            ));
        }
        let mut members = Vec::with_capacity(count);
        for id in &t[2..] {
            let c = *course_ids
                .get(*id)
                .ok_or_else(|| invalid(n, Violation::UnknownCourse(id.to_string())))?;
            members.push(c);
        }
        if curricula.iter().any(|u: &Curriculum| u.id == t[0]) {
            return Err(invalid(
                n,
                Violation::DuplicateId {
                    kind: "curriculum",
                    id: t[0].to_string(),
                },
            ));
        }
        curricula.push(Curriculum {
            id: t[0].to_string(),
            courses: members,
        });
    }

    section(&mut lines, "UNAVAILABILITY_CONSTRAINTS:")?;
    let mut unavailability = BTreeSet::new();
    for _ in 0..n_constraints {
        let (n, t) = lines.next_tokens()?;
        if t.len() != 3 {
            return Err(syntax(n, "unavailability line must be `course day period`"));
        }
        let c = *course_ids
            .get(t[0])
            .ok_or_else(|| invalid(n, Violation::UnknownCourse(t[0].to_string())))?;
        let day: u32 = number(n, t[1], "day")?;
        let slot: u32 = number(n, t[2], "period")?;
        if day >= days || slot >= periods_per_day {
            return Err(invalid(
                n,
                Violation::PeriodOutOfRange {
                    course: t[0].to_string(),
                    period: (day * periods_per_day + slot) as usize,
                    periods: (days * periods_per_day) as usize,
                },
            ));
        }
        unavailability.insert((c, (day * periods_per_day + slot) as usize));
    }

    let (n, t) = lines.next_tokens()?;
    if t != ["END."] {
        return Err(syntax(
            n,
            format!("expected `END.`, found `{}`", t.join(" ")),
        ));
    }

    Instance::new(
        name,
        courses,
        rooms,
        curricula,
        days,
        periods_per_day,
        unavailability,
        weights,
    )
    .map_err(|violation| InstanceError::Invalid {
        line: None,
        violation,
    })
}

/// Canonical `.ctt` serialisation. Unavailabilities are written in
/// `(course, period)` order, so parsing the output reproduces the instance.
pub fn write_ctt(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Name: {}", inst.name);
    let _ = writeln!(out, "Courses: {}", inst.courses.len());
    let _ = writeln!(out, "Rooms: {}", inst.rooms.len());
    let _ = writeln!(out, "Days: {}", inst.days);
    let _ = writeln!(out, "Periods_per_day: {}", inst.periods_per_day);
    let _ = writeln!(out, "Curricula: {}", inst.curricula.len());
    let _ = writeln!(out, "Constraints: {}", inst.unavailability.len());
    out.push_str("\nCOURSES:\n");
    for c in &inst.courses {
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            c.id, c.teacher, c.events, c.min_days, c.students
        );
    }
    out.push_str("\nROOMS:\n");
    for r in &inst.rooms {
        let _ = writeln!(out, "{}\t{}", r.id, r.capacity);
    }
    out.push_str("\nCURRICULA:\n");
    for u in &inst.curricula {
        let _ = write!(out, "{}  {} ", u.id, u.courses.len());
        let ids: Vec<&str> = u
            .courses
            .iter()
            .map(|&c| inst.courses[c].id.as_str())
            .collect();
        let _ = writeln!(out, "{}", ids.join(" "));
    }
    out.push_str("\nUNAVAILABILITY_CONSTRAINTS:\n");
    let ppd = inst.periods_per_day as usize;
    for &(c, p) in &inst.unavailability {
        let _ = writeln!(out, "{} {} {}", inst.courses[c].id, p / ppd, p % ppd);
    }
    out.push_str("\nEND.\n");
    out
}

#[cfg(test)]
pub(crate) mod tests_support {
    pub(crate) const TOY: &str = crate::testing::TOY_CTT;
}

#[cfg(test)]
mod tests {
    use super::tests_support::TOY;
    use super::*;

    #[test]
    fn parses_toy_instance() {
        let inst = parse_ctt(TOY).unwrap();
        assert_eq!(inst.name, "Toy");
        assert_eq!(inst.courses.len(), 4);
        assert_eq!(inst.rooms.len(), 3);
        assert_eq!(inst.num_periods(), 20);
        assert_eq!(inst.curricula[1].courses, vec![2, 3]);
        assert!(!inst.is_available(2, 8));
        assert!(!inst.is_available(1, 19));
        assert_eq!(inst.total_events(), 16);
        assert_eq!(inst.weights, WeightVector::new(1, 5, 2, 1));
    }

    #[test]
    fn round_trips() {
        let inst = parse_ctt(TOY).unwrap();
        let again = parse_ctt(&write_ctt(&inst)).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn minimal_instance() {
        let text = "Name: m\nCourses: 1\nRooms: 1\nDays: 1\nPeriods_per_day: 1\nCurricula: 0\nConstraints: 0\n\nCOURSES:\nc t 1 1 5\n\nROOMS:\nr 10\n\nCURRICULA:\n\nUNAVAILABILITY_CONSTRAINTS:\n\nEND.\n";
        let inst = parse_ctt(text).unwrap();
        assert_eq!(inst.courses.len(), 1);
        assert_eq!(inst.num_periods(), 1);
    }

    #[test]
    fn unknown_course_in_unavailability_is_semantic() {
        let text = TOY.replace("ArcTec 4 3", "Nope 4 3");
        match parse_ctt(&text).unwrap_err() {
            InstanceError::Invalid {
                line: Some(32),
                violation: Violation::UnknownCourse(id),
            } => assert_eq!(id, "Nope"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn period_out_of_range() {
        let text = TOY.replace("ArcTec 4 3", "ArcTec 4 9");
        let err = parse_ctt(&text).unwrap_err();
        assert!(matches!(
            err,
            InstanceError::Invalid {
                violation: Violation::PeriodOutOfRange { .. },
                ..
            }
        ));
    }

    #[test]
    fn truncated_file_reports_line() {
        let cut: String = TOY.lines().take(14).collect::<Vec<_>>().join("\n");
        let err = parse_ctt(&cut).unwrap_err();
        assert!(err.is_syntax());
        assert_eq!(
            err,
            InstanceError::Syntax {
                line: 14,
                message: "unexpected end of file".into()
            }
        );
    }

    #[test]
    fn duplicate_room() {
        let text = TOY.replace("C\t40", "A\t40");
        assert!(matches!(
            parse_ctt(&text).unwrap_err(),
            InstanceError::Invalid {
                violation: Violation::DuplicateId { kind: "room", .. },
                ..
            }
        ));
    }

    #[test]
    fn bad_number_is_syntax() {
        let text = TOY.replace("Geotec Scarlatti 5 4 18", "Geotec Scarlatti five 4 18");
        let err = parse_ctt(&text).unwrap_err();
        assert!(
            matches!(err, InstanceError::Syntax { line: 13, .. }),
            "{err:?}"
        );
    }
}
