use crate::instance::{Instance, MultiRoom};
use crate::milp::{MilpError, MilpModel, Origin, Sense, VarId, VarTag};

use super::{add_day_machinery, add_implied_bound_cuts, FormulationError};

/// Constraint families of the full model.
pub const MONOLITHIC_ORIGINS: &[Origin] = &[
    Origin::EventCount,
    Origin::RoomOccupancy,
    Origin::CoursePeriod,
    Origin::TeacherPeriod,
    Origin::CurriculumPeriod,
    Origin::Unavailable,
    Origin::DayUpper,
    Origin::DayLower,
    Origin::MinDays,
    Origin::SingletonCheck,
    Origin::RoomUpper,
    Origin::RoomLower,
];

/// The full model over period-room-course variables.
pub fn build_monolithic(inst: &Instance) -> MilpModel {
    build_monolithic_with(inst, false).expect("monolithic model is well formed")
}

/// The full model, optionally with the implied-bound cuts added.
pub fn build_monolithic_with(
    inst: &Instance,
    implied_cuts: bool,
) -> Result<MilpModel, FormulationError> {
    let rooms: Vec<(u32, u32)> = inst.rooms.iter().map(|r| (1, r.capacity)).collect();
    let mut model = build_roomed(inst, "Monolithic", &rooms, false)?;
    if implied_cuts {
        add_implied_bound_cuts(&mut model, inst)?;
    }
    Ok(model)
}

pub(super) fn build_aggregated(
    inst: &Instance,
    multirooms: &[MultiRoom],
) -> Result<MilpModel, FormulationError> {
    let rooms: Vec<(u32, u32)> = multirooms
        .iter()
        .map(|m| (m.multiplicity, m.capacity))
        .collect();
    Ok(build_roomed(inst, "Surface2", &rooms, true)?)
}

/// Shared builder: `rooms` lists `(multiplicity, capacity)` pairs. With
/// `multi` set, variables carry the multi-room tags.
fn build_roomed(
    inst: &Instance,
    name: &str,
    rooms: &[(u32, u32)],
    multi: bool,
) -> Result<MilpModel, MilpError> {
    let mut model = MilpModel::new(name, inst.name.clone());
    let periods = inst.num_periods();
    let nr = rooms.len();
    let nc = inst.courses.len();
    let w = inst.weights;

    let mut taught: Vec<VarId> = Vec::with_capacity(periods * nr * nc);
    let mut objective: Vec<(f64, VarId)> = Vec::new();
    for p in 0..periods {
        for (r, &(_, cap)) in rooms.iter().enumerate() {
            for (c, course) in inst.courses.iter().enumerate() {
                let (name, tag) = if multi {
                    (
                        format!("TM_{p}_{r}_{c}"),
                        VarTag::MultiTaught {
                            period: p,
                            multiroom: r,
                            course: c,
                        },
                    )
                } else {
                    (
                        format!("T_{p}_{r}_{c}"),
                        VarTag::Taught {
                            period: p,
                            room: r,
                            course: c,
                        },
                    )
                };
                let v = model.add_binary(name, tag)?;
                let over = course.students.saturating_sub(cap);
                if w.capacity > 0 && over > 0 {
                    objective.push(((w.capacity * over) as f64, v));
                }
                taught.push(v);
            }
        }
    }
    let t = |p: usize, r: usize, c: usize| taught[(p * nr + r) * nc + c];
    let at = |p: usize, c: usize| -> Vec<VarId> { (0..nr).map(|r| t(p, r, c)).collect() };
    let ones = |vs: Vec<VarId>| vs.into_iter().map(|v| (1.0, v)).collect::<Vec<_>>();

    for (c, course) in inst.courses.iter().enumerate() {
        let terms = ones((0..periods).flat_map(|p| at(p, c)).collect());
        model.add_constraint(
            format!("events_{c}"),
            terms,
            Sense::Eq,
            course.events as f64,
            Origin::EventCount,
        )?;
    }
    for p in 0..periods {
        for (r, &(mult, _)) in rooms.iter().enumerate() {
            let terms = ones((0..nc).map(|c| t(p, r, c)).collect());
            model.add_constraint(
                format!("room_{p}_{r}"),
                terms,
                Sense::Le,
                mult as f64,
                Origin::RoomOccupancy,
            )?;
        }
        for c in 0..nc {
            model.add_constraint(
                format!("course_{p}_{c}"),
                ones(at(p, c)),
                Sense::Le,
                1.0,
                Origin::CoursePeriod,
            )?;
        }
        for tch in 0..inst.teachers().len() {
            let terms = ones(
                inst.teacher_courses(tch)
                    .into_iter()
                    .flat_map(|c| at(p, c))
                    .collect(),
            );
            model.add_constraint(
                format!("teacher_{p}_{tch}"),
                terms,
                Sense::Le,
                1.0,
                Origin::TeacherPeriod,
            )?;
        }
        for (u, cur) in inst.curricula.iter().enumerate() {
            let terms = ones(cur.courses.iter().flat_map(|&c| at(p, c)).collect());
            model.add_constraint(
                format!("curr_{p}_{u}"),
                terms,
                Sense::Le,
                1.0,
                Origin::CurriculumPeriod,
            )?;
        }
    }
    for &(c, p) in &inst.unavailability {
        model.add_constraint(
            format!("unavail_{c}_{p}"),
            ones(at(p, c)),
            Sense::Eq,
            0.0,
            Origin::Unavailable,
        )?;
    }

    let (mdv, singles) = add_day_machinery(&mut model, inst, &at)?;
    objective.extend(mdv.iter().map(|&v| (w.spread as f64, v)));
    objective.extend(singles.iter().map(|&v| (w.compactness as f64, v)));

    for c in 0..nc {
        for r in 0..nr {
            let (name, tag) = if multi {
                (
                    format!("CRM_{r}_{c}"),
                    VarTag::MultiCourseRooms {
                        multiroom: r,
                        course: c,
                    },
                )
            } else {
                (
                    format!("CR_{r}_{c}"),
                    VarTag::CourseRooms { room: r, course: c },
                )
            };
            let cr = model.add_binary(name, tag)?;
            let mut lower = vec![(-1.0, cr)];
            for p in 0..periods {
                model.add_constraint(
                    format!("roomup_{p}_{r}_{c}"),
                    [(1.0, t(p, r, c)), (-1.0, cr)],
                    Sense::Le,
                    0.0,
                    Origin::RoomUpper,
                )?;
                lower.push((1.0, t(p, r, c)));
            }
            model.add_constraint(
                format!("roomlo_{r}_{c}"),
                lower,
                Sense::Ge,
                0.0,
                Origin::RoomLower,
            )?;
            if w.stability > 0 {
                objective.push((w.stability as f64, cr));
            }
        }
    }
    let constant = -(w.stability as f64) * nc as f64;
    model.set_objective(objective, constant)?;
    Ok(model)
}
