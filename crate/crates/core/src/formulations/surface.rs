use crate::instance::{Instance, MultiRoom};
use crate::milp::{MilpModel, Origin, Sense, VarId, VarTag};

use super::monolithic::build_aggregated;
use super::{add_clique_cuts, add_day_machinery, FormulationError, MONOLITHIC_ORIGINS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurfaceOptions {
    /// Add clique cuts for a greedy clique cover of the conflict graph.
    pub clique_cuts: bool,
    /// Also bound, per period, the courses larger than the median room by
    /// the number of rooms larger than the median. This is not implied by
    /// the full model, so a surface built this way gives no valid lower
    /// bound.
    pub stratified: bool,
}

impl Default for SurfaceOptions {
    fn default() -> Self {
        SurfaceOptions {
            clique_cuts: true,
            stratified: false,
        }
    }
}

/// Constraint families a surface built with `opts` may contain.
pub fn surface_origins(opts: &SurfaceOptions) -> Vec<Origin> {
    let mut v = vec![
        Origin::EventCount,
        Origin::CurriculumPeriod,
        Origin::TeacherPeriod,
        Origin::PeriodRoomBound,
        Origin::Unavailable,
        Origin::DayUpper,
        Origin::DayLower,
        Origin::MinDays,
        Origin::SingletonCheck,
    ];
    if opts.clique_cuts {
        v.push(Origin::CliqueCut);
    }
    if opts.stratified {
        v.push(Origin::StratifiedRoomBound);
    }
    v
}

pub fn surface2_origins() -> Vec<Origin> {
    MONOLITHIC_ORIGINS.to_vec()
}

/// The period-assignment model with only spread and compactness in the
/// objective.
pub fn build_surface(
    inst: &Instance,
    opts: &SurfaceOptions,
) -> Result<MilpModel, FormulationError> {
    let mut model = MilpModel::new("Surface", inst.name.clone());
    let periods = inst.num_periods();
    let nc = inst.courses.len();
    let mut x: Vec<VarId> = Vec::with_capacity(periods * nc);
    for p in 0..periods {
        for c in 0..nc {
            x.push(model.add_binary(
                format!("X_{p}_{c}"),
                VarTag::SetTimes {
                    period: p,
                    course: c,
                },
            )?);
        }
    }
    let at = |p: usize, c: usize| x[p * nc + c];
    let ones = |vs: &mut dyn Iterator<Item = VarId>| vs.map(|v| (1.0, v)).collect::<Vec<_>>();

    for (c, course) in inst.courses.iter().enumerate() {
        let terms = ones(&mut (0..periods).map(|p| at(p, c)));
        model.add_constraint(
            format!("events_{c}"),
            terms,
            Sense::Eq,
            course.events as f64,
            Origin::EventCount,
        )?;
    }
    let median = {
        let mut caps: Vec<u32> = inst.rooms.iter().map(|r| r.capacity).collect();
        caps.sort_unstable();
        caps.get(caps.len().saturating_sub(1) / 2)
            .copied()
            .unwrap_or(0)
    };
    let large_rooms = inst.rooms.iter().filter(|r| r.capacity > median).count();
    let large_courses: Vec<usize> = (0..nc)
        .filter(|&c| inst.courses[c].students > median)
        .collect();
    for p in 0..periods {
        for (u, cur) in inst.curricula.iter().enumerate() {
            let terms = ones(&mut cur.courses.iter().map(|&c| at(p, c)));
            model.add_constraint(
                format!("curr_{p}_{u}"),
                terms,
                Sense::Le,
                1.0,
                Origin::CurriculumPeriod,
            )?;
        }
        for t in 0..inst.teachers().len() {
            let terms = ones(&mut inst.teacher_courses(t).into_iter().map(|c| at(p, c)));
            model.add_constraint(
                format!("teacher_{p}_{t}"),
                terms,
                Sense::Le,
                1.0,
                Origin::TeacherPeriod,
            )?;
        }
        let terms = ones(&mut (0..nc).map(|c| at(p, c)));
        model.add_constraint(
            format!("rooms_{p}"),
            terms,
            Sense::Le,
            inst.rooms.len() as f64,
            Origin::PeriodRoomBound,
        )?;
        if opts.stratified && !large_courses.is_empty() {
            let terms = ones(&mut large_courses.iter().map(|&c| at(p, c)));
            model.add_constraint(
                format!("largerooms_{p}"),
                terms,
                Sense::Le,
                large_rooms as f64,
                Origin::StratifiedRoomBound,
            )?;
        }
    }
    for &(c, p) in &inst.unavailability {
        model.add_constraint(
            format!("unavail_{c}_{p}"),
            [(1.0, at(p, c))],
            Sense::Eq,
            0.0,
            Origin::Unavailable,
        )?;
    }

    let (mdv, singles) = add_day_machinery(&mut model, inst, &|p, c| vec![at(p, c)])?;
    let w = inst.weights;
    let objective = mdv
        .iter()
        .map(|&v| (w.spread as f64, v))
        .chain(singles.iter().map(|&v| (w.compactness as f64, v)));
    model.set_objective(objective, 0.0)?;

    if opts.clique_cuts {
        let cover = inst.build_conflict_graph().greedy_clique_cover();
        add_clique_cuts(&mut model, inst, &cover)?;
    }
    Ok(model)
}

/// The full model over multi-rooms instead of rooms.
pub fn build_surface2(
    inst: &Instance,
    multirooms: &[MultiRoom],
) -> Result<MilpModel, FormulationError> {
    let mut seen = vec![false; inst.rooms.len()];
    for m in multirooms {
        for &r in &m.members {
            if r >= seen.len() || std::mem::replace(&mut seen[r], true) {
                return Err(FormulationError::InvalidBasis(
                    "multi-rooms do not partition the rooms".into(),
                ));
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(FormulationError::InvalidBasis(
            "multi-rooms do not cover every room".into(),
        ));
    }
    build_aggregated(inst, multirooms)
}
