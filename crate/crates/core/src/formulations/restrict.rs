use serde::{Deserialize, Serialize};

use crate::instance::Instance;
use crate::milp::{MilpModel, Origin, Sense, VarTag};

use super::{occupancy_index, DayAssignment, FormulationError, PeriodAssignment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DayFixedVariant {
    /// Only the per-day event counts are fixed.
    Plain,
    /// Room stability is dropped together with its variables and rows.
    Decomp,
    /// Every course must keep to a single room.
    ZeroStability,
}

/// Fixes the periods of every course to those of `basis`.
pub fn restrict_period_fixed(
    inst: &Instance,
    monolithic: &MilpModel,
    basis: &PeriodAssignment,
) -> Result<MilpModel, FormulationError> {
    basis.validate(inst)?;
    let index = occupancy_index(monolithic);
    let mut model = monolithic.clone();
    model.name = "PeriodFixed".into();
    for c in 0..inst.courses.len() {
        for p in 0..inst.num_periods() {
            let vars = index
                .get(&(p, c))
                .ok_or(FormulationError::MissingVariables("Taught"))?;
            let rhs = if basis.is_set(p, c) { 1.0 } else { 0.0 };
            model.add_constraint(
                format!("pfix_{c}_{p}"),
                vars.iter().map(|&v| (1.0, v)),
                Sense::Eq,
                rhs,
                Origin::PeriodTransfer,
            )?;
        }
    }
    Ok(model)
}

/// Fixes the number of events of every course on every day.
pub fn restrict_day_fixed(
    inst: &Instance,
    monolithic: &MilpModel,
    basis: &DayAssignment,
    variant: DayFixedVariant,
) -> Result<MilpModel, FormulationError> {
    basis.validate(inst)?;
    let mut model = match variant {
        DayFixedVariant::Decomp => {
            let mut m = monolithic.retain(
                |v| {
                    !matches!(
                        v.tag,
                        VarTag::CourseRooms { .. } | VarTag::MultiCourseRooms { .. }
                    )
                },
                |c| {
                    !matches!(
                        c.origin,
                        Origin::RoomUpper | Origin::RoomLower | Origin::ImpliedRooms
                    )
                },
            );
            // the constant only carries the stability offset
            m.set_objective_constant(0.0);
            m.name = "DayDecomp".into();
            m
        }
        DayFixedVariant::Plain => {
            let mut m = monolithic.clone();
            m.name = "DayFixed".into();
            m
        }
        DayFixedVariant::ZeroStability => {
            let mut m = monolithic.clone();
            m.name = "DayFixedZeroStability".into();
            m
        }
    };
    let index = occupancy_index(&model);
    for (c, days) in basis.days.iter().enumerate() {
        for (d, &n) in days.iter().enumerate() {
            let mut terms = Vec::new();
            for p in inst.day_periods(d) {
                let vars = index
                    .get(&(p, c))
                    .ok_or(FormulationError::MissingVariables("Taught"))?;
                terms.extend(vars.iter().map(|&v| (1.0, v)));
            }
            model.add_constraint(
                format!("dfix_{c}_{d}"),
                terms,
                Sense::Eq,
                n as f64,
                Origin::DayTransfer,
            )?;
        }
    }
    if variant == DayFixedVariant::ZeroStability {
        let mut per_course: Vec<Vec<_>> = vec![Vec::new(); inst.courses.len()];
        for (j, v) in model.variables().iter().enumerate() {
            if let VarTag::CourseRooms { course, .. } | VarTag::MultiCourseRooms { course, .. } =
                v.tag
            {
                per_course[course].push((1.0, model.id_of(j)));
            }
        }
        for (c, terms) in per_course.into_iter().enumerate() {
            if inst.courses[c].events == 0 {
                continue;
            }
            if terms.is_empty() {
                return Err(FormulationError::MissingVariables("CourseRooms"));
            }
            model.add_constraint(
                format!("oneroom_{c}"),
                terms,
                Sense::Eq,
                1.0,
                Origin::SingleRoom,
            )?;
        }
    }
    Ok(model)
}
