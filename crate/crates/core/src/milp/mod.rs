//! Abstract mixed-integer linear models with semantic variable tags and
//! constraint origins, MPS interchange and solution import.

mod mps;

pub use mps::{export_mps, parse_mps, MpsError};

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Feasibility and integrality tolerance.
pub const TOLERANCE: f64 = 1e-6;

static NEXT_MODEL_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_MODEL_ID.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

/// The domain symbol and indices a variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarTag {
    /// Course `course` taught in room `room` at `period`.
    Taught {
        period: usize,
        room: usize,
        course: usize,
    },
    /// Course taught at `period`, room left open.
    SetTimes { period: usize, course: usize },
    /// Course has at least one event on `day`.
    CourseSchedule { day: usize, course: usize },
    /// Days the course falls short of its minimum.
    MinDaysViolation { course: usize },
    /// Isolation check `slot` of a curriculum's day.
    Singleton {
        curriculum: usize,
        day: usize,
        slot: usize,
    },
    /// Course uses room `room`.
    CourseRooms { room: usize, course: usize },
    /// Course taught in multi-room `multiroom` at `period`.
    MultiTaught {
        period: usize,
        multiroom: usize,
        course: usize,
    },
    /// Course uses multi-room `multiroom`.
    MultiCourseRooms { multiroom: usize, course: usize },
    /// Variable without domain meaning, e.g. read from an MPS file.
    Generic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub tag: VarTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

/// The family a constraint belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Origin {
    EventCount,
    RoomOccupancy,
    CoursePeriod,
    TeacherPeriod,
    CurriculumPeriod,
    Unavailable,
    DayUpper,
    DayLower,
    MinDays,
    SingletonCheck,
    RoomUpper,
    RoomLower,
    /// Events per period bounded by the room count.
    PeriodRoomBound,
    /// Events of large courses per period bounded by the large-room count.
    StratifiedRoomBound,
    PeriodTransfer,
    DayTransfer,
    SingleRoom,
    CliqueCut,
    ImpliedDays,
    ImpliedRooms,
    PatternCut,
    Imported,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    /// `(coefficient, variable index)`, one entry per variable.
    pub terms: Vec<(f64, usize)>,
    pub sense: Sense,
    pub rhs: f64,
    pub origin: Origin,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(a, j)| a * values[j]).sum()
    }

    pub fn is_satisfied(&self, values: &[f64], tol: f64) -> bool {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => lhs <= self.rhs + tol,
            Sense::Ge => lhs >= self.rhs - tol,
            Sense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

/// Handle to a variable of a specific model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarId {
    model: u64,
    index: usize,
}

impl VarId {
    pub fn index(self) -> usize {
        self.index
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConstraintId(pub usize);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilpError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate constraint name `{0}`")]
    DuplicateConstraint(String),
    #[error("variable handle belongs to another model")]
    ForeignVariable,
    #[error("variable `{name}` has bounds [{lower}, {upper}]")]
    BadBounds {
        name: String,
        lower: f64,
        upper: f64,
    },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("line {line}: {message}")]
    SolutionSyntax { line: usize, message: String },
}

/// A minimisation model. Variables and constraints keep insertion order.
#[derive(Debug, Clone)]
pub struct MilpModel {
    id: u64,
    pub name: String,
    pub instance_name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<f64>,
    objective_constant: f64,
    var_names: HashMap<String, usize>,
    con_names: HashMap<String, usize>,
    tags: HashMap<VarTag, usize>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>, instance_name: impl Into<String>) -> MilpModel {
        MilpModel {
            id: fresh_id(),
            name: name.into(),
            instance_name: instance_name.into(),
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            objective_constant: 0.0,
            var_names: HashMap::new(),
            con_names: HashMap::new(),
            tags: HashMap::new(),
        }
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
        tag: VarTag,
    ) -> Result<VarId, MilpError> {
        let name = name.into();
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            _ => (lower, upper),
        };
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(MilpError::BadBounds { name, lower, upper });
        }
        if self.var_names.contains_key(&name) {
            return Err(MilpError::DuplicateVariable(name));
        }
        let index = self.variables.len();
        self.var_names.insert(name.clone(), index);
        if tag != VarTag::Generic {
            self.tags.insert(tag, index);
        }
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
            tag,
        });
        self.objective.push(0.0);
        Ok(VarId {
            model: self.id,
            index,
        })
    }

    pub fn add_binary(&mut self, name: impl Into<String>, tag: VarTag) -> Result<VarId, MilpError> {
        self.add_variable(name, VarKind::Binary, 0.0, 1.0, tag)
    }

    fn check(&self, v: VarId) -> Result<usize, MilpError> {
        if v.model != self.id || v.index >= self.variables.len() {
            return Err(MilpError::ForeignVariable);
        }
        Ok(v.index)
    }

    /// Adds a constraint; repeated variables are merged and zero
    /// coefficients dropped.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (f64, VarId)>,
        sense: Sense,
        rhs: f64,
        origin: Origin,
    ) -> Result<ConstraintId, MilpError> {
        let name = name.into();
        if self.con_names.contains_key(&name) {
            return Err(MilpError::DuplicateConstraint(name));
        }
        let mut merged: Vec<(f64, usize)> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for (a, v) in terms {
            let j = self.check(v)?;
            match slot.get(&j) {
                Some(&k) => merged[k].0 += a,
                None => {
                    slot.insert(j, merged.len());
                    merged.push((a, j));
                }
            }
        }
        merged.retain(|&(a, _)| a != 0.0);
        let id = self.constraints.len();
        self.con_names.insert(name.clone(), id);
        self.constraints.push(Constraint {
            name,
            terms: merged,
            sense,
            rhs,
            origin,
        });
        Ok(ConstraintId(id))
    }

    /// Adds a constraint unless one of the same name exists; returns whether
    /// it was added.
    pub fn add_constraint_dedup(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (f64, VarId)>,
        sense: Sense,
        rhs: f64,
        origin: Origin,
    ) -> Result<bool, MilpError> {
        let name = name.into();
        if self.con_names.contains_key(&name) {
            return Ok(false);
        }
        self.add_constraint(name, terms, sense, rhs, origin)?;
        Ok(true)
    }

    /// Replaces the objective by `constant + Σ terms`.
    pub fn set_objective(
        &mut self,
        terms: impl IntoIterator<Item = (f64, VarId)>,
        constant: f64,
    ) -> Result<(), MilpError> {
        let mut obj = vec![0.0; self.variables.len()];
        for (a, v) in terms {
            obj[self.check(v)?] += a;
        }
        self.objective = obj;
        self.objective_constant = constant;
        Ok(())
    }

    pub fn set_objective_coefficient(&mut self, v: VarId, a: f64) -> Result<(), MilpError> {
        let j = self.check(v)?;
        self.objective[j] = a;
        Ok(())
    }

    pub fn set_objective_constant(&mut self, constant: f64) {
        self.objective_constant = constant;
    }

    pub fn set_bounds(&mut self, v: VarId, lower: f64, upper: f64) -> Result<(), MilpError> {
        let j = self.check(v)?;
        let var = &mut self.variables[j];
        if lower > upper {
            return Err(MilpError::BadBounds {
                name: var.name.clone(),
                lower,
                upper,
            });
        }
        var.lower = lower;
        var.upper = upper;
        Ok(())
    }

    pub fn id_of(&self, index: usize) -> VarId {
        assert!(index < self.variables.len());
        VarId {
            model: self.id,
            index,
        }
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.var_names.get(name).map(|&i| self.id_of(i))
    }

    pub fn var_by_tag(&self, tag: VarTag) -> Option<VarId> {
        self.tags.get(&tag).map(|&i| self.id_of(i))
    }

    pub fn constraint_by_name(&self, name: &str) -> Option<&Constraint> {
        self.con_names.get(name).map(|&i| &self.constraints[i])
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        &self.variables[v.index]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Objective coefficients, one per variable.
    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn objective_constant(&self) -> f64 {
        self.objective_constant
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .zip(values)
                .map(|(a, x)| a * x)
                .sum::<f64>()
    }

    pub fn count_tagged(&self, pred: impl Fn(&VarTag) -> bool) -> usize {
        self.variables.iter().filter(|v| pred(&v.tag)).count()
    }

    /// Distinct constraint origins present in the model.
    pub fn origins(&self) -> BTreeSet<Origin> {
        self.constraints.iter().map(|c| c.origin).collect()
    }

    /// Whether every variable is integral and every objective coefficient
    /// and the constant are integers, so optimal values are integers.
    pub fn has_integral_objective(&self) -> bool {
        let int = |x: f64| x.fract() == 0.0;
        self.variables
            .iter()
            .enumerate()
            .all(|(j, v)| v.kind.is_integral() || self.objective[j] == 0.0)
            && self.objective.iter().all(|&a| int(a))
            && int(self.objective_constant)
    }

    /// First reason `values` is not a feasible point, if any.
    pub fn first_violation(&self, values: &[f64], tol: f64) -> Option<Infeasibility> {
        for (j, v) in self.variables.iter().enumerate() {
            let x = values[j];
            if x < v.lower - tol || x > v.upper + tol {
                return Some(Infeasibility::Bound(v.name.clone()));
            }
            if v.kind.is_integral() && (x - x.round()).abs() > tol {
                return Some(Infeasibility::Integrality(v.name.clone()));
            }
        }
        self.constraints
            .iter()
            .find(|c| !c.is_satisfied(values, tol))
            .map(|c| Infeasibility::Constraint(c.name.clone()))
    }

    pub fn is_feasible(&self, values: &[f64]) -> bool {
        self.first_violation(values, TOLERANCE).is_none()
    }

    /// Keeps the variables and constraints selected by the predicates.
    /// Constraints referring to a dropped variable are dropped too. The
    /// result is a new model: handles into `self` are not valid for it.
    pub fn retain(
        &self,
        keep_var: impl Fn(&Variable) -> bool,
        keep_con: impl Fn(&Constraint) -> bool,
    ) -> MilpModel {
        let mut out = MilpModel::new(self.name.clone(), self.instance_name.clone());
        let mut map = vec![None; self.variables.len()];
        for (j, v) in self.variables.iter().enumerate() {
            if keep_var(v) {
                let id = out
                    .add_variable(v.name.clone(), v.kind, v.lower, v.upper, v.tag)
                    .expect("names unique in source");
                out.objective[id.index] = self.objective[j];
                map[j] = Some(id);
            }
        }
        out.objective_constant = self.objective_constant;
        for c in &self.constraints {
            if !keep_con(c) {
                continue;
            }
            let terms: Option<Vec<(f64, VarId)>> = c
                .terms
                .iter()
                .map(|&(a, j)| map[j].map(|v| (a, v)))
                .collect();
            if let Some(terms) = terms {
                out.add_constraint(c.name.clone(), terms, c.sense, c.rhs, c.origin)
                    .expect("names unique in source");
            }
        }
        out
    }

    /// Maps `values` of this model to a full solution record.
    pub fn solution(&self, values: Vec<f64>, status: SolutionStatus) -> MilpSolution {
        MilpSolution {
            objective: self.objective_value(&values),
            values,
            status,
            violated: None,
        }
    }

    /// Reads `name value` lines and checks the point against the model.
    /// Variables not mentioned are zero.
    pub fn import_solution(&self, text: &str) -> Result<MilpSolution, MilpError> {
        let mut values = vec![0.0; self.variables.len()];
        for (i, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() || fields[0].starts_with('#') {
                continue;
            }
            let bad = |message: String| MilpError::SolutionSyntax {
                line: i + 1,
                message,
            };
            if fields.len() != 2 {
                return Err(bad(format!(
                    "expected `name value`, found {} fields",
                    fields.len()
                )));
            }
            let j = *self
                .var_names
                .get(fields[0])
                .ok_or_else(|| MilpError::UnknownVariable(fields[0].to_string()))?;
            values[j] = fields[1]
                .parse()
                .map_err(|_| bad(format!("`{}` is not a number", fields[1])))?;
        }
        let violated = self.first_violation(&values, TOLERANCE);
        Ok(MilpSolution {
            objective: self.objective_value(&values),
            values,
            status: if violated.is_none() {
                SolutionStatus::Feasible
            } else {
                SolutionStatus::Infeasible
            },
            violated: violated.map(|v| v.to_string()),
        })
    }

    /// Writes nonzero values as `name value` lines.
    pub fn write_solution(&self, values: &[f64]) -> String {
        let mut out = String::new();
        for (v, &x) in self.variables.iter().zip(values) {
            if x != 0.0 {
                out.push_str(&format!("{} {}\n", v.name, x));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Infeasibility {
    Bound(String),
    Integrality(String),
    Constraint(String),
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasibility::Bound(n) => write!(f, "bounds of {n}"),
            Infeasibility::Integrality(n) => write!(f, "integrality of {n}"),
            Infeasibility::Constraint(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolutionStatus {
    Optimal,
    Feasible,
    Infeasible,
    Unbounded,
    LimitReached,
}

/// Values for every model variable, in model order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    pub status: SolutionStatus,
    /// The first violated constraint or bound when infeasible.
    pub violated: Option<String>,
}

impl MilpSolution {
    pub fn value(&self, v: VarId) -> f64 {
        self.values[v.index]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> (MilpModel, VarId, VarId) {
        let mut m = MilpModel::new("m", "i");
        let x = m.add_binary("x", VarTag::Generic).unwrap();
        let y = m.add_binary("y", VarTag::Generic).unwrap();
        m.add_constraint(
            "cover",
            [(1.0, x), (1.0, y)],
            Sense::Ge,
            1.0,
            Origin::Imported,
        )
        .unwrap();
        m.set_objective([(2.0, x), (3.0, y)], 0.0).unwrap();
        (m, x, y)
    }

    #[test]
    fn builder_basics() {
        let mut m = MilpModel::new("m", "i");
        let x = m.add_binary("x", VarTag::Generic).unwrap();
        m.add_constraint("c", [(1.0, x)], Sense::Le, 1.0, Origin::Imported)
            .unwrap();
        assert_eq!((m.num_vars(), m.num_constraints()), (1, 1));
        assert_eq!(
            m.add_binary("x", VarTag::Generic),
            Err(MilpError::DuplicateVariable("x".into()))
        );
        assert!(matches!(
            m.add_constraint("c", [(1.0, x)], Sense::Le, 1.0, Origin::Imported),
            Err(MilpError::DuplicateConstraint(_))
        ));
        let other = MilpModel::new("o", "i");
        let mut other = other;
        let z = other.add_binary("z", VarTag::Generic).unwrap();
        assert_eq!(
            m.add_constraint("d", [(1.0, z)], Sense::Le, 1.0, Origin::Imported),
            Err(MilpError::ForeignVariable)
        );
    }

    #[test]
    fn merges_repeated_terms() {
        let mut m = MilpModel::new("m", "i");
        let x = m.add_binary("x", VarTag::Generic).unwrap();
        let y = m.add_binary("y", VarTag::Generic).unwrap();
        m.add_constraint(
            "c",
            [(1.0, x), (2.0, y), (1.0, x), (-2.0, y)],
            Sense::Le,
            1.0,
            Origin::Imported,
        )
        .unwrap();
        assert_eq!(m.constraints()[0].terms, vec![(2.0, 0)]);
    }

    #[test]
    fn import_checks_constraints() {
        let (m, _, _) = xy();
        let s = m.import_solution("x 0\ny 0\n").unwrap();
        assert_eq!(s.status, SolutionStatus::Infeasible);
        assert_eq!(s.violated.as_deref(), Some("cover"));
        let s = m.import_solution("x 1\ny 0\n").unwrap();
        assert_eq!(s.status, SolutionStatus::Feasible);
        assert_eq!(s.objective, 2.0);
        assert_eq!(
            m.import_solution("w 1\n"),
            Err(MilpError::UnknownVariable("w".into()))
        );
    }

    #[test]
    fn retain_rebuilds() {
        let (m, _, _) = xy();
        let r = m.retain(|v| v.name == "x", |_| true);
        assert_eq!(r.num_vars(), 1);
        assert_eq!(r.num_constraints(), 0);
        assert!(r.var_by_name("x").is_some());
        assert_eq!(r.objective(), &[2.0]);
    }

    #[test]
    fn integral_objective_detection() {
        let (mut m, x, _) = xy();
        assert!(m.has_integral_objective());
        m.set_objective_coefficient(x, 0.5).unwrap();
        assert!(!m.has_integral_objective());
    }
}
