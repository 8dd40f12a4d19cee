//! Exhaustive enumeration, used as an oracle on tiny problems.

use thiserror::Error;

use crate::evaluation::{evaluate, is_feasible, PenaltyVector, Solution};
use crate::formulations::PeriodAssignment;
use crate::instance::Instance;
use crate::milp::{MilpModel, MilpSolution, SolutionStatus, TOLERANCE};

/// Most points or search nodes an enumeration may visit.
pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BruteError {
    #[error("search space exceeds {BRUTE_FORCE_LIMIT} assignments")]
    TooLarge,
    #[error("variable `{0}` is continuous or unbounded")]
    NotEnumerable(String),
}

/// Enumerates every integral point of a pure integer model with finite
/// bounds. Returns `None` when no point is feasible.
pub fn brute_force_model(model: &MilpModel) -> Result<Option<MilpSolution>, BruteError> {
    let mut domain = Vec::with_capacity(model.num_vars());
    let mut space = 1u64;
    for v in model.variables() {
        if !v.kind.is_integral() || !v.lower.is_finite() || !v.upper.is_finite() {
            return Err(BruteError::NotEnumerable(v.name.clone()));
        }
        let (lo, up) = (v.lower.ceil() as i64, v.upper.floor() as i64);
        let size = (up - lo + 1).max(0) as u64;
        space = space.saturating_mul(size);
        domain.push((lo, up));
    }
    if space > BRUTE_FORCE_LIMIT {
        return Err(BruteError::TooLarge);
    }
    // constraints are checked once their last variable is set
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); model.num_vars()];
    let mut always = Vec::new();
    for (i, c) in model.constraints().iter().enumerate() {
        match c.terms.iter().map(|&(_, j)| j).max() {
            Some(j) => closing[j].push(i),
            None => always.push(i),
        }
    }
    let cons = model.constraints();
    if always
        .iter()
        .any(|&i| !cons[i].is_satisfied(&[], TOLERANCE))
        || space == 0
    {
        return Ok(None);
    }

    let n = model.num_vars();
    let mut x = vec![0.0; n];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut stack: Vec<i64> = Vec::with_capacity(n);
    if n == 0 {
        return Ok(Some(model.solution(Vec::new(), SolutionStatus::Optimal)));
    }
    // iterative depth-first search; stack[j] is the value tried for var j
    stack.push(domain[0].0);
    while let Some(&val) = stack.last() {
        let j = stack.len() - 1;
        if val > domain[j].1 {
            stack.pop();
            if let Some(prev) = stack.last_mut() {
                *prev += 1;
            }
            continue;
        }
        x[j] = val as f64;
        let ok = closing[j]
            .iter()
            .all(|&i| cons[i].is_satisfied(&x, TOLERANCE));
        if ok && j + 1 < n {
            stack.push(domain[j + 1].0);
            continue;
        }
        if ok {
            let obj = model.objective_value(&x);
            if best.as_ref().is_none_or(|(b, _)| obj < *b - TOLERANCE) {
                best = Some((obj, x.clone()));
            }
        }
        *stack.last_mut().expect("non-empty") += 1;
    }
    Ok(best.map(|(_, x)| model.solution(x, SolutionStatus::Optimal)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceOptimum {
    pub objective: u64,
    pub penalties: PenaltyVector,
    pub solution: Solution,
}

struct Enumerator<'a> {
    inst: &'a Instance,
    /// Courses sharing a curriculum or teacher, per course.
    conflicts: Vec<Vec<usize>>,
    /// `course_at[p][c]`
    course_at: Vec<Vec<bool>>,
    room_used: Vec<Vec<bool>>,
    load: Vec<usize>,
    visited: u64,
}

impl<'a> Enumerator<'a> {
    fn new(inst: &'a Instance) -> Enumerator<'a> {
        let graph = inst.build_conflict_graph();
        let nc = inst.courses.len();
        Enumerator {
            inst,
            conflicts: (0..nc).map(|c| graph.neighbors(c).to_vec()).collect(),
            course_at: vec![vec![false; nc]; inst.num_periods()],
            room_used: vec![vec![false; inst.rooms.len()]; inst.num_periods()],
            load: vec![0; inst.num_periods()],
            visited: 0,
        }
    }

    fn tick(&mut self) -> Result<(), BruteError> {
        self.visited += 1;
        if self.visited > BRUTE_FORCE_LIMIT {
            Err(BruteError::TooLarge)
        } else {
            Ok(())
        }
    }

    /// Whether course `c` may be added at period `p`.
    fn period_open(&self, c: usize, p: usize) -> bool {
        self.inst.is_available(c, p)
            && !self.course_at[p][c]
            && self.conflicts[c].iter().all(|&o| !self.course_at[p][o])
            && self.load[p] < self.inst.rooms.len()
    }
}

/// Finds an optimal timetable by enumerating every event-to-(period, room)
/// assignment that respects the hard constraints. Returns `None` when the
/// instance is infeasible.
pub fn brute_force_instance(inst: &Instance) -> Result<Option<InstanceOptimum>, BruteError> {
    let mut e = Enumerator::new(inst);
    let mut sol = Solution::empty(inst.courses.len());
    let mut best: Option<InstanceOptimum> = None;
    place_event(&mut e, &mut sol, 0, 0, &mut best)?;
    Ok(best)
}

/// Lower bound on the objective of any completion: capacity and room
/// stability never decrease as events are added.
fn partial_cost(inst: &Instance, sol: &Solution) -> u64 {
    let w = inst.weights;
    let mut cost = 0u64;
    for (c, placed) in sol.assignments.iter().enumerate() {
        let students = inst.courses[c].students;
        let mut rooms: Vec<usize> = Vec::new();
        for pl in placed {
            cost +=
                w.capacity as u64 * students.saturating_sub(inst.rooms[pl.room].capacity) as u64;
            if !rooms.contains(&pl.room) {
                rooms.push(pl.room);
            }
        }
        cost += w.stability as u64 * rooms.len().saturating_sub(1) as u64;
    }
    cost
}

fn place_event(
    e: &mut Enumerator<'_>,
    sol: &mut Solution,
    course: usize,
    first_period: usize,
    best: &mut Option<InstanceOptimum>,
) -> Result<(), BruteError> {
    e.tick()?;
    let inst = e.inst;
    if let Some(b) = best {
        if partial_cost(inst, sol) >= b.objective {
            return Ok(());
        }
    }
    if course == inst.courses.len() {
        debug_assert!(is_feasible(inst, sol));
        let (penalties, objective) = evaluate(inst, sol);
        if best.as_ref().is_none_or(|b| objective < b.objective) {
            *best = Some(InstanceOptimum {
                objective,
                penalties,
                solution: sol.clone().normalized(),
            });
        }
        return Ok(());
    }
    if sol.assignments[course].len() == inst.courses[course].events as usize {
        return place_event(e, sol, course + 1, 0, best);
    }
    for p in first_period..inst.num_periods() {
        if !e.period_open(course, p) {
            continue;
        }
        for r in 0..inst.rooms.len() {
            if e.room_used[p][r] {
                continue;
            }
            e.room_used[p][r] = true;
            e.course_at[p][course] = true;
            e.load[p] += 1;
            sol.place(course, p, r);
            let res = place_event(e, sol, course, p + 1, best);
            sol.assignments[course].pop();
            e.load[p] -= 1;
            e.course_at[p][course] = false;
            e.room_used[p][r] = false;
            res?;
        }
    }
    Ok(())
}

/// Calls `visit` on every hard-feasible timetable, each once, and returns
/// how many there were.
pub fn for_each_timetable(
    inst: &Instance,
    mut visit: impl FnMut(&Solution),
) -> Result<u64, BruteError> {
    let mut e = Enumerator::new(inst);
    let mut sol = Solution::empty(inst.courses.len());
    let mut count = 0;
    visit_timetables(&mut e, &mut sol, 0, 0, &mut |s| {
        count += 1;
        visit(s)
    })?;
    Ok(count)
}

fn visit_timetables(
    e: &mut Enumerator<'_>,
    sol: &mut Solution,
    course: usize,
    first_period: usize,
    visit: &mut dyn FnMut(&Solution),
) -> Result<(), BruteError> {
    e.tick()?;
    let inst = e.inst;
    if course == inst.courses.len() {
        visit(sol);
        return Ok(());
    }
    if sol.assignments[course].len() == inst.courses[course].events as usize {
        return visit_timetables(e, sol, course + 1, 0, visit);
    }
    for p in first_period..inst.num_periods() {
        if !e.period_open(course, p) {
            continue;
        }
        for r in 0..inst.rooms.len() {
            if e.room_used[p][r] {
                continue;
            }
            e.room_used[p][r] = true;
            e.course_at[p][course] = true;
            e.load[p] += 1;
            sol.place(course, p, r);
            let res = visit_timetables(e, sol, course, p + 1, visit);
            sol.assignments[course].pop();
            e.load[p] -= 1;
            e.course_at[p][course] = false;
            e.room_used[p][r] = false;
            res?;
        }
    }
    Ok(())
}

/// Every period assignment satisfying the surface's hard constraints (event
/// counts, clashes, unavailability and the room-count bound per period), in
/// lexicographic order, up to `limit` of them.
pub fn enumerate_surface_assignments(
    inst: &Instance,
    limit: usize,
) -> Result<Vec<PeriodAssignment>, BruteError> {
    let mut e = Enumerator::new(inst);
    let mut times = vec![Vec::new(); inst.courses.len()];
    let mut out = Vec::new();
    enumerate_times(&mut e, &mut times, 0, 0, limit, &mut out)?;
    Ok(out)
}

fn enumerate_times(
    e: &mut Enumerator<'_>,
    times: &mut Vec<Vec<usize>>,
    course: usize,
    first_period: usize,
    limit: usize,
    out: &mut Vec<PeriodAssignment>,
) -> Result<(), BruteError> {
    e.tick()?;
    let inst = e.inst;
    if out.len() >= limit {
        return Ok(());
    }
    if course == inst.courses.len() {
        out.push(PeriodAssignment::new(inst, times.clone()));
        return Ok(());
    }
    if times[course].len() == inst.courses[course].events as usize {
        return enumerate_times(e, times, course + 1, 0, limit, out);
    }
    for p in first_period..inst.num_periods() {
        if !e.period_open(course, p) {
            continue;
        }
        e.course_at[p][course] = true;
        e.load[p] += 1;
        times[course].push(p);
        let res = enumerate_times(e, times, course, p + 1, limit, out);
        times[course].pop();
        e.load[p] -= 1;
        e.course_at[p][course] = false;
        res?;
    }
    Ok(())
}
