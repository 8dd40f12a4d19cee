use std::borrow::Cow;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::milp::{MilpModel, MilpSolution, SolutionStatus, TOLERANCE};

use super::lp::{LpStatus, Simplex};
use super::presolve::{presolve, Reduced};
use super::{check_bounded, SolveConfig, SolveResult, SolveStatus, SolverError};

const PRUNE_EPS: f64 = 1e-6;
const MAX_SEPARATION_ROUNDS: usize = 3;

/// What the search does after reporting a new incumbent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallbackAction {
    Continue,
    Stop,
}

/// Search state passed to the incumbent callback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    /// Global lower bound at the time the incumbent was found.
    pub lower_bound: f64,
    /// Nodes processed so far.
    pub nodes: u64,
}

/// Root-node cut generation.
pub trait Separator {
    /// Adds cuts violated by the model point `x` to `model` and returns how
    /// many were added.
    fn separate(&mut self, model: &mut MilpModel, x: &[f64]) -> usize;
}

struct Node {
    bound: f64,
    depth: u32,
    seq: u64,
    /// Bound changes relative to the root: `(column, lower, upper)`.
    changes: Vec<(usize, f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// The heap pops the greatest node: lowest bound, then deepest, then
    /// earliest created.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

/// Open nodes: a depth-first stack until the first incumbent, then a
/// best-bound heap.
enum Open {
    Stack(Vec<Node>),
    Heap(BinaryHeap<Node>),
}

impl Open {
    fn push(&mut self, node: Node) {
        match self {
            Open::Stack(v) => v.push(node),
            Open::Heap(h) => h.push(node),
        }
    }

    fn pop(&mut self) -> Option<Node> {
        match self {
            Open::Stack(v) => v.pop(),
            Open::Heap(h) => h.pop(),
        }
    }

    fn min_bound(&self) -> f64 {
        match self {
            Open::Stack(v) => v.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min),
            Open::Heap(h) => h.peek().map_or(f64::INFINITY, |n| n.bound),
        }
    }

    fn switch_to_heap(&mut self) {
        if let Open::Stack(v) = self {
            *self = Open::Heap(BinaryHeap::from(std::mem::take(v)));
        }
    }

    fn is_heap(&self) -> bool {
        matches!(self, Open::Heap(_))
    }
}

/// Solves `model` to optimality or until a limit is hit.
pub fn branch_and_bound(
    model: &MilpModel,
    config: &SolveConfig,
) -> Result<SolveResult, SolverError> {
    branch_and_bound_with(model, config, &mut |_, _| CallbackAction::Continue, None)
}

/// As [`branch_and_bound`], reporting every improving incumbent together
/// with the current lower bound and node count to `on_incumbent`. Time spent in the
/// callback does not count against the time limit. With
/// `config.separation` set, `separator` is run at the root.
pub fn branch_and_bound_with(
    model: &MilpModel,
    config: &SolveConfig,
    on_incumbent: &mut dyn FnMut(&MilpSolution, &Progress) -> CallbackAction,
    separator: Option<&mut dyn Separator>,
) -> Result<SolveResult, SolverError> {
    config.validate()?;
    check_bounded(model)?;
    let mut search = Search::new(model, config, on_incumbent);
    let work = match separator {
        Some(sep) if config.separation => search.separate(sep),
        _ => Cow::Borrowed(model),
    };
    Ok(search.run(&work))
}

struct Search<'m, 'c> {
    model: &'m MilpModel,
    config: &'c SolveConfig,
    on_incumbent: &'c mut dyn FnMut(&MilpSolution, &Progress) -> CallbackAction,
    start: Instant,
    paused: Duration,
    nodes: u64,
    lp_iterations: u64,
    incumbent: Option<MilpSolution>,
    /// Least bound among nodes dropped for reaching the cutoff but not the
    /// incumbent, or left unsolved after numerical trouble.
    dropped_min: f64,
    numerical_trouble: bool,
}

impl<'m, 'c> Search<'m, 'c> {
    fn new(
        model: &'m MilpModel,
        config: &'c SolveConfig,
        on_incumbent: &'c mut dyn FnMut(&MilpSolution, &Progress) -> CallbackAction,
    ) -> Search<'m, 'c> {
        Search {
            model,
            config,
            on_incumbent,
            start: Instant::now(),
            paused: Duration::ZERO,
            nodes: 0,
            lp_iterations: 0,
            incumbent: None,
            dropped_min: f64::INFINITY,
            numerical_trouble: false,
        }
    }

    fn integral_objective(&self) -> bool {
        self.model.has_integral_objective()
    }

    fn round_bound(&self, v: f64) -> f64 {
        if self.integral_objective() {
            (v - PRUNE_EPS).ceil()
        } else {
            v
        }
    }

    fn threshold(&self) -> f64 {
        let inc = self
            .incumbent
            .as_ref()
            .map_or(f64::INFINITY, |s| s.objective);
        inc.min(self.config.cutoff.unwrap_or(f64::INFINITY))
    }

    fn prune(&mut self, bound: f64) -> bool {
        if bound < self.threshold() - PRUNE_EPS {
            return false;
        }
        let inc = self
            .incumbent
            .as_ref()
            .map_or(f64::INFINITY, |s| s.objective);
        if bound < inc - PRUNE_EPS {
            self.dropped_min = self.dropped_min.min(bound);
        }
        true
    }

    fn out_of_time(&self) -> bool {
        self.config
            .time_limit
            .is_some_and(|t| self.start.elapsed().saturating_sub(self.paused) >= t)
    }

    /// Root cut loop on a copy of the model.
    fn separate(&mut self, sep: &mut dyn Separator) -> Cow<'m, MilpModel> {
        let mut work = Cow::Borrowed(self.model);
        for _ in 0..MAX_SEPARATION_ROUNDS {
            let Some(red) = presolve(&work) else { break };
            let Ok(mut lp) = Simplex::new(&red.lp) else {
                break;
            };
            let Ok(res) = lp.solve() else { break };
            self.lp_iterations += res.iterations as u64;
            if res.status != LpStatus::Optimal || fractional(&red, &res.x).is_none() {
                break;
            }
            let x = red.expand(&res.x);
            if sep.separate(work.to_mut(), &x) == 0 {
                break;
            }
        }
        work
    }

    fn finish(&self, status: SolveStatus, open_min: f64) -> SolveResult {
        let inc = self
            .incumbent
            .as_ref()
            .map_or(f64::INFINITY, |s| s.objective);
        let lower_bound = open_min.min(self.dropped_min).min(inc);
        let mut incumbent = self.incumbent.clone();
        if let Some(s) = incumbent.as_mut() {
            s.status = if status == SolveStatus::Optimal {
                SolutionStatus::Optimal
            } else {
                SolutionStatus::Feasible
            };
        }
        SolveResult {
            status,
            incumbent,
            lower_bound,
            nodes: self.nodes,
            wall_time: self.start.elapsed(),
            lp_iterations: self.lp_iterations,
        }
    }

    fn run(&mut self, work: &MilpModel) -> SolveResult {
        let Some(red) = presolve(work) else {
            return self.finish(SolveStatus::Infeasible, f64::INFINITY);
        };
        let root_lo = red.lp.col_lower.clone();
        let root_up = red.lp.col_upper.clone();
        let mut lp = match Simplex::new(&red.lp) {
            Ok(lp) => lp,
            Err(_) => return self.finish(SolveStatus::LimitReached, f64::NEG_INFINITY),
        };
        let mut open = Open::Stack(Vec::new());
        let mut seq = 0u64;
        open.push(Node {
            bound: f64::NEG_INFINITY,
            depth: 0,
            seq,
            changes: Vec::new(),
        });
        let mut lo = root_lo.clone();
        let mut up = root_up.clone();

        while let Some(node) = open.pop() {
            if self.prune(node.bound) {
                if open.is_heap() {
                    while let Some(rest) = open.pop() {
                        self.prune(rest.bound);
                    }
                    break;
                }
                continue;
            }
            if let (Some(g), Some(inc)) = (self.config.gap_target, &self.incumbent) {
                let lb = node.bound.min(open.min_bound());
                if inc.objective - lb <= g * inc.objective.abs() + 1e-9 {
                    return self.finish(SolveStatus::Feasible, lb);
                }
            }
            if self.config.node_limit.is_some_and(|l| self.nodes >= l) || self.out_of_time() {
                return self.finish(SolveStatus::LimitReached, node.bound.min(open.min_bound()));
            }
            self.nodes += 1;

            lo.copy_from_slice(&root_lo);
            up.copy_from_slice(&root_up);
            let mut seeds = Vec::with_capacity(node.changes.len());
            for &(j, l, u) in &node.changes {
                lo[j] = lo[j].max(l);
                up[j] = up[j].min(u);
                seeds.push(j);
            }
            if !red.propagator.propagate(&mut lo, &mut up, Some(&seeds)) {
                continue;
            }
            for j in 0..lo.len() {
                if lp.col_bounds(j) != (lo[j], up[j]) {
                    lp.set_col_bounds(j, lo[j], up[j]);
                }
            }
            let res = match lp.solve() {
                Ok(r) => r,
                Err(_) => {
                    // retry from the slack basis before giving up on the node
                    let mut fresh = Simplex::new(&red.lp).expect("size checked at the root");
                    for j in 0..lo.len() {
                        fresh.set_col_bounds(j, lo[j], up[j]);
                    }
                    match fresh.solve() {
                        Ok(r) => {
                            lp = fresh;
                            r
                        }
                        Err(_) => {
                            self.numerical_trouble = true;
                            self.dropped_min = self.dropped_min.min(node.bound);
                            continue;
                        }
                    }
                }
            };
            self.lp_iterations += res.iterations as u64;
            match res.status {
                LpStatus::Infeasible => continue,
                LpStatus::Unbounded => {
                    return self.finish(SolveStatus::Unbounded, f64::NEG_INFINITY)
                }
                LpStatus::Optimal => {}
            }
            let bound = self.round_bound(res.objective).max(node.bound);
            if self.prune(bound) {
                continue;
            }
            match fractional(&red, &res.x) {
                Some((j, v)) => {
                    let depth = node.depth + 1;
                    // the up branch is explored first in either order
                    let children = if open.is_heap() {
                        [(v.ceil(), up[j]), (lo[j], v.floor())]
                    } else {
                        [(lo[j], v.floor()), (v.ceil(), up[j])]
                    };
                    for (l, u) in children {
                        seq += 1;
                        let mut changes = node.changes.clone();
                        changes.push((j, l, u));
                        open.push(Node {
                            bound,
                            depth,
                            seq,
                            changes,
                        });
                    }
                }
                None => {
                    match self.accept(&red, &res.x) {
                        Accepted::Improved => {}
                        Accepted::NotImproving => continue,
                        Accepted::Rejected => {
                            self.numerical_trouble = true;
                            self.dropped_min = self.dropped_min.min(bound);
                            continue;
                        }
                    }
                    open.switch_to_heap();
                    let open_min = open.min_bound();
                    let inc = self.incumbent.as_ref().expect("just accepted");
                    let lb = open_min.min(self.dropped_min).min(inc.objective);
                    let paused = Instant::now();
                    let progress = Progress {
                        lower_bound: lb,
                        nodes: self.nodes,
                    };
                    let action = (self.on_incumbent)(inc, &progress);
                    self.paused += paused.elapsed();
                    if action == CallbackAction::Stop {
                        return self.finish(SolveStatus::Feasible, open_min);
                    }
                }
            }
        }
        let status = if self.numerical_trouble {
            SolveStatus::LimitReached
        } else if self.incumbent.is_some() && self.dropped_min == f64::INFINITY {
            SolveStatus::Optimal
        } else if self.incumbent.is_some() {
            SolveStatus::Feasible
        } else if self.dropped_min < f64::INFINITY {
            SolveStatus::CutOff
        } else {
            SolveStatus::Infeasible
        };
        self.finish(status, f64::INFINITY)
    }

    /// Rounds an integral LP point, checks it against the original model
    /// and keeps it if it improves the incumbent.
    fn accept(&mut self, red: &Reduced, x: &[f64]) -> Accepted {
        let mut values = red.expand(x);
        for (v, var) in values.iter_mut().zip(self.model.variables()) {
            if var.kind.is_integral() {
                *v = v.round();
            }
            if *v == 0.0 {
                *v = 0.0;
            }
        }
        if self.model.first_violation(&values, TOLERANCE).is_some() {
            return Accepted::Rejected;
        }
        let sol = self.model.solution(values, SolutionStatus::Feasible);
        if sol.objective < self.threshold() - PRUNE_EPS {
            self.incumbent = Some(sol);
            Accepted::Improved
        } else {
            Accepted::NotImproving
        }
    }
}

enum Accepted {
    Improved,
    NotImproving,
    /// The rounded point violates the model.
    Rejected,
}

/// The most fractional integral column, lowest index on ties.
fn fractional(red: &Reduced, x: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for (j, &v) in x.iter().enumerate() {
        if !red.integral[j] {
            continue;
        }
        let f = v - v.floor();
        let score = f.min(1.0 - f);
        if score > TOLERANCE && best.is_none_or(|(_, _, s)| score > s) {
            best = Some((j, v, score));
        }
    }
    best.map(|(j, v, _)| (j, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{Origin, Sense, VarKind, VarTag};

    fn cover() -> MilpModel {
        let mut m = MilpModel::new("m", "i");
        let x = m.add_binary("x", VarTag::Generic).unwrap();
        let y = m.add_binary("y", VarTag::Generic).unwrap();
        m.add_constraint("c", [(1.0, x), (1.0, y)], Sense::Ge, 1.0, Origin::Imported)
            .unwrap();
        m.set_objective([(1.0, x), (1.0, y)], 0.0).unwrap();
        m
    }

    #[test]
    fn binary_cover() {
        let r = branch_and_bound(&cover(), &SolveConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.objective(), Some(1.0));
        assert_eq!(r.lower_bound, 1.0);
    }

    #[test]
    fn knapsack_needs_branching() {
        // max 5a + 4b + 3c, 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8 -> 13
        let mut m = MilpModel::new("k", "i");
        let v: Vec<_> = (0..3)
            .map(|i| {
                m.add_variable(format!("v{i}"), VarKind::Integer, 0.0, 5.0, VarTag::Generic)
                    .unwrap()
            })
            .collect();
        for (name, a, b) in [
            ("r1", [2.0, 3.0, 1.0], 5.0),
            ("r2", [4.0, 1.0, 2.0], 11.0),
            ("r3", [3.0, 4.0, 2.0], 8.0),
        ] {
            m.add_constraint(
                name,
                a.iter().zip(&v).map(|(&a, &x)| (a, x)),
                Sense::Le,
                b,
                Origin::Imported,
            )
            .unwrap();
        }
        m.set_objective([(-5.0, v[0]), (-4.0, v[1]), (-3.0, v[2])], 0.0)
            .unwrap();
        let r = branch_and_bound(&m, &SolveConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.objective(), Some(-13.0));
    }

    #[test]
    fn cutoff_at_optimum_proves_nothing_better() {
        let cfg = SolveConfig {
            cutoff: Some(1.0),
            ..SolveConfig::default()
        };
        let r = branch_and_bound(&cover(), &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::CutOff);
        assert!(r.incumbent.is_none());
        assert!(r.lower_bound >= 0.0);
    }

    #[test]
    fn infeasible_model() {
        let mut m = cover();
        let x = m.var_by_name("x").unwrap();
        let y = m.var_by_name("y").unwrap();
        m.add_constraint(
            "none",
            [(1.0, x), (1.0, y)],
            Sense::Le,
            0.0,
            Origin::Imported,
        )
        .unwrap();
        let r = branch_and_bound(&m, &SolveConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert_eq!(r.lower_bound, f64::INFINITY);
    }

    #[test]
    fn rejects_bad_config_and_unbounded_integers() {
        let cfg = SolveConfig {
            gap_target: Some(1.0),
            ..SolveConfig::default()
        };
        assert!(matches!(
            branch_and_bound(&cover(), &cfg),
            Err(SolverError::InvalidConfig(_))
        ));
        let mut m = MilpModel::new("m", "i");
        m.add_variable("z", VarKind::Integer, 0.0, f64::INFINITY, VarTag::Generic)
            .unwrap();
        assert!(matches!(
            branch_and_bound(&m, &SolveConfig::default()),
            Err(SolverError::UnboundedInteger(_))
        ));
    }

    #[test]
    fn node_ordering() {
        let n = |bound, depth, seq| Node {
            bound,
            depth,
            seq,
            changes: Vec::new(),
        };
        let mut h = BinaryHeap::from(vec![n(2.0, 5, 0), n(1.0, 1, 1), n(1.0, 3, 3), n(1.0, 3, 2)]);
        let order: Vec<u64> = std::iter::from_fn(|| h.pop().map(|x| x.seq)).collect();
        assert_eq!(order, vec![2, 3, 1, 0]);
    }
}
