//! Activity-based bound propagation and the root reduction that removes
//! fixed columns and redundant rows before the simplex sees the model.

use std::collections::VecDeque;

use crate::milp::{MilpModel, Sense};

use super::lp::LpProblem;

const FEAS_TOL: f64 = 1e-6;
const INT_TOL: f64 = 1e-6;
/// Continuous bounds only move when the change is at least this large.
const MIN_CONT_CHANGE: f64 = 1e-4;

/// Row-wise constraint data for propagation.
#[derive(Debug, Clone)]
pub(crate) struct Propagator {
    rows: Vec<Vec<(usize, f64)>>,
    row_lo: Vec<f64>,
    row_up: Vec<f64>,
    col_rows: Vec<Vec<usize>>,
    integral: Vec<bool>,
}

struct Activity {
    min_fin: f64,
    min_inf: usize,
    max_fin: f64,
    max_inf: usize,
}

impl Propagator {
    pub(crate) fn new(
        num_cols: usize,
        rows: Vec<Vec<(usize, f64)>>,
        row_lo: Vec<f64>,
        row_up: Vec<f64>,
        integral: Vec<bool>,
    ) -> Propagator {
        let mut col_rows = vec![Vec::new(); num_cols];
        for (i, r) in rows.iter().enumerate() {
            for &(j, _) in r {
                col_rows[j].push(i);
            }
        }
        Propagator {
            rows,
            row_lo,
            row_up,
            col_rows,
            integral,
        }
    }

    fn activity(&self, i: usize, lo: &[f64], up: &[f64]) -> Activity {
        let mut a = Activity {
            min_fin: 0.0,
            min_inf: 0,
            max_fin: 0.0,
            max_inf: 0,
        };
        for &(j, c) in &self.rows[i] {
            let (l, u) = if c > 0.0 {
                (lo[j], up[j])
            } else {
                (up[j], lo[j])
            };
            if l.is_finite() {
                a.min_fin += c * l;
            } else {
                a.min_inf += 1;
            }
            if u.is_finite() {
                a.max_fin += c * u;
            } else {
                a.max_inf += 1;
            }
        }
        a
    }

    /// Whether row `i` holds for every point within the bounds.
    pub(crate) fn is_redundant(&self, i: usize, lo: &[f64], up: &[f64]) -> bool {
        let a = self.activity(i, lo, up);
        let low_ok = self.row_lo[i] == f64::NEG_INFINITY
            || (a.min_inf == 0 && a.min_fin >= self.row_lo[i] - FEAS_TOL);
        let up_ok = self.row_up[i] == f64::INFINITY
            || (a.max_inf == 0 && a.max_fin <= self.row_up[i] + FEAS_TOL);
        low_ok && up_ok
    }

    /// Tightens `lo`/`up` until no row implies more, starting from the rows
    /// of `seeds` (or every row when `seeds` is `None`). Returns `false`
    /// when the bounds prove infeasibility.
    pub(crate) fn propagate(
        &self,
        lo: &mut [f64],
        up: &mut [f64],
        seeds: Option<&[usize]>,
    ) -> bool {
        let m = self.rows.len();
        let mut queued = vec![false; m];
        let mut queue = VecDeque::new();
        let push = |i: usize, queued: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
            if !queued[i] {
                queued[i] = true;
                queue.push_back(i);
            }
        };
        match seeds {
            None => (0..m).for_each(|i| push(i, &mut queued, &mut queue)),
            Some(cols) => {
                for &j in cols {
                    for &i in &self.col_rows[j] {
                        push(i, &mut queued, &mut queue);
                    }
                }
            }
        }
        let mut budget = 20 * m + 1000;
        while let Some(i) = queue.pop_front() {
            queued[i] = false;
            if budget == 0 {
                break;
            }
            budget -= 1;
            let a = self.activity(i, lo, up);
            let (rl, ru) = (self.row_lo[i], self.row_up[i]);
            if (a.min_inf == 0 && a.min_fin > ru + FEAS_TOL)
                || (a.max_inf == 0 && a.max_fin < rl - FEAS_TOL)
            {
                return false;
            }
            for &(j, c) in &self.rows[i] {
                let (l, u) = if c > 0.0 {
                    (lo[j], up[j])
                } else {
                    (up[j], lo[j])
                };
                // activity of the row without column j
                let rest_min = match (a.min_inf, l.is_finite()) {
                    (0, _) => a.min_fin - c * l,
                    (1, false) => a.min_fin,
                    _ => f64::NEG_INFINITY,
                };
                let rest_max = match (a.max_inf, u.is_finite()) {
                    (0, _) => a.max_fin - c * u,
                    (1, false) => a.max_fin,
                    _ => f64::INFINITY,
                };
                let mut new_lo = lo[j];
                let mut new_up = up[j];
                if ru.is_finite() && rest_min.is_finite() {
                    let v = (ru - rest_min) / c;
                    if c > 0.0 {
                        new_up = new_up.min(v);
                    } else {
                        new_lo = new_lo.max(v);
                    }
                }
                if rl.is_finite() && rest_max.is_finite() {
                    let v = (rl - rest_max) / c;
                    if c > 0.0 {
                        new_lo = new_lo.max(v);
                    } else {
                        new_up = new_up.min(v);
                    }
                }
                if self.integral[j] {
                    new_lo = (new_lo - INT_TOL).ceil();
                    new_up = (new_up + INT_TOL).floor();
                }
                let mut changed = false;
                let min_change = if self.integral[j] {
                    0.5
                } else {
                    MIN_CONT_CHANGE
                };
                if new_lo > lo[j] + min_change || (new_lo > lo[j] && !lo[j].is_finite()) {
                    lo[j] = new_lo;
                    changed = true;
                }
                if new_up < up[j] - min_change || (new_up < up[j] && !up[j].is_finite()) {
                    up[j] = new_up;
                    changed = true;
                }
                if lo[j] > up[j] + FEAS_TOL {
                    return false;
                }
                if lo[j] > up[j] {
                    up[j] = lo[j];
                }
                if changed {
                    for &k in &self.col_rows[j] {
                        if k != i {
                            push(k, &mut queued, &mut queue);
                        }
                    }
                }
            }
        }
        true
    }
}

/// The model after root propagation, with fixed columns and redundant
/// rows removed.
pub(crate) struct Reduced {
    pub lp: LpProblem,
    /// Model index of every reduced column.
    pub cols: Vec<usize>,
    /// Value of every model column fixed by presolve.
    pub fixed: Vec<Option<f64>>,
    pub integral: Vec<bool>,
    pub propagator: Propagator,
}

impl Reduced {
    /// Expands reduced column values to a model point.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
        for (k, &j) in self.cols.iter().enumerate() {
            out[j] = x[k];
        }
        out
    }
}

/// Propagates the model bounds and drops what is settled. `None` means the
/// model is infeasible.
pub(crate) fn presolve(model: &MilpModel) -> Option<Reduced> {
    let n = model.num_vars();
    let mut lo: Vec<f64> = model.variables().iter().map(|v| v.lower).collect();
    let mut up: Vec<f64> = model.variables().iter().map(|v| v.upper).collect();
    let integral: Vec<bool> = model
        .variables()
        .iter()
        .map(|v| v.kind.is_integral())
        .collect();
    for j in 0..n {
        if integral[j] {
            lo[j] = (lo[j] - INT_TOL).ceil();
            up[j] = (up[j] + INT_TOL).floor();
        }
        if lo[j] > up[j] {
            return None;
        }
    }
    let (rows, row_lo, row_up) = row_data(model);
    let full = Propagator::new(n, rows, row_lo, row_up, integral.clone());
    if !full.propagate(&mut lo, &mut up, None) {
        return None;
    }

    let mut fixed = vec![None; n];
    let mut map = vec![usize::MAX; n];
    let mut lp = LpProblem {
        constant: model.objective_constant(),
        ..LpProblem::default()
    };
    let mut cols = Vec::new();
    let mut red_integral = Vec::new();
    for j in 0..n {
        if lo[j] == up[j] {
            fixed[j] = Some(lo[j]);
            lp.constant += model.objective()[j] * lo[j];
        } else {
            map[j] = lp.add_col(model.objective()[j], lo[j], up[j]);
            cols.push(j);
            red_integral.push(integral[j]);
        }
    }
    let mut red_rows = Vec::new();
    let mut red_lo = Vec::new();
    let mut red_up = Vec::new();
    for i in 0..full.rows.len() {
        if full.is_redundant(i, &lo, &up) {
            continue;
        }
        let mut shift = 0.0;
        let mut terms = Vec::new();
        for &(j, a) in &full.rows[i] {
            match fixed[j] {
                Some(v) => shift += a * v,
                None => terms.push((map[j], a)),
            }
        }
        let (l, u) = (full.row_lo[i] - shift, full.row_up[i] - shift);
        lp.add_row(&terms, l, u);
        red_rows.push(terms);
        red_lo.push(l);
        red_up.push(u);
    }
    let propagator = Propagator::new(cols.len(), red_rows, red_lo, red_up, red_integral.clone());
    Some(Reduced {
        lp,
        cols,
        fixed,
        integral: red_integral,
        propagator,
    })
}

fn row_data(model: &MilpModel) -> (Vec<Vec<(usize, f64)>>, Vec<f64>, Vec<f64>) {
    let mut rows = Vec::with_capacity(model.num_constraints());
    let mut lo = Vec::with_capacity(model.num_constraints());
    let mut up = Vec::with_capacity(model.num_constraints());
    for c in model.constraints() {
        rows.push(c.terms.iter().map(|&(a, j)| (j, a)).collect());
        let (l, u) = match c.sense {
            Sense::Le => (f64::NEG_INFINITY, c.rhs),
            Sense::Ge => (c.rhs, f64::INFINITY),
            Sense::Eq => (c.rhs, c.rhs),
        };
        lo.push(l);
        up.push(u);
    }
    (rows, lo, up)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{Origin, VarKind, VarTag};

    #[test]
    fn fixes_forced_binaries_and_drops_rows() {
        let mut m = MilpModel::new("m", "i");
        let x = m.add_binary("x", VarTag::Generic).unwrap();
        let y = m.add_binary("y", VarTag::Generic).unwrap();
        let z = m.add_binary("z", VarTag::Generic).unwrap();
        m.add_constraint(
            "force",
            [(1.0, x), (1.0, y)],
            Sense::Ge,
            2.0,
            Origin::Imported,
        )
        .unwrap();
        m.add_constraint(
            "pack",
            [(1.0, x), (1.0, z)],
            Sense::Le,
            1.0,
            Origin::Imported,
        )
        .unwrap();
        m.set_objective([(1.0, x), (1.0, y), (-1.0, z)], 0.0)
            .unwrap();
        let r = presolve(&m).unwrap();
        assert_eq!(r.fixed, vec![Some(1.0), Some(1.0), Some(0.0)]);
        assert_eq!(r.lp.num_rows(), 0);
        assert_eq!(r.lp.constant, 2.0);
    }

    #[test]
    fn detects_infeasible_bounds() {
        let mut m = MilpModel::new("m", "i");
        let x = m
            .add_variable("x", VarKind::Integer, 0.0, 3.0, VarTag::Generic)
            .unwrap();
        m.add_constraint("a", [(2.0, x)], Sense::Ge, 3.0, Origin::Imported)
            .unwrap();
        m.add_constraint("b", [(2.0, x)], Sense::Le, 3.0, Origin::Imported)
            .unwrap();
        assert!(presolve(&m).is_none());
    }

    #[test]
    fn keeps_continuous_rows() {
        let mut m = MilpModel::new("m", "i");
        let x = m
            .add_variable("x", VarKind::Continuous, 0.0, 10.0, VarTag::Generic)
            .unwrap();
        let y = m
            .add_variable("y", VarKind::Continuous, 0.0, 10.0, VarTag::Generic)
            .unwrap();
        m.add_constraint("a", [(1.0, x), (1.0, y)], Sense::Ge, 3.0, Origin::Imported)
            .unwrap();
        let r = presolve(&m).unwrap();
        assert_eq!((r.lp.num_cols(), r.lp.num_rows()), (2, 1));
        assert_eq!(r.expand(&[1.5, 1.5]), vec![1.5, 1.5]);
    }
}
