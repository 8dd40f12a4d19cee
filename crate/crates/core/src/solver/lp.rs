//! Bounded-variable revised primal simplex.
//!
//! Every row `i` gets a slack `s_i = a_i x` whose bounds are the row range,
//! so the working system is `A x - s = 0` with bounds on all columns. The
//! basis inverse is kept in product form, a list of sparse eta columns on
//! top of the slack basis, and is rebuilt every [`REINVERT_EVERY`] pivots. Phase one minimises the sum of bound
//! violations of basic variables, phase two the objective. Pricing is
//! Dantzig's rule, switching to Bland's rule after a run of degenerate
//! pivots.

use thiserror::Error;

use crate::milp::{MilpModel, Sense};

pub const PRIMAL_TOL: f64 = 1e-7;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_SWITCH: usize = 50;
const REINVERT_EVERY: usize = 100;
/// Largest row count accepted.
pub const MAX_ROWS: usize = 200_000;
const ETA_DROP: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("simplex iteration limit of {0} exceeded")]
    IterationLimit(usize),
    #[error("{rows} rows exceed the limit of {MAX_ROWS}")]
    TooLarge { rows: usize },
    #[error("numerical trouble: {0}")]
    Numerical(&'static str),
}

/// `min c x + constant` subject to `row_lower ≤ A x ≤ row_upper` and
/// column bounds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpProblem {
    /// Sparse columns: `(row, coefficient)`.
    pub cols: Vec<Vec<(usize, f64)>>,
    pub cost: Vec<f64>,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
    pub constant: f64,
}

impl LpProblem {
    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn num_rows(&self) -> usize {
        self.row_lower.len()
    }

    pub fn add_col(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.cols.push(Vec::new());
        self.cost.push(cost);
        self.col_lower.push(lower);
        self.col_upper.push(upper);
        self.cols.len() - 1
    }

    pub fn add_row(&mut self, terms: &[(usize, f64)], lower: f64, upper: f64) -> usize {
        let i = self.row_lower.len();
        for &(j, a) in terms {
            if a != 0.0 {
                self.cols[j].push((i, a));
            }
        }
        self.row_lower.push(lower);
        self.row_upper.push(upper);
        i
    }

    /// The continuous relaxation of a model.
    pub fn from_model(model: &MilpModel) -> LpProblem {
        let mut lp = LpProblem {
            constant: model.objective_constant(),
            ..LpProblem::default()
        };
        for (v, &c) in model.variables().iter().zip(model.objective()) {
            lp.add_col(c, v.lower, v.upper);
        }
        for c in model.constraints() {
            let (lo, up) = match c.sense {
                Sense::Le => (f64::NEG_INFINITY, c.rhs),
                Sense::Ge => (c.rhs, f64::INFINITY),
                Sense::Eq => (c.rhs, c.rhs),
            };
            let terms: Vec<(usize, f64)> = c.terms.iter().map(|&(a, j)| (j, a)).collect();
            lp.add_row(&terms, lo, up);
        }
        lp
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.constant + self.cost.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    /// Structural column values; meaningful when optimal.
    pub x: Vec<f64>,
    pub iterations: usize,
}

/// Solves an LP from the slack basis.
pub fn solve_lp(prob: &LpProblem) -> Result<LpResult, LpError> {
    let mut s = Simplex::new(prob)?;
    s.solve()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pos {
    Basic(usize),
    Lower,
    Upper,
    /// Free nonbasic column held at zero.
    Zero,
}

/// Elementary transformation replacing basis position `row`.
#[derive(Debug, Clone)]
struct Eta {
    row: usize,
    pivot: f64,
    /// Other nonzeros of the entering column's transformed values.
    rest: Vec<(usize, f64)>,
}

/// A simplex engine whose column bounds can be changed between solves; the
/// last basis is reused as the starting point.
pub struct Simplex<'a> {
    p: &'a LpProblem,
    n: usize,
    m: usize,
    lo: Vec<f64>,
    up: Vec<f64>,
    cost: Vec<f64>,
    state: Vec<Pos>,
    head: Vec<usize>,
    x: Vec<f64>,
    etas: Vec<Eta>,
    since_reinvert: usize,
    pub iteration_limit: usize,
    total_iterations: usize,
}

impl<'a> Simplex<'a> {
    pub fn new(p: &'a LpProblem) -> Result<Simplex<'a>, LpError> {
        let n = p.num_cols();
        let m = p.num_rows();
        if m > MAX_ROWS {
            return Err(LpError::TooLarge { rows: m });
        }
        let mut lo = p.col_lower.clone();
        lo.extend_from_slice(&p.row_lower);
        let mut up = p.col_upper.clone();
        up.extend_from_slice(&p.row_upper);
        let mut cost = p.cost.clone();
        cost.resize(n + m, 0.0);
        let mut state = vec![Pos::Lower; n + m];
        for i in 0..m {
            state[n + i] = Pos::Basic(i);
        }
        let mut s = Simplex {
            p,
            n,
            m,
            lo,
            up,
            cost,
            state,
            head: (n..n + m).collect(),
            x: vec![0.0; n + m],
            etas: Vec::new(),
            since_reinvert: 0,
            iteration_limit: 50_000 + 50 * (n + m),
            total_iterations: 0,
        };
        for j in 0..n {
            s.place(j);
        }
        Ok(s)
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    pub fn col_bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.up[j])
    }

    pub fn set_col_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lo[j] = lower;
        self.up[j] = upper;
        if !matches!(self.state[j], Pos::Basic(_)) {
            self.place(j);
        }
    }

    pub fn total_iterations(&self) -> usize {
        self.total_iterations
    }

    /// Structural column values of the last solve.
    pub fn values(&self) -> Vec<f64> {
        self.x[..self.n].to_vec()
    }

    pub fn objective(&self) -> f64 {
        self.p.constant + (0..self.n).map(|j| self.cost[j] * self.x[j]).sum::<f64>()
    }

    /// Puts a nonbasic column at a finite bound, keeping its side if possible.
    fn place(&mut self, j: usize) {
        let (lo, up) = (self.lo[j], self.up[j]);
        let pos = match (lo.is_finite(), up.is_finite()) {
            (true, true) => {
                if self.state[j] == Pos::Upper && lo != up {
                    Pos::Upper
                } else {
                    Pos::Lower
                }
            }
            (true, false) => Pos::Lower,
            (false, true) => Pos::Upper,
            (false, false) => Pos::Zero,
        };
        self.state[j] = pos;
        self.x[j] = match pos {
            Pos::Lower => lo,
            Pos::Upper => up,
            _ => 0.0,
        };
    }

    fn for_col(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for &(i, a) in &self.p.cols[j] {
                f(i, a);
            }
        } else {
            f(j - self.n, -1.0);
        }
    }

    /// `B^-1 v` for a dense `v`.
    fn solve_vec(&self, mut x: Vec<f64>) -> Vec<f64> {
        x.iter_mut().for_each(|v| *v = -*v);
        for e in &self.etas {
            let xr = x[e.row];
            if xr == 0.0 {
                continue;
            }
            let xr = xr / e.pivot;
            x[e.row] = xr;
            for &(i, a) in &e.rest {
                x[i] -= a * xr;
            }
        }
        x
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.m];
        self.for_col(j, |i, a| v[i] += a);
        self.solve_vec(v)
    }

    /// `cb^T B^-1`.
    fn btran(&self, cb: &[f64]) -> Vec<f64> {
        let mut y = cb.to_vec();
        for e in self.etas.iter().rev() {
            let mut v = y[e.row];
            for &(i, a) in &e.rest {
                v -= a * y[i];
            }
            y[e.row] = v / e.pivot;
        }
        y.iter_mut().for_each(|v| *v = -*v);
        y
    }

    fn pivot(&mut self, r: usize, alpha: &[f64]) {
        let rest = alpha
            .iter()
            .enumerate()
            .filter(|&(i, a)| i != r && a.abs() > ETA_DROP)
            .map(|(i, &a)| (i, a))
            .collect();
        self.etas.push(Eta {
            row: r,
            pivot: alpha[r],
            rest,
        });
    }

    fn recompute_basics(&mut self) {
        let m = self.m;
        let mut r = vec![0.0; m];
        for j in 0..self.n + self.m {
            if matches!(self.state[j], Pos::Basic(_)) {
                continue;
            }
            let xj = self.x[j];
            if xj != 0.0 {
                self.for_col(j, |i, a| r[i] += a * xj);
            }
        }
        let xb = self.solve_vec(r);
        for (i, v) in xb.into_iter().enumerate() {
            self.x[self.head[i]] = -v;
        }
    }

    /// Rebuilds the inverse by pivoting the basic structural columns into
    /// the slack basis. Columns that cannot be pivoted in (a singular
    /// basis) are replaced by slacks.
    fn reinvert(&mut self) {
        let (n, m) = (self.n, self.m);
        let old_state = self.state.clone();
        let target: Vec<usize> = self.head.clone();
        self.etas.clear();
        for k in 0..m {
            self.head[k] = n + k;
            self.state[n + k] = Pos::Basic(k);
        }
        let mut free_row = vec![true; m];
        for &j in &target {
            if j >= n {
                free_row[j - n] = false;
            }
        }
        for &j in &target {
            if j >= n {
                continue;
            }
            let alpha = self.ftran(j);
            let best = (0..m)
                .filter(|&r| free_row[r] && alpha[r].abs() > 1e-7)
                .max_by(|&a, &b| alpha[a].abs().total_cmp(&alpha[b].abs()).then(b.cmp(&a)));
            match best {
                Some(r) => {
                    self.pivot(r, &alpha);
                    let slack = n + r;
                    self.state[slack] = old_state[slack];
                    if matches!(self.state[slack], Pos::Basic(_)) {
                        self.state[slack] = Pos::Lower;
                    }
                    self.place(slack);
                    self.head[r] = j;
                    self.state[j] = Pos::Basic(r);
                    free_row[r] = false;
                }
                None => {
                    self.state[j] = Pos::Lower;
                    self.place(j);
                }
            }
        }
        self.since_reinvert = 0;
        self.recompute_basics();
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let x = self.x[j];
        if x < self.lo[j] - PRIMAL_TOL {
            -1.0
        } else if x > self.up[j] + PRIMAL_TOL {
            1.0
        } else {
            0.0
        }
    }

    /// Solves from the current basis.
    pub fn solve(&mut self) -> Result<LpResult, LpError> {
        for j in 0..self.n + self.m {
            if !matches!(self.state[j], Pos::Basic(_)) {
                self.place(j);
            }
        }
        if self.since_reinvert > 0 {
            self.reinvert();
        } else {
            self.recompute_basics();
        }
        let mut degenerate = 0usize;
        let mut iterations = 0usize;
        loop {
            if iterations >= self.iteration_limit {
                return Err(LpError::IterationLimit(self.iteration_limit));
            }
            if self.since_reinvert >= REINVERT_EVERY {
                self.reinvert();
            }
            let phase_one = self.head.iter().any(|&j| self.infeasibility(j) != 0.0);
            let cb: Vec<f64> = self
                .head
                .iter()
                .map(|&j| {
                    if phase_one {
                        self.infeasibility(j)
                    } else {
                        self.cost[j]
                    }
                })
                .collect();
            let y = self.btran(&cb);
            let bland = degenerate >= DEGENERATE_SWITCH;

            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..self.n + self.m {
                let pos = self.state[j];
                if matches!(pos, Pos::Basic(_)) || self.lo[j] == self.up[j] {
                    continue;
                }
                let mut d = if phase_one { 0.0 } else { self.cost[j] };
                self.for_col(j, |i, a| d -= y[i] * a);
                let dir = if d < -DUAL_TOL && (pos != Pos::Upper) && self.x[j] < self.up[j] {
                    1.0
                } else if d > DUAL_TOL && (pos != Pos::Lower) && self.x[j] > self.lo[j] {
                    -1.0
                } else {
                    continue;
                };
                let better = match entering {
                    None => true,
                    Some((_, _, best)) => !bland && d.abs() > best,
                };
                if better {
                    entering = Some((j, dir, d.abs()));
                    if bland {
                        break;
                    }
                }
            }
            let Some((q, dir, _)) = entering else {
                let status = if phase_one {
                    LpStatus::Infeasible
                } else {
                    LpStatus::Optimal
                };
                self.total_iterations += iterations;
                return Ok(LpResult {
                    status,
                    objective: self.objective(),
                    x: self.values(),
                    iterations,
                });
            };

            let alpha = self.ftran(q);
            let mut best_t = f64::INFINITY;
            let mut leave: Option<(usize, bool)> = None;
            for (i, &a) in alpha.iter().enumerate() {
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let rate = -dir * a;
                let j = self.head[i];
                let (xi, lo, up) = (self.x[j], self.lo[j], self.up[j]);
                let (limit, to_upper) = if rate < 0.0 {
                    if phase_one && xi > up + PRIMAL_TOL {
                        ((xi - up) / -rate, true)
                    } else if lo.is_finite() && xi >= lo - PRIMAL_TOL {
                        ((xi - lo).max(0.0) / -rate, false)
                    } else {
                        continue;
                    }
                } else if phase_one && xi < lo - PRIMAL_TOL {
                    ((lo - xi) / rate, false)
                } else if up.is_finite() && xi <= up + PRIMAL_TOL {
                    ((up - xi).max(0.0) / rate, true)
                } else {
                    continue;
                };
                let take = match leave {
                    None => true,
                    Some((r, _)) => {
                        if limit < best_t - 1e-12 {
                            true
                        } else if limit <= best_t + 1e-12 {
                            if bland {
                                j < self.head[r]
                            } else {
                                a.abs() > alpha[r].abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if take {
                    best_t = best_t.min(limit);
                    if limit < best_t + 1e-12 {
                        best_t = limit;
                    }
                    leave = Some((i, to_upper));
                }
            }

            let flip = self.up[q] - self.lo[q];
            iterations += 1;
            if flip.is_finite() && flip <= best_t {
                for (i, &a) in alpha.iter().enumerate() {
                    let j = self.head[i];
                    self.x[j] -= dir * a * flip;
                }
                if dir > 0.0 {
                    self.state[q] = Pos::Upper;
                    self.x[q] = self.up[q];
                } else {
                    self.state[q] = Pos::Lower;
                    self.x[q] = self.lo[q];
                }
                degenerate = if flip <= 1e-11 { degenerate + 1 } else { 0 };
                continue;
            }
            let Some((r, to_upper)) = leave else {
                if phase_one {
                    return Err(LpError::Numerical("unbounded ray in phase one"));
                }
                self.total_iterations += iterations;
                return Ok(LpResult {
                    status: LpStatus::Unbounded,
                    objective: f64::NEG_INFINITY,
                    x: self.values(),
                    iterations,
                });
            };
            let t = best_t;
            for (i, &a) in alpha.iter().enumerate() {
                let j = self.head[i];
                self.x[j] -= dir * a * t;
            }
            self.x[q] += dir * t;
            let out = self.head[r];
            if to_upper {
                self.state[out] = Pos::Upper;
                self.x[out] = self.up[out];
            } else {
                self.state[out] = Pos::Lower;
                self.x[out] = self.lo[out];
            }
            self.pivot(r, &alpha);
            self.head[r] = q;
            self.state[q] = Pos::Basic(r);
            self.since_reinvert += 1;
            degenerate = if t <= 1e-11 { degenerate + 1 } else { 0 };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(cost: &[f64], bounds: &[(f64, f64)], rows: &[(&[(usize, f64)], f64, f64)]) -> LpProblem {
        let mut p = LpProblem::default();
        for (&c, &(l, u)) in cost.iter().zip(bounds) {
            p.add_col(c, l, u);
        }
        for &(t, l, u) in rows {
            p.add_row(t, l, u);
        }
        p
    }

    #[test]
    fn single_bound_row() {
        let p = lp(&[1.0], &[(0.0, 1.0)], &[(&[(0, 1.0)], 0.5, f64::INFINITY)]);
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 0.5).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows() {
        let p = lp(
            &[0.0],
            &[(f64::NEG_INFINITY, f64::INFINITY)],
            &[
                (&[(0, 1.0)], 1.0, f64::INFINITY),
                (&[(0, 1.0)], f64::NEG_INFINITY, 0.0),
            ],
        );
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let p = lp(
            &[-1.0, 0.0],
            &[(0.0, f64::INFINITY), (0.0, 1.0)],
            &[(&[(0, 1.0), (1, -1.0)], f64::NEG_INFINITY, 3.0)],
        );
        // x0 - x1 <= 3 bounds x0 by 4
        let r = solve_lp(&p).unwrap();
        assert!((r.objective + 4.0).abs() < 1e-9);
        let p = lp(
            &[-1.0, -1.0],
            &[(0.0, f64::INFINITY), (0.0, f64::INFINITY)],
            &[(&[(0, 1.0), (1, -1.0)], f64::NEG_INFINITY, 3.0)],
        );
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let p = lp(
            &[-3.0, -5.0],
            &[(0.0, f64::INFINITY), (0.0, f64::INFINITY)],
            &[
                (&[(0, 1.0)], f64::NEG_INFINITY, 4.0),
                (&[(1, 2.0)], f64::NEG_INFINITY, 12.0),
                (&[(0, 3.0), (1, 2.0)], f64::NEG_INFINITY, 18.0),
            ],
        );
        let r = solve_lp(&p).unwrap();
        assert!((r.objective + 36.0).abs() < 1e-9);
        assert!((r.x[0] - 2.0).abs() < 1e-9 && (r.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_free_columns() {
        // min x + y, x - y = 1, x, y free, x >= -2  -> x = -2, y = -3? objective unbounded below
        // add y >= 0: x = 1, y = 0
        let p = lp(
            &[1.0, 1.0],
            &[(f64::NEG_INFINITY, f64::INFINITY), (0.0, f64::INFINITY)],
            &[(&[(0, 1.0), (1, -1.0)], 1.0, 1.0)],
        );
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn warm_restart_after_bound_change() {
        let p = lp(
            &[-1.0, -1.0],
            &[(0.0, 1.0), (0.0, 1.0)],
            &[(&[(0, 1.0), (1, 1.0)], f64::NEG_INFINITY, 1.5)],
        );
        let mut s = Simplex::new(&p).unwrap();
        assert!((s.solve().unwrap().objective + 1.5).abs() < 1e-9);
        s.set_col_bounds(0, 0.0, 0.0);
        assert!((s.solve().unwrap().objective + 1.0).abs() < 1e-9);
        s.set_col_bounds(0, 1.0, 1.0);
        s.set_col_bounds(1, 1.0, 1.0);
        assert_eq!(s.solve().unwrap().status, LpStatus::Infeasible);
    }
}
