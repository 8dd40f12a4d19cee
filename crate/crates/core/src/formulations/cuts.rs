use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::instance::{ConflictGraph, Instance};
use crate::milp::{MilpModel, Origin, Sense, VarId, VarTag};
use crate::solver::Separator;

use super::{occupancy_index, pattern_penalty, FormulationError};

const VIOLATION_EPS: f64 = 1e-6;

/// Adds `Σ_{c∈q} occupancy(p, c) ≤ 1` for every clique `q` and period `p`.
/// Cuts already present under the same name are skipped. Returns the
/// number of cuts added.
pub fn add_clique_cuts(
    model: &mut MilpModel,
    inst: &Instance,
    cliques: &[Vec<usize>],
) -> Result<usize, FormulationError> {
    let graph = inst.build_conflict_graph();
    let index = occupancy_index(model);
    let mut added = 0;
    for q in cliques {
        let mut q = q.clone();
        q.sort_unstable();
        if q.len() < 2 || !graph.is_clique(&q) {
            return Err(FormulationError::NotAClique(q));
        }
        let label = q
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join("_");
        for p in 0..inst.num_periods() {
            let terms: Vec<(f64, VarId)> = q
                .iter()
                .flat_map(|&c| index.get(&(p, c)).into_iter().flatten())
                .map(|&v| (1.0, v))
                .collect();
            if model.add_constraint_dedup(
                format!("clq_{label}_p{p}"),
                terms,
                Sense::Le,
                1.0,
                Origin::CliqueCut,
            )? {
                added += 1;
            }
        }
    }
    Ok(added)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolatedClique {
    /// Ascending course indices.
    pub courses: Vec<usize>,
    pub period: usize,
    /// Sum of the fractional values over the clique.
    pub value: f64,
}

/// Finds triangles whose values at some period sum to more than one and
/// greedily grows each into a larger clique, always adding the common
/// neighbour with the largest positive value. With `discard_ungrown`,
/// triangles that cannot be grown are dropped.
pub fn separate_cliques(
    graph: &ConflictGraph,
    fractional: &BTreeMap<(usize, usize), f64>,
    discard_ungrown: bool,
) -> Vec<ViolatedClique> {
    let periods: BTreeSet<usize> = fractional.keys().map(|&(p, _)| p).collect();
    let triangles = graph.triangles();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &p in &periods {
        let value = |c: usize| fractional.get(&(p, c)).copied().unwrap_or(0.0);
        for tri in &triangles {
            let sum: f64 = tri.iter().map(|&c| value(c)).sum();
            if sum <= 1.0 + VIOLATION_EPS {
                continue;
            }
            let mut clique = tri.to_vec();
            let mut total = sum;
            loop {
                let best = (0..graph.num_vertices())
                    .filter(|v| !clique.contains(v) && value(*v) > VIOLATION_EPS)
                    .filter(|&v| clique.iter().all(|&m| graph.has_edge(m, v)))
                    .max_by(|&a, &b| value(a).total_cmp(&value(b)).then(b.cmp(&a)));
                match best {
                    Some(v) => {
                        total += value(v);
                        clique.push(v);
                    }
                    None => break,
                }
            }
            if discard_ungrown && clique.len() == 3 {
                continue;
            }
            clique.sort_unstable();
            if seen.insert((clique.clone(), p)) {
                out.push(ViolatedClique {
                    courses: clique,
                    period: p,
                    value: total,
                });
            }
        }
    }
    out
}

/// Root-node separator: sums the occupancy values of the LP point per
/// `(period, course)`, grows violated triangles into cliques and adds the
/// corresponding cuts.
pub struct CliqueSeparator {
    graph: ConflictGraph,
    discard_ungrown: bool,
}

impl CliqueSeparator {
    pub fn new(inst: &Instance) -> CliqueSeparator {
        CliqueSeparator {
            graph: inst.build_conflict_graph(),
            discard_ungrown: false,
        }
    }

    /// Drops violated triangles that cannot be grown further.
    pub fn discard_ungrown(mut self, yes: bool) -> CliqueSeparator {
        self.discard_ungrown = yes;
        self
    }
}

impl Separator for CliqueSeparator {
    fn separate(&mut self, model: &mut MilpModel, x: &[f64]) -> usize {
        let index = occupancy_index(model);
        let values: BTreeMap<(usize, usize), f64> = index
            .iter()
            .map(|(&key, vars)| (key, vars.iter().map(|v| x[v.index()]).sum::<f64>()))
            .filter(|&(_, v)| v > VIOLATION_EPS)
            .collect();
        let mut added = 0;
        for cut in separate_cliques(&self.graph, &values, self.discard_ungrown) {
            let label = cut
                .courses
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join("_");
            let terms: Vec<(f64, VarId)> = cut
                .courses
                .iter()
                .flat_map(|&c| index.get(&(cut.period, c)).into_iter().flatten())
                .map(|&v| (1.0, v))
                .collect();
            let name = format!("clq_{label}_p{}", cut.period);
            if let Ok(true) =
                model.add_constraint_dedup(name, terms, Sense::Le, 1.0, Origin::CliqueCut)
            {
                added += 1;
            }
        }
        added
    }
}

/// Adds `Σ_d CourseSchedule[d,c] ≥ 1` for every course with events and, when
/// the model has room-usage variables, `Σ_r CourseRooms[r,c] ≥ 1`.
pub fn add_implied_bound_cuts(
    model: &mut MilpModel,
    inst: &Instance,
) -> Result<usize, FormulationError> {
    let nc = inst.courses.len();
    let mut days: Vec<Vec<(f64, VarId)>> = vec![Vec::new(); nc];
    let mut rooms: Vec<Vec<(f64, VarId)>> = vec![Vec::new(); nc];
    for (j, v) in model.variables().iter().enumerate() {
        match v.tag {
            VarTag::CourseSchedule { course, .. } => days[course].push((1.0, model.id_of(j))),
            VarTag::CourseRooms { course, .. } | VarTag::MultiCourseRooms { course, .. } => {
                rooms[course].push((1.0, model.id_of(j)))
            }
            _ => {}
        }
    }
    let mut added = 0;
    for c in 0..nc {
        if inst.courses[c].events == 0 {
            continue;
        }
        if !days[c].is_empty()
            && model.add_constraint_dedup(
                format!("impd_{c}"),
                days[c].clone(),
                Sense::Ge,
                1.0,
                Origin::ImpliedDays,
            )?
        {
            added += 1;
        }
        if !rooms[c].is_empty()
            && model.add_constraint_dedup(
                format!("impr_{c}"),
                rooms[c].clone(),
                Sense::Ge,
                1.0,
                Origin::ImpliedRooms,
            )?
        {
            added += 1;
        }
    }
    Ok(added)
}

/// All `±1` day patterns of length `n` with a positive isolation count,
/// paired with that count.
pub fn enumerate_patterns(n: usize) -> Vec<(Vec<i8>, u32)> {
    (0u32..1 << n)
        .map(|bits| {
            (0..n)
                .map(|i| if bits >> i & 1 == 1 { 1 } else { -1 })
                .collect::<Vec<i8>>()
        })
        .map(|a| {
            let p = pattern_penalty(&a);
            (a, p)
        })
        .filter(|&(_, p)| p > 0)
        .collect()
}

/// Left-hand side of a pattern cut at a day's occupancy:
/// `p (Σ a_i occ_i − m + 1)` with `m` the number of occupied positions of
/// the pattern. It equals `p` on the pattern itself and is at most zero on
/// every other day.
pub fn pattern_cut_lhs(pattern: &[i8], penalty: u32, day: &[bool]) -> i64 {
    let m = pattern.iter().filter(|&&a| a > 0).count() as i64;
    let dot: i64 = pattern
        .iter()
        .zip(day)
        .map(|(&a, &o)| if o { a as i64 } else { 0 })
        .sum();
    penalty as i64 * (dot - m + 1)
}

/// Adds, for every curriculum and day, the cut
/// `p (Σ a_i occ_i − m + 1) ≤ Σ_s Singletons[u,d,s]` of each pattern.
pub fn add_pattern_cuts(
    model: &mut MilpModel,
    inst: &Instance,
    patterns: &[(Vec<i8>, u32)],
) -> Result<usize, FormulationError> {
    let ppd = inst.periods_per_day as usize;
    for (a, p) in patterns {
        if a.len() != ppd {
            return Err(FormulationError::PatternLength {
                expected: ppd,
                found: a.len(),
            });
        }
        let expected = pattern_penalty(a);
        if a.iter().any(|&x| x != 1 && x != -1) || expected != *p {
            return Err(FormulationError::PatternPenalty {
                pattern: a.clone(),
                expected,
                found: *p,
            });
        }
    }
    let index = occupancy_index(model);
    let mut added = 0;
    for (u, cur) in inst.curricula.iter().enumerate() {
        for d in 0..inst.num_days() {
            let singles: Vec<VarId> = (0..ppd)
                .map(|s| {
                    model
                        .var_by_tag(VarTag::Singleton {
                            curriculum: u,
                            day: d,
                            slot: s,
                        })
                        .ok_or(FormulationError::MissingVariables("Singleton"))
                })
                .collect::<Result<_, _>>()?;
            let periods: Vec<usize> = inst.day_periods(d).collect();
            for (a, p) in patterns {
                let pf = *p as f64;
                let m = a.iter().filter(|&&x| x > 0).count() as f64;
                let mut terms: Vec<(f64, VarId)> = Vec::new();
                for (i, &ai) in a.iter().enumerate() {
                    for &c in &cur.courses {
                        for &v in index.get(&(periods[i], c)).into_iter().flatten() {
                            terms.push((pf * ai as f64, v));
                        }
                    }
                }
                terms.extend(singles.iter().map(|&s| (-1.0, s)));
                let code: String = a.iter().map(|&x| if x > 0 { '1' } else { '0' }).collect();
                if model.add_constraint_dedup(
                    format!("pat_{u}_{d}_{code}"),
                    terms,
                    Sense::Le,
                    pf * (m - 1.0),
                    Origin::PatternCut,
                )? {
                    added += 1;
                }
            }
        }
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::isolated_lectures;
    use crate::formulations::{build_monolithic, build_surface, SurfaceOptions};
    use crate::instance::parse::tests_support::TOY;
    use crate::instance::{parse_ctt, EdgeReason};

    fn complete(n: usize) -> ConflictGraph {
        let mut e = BTreeMap::new();
        for a in 0..n {
            for b in a + 1..n {
                e.insert((a, b), EdgeReason::Curriculum);
            }
        }
        ConflictGraph::from_edges(n, e)
    }

    #[test]
    fn half_triangle_is_violated() {
        let g = complete(3);
        let f: BTreeMap<_, _> = [((0, 0), 0.5), ((0, 1), 0.5), ((0, 2), 0.5)]
            .into_iter()
            .collect();
        let v = separate_cliques(&g, &f, false);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].courses, vec![0, 1, 2]);
        assert!((v[0].value - 1.5).abs() < 1e-12);
        assert!(separate_cliques(&g, &f, true).is_empty());
    }

    #[test]
    fn triangle_grows_into_four_clique() {
        let g = complete(4);
        let f: BTreeMap<_, _> = (0..4).map(|c| ((2, c), 0.4)).collect();
        let v = separate_cliques(&g, &f, true);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].courses, vec![0, 1, 2, 3]);
        assert_eq!(v[0].period, 2);
    }

    #[test]
    fn integral_point_has_no_violation() {
        let g = complete(4);
        let f: BTreeMap<_, _> = [((0, 0), 1.0), ((0, 1), 0.0), ((1, 2), 1.0)]
            .into_iter()
            .collect();
        assert!(separate_cliques(&g, &f, false).is_empty());
    }

    #[test]
    fn clique_cuts_per_period_and_dedup() {
        let inst = parse_ctt(TOY).unwrap();
        let opts = SurfaceOptions {
            clique_cuts: false,
            stratified: false,
        };
        let mut m = build_surface(&inst, &opts).unwrap();
        // SceCosC, ArcTec, TecCos share Cur1
        assert_eq!(
            add_clique_cuts(&mut m, &inst, &[vec![0, 1, 2]]).unwrap(),
            20
        );
        assert_eq!(add_clique_cuts(&mut m, &inst, &[vec![2, 1, 0]]).unwrap(), 0);
        assert_eq!(add_clique_cuts(&mut m, &inst, &[vec![0, 1]]).unwrap(), 20);
        assert!(matches!(
            add_clique_cuts(&mut m, &inst, &[vec![0, 3]]),
            Err(FormulationError::NotAClique(_))
        ));
    }

    #[test]
    fn implied_families() {
        let inst = parse_ctt(TOY).unwrap();
        let mut mono = build_monolithic(&inst);
        assert_eq!(add_implied_bound_cuts(&mut mono, &inst).unwrap(), 8);
        let mut surf = build_surface(&inst, &SurfaceOptions::default()).unwrap();
        assert_eq!(add_implied_bound_cuts(&mut surf, &inst).unwrap(), 4);
        assert!(!surf.origins().contains(&Origin::ImpliedRooms));
    }

    #[test]
    fn pattern_lhs_matches_only_its_pattern() {
        let a = [1, -1, 1, -1];
        for bits in 0u32..16 {
            let day: Vec<bool> = (0..4).map(|i| bits >> i & 1 == 1).collect();
            let lhs = pattern_cut_lhs(&a, 2, &day);
            if day == [true, false, true, false] {
                assert_eq!(lhs, 2);
            } else {
                assert!(lhs <= 0);
            }
            assert!(lhs <= isolated_lectures(&day) as i64);
        }
    }

    #[test]
    fn pattern_cut_validation() {
        let inst = parse_ctt(TOY).unwrap();
        let mut m = build_surface(&inst, &SurfaceOptions::default()).unwrap();
        assert!(matches!(
            add_pattern_cuts(&mut m, &inst, &[(vec![1, -1, 1], 2)]),
            Err(FormulationError::PatternLength { .. })
        ));
        assert!(matches!(
            add_pattern_cuts(&mut m, &inst, &[(vec![1, -1, 1, -1], 1)]),
            Err(FormulationError::PatternPenalty { .. })
        ));
        let n = add_pattern_cuts(&mut m, &inst, &[(vec![1, -1, -1, -1], 1)]).unwrap();
        assert_eq!(n, 2 * 5);
        let row = m.constraint_by_name("pat_0_0_1000").unwrap();
        assert_eq!(row.rhs, 0.0);
    }

    #[test]
    fn enumerated_patterns_have_positive_penalty() {
        let pats = enumerate_patterns(4);
        assert!(pats.iter().all(|(_, p)| *p > 0));
        assert!(pats
            .iter()
            .any(|(a, p)| a == &vec![1, -1, 1, -1] && *p == 2));
        assert!(!pats.iter().any(|(a, _)| a == &vec![1, 1, -1, -1]));
    }
}
