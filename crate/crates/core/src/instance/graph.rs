use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::Instance;

/// Why two courses conflict. When both apply, the curriculum is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeReason {
    Curriculum,
    Teacher,
}

/// Course-based conflict graph: one vertex per course, an edge whenever two
/// courses share a curriculum or a teacher.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    n: usize,
    edges: BTreeMap<(usize, usize), EdgeReason>,
    adjacency: Vec<Vec<usize>>,
    matrix: Vec<Vec<bool>>,
}

impl ConflictGraph {
    pub fn build(inst: &Instance) -> ConflictGraph {
        let mut edges = BTreeMap::new();
        for u in &inst.curricula {
            for (i, &a) in u.courses.iter().enumerate() {
                for &b in &u.courses[i + 1..] {
                    if a != b {
                        edges.insert((a.min(b), a.max(b)), EdgeReason::Curriculum);
                    }
                }
            }
        }
        for t in 0..inst.teachers().len() {
            let taught = inst.teacher_courses(t);
            for (i, &a) in taught.iter().enumerate() {
                for &b in &taught[i + 1..] {
                    edges.entry((a, b)).or_insert(EdgeReason::Teacher);
                }
            }
        }
        ConflictGraph::from_edges(inst.courses.len(), edges)
    }

    pub fn from_edges(n: usize, edges: BTreeMap<(usize, usize), EdgeReason>) -> ConflictGraph {
        let mut adjacency = vec![Vec::new(); n];
        let mut matrix = vec![vec![false; n]; n];
        for &(a, b) in edges.keys() {
            debug_assert!(a < b && b < n);
            adjacency[a].push(b);
            adjacency[b].push(a);
            matrix[a][b] = true;
            matrix[b][a] = true;
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        ConflictGraph {
            n,
            edges,
            adjacency,
            matrix,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edge count over `n choose 2`; zero for fewer than two vertices.
    pub fn density(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let pairs = (self.n * (self.n - 1) / 2) as f64;
        self.edges.len() as f64 / pairs
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.matrix[a][b]
    }

    pub fn reason(&self, a: usize, b: usize) -> Option<EdgeReason> {
        self.edges.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), EdgeReason)> + '_ {
        self.edges.iter().map(|(&k, &v)| (k, v))
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(i, &a)| {
            a < self.n
                && vertices[i + 1..]
                    .iter()
                    .all(|&b| a != b && self.matrix[a][b])
        })
    }

    /// All triangles `(a, b, c)` with `a < b < c`.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for &b in self.adjacency[a].iter().filter(|&&b| b > a) {
                for &c in self.adjacency[b].iter().filter(|&&c| c > b) {
                    if self.matrix[a][c] {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        out
    }

    /// Greedy maximal cliques, one seeded from each vertex in order of
    /// decreasing degree. Only cliques with at least three members are kept,
    /// since edges are already covered by curriculum and teacher rows.
    pub fn greedy_clique_cover(&self) -> Vec<Vec<usize>> {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| self.degree(b).cmp(&self.degree(a)).then(a.cmp(&b)));
        let rank: Vec<usize> = {
            let mut r = vec![0; self.n];
            for (i, &v) in order.iter().enumerate() {
                r[v] = i;
            }
            r
        };
        let mut seen = BTreeSet::new();
        let mut cliques = Vec::new();
        for &seed in &order {
            let mut candidates: Vec<usize> = self.adjacency[seed].clone();
            candidates.sort_by_key(|&v| rank[v]);
            let mut clique = vec![seed];
            for v in candidates {
                if clique.iter().all(|&m| self.matrix[m][v]) {
                    clique.push(v);
                }
            }
            if clique.len() >= 3 {
                clique.sort_unstable();
                if seen.insert(clique.clone()) {
                    cliques.push(clique);
                }
            }
        }
        cliques
    }
}
