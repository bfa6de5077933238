//! Exhaustive reference solver and random instance generators.
//!
//! [`brute_force_min`] tries fill sets in order of size, and within a size
//! in lexicographic order, testing each candidate graph against the
//! five-vertex definition directly. It shares no code with the tree-based
//! recognizer or the completion solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::completion::CompletionResult;
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, VertexId};
use crate::tree::{induces_p4, random_tree, realize_graph};

/// Limits for [`brute_force_min`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    /// Largest number of fill edges tried besides `uv`.
    pub max_extra_edges: usize,
    /// Largest graph accepted.
    pub max_n: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_extra_edges: 8,
            max_n: 9,
        }
    }
}

/// Hard ceiling on `max_n`: rows are stored as `u64` bitmasks.
pub const ORACLE_N_LIMIT: usize = 64;

#[derive(Clone)]
struct Bits {
    rows: Vec<u64>,
}

impl Bits {
    fn from_graph(g: &Graph) -> Bits {
        let rows = g
            .vertices()
            .map(|v| g.neighbors(v).iter().fold(0u64, |acc, &w| acc | (1 << w)))
            .collect();
        Bits { rows }
    }

    fn add(&mut self, e: Edge) {
        self.rows[e.a()] |= 1 << e.b();
        self.rows[e.b()] |= 1 << e.a();
    }

    fn adjacent(&self, x: usize, y: usize) -> bool {
        self.rows[x] >> y & 1 == 1
    }

    fn quad_is_p4(&self, q: [usize; 4]) -> bool {
        let mut edges = 0;
        let mut deg = [0u8; 4];
        for i in 0..4 {
            for j in i + 1..4 {
                if self.adjacent(q[i], q[j]) {
                    edges += 1;
                    deg[i] += 1;
                    deg[j] += 1;
                }
            }
        }
        edges == 3 && deg.iter().all(|&d| d == 1 || d == 2)
    }

    /// At most one induced P4 on every five vertices.
    fn is_p4_sparse(&self) -> bool {
        let n = self.rows.len();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        for e in d + 1..n {
                            let f = [a, b, c, d, e];
                            let mut count = 0;
                            for skip in 0..5 {
                                let mut q = [0; 4];
                                let mut k = 0;
                                for (i, &x) in f.iter().enumerate() {
                                    if i != skip {
                                        q[k] = x;
                                        k += 1;
                                    }
                                }
                                if self.quad_is_p4(q) {
                                    count += 1;
                                    if count > 1 {
                                        return false;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        true
    }
}

/// Advances `idx` to the next `k`-combination of `0..m` in lexicographic
/// order. Returns false after the last one.
fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Lexicographically first `k`-subset of `pool` (whose first element is
/// `pool[first]`) that completes `base`.
fn search_from(base: &Bits, pool: &[Edge], first: usize, k: usize) -> Option<Vec<usize>> {
    let rest = pool.len() - first - 1;
    if k - 1 > rest {
        return None;
    }
    let mut with_first = base.clone();
    with_first.add(pool[first]);
    if k == 1 {
        return with_first.is_p4_sparse().then(|| vec![first]);
    }
    let mut idx: Vec<usize> = (0..k - 1).collect();
    loop {
        let mut trial = with_first.clone();
        for &i in &idx {
            trial.add(pool[first + 1 + i]);
        }
        if trial.is_p4_sparse() {
            let mut out = vec![first];
            out.extend(idx.iter().map(|&i| first + 1 + i));
            return Some(out);
        }
        if !next_combination(&mut idx, rest) {
            return None;
        }
    }
}

/// A minimum fill set through `uv` by exhaustive search. Among minimum sets
/// the lexicographically first (over the sorted non-edges) is returned, so
/// the answer does not depend on thread scheduling.
pub fn brute_force_min(
    g: &Graph,
    u: VertexId,
    v: VertexId,
    budget: OracleBudget,
) -> Result<CompletionResult> {
    let cap = budget.max_n.min(ORACLE_N_LIMIT);
    if g.n() > cap {
        return Err(Error::TooLarge { n: g.n(), cap });
    }
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    if u == v {
        return Err(Error::SameVertex(u));
    }
    if g.has_edge(u, v) {
        return Err(Error::AlreadyAdjacent { u, v });
    }
    let uv = Edge::new(u, v);
    let mut base = Bits::from_graph(g);
    base.add(uv);
    let pool: Vec<Edge> = g.non_edges().filter(|&e| e != uv).collect();
    let finish = |extra: Vec<Edge>| {
        let mut fill = extra;
        fill.push(uv);
        CompletionResult::new(g, fill)
    };
    if base.is_p4_sparse() {
        return finish(Vec::new());
    }
    for k in 1..=budget.max_extra_edges.min(pool.len()) {
        let hit = (0..pool.len())
            .into_par_iter()
            .find_map_first(|first| search_from(&base, &pool, first, k));
        if let Some(idx) = hit {
            return finish(idx.into_iter().map(|i| pool[i]).collect());
        }
    }
    Err(Error::BudgetExceeded {
        max_extra: budget.max_extra_edges,
    })
}

/// Number of four-vertex subsets inducing a P4.
pub fn count_induced_p4(g: &Graph) -> usize {
    let n = g.n();
    let mut count = 0;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    if induces_p4(g, [a, b, c, d]) {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// Realization of [`random_tree`]: always P4-sparse.
pub fn random_p4_sparse(n: usize, seed: u64) -> Graph {
    realize_graph(&random_tree(n, seed))
}

/// Erdős–Rényi graph with edge probability `p`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Graph::from_edges(n, edges).expect("valid endpoints")
}

/// `g` with `flips` uniformly chosen vertex pairs toggled.
pub fn perturb(g: &Graph, flips: usize, seed: u64) -> Graph {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: std::collections::BTreeSet<(usize, usize)> =
        g.edges().map(|e| e.endpoints()).collect();
    if n >= 2 {
        for _ in 0..flips {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            let pair = (a.min(b), a.max(b));
            if !edges.remove(&pair) {
                edges.insert(pair);
            }
        }
    }
    Graph::from_edges(n, edges).expect("valid endpoints")
}
