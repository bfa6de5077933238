//! Simple undirected graphs on dense vertex ids.
//!
//! A [`Graph`] is immutable once built. Adjacency is stored as one sorted
//! neighbor list per vertex, which gives `O(deg)` iteration and
//! `O(log deg)` membership tests.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type VertexId = usize;

/// An unordered vertex pair, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    a: VertexId,
    b: VertexId,
}

impl Edge {
    /// Panics on a self-loop.
    pub fn new(x: VertexId, y: VertexId) -> Edge {
        assert_ne!(x, y, "an edge needs two distinct endpoints");
        if x < y {
            Edge { a: x, b: y }
        } else {
            Edge { a: y, b: x }
        }
    }

    pub fn try_new(x: VertexId, y: VertexId) -> Result<Edge> {
        if x == y {
            return Err(Error::SelfLoop(x));
        }
        Ok(Edge::new(x, y))
    }

    pub fn a(&self) -> VertexId {
        self.a
    }

    pub fn b(&self) -> VertexId {
        self.b
    }

    pub fn endpoints(&self) -> (VertexId, VertexId) {
        (self.a, self.b)
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.a == v || self.b == v
    }
}

impl From<Edge> for (VertexId, VertexId) {
    fn from(e: Edge) -> Self {
        (e.a, e.b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    adj: Vec<Vec<VertexId>>,
    m: usize,
}

impl Graph {
    /// The edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Graph {
        Graph {
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    /// Builds a graph from an edge list. Duplicate pairs are merged; loops
    /// and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (x, y) in edges {
            for v in [x, y] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            if x == y {
                return Err(Error::SelfLoop(x));
            }
            adj[x].push(y);
            adj[y].push(x);
        }
        Ok(Graph::from_raw_adjacency(adj))
    }

    fn from_raw_adjacency(mut adj: Vec<Vec<VertexId>>) -> Graph {
        let mut twice_m = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            twice_m += list.len();
        }
        Graph {
            adj,
            m: twice_m / 2,
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.n()
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, x: VertexId, y: VertexId) -> bool {
        if x >= self.n() || y >= self.n() {
            return false;
        }
        let (small, other) = if self.adj[x].len() <= self.adj[y].len() {
            (x, y)
        } else {
            (y, x)
        };
        self.adj[small].binary_search(&other).is_ok()
    }

    /// All edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adj.iter().enumerate().flat_map(|(a, list)| {
            list.iter()
                .copied()
                .filter(move |&b| b > a)
                .map(move |b| Edge { a, b })
        })
    }

    /// All non-adjacent pairs in lexicographic order.
    pub fn non_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let n = self.n();
        (0..n).flat_map(move |a| {
            (a + 1..n)
                .filter(move |&b| !self.has_edge(a, b))
                .map(move |b| Edge { a, b })
        })
    }

    /// The graph with `extra` added. Edges already present are ignored.
    pub fn with_edges<I>(&self, extra: I) -> Graph
    where
        I: IntoIterator<Item = Edge>,
    {
        let mut adj = self.adj.clone();
        for e in extra {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        Graph::from_raw_adjacency(adj)
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v,
                n: self.n(),
            })
        }
    }

    /// Full scan of the representation invariants.
    pub fn is_well_formed(&self) -> bool {
        self.adj.iter().enumerate().all(|(v, list)| {
            list.windows(2).all(|w| w[0] < w[1])
                && list
                    .iter()
                    .all(|&w| w != v && w < self.n() && self.adj[w].binary_search(&v).is_ok())
        })
    }

    /// Parses the plain-text format: a header `n m` followed by `m` lines
    /// `a b`. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Graph> {
        let mut header: Option<(usize, usize)> = None;
        let mut adj: Vec<Vec<VertexId>> = Vec::new();
        let mut seen = 0usize;
        let mut last_line = 0usize;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields = parse_pair(line, line_no)?;
            match header {
                None => {
                    let (n, m) = fields;
                    header = Some((n, m));
                    adj = vec![Vec::new(); n];
                }
                Some((n, m)) => {
                    let (a, b) = fields;
                    if seen == m {
                        return Err(parse_error(
                            line_no,
                            format!("more than the declared {m} edges"),
                        ));
                    }
                    if a >= n || b >= n {
                        return Err(parse_error(
                            line_no,
                            format!("edge {a} {b} has an endpoint outside 0..{n}"),
                        ));
                    }
                    if a == b {
                        return Err(parse_error(line_no, format!("self-loop on vertex {a}")));
                    }
                    adj[a].push(b);
                    adj[b].push(a);
                    seen += 1;
                }
            }
        }
        let Some((_, m)) = header else {
            return Err(parse_error(
                last_line.max(1),
                "missing header line `n m`".into(),
            ));
        };
        if seen != m {
            return Err(parse_error(
                last_line.max(1),
                format!("header declares {m} edges but {seen} were given"),
            ));
        }
        let g = Graph::from_raw_adjacency(adj);
        if g.m() != m {
            return Err(parse_error(
                last_line.max(1),
                "duplicate edge in edge list".into(),
            ));
        }
        Ok(g)
    }

    /// Serializes to the plain-text format, edges in lexicographic order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n(), self.m());
        for e in self.edges() {
            let _ = writeln!(out, "{} {}", e.a, e.b);
        }
        out
    }
}

fn parse_pair(line: &str, line_no: usize) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        let tok = it.next().ok_or_else(|| {
            parse_error(line_no, format!("expected two integers, missing {what}"))
        })?;
        tok.parse::<usize>()
            .map_err(|_| parse_error(line_no, format!("`{tok}` is not a non-negative integer")))
    };
    let x = next("first field")?;
    let y = next("second field")?;
    if let Some(extra) = it.next() {
        return Err(parse_error(
            line_no,
            format!("unexpected trailing token `{extra}`"),
        ));
    }
    Ok((x, y))
}

fn parse_error(line: usize, message: String) -> Error {
    Error::Parse { line, message }
}

/// Maps between a parent graph and an induced subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexMap {
    to_new: Vec<Option<VertexId>>,
    to_old: Vec<VertexId>,
}

impl IndexMap {
    pub fn new_id(&self, old: VertexId) -> Option<VertexId> {
        self.to_new.get(old).copied().flatten()
    }

    pub fn old_id(&self, new: VertexId) -> VertexId {
        self.to_old[new]
    }

    /// Parent ids of the subgraph vertices, in subgraph order.
    pub fn old_ids(&self) -> &[VertexId] {
        &self.to_old
    }

    pub fn edge_to_old(&self, e: Edge) -> Edge {
        Edge::new(self.to_old[e.a], self.to_old[e.b])
    }
}

/// `G[S]`, with vertices renumbered in increasing order of their parent id.
pub fn induced_subgraph(g: &Graph, subset: &[VertexId]) -> Result<(Graph, IndexMap)> {
    let mut to_old: Vec<VertexId> = subset.to_vec();
    for &v in &to_old {
        g.check_vertex(v)?;
    }
    to_old.sort_unstable();
    to_old.dedup();
    let mut to_new = vec![None; g.n()];
    for (i, &v) in to_old.iter().enumerate() {
        to_new[v] = Some(i);
    }
    let adj = to_old
        .iter()
        .map(|&v| g.neighbors(v).iter().filter_map(|&w| to_new[w]).collect())
        .collect();
    Ok((Graph::from_raw_adjacency(adj), IndexMap { to_new, to_old }))
}

/// Reusable marker array; `stamp` bumps a generation instead of clearing.
#[derive(Debug, Clone)]
pub(crate) struct Marks {
    mark: Vec<u32>,
    gen: u32,
}

impl Marks {
    pub(crate) fn new(n: usize) -> Marks {
        Marks {
            mark: vec![0; n],
            gen: 0,
        }
    }

    pub(crate) fn stamp(&mut self) -> u32 {
        self.gen = self.gen.wrapping_add(1);
        if self.gen == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.gen = 1;
        }
        self.gen
    }

    pub(crate) fn set(&mut self, v: VertexId, gen: u32) {
        self.mark[v] = gen;
    }

    pub(crate) fn is(&self, v: VertexId, gen: u32) -> bool {
        self.mark[v] == gen
    }
}

/// Components of `G[members]`. `members` must be duplicate-free.
pub(crate) fn components_within(
    g: &Graph,
    members: &[VertexId],
    inside: &mut Marks,
    seen: &mut Marks,
) -> Vec<Vec<VertexId>> {
    let in_gen = inside.stamp();
    for &v in members {
        inside.set(v, in_gen);
    }
    let seen_gen = seen.stamp();
    let mut parts = Vec::new();
    for &start in members {
        if seen.is(start, seen_gen) {
            continue;
        }
        seen.set(start, seen_gen);
        let mut part = vec![start];
        let mut head = 0;
        while head < part.len() {
            let x = part[head];
            head += 1;
            for &y in g.neighbors(x) {
                if inside.is(y, in_gen) && !seen.is(y, seen_gen) {
                    seen.set(y, seen_gen);
                    part.push(y);
                }
            }
        }
        parts.push(part);
    }
    parts
}

/// Components of the complement of `G[members]`, by BFS over a shrinking
/// set of unvisited vertices. Linear in `|members|` plus the edges of
/// `G[members]`; the complement is never built.
pub(crate) fn co_components_within(
    g: &Graph,
    members: &[VertexId],
    inside: &mut Marks,
    adjacent: &mut Marks,
) -> Vec<Vec<VertexId>> {
    let in_gen = inside.stamp();
    for &v in members {
        inside.set(v, in_gen);
    }
    let mut unvisited: Vec<VertexId> = members.iter().rev().copied().collect();
    let mut parts = Vec::new();
    while let Some(start) = unvisited.pop() {
        let mut part = vec![start];
        let mut head = 0;
        while head < part.len() && !unvisited.is_empty() {
            let x = part[head];
            head += 1;
            let adj_gen = adjacent.stamp();
            for &y in g.neighbors(x) {
                if inside.is(y, in_gen) {
                    adjacent.set(y, adj_gen);
                }
            }
            let mut kept = Vec::with_capacity(unvisited.len());
            for &y in &unvisited {
                if adjacent.is(y, adj_gen) {
                    kept.push(y);
                } else {
                    part.push(y);
                }
            }
            unvisited = kept;
        }
        parts.push(part);
    }
    parts
}

fn normalize_partition(mut parts: Vec<Vec<VertexId>>) -> Vec<Vec<VertexId>> {
    for p in &mut parts {
        p.sort_unstable();
    }
    parts.sort_unstable_by_key(|p| p[0]);
    parts
}

/// Vertex sets of the connected components, each sorted, ordered by their
/// smallest vertex.
pub fn connected_components(g: &Graph) -> Vec<Vec<VertexId>> {
    let all: Vec<VertexId> = g.vertices().collect();
    let mut a = Marks::new(g.n());
    let mut b = Marks::new(g.n());
    normalize_partition(components_within(g, &all, &mut a, &mut b))
}

/// Connected components of the complement graph, in the same normal form as
/// [`connected_components`].
pub fn co_components(g: &Graph) -> Vec<Vec<VertexId>> {
    let all: Vec<VertexId> = g.vertices().collect();
    let mut a = Marks::new(g.n());
    let mut b = Marks::new(g.n());
    normalize_partition(co_components_within(g, &all, &mut a, &mut b))
}

/// `N(u) ∩ N(v)`, sorted.
pub fn common_neighbors(g: &Graph, u: VertexId, v: VertexId) -> Result<Vec<VertexId>> {
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    if u == v {
        return Err(Error::SameVertex(u));
    }
    let (nu, nv) = (g.neighbors(u), g.neighbors(v));
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < nu.len() && j < nv.len() {
        match nu[i].cmp(&nv[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(nu[i]);
                i += 1;
                j += 1;
            }
        }
    }
    Ok(out)
}

/// The non-edges incident on `u`: the fill that makes `u` universal.
pub fn universal_fill(g: &Graph, u: VertexId) -> Result<Vec<Edge>> {
    g.check_vertex(u)?;
    let nu = g.neighbors(u);
    Ok(g.vertices()
        .filter(|&w| w != u && nu.binary_search(&w).is_err())
        .map(|w| Edge::new(u, w))
        .collect())
}
