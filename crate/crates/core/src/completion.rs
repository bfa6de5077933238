//! Minimum P4-sparse completion through a given non-edge.
//!
//! [`min_edge_addition`] dispatches on the least common ancestor of `u` and
//! `v` in the P4-sparse tree:
//!
//! * a spider with `u, v` in its stable set / clique uses closed forms
//!   ([`spider_case_ks`], [`spider_case_ss`], [`spider_case_sr`]);
//! * a union node reduces to the two-component problem on the children
//!   holding `u` and `v`, which is solved by a memoized recursion over pairs
//!   of nodes on the two root-to-leaf paths ([`solve_2cc`]).
//!
//! Replacing the subtree of the LCA by any P4-sparse graph on the same
//! vertices keeps the whole graph P4-sparse, so fill edges never leave it.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{induced_subgraph, Edge, Graph, Marks, VertexId};
use crate::tree::{
    build_tree, lca, NodeId, NodeKind, NodeLabel, PSTree, SpiderKind, SpiderPartition, SpiderRole,
};

/// A fill set and the graph it produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionResult {
    /// Sorted fill edges, `uv` included.
    pub fill: Vec<Edge>,
    pub completed: Graph,
}

impl CompletionResult {
    /// Sorts and dedups `fill`, rejects edges already in `g`.
    pub fn new(g: &Graph, mut fill: Vec<Edge>) -> Result<CompletionResult> {
        fill.sort_unstable();
        fill.dedup();
        for e in &fill {
            g.check_vertex(e.b())?;
            if g.has_edge(e.a(), e.b()) {
                return Err(Error::AlreadyAdjacent { u: e.a(), v: e.b() });
            }
        }
        let completed = g.with_edges(fill.iter().copied());
        Ok(CompletionResult { fill, completed })
    }

    pub fn size(&self) -> usize {
        self.fill.len()
    }

    fn validated(self) -> Result<CompletionResult> {
        match build_tree(&self.completed) {
            Ok(_) => Ok(self),
            Err(e) => Err(Error::InvalidCompletion(e.to_string())),
        }
    }
}

/// Solution shapes of the two-component problem, in tie-breaking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    /// `u` adjacent to everything.
    UniversalU,
    UniversalV,
    /// The top join of `u`'s side is kept and joined to `v`'s side.
    PeelU,
    PeelV,
    /// The top spider of `u`'s side is kept with `v`'s side moved into its
    /// head.
    SpiderHeadU,
    SpiderHeadV,
    /// `u` has a single neighbor on its side, which becomes universal.
    ThinLegU,
    ThinLegV,
    /// Both sides merge into one spider.
    SpiderJoin,
    /// Both endpoints hang off universal vertices.
    DoubleStar,
    /// `u` is a stable vertex of a thick spider; its clique non-neighbor
    /// becomes universal and the rest is solved again.
    ThickLegU,
    ThickLegV,
}

impl Shape {
    pub const ALL: [Shape; 12] = [
        Shape::UniversalU,
        Shape::UniversalV,
        Shape::PeelU,
        Shape::PeelV,
        Shape::SpiderHeadU,
        Shape::SpiderHeadV,
        Shape::ThinLegU,
        Shape::ThinLegV,
        Shape::SpiderJoin,
        Shape::DoubleStar,
        Shape::ThickLegU,
        Shape::ThickLegV,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Shape::UniversalU => "UNIVERSAL_U",
            Shape::UniversalV => "UNIVERSAL_V",
            Shape::PeelU => "PEEL_U",
            Shape::PeelV => "PEEL_V",
            Shape::SpiderHeadU => "SPIDER_HEAD_U",
            Shape::SpiderHeadV => "SPIDER_HEAD_V",
            Shape::ThinLegU => "THIN_LEG_U",
            Shape::ThinLegV => "THIN_LEG_V",
            Shape::SpiderJoin => "SPIDER_JOIN",
            Shape::DoubleStar => "DOUBLE_STAR",
            Shape::ThickLegU => "THICK_LEG_U",
            Shape::ThickLegV => "THICK_LEG_V",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One concrete, validated solution of a two-component instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub shape: Shape,
    pub fill: Vec<Edge>,
    pub completed: Graph,
}

/// Counters for one query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QueryStats {
    /// Distinct two-component subproblems evaluated.
    pub subproblems: usize,
    /// Length of the relevant part of `u`'s and `v`'s root paths.
    pub path_u: usize,
    pub path_v: usize,
}

// ---------------------------------------------------------------------------
// Two-component solver

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ProtoRole {
    Clique,
    Head,
    /// The endpoint moves into the clique (from the head, or from the
    /// stable set while its old partner drops into the head); its new
    /// stable partner is the other side, which must be a single vertex.
    Promoted,
    Stable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ProtoSource {
    Spider(NodeId),
    /// A join of leaf `k` with a union holding the isolated vertex `s`.
    Pendant {
        join: NodeId,
        k: VertexId,
        s: VertexId,
    },
    /// The whole side becomes part of the head.
    Whole(NodeId),
}

/// A way to read one side as part of a spider.
#[derive(Debug, Clone, Copy)]
struct Proto {
    role: ProtoRole,
    kind: Option<SpiderKind>,
    k: usize,
    s: usize,
    r: usize,
    /// Fill inside this side (promotion makes the endpoint see all of R).
    internal: usize,
    source: ProtoSource,
}

/// Precomputed facts about one node on a side's path.
#[derive(Debug, Clone)]
struct Level {
    node: NodeId,
    size: usize,
    deg_x: usize,
    /// Unique neighbor of the endpoint and its degree, inside this node.
    pendant: Option<(VertexId, usize)>,
    peel: Option<usize>,
    head_k: Option<usize>,
    /// Clique non-neighbor of the endpoint when it is stable in a thick
    /// spider.
    thick_partner: Option<VertexId>,
    protos: Vec<Proto>,
}

impl Level {
    fn pendant_on_universal(&self) -> Option<VertexId> {
        match self.pendant {
            Some((y, d)) if d + 1 == self.size => Some(y),
            _ => None,
        }
    }
}

struct Side {
    x: VertexId,
    levels: Vec<Level>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Universal(usize),
    Peel(usize),
    Head(usize),
    Leg(usize),
    Join(usize, usize),
    DoubleStar(usize),
    ThickLeg(usize),
}

impl Step {
    fn shape(self) -> Shape {
        let pick = |s: usize, a: Shape, b: Shape| if s == 0 { a } else { b };
        match self {
            Step::Universal(s) => pick(s, Shape::UniversalU, Shape::UniversalV),
            Step::Peel(s) => pick(s, Shape::PeelU, Shape::PeelV),
            Step::Head(s) => pick(s, Shape::SpiderHeadU, Shape::SpiderHeadV),
            Step::Leg(s) => pick(s, Shape::ThinLegU, Shape::ThinLegV),
            Step::Join(..) => Shape::SpiderJoin,
            Step::DoubleStar(_) => Shape::DoubleStar,
            Step::ThickLeg(s) => pick(s, Shape::ThickLegU, Shape::ThickLegV),
        }
    }
}

type Key = [usize; 2];

fn with_side(key: Key, side: usize, index: usize) -> Key {
    let mut k = key;
    k[side] = index;
    k
}

struct Solver<'a> {
    t: &'a PSTree,
    g: &'a Graph,
    sides: [Side; 2],
    memo: HashMap<Key, (usize, Step)>,
    /// Solutions of the instances left by a thick leg step, keyed by side
    /// and key, as fill edges in the ids of `g`.
    nested: HashMap<(usize, Key), Vec<Edge>>,
}

/// Nodes from `start` down to the leaf of `x`, skipping union nodes: a
/// connected side is never rooted at a union.
fn side_path(t: &PSTree, start: NodeId, x: VertexId) -> Vec<NodeId> {
    let full = t.root_path(x).expect("vertex of the tree");
    full[t.depth(start)..]
        .iter()
        .copied()
        .filter(|&a| t.label(a) != NodeLabel::Union)
        .collect()
}

fn count_inside(t: &PSTree, g: &Graph, node: NodeId, y: VertexId) -> usize {
    g.neighbors(y)
        .iter()
        .filter(|&&w| t.contains(node, w))
        .count()
}

fn first_leaf_child(t: &PSTree, node: NodeId, except: Option<VertexId>) -> Option<VertexId> {
    t.children(node)
        .iter()
        .filter_map(|&c| match t.kind(c) {
            NodeKind::Leaf(w) if Some(*w) != except => Some(*w),
            _ => None,
        })
        .min()
}

fn protos_at(t: &PSTree, g: &Graph, node: NodeId, x: VertexId) -> Vec<Proto> {
    let mut out = Vec::new();
    let size = t.size(node);
    match t.kind(node) {
        NodeKind::Spider { partition: p, .. } => {
            let role = match p.role_of(x) {
                Some(SpiderRole::Clique(_)) => Some(ProtoRole::Clique),
                Some(SpiderRole::Head) => Some(ProtoRole::Head),
                _ => None,
            };
            if let (Some(SpiderRole::Stable(_)), SpiderKind::Thin) = (p.role_of(x), p.kind) {
                out.push(Proto {
                    role: ProtoRole::Promoted,
                    kind: Some(SpiderKind::Thin),
                    k: p.legs(),
                    s: p.legs() - 1,
                    r: p.head.len() + 1,
                    internal: p.legs() - 1 + p.head.len(),
                    source: ProtoSource::Spider(node),
                });
            }
            if let Some(role) = role {
                out.push(Proto {
                    role,
                    kind: Some(p.kind),
                    k: p.legs(),
                    s: p.legs(),
                    r: p.head.len(),
                    internal: 0,
                    source: ProtoSource::Spider(node),
                });
            }
        }
        NodeKind::Join if t.children(node).len() == 2 => {
            let kids = t.children(node);
            for (this, other) in [(kids[0], kids[1]), (kids[1], kids[0])] {
                let NodeKind::Leaf(k) = *t.kind(this) else {
                    continue;
                };
                let pendant = |s: VertexId, role| Proto {
                    role,
                    kind: Some(SpiderKind::Thin),
                    k: 1,
                    s: 1,
                    r: size - 2,
                    internal: 0,
                    source: ProtoSource::Pendant { join: node, k, s },
                };
                if k == x {
                    match t.kind(other) {
                        NodeKind::Leaf(s) => out.push(pendant(*s, ProtoRole::Clique)),
                        NodeKind::Union => {
                            if let Some(s) = first_leaf_child(t, other, None) {
                                out.push(pendant(s, ProtoRole::Clique));
                            }
                        }
                        _ => {}
                    }
                } else if t.label(other) == NodeLabel::Union {
                    if let Some(s) = first_leaf_child(t, other, Some(x)) {
                        out.push(pendant(s, ProtoRole::Head));
                    }
                }
            }
        }
        _ => {}
    }
    out.push(Proto {
        role: ProtoRole::Head,
        kind: None,
        k: 0,
        s: 0,
        r: size,
        internal: 0,
        source: ProtoSource::Whole(node),
    });
    let mut promoted = Vec::new();
    for p in &out {
        if p.role != ProtoRole::Head || p.kind != Some(SpiderKind::Thin) {
            continue;
        }
        // degree of x inside R
        let deg_r = match p.source {
            ProtoSource::Spider(sp) => {
                let head = t.spider_head(sp).expect("x lies in the head");
                count_inside(t, g, head, x)
            }
            ProtoSource::Pendant { join, .. } => count_inside(t, g, join, x) - 1,
            ProtoSource::Whole(_) => continue,
        };
        promoted.push(Proto {
            role: ProtoRole::Promoted,
            k: p.k + 1,
            r: p.r - 1,
            internal: p.r - 1 - deg_r,
            ..*p
        });
    }
    out.extend(promoted);
    if t.label(node) == NodeLabel::Leaf {
        out.push(Proto {
            role: ProtoRole::Stable,
            kind: None,
            k: 0,
            s: 1,
            r: 0,
            internal: 0,
            source: ProtoSource::Whole(node),
        });
    }
    out
}

fn build_side(t: &PSTree, g: &Graph, start: NodeId, x: VertexId) -> Side {
    let mut positions: Vec<usize> = g.neighbors(x).iter().map(|&w| t.position(w)).collect();
    positions.sort_unstable();
    let levels = side_path(t, start, x)
        .into_iter()
        .map(|node| {
            let (lo, hi) = t.span(node);
            let from = positions.partition_point(|&p| p < lo);
            let to = positions.partition_point(|&p| p < hi);
            let deg_x = to - from;
            let pendant = (deg_x == 1).then(|| {
                let y = t.vertex_at(positions[from]);
                (y, count_inside(t, g, node, y))
            });
            let peel = (t.label(node) == NodeLabel::Join)
                .then(|| t.size(node) - t.size(t.child_toward(node, x)));
            let head_k = t.spider(node).and_then(|p| {
                (t.spider_head(node) == Some(t.child_toward(node, x))).then_some(p.legs())
            });
            Level {
                node,
                size: t.size(node),
                deg_x,
                pendant,
                peel,
                head_k,
                thick_partner: t.spider(node).and_then(|p| match p.role_of(x) {
                    Some(SpiderRole::Stable(i)) if p.kind == SpiderKind::Thick => Some(p.clique[i]),
                    _ => None,
                }),
                protos: protos_at(t, g, node, x),
            }
        })
        .collect();
    Side { x, levels }
}

fn join_cost(p: &Proto, q: &Proto) -> Option<usize> {
    use ProtoRole::*;
    match (p.role, q.role) {
        (Promoted, Stable) => return Some(p.internal + 1),
        (Stable, Promoted) => return Some(q.internal + 1),
        (Promoted | Stable, _) | (_, Promoted | Stable) | (Head, Head) => return None,
        _ => {}
    }
    if p.k + q.k < 2 {
        return None;
    }
    let kind = match (p.kind, q.kind) {
        (Some(a), Some(b)) if a != b => return None,
        (a, b) => a.or(b).unwrap_or(SpiderKind::Thin),
    };
    let mut cost = p.k * q.k + p.k * q.r + q.k * p.r;
    if kind == SpiderKind::Thick {
        cost += p.s * q.k + q.s * p.k;
    }
    Some(cost)
}

impl<'a> Solver<'a> {
    fn new(t: &'a PSTree, g: &'a Graph, start: [NodeId; 2], x: [VertexId; 2]) -> Solver<'a> {
        Solver {
            t,
            g,
            sides: [
                build_side(t, g, start[0], x[0]),
                build_side(t, g, start[1], x[1]),
            ],
            memo: HashMap::new(),
            nested: HashMap::new(),
        }
    }

    fn last(&self, side: usize) -> usize {
        self.sides[side].levels.len() - 1
    }

    fn level(&self, key: Key, side: usize) -> &Level {
        &self.sides[side].levels[key[side]]
    }

    fn deps(&self, key: Key) -> Vec<Key> {
        let mut out = Vec::new();
        for s in 0..2 {
            let lv = self.level(key, s);
            if lv.peel.is_some() || lv.head_k.is_some() {
                out.push(with_side(key, s, key[s] + 1));
            }
            if lv.pendant.is_some() {
                out.push(with_side(key, s, self.last(s)));
            }
        }
        out
    }

    /// Every applicable step at `key` with its total cost, in tie order.
    /// Dependencies must already be solved.
    fn options(&self, key: Key) -> Vec<(usize, Step)> {
        let mut out = Vec::new();
        let lv = [self.level(key, 0), self.level(key, 1)];
        let sub = |k: Key| self.memo[&k].0;
        for s in 0..2 {
            out.push((
                lv[s].size - 1 - lv[s].deg_x + lv[1 - s].size,
                Step::Universal(s),
            ));
        }
        for s in 0..2 {
            if let Some(a) = lv[s].peel {
                out.push((
                    a * lv[1 - s].size + sub(with_side(key, s, key[s] + 1)),
                    Step::Peel(s),
                ));
            }
        }
        for s in 0..2 {
            if let Some(k) = lv[s].head_k {
                out.push((
                    k * lv[1 - s].size + sub(with_side(key, s, key[s] + 1)),
                    Step::Head(s),
                ));
            }
        }
        for s in 0..2 {
            if let Some((_, deg_y)) = lv[s].pendant {
                let cost =
                    lv[s].size - 1 - deg_y + lv[1 - s].size + sub(with_side(key, s, self.last(s)));
                out.push((cost, Step::Leg(s)));
            }
        }
        for (i, p) in lv[0].protos.iter().enumerate() {
            for (j, q) in lv[1].protos.iter().enumerate() {
                if let Some(cost) = join_cost(p, q) {
                    out.push((cost, Step::Join(i, j)));
                }
            }
        }
        if lv[0].pendant_on_universal().is_some() && lv[1].pendant_on_universal().is_some() {
            for s in 0..2 {
                let other = lv[1 - s].size;
                out.push((other + 1 + usize::from(other >= 4), Step::DoubleStar(s)));
            }
        }
        for s in 0..2 {
            if let Some(y) = lv[s].thick_partner {
                let deg_y = count_inside(self.t, self.g, lv[s].node, y);
                let cost = lv[s].size - 1 - deg_y + lv[1 - s].size + self.nested[&(s, key)].len();
                out.push((cost, Step::ThickLeg(s)));
            }
        }
        out
    }

    fn solve(&mut self, root: Key) -> usize {
        let mut stack = vec![root];
        while let Some(&key) = stack.last() {
            if self.memo.contains_key(&key) {
                stack.pop();
                continue;
            }
            let missing: Vec<Key> = self
                .deps(key)
                .into_iter()
                .filter(|k| !self.memo.contains_key(k))
                .collect();
            if missing.is_empty() {
                self.solve_nested(key);
                let best = self
                    .options(key)
                    .into_iter()
                    .reduce(|best, c| if c.0 < best.0 { c } else { best })
                    .expect("universal options always exist");
                self.memo.insert(key, best);
                stack.pop();
            } else {
                stack.extend(missing);
            }
        }
        self.memo[&root].0
    }

    /// With `y` universal, what remains of side `s` is still connected and
    /// is solved as a fresh two-component instance.
    fn solve_nested(&mut self, key: Key) {
        for s in 0..2 {
            let Some(y) = self.level(key, s).thick_partner else {
                continue;
            };
            if self.nested.contains_key(&(s, key)) {
                continue;
            }
            let this: Vec<VertexId> = self
                .vertex_set(key, s)
                .iter()
                .copied()
                .filter(|&w| w != y)
                .collect();
            let other = self.vertex_set(key, 1 - s);
            let all: Vec<VertexId> = this.iter().chain(other).copied().collect();
            let (h, map) = induced_subgraph(self.g, &all).expect("vertices of g");
            let xs = map.new_id(self.sides[s].x).unwrap();
            let xo = map.new_id(self.sides[1 - s].x).unwrap();
            let t = build_tree(&h).expect("induced subgraphs stay P4-sparse");
            let root = t.root();
            let (fill, _) = two_component_fill(
                &t,
                &h,
                [t.child_toward(root, xs), t.child_toward(root, xo)],
                [xs, xo],
            );
            let fill = fill.into_iter().map(|e| map.edge_to_old(e)).collect();
            self.nested.insert((s, key), fill);
        }
    }

    fn vertex_set(&self, key: Key, side: usize) -> &[VertexId] {
        self.t.vertex_set(self.level(key, side).node)
    }

    fn proto_sets(&self, source: ProtoSource) -> [Vec<VertexId>; 3] {
        match source {
            ProtoSource::Spider(node) => {
                let p = self.t.spider(node).expect("spider source");
                [p.clique.clone(), p.stable.clone(), p.head.clone()]
            }
            ProtoSource::Pendant { join, k, s } => {
                let rest = self
                    .t
                    .vertex_set(join)
                    .iter()
                    .copied()
                    .filter(|&w| w != k && w != s)
                    .collect();
                [vec![k], vec![s], rest]
            }
            ProtoSource::Whole(node) => [Vec::new(), Vec::new(), self.t.vertex_set(node).to_vec()],
        }
    }

    /// Edges making `y` adjacent to all of its own side and all of the
    /// other side.
    fn universal_edges(&self, key: Key, side: usize, y: VertexId, out: &mut Vec<Edge>) {
        let ny = self.g.neighbors(y);
        for &w in self.vertex_set(key, side) {
            if w != y && ny.binary_search(&w).is_err() {
                out.push(Edge::new(y, w));
            }
        }
        for &w in self.vertex_set(key, 1 - side) {
            out.push(Edge::new(y, w));
        }
    }

    fn cross(a: &[VertexId], b: &[VertexId], out: &mut Vec<Edge>) {
        for &x in a {
            for &y in b {
                out.push(Edge::new(x, y));
            }
        }
    }

    /// Fill edges of `step` at `key`, followed by the memoized choices of
    /// the subproblem it leaves.
    fn fill_from(&self, key: Key, step: Step) -> Vec<Edge> {
        let mut out = Vec::new();
        let mut next = Some((key, step));
        while let Some((key, step)) = next.take() {
            let follow = |k: Key| Some((k, self.memo[&k].1));
            match step {
                Step::Universal(s) => self.universal_edges(key, s, self.sides[s].x, &mut out),
                Step::Peel(s) => {
                    let node = self.level(key, s).node;
                    let keep = self.t.child_toward(node, self.sides[s].x);
                    let a: Vec<VertexId> = self
                        .t
                        .vertex_set(node)
                        .iter()
                        .copied()
                        .filter(|&w| !self.t.contains(keep, w))
                        .collect();
                    Self::cross(&a, self.vertex_set(key, 1 - s), &mut out);
                    next = follow(with_side(key, s, key[s] + 1));
                }
                Step::Head(s) => {
                    let p = self
                        .t
                        .spider(self.level(key, s).node)
                        .expect("spider level");
                    Self::cross(&p.clique, self.vertex_set(key, 1 - s), &mut out);
                    next = follow(with_side(key, s, key[s] + 1));
                }
                Step::Leg(s) => {
                    let (y, _) = self.level(key, s).pendant.expect("pendant level");
                    self.universal_edges(key, s, y, &mut out);
                    next = follow(with_side(key, s, self.last(s)));
                }
                Step::ThickLeg(s) => {
                    let y = self.level(key, s).thick_partner.expect("thick level");
                    self.universal_edges(key, s, y, &mut out);
                    out.extend(self.nested[&(s, key)].iter().copied());
                }
                Step::Join(i, j) => {
                    let p = self.level(key, 0).protos[i];
                    let q = self.level(key, 1).protos[j];
                    if let Some(s) = [p, q].iter().position(|r| r.role == ProtoRole::Promoted) {
                        let x = self.sides[s].x;
                        let nx = self.g.neighbors(x);
                        let [k, _, mut r] = self.proto_sets([p, q][s].source);
                        if !r.contains(&x) {
                            r.extend(k);
                        }
                        for w in r {
                            if w != x && nx.binary_search(&w).is_err() {
                                out.push(Edge::new(x, w));
                            }
                        }
                        out.push(Edge::new(self.sides[0].x, self.sides[1].x));
                        continue;
                    }
                    let [ku, su, ru] = self.proto_sets(p.source);
                    let [kv, sv, rv] = self.proto_sets(q.source);
                    Self::cross(&ku, &kv, &mut out);
                    Self::cross(&ku, &rv, &mut out);
                    Self::cross(&kv, &ru, &mut out);
                    if p.kind == Some(SpiderKind::Thick) || q.kind == Some(SpiderKind::Thick) {
                        Self::cross(&su, &kv, &mut out);
                        Self::cross(&sv, &ku, &mut out);
                    }
                }
                Step::DoubleStar(s) => {
                    let y = self
                        .level(key, s)
                        .pendant_on_universal()
                        .expect("pendant level");
                    let y_other = self
                        .level(key, 1 - s)
                        .pendant_on_universal()
                        .expect("pendant level");
                    self.universal_edges(key, s, y, &mut out);
                    // y is already adjacent to its own side
                    out.push(Edge::new(self.sides[0].x, self.sides[1].x));
                    if self.level(key, 1 - s).size >= 4 {
                        out.push(Edge::new(self.sides[s].x, y_other));
                    }
                }
            }
        }
        out
    }

    fn best_fill(&mut self, root: Key) -> (usize, Step, Vec<Edge>) {
        let cost = self.solve(root);
        let step = self.memo[&root].1;
        let fill = self.fill_from(root, step);
        debug_assert_eq!(fill.len(), cost);
        (cost, step, fill)
    }

    fn stats(&self) -> QueryStats {
        QueryStats {
            subproblems: self.memo.len(),
            path_u: self.sides[0].levels.len(),
            path_v: self.sides[1].levels.len(),
        }
    }
}

/// Fill for the two-component subproblem of `x[0]` below `start[0]` and
/// `x[1]` below `start[1]`. Union nodes on the way down are skipped.
fn two_component_fill(
    t: &PSTree,
    g: &Graph,
    start: [NodeId; 2],
    x: [VertexId; 2],
) -> (Vec<Edge>, QueryStats) {
    let mut solver = Solver::new(t, g, start, x);
    let (_, _, fill) = solver.best_fill([0, 0]);
    (fill, solver.stats())
}

struct TwoComponentInstance {
    tree: PSTree,
    start: [NodeId; 2],
}

fn two_component_instance(
    g: &Graph,
    cu: &[VertexId],
    cv: &[VertexId],
    u: VertexId,
    v: VertexId,
) -> Result<TwoComponentInstance> {
    let pre = |msg: &str| Err(Error::Precondition(msg.to_string()));
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    let mut side = vec![None; g.n()];
    for (label, part) in [(0u8, cu), (1u8, cv)] {
        for &w in part {
            g.check_vertex(w)?;
            if side[w].is_some() {
                return pre("C_u and C_v must be disjoint and duplicate-free");
            }
            side[w] = Some(label);
        }
    }
    if side.iter().any(Option::is_none) {
        return pre("C_u and C_v must cover the graph");
    }
    if side[u] != Some(0) || side[v] != Some(1) {
        return pre("u must lie in C_u and v in C_v");
    }
    if g.edges().any(|e| side[e.a()] != side[e.b()]) {
        return pre("no edge may join C_u and C_v");
    }
    let tree = build_tree(g)?;
    let root = tree.root();
    let start = [tree.child_toward(root, u), tree.child_toward(root, v)];
    if tree.label(root) != NodeLabel::Union
        || tree.children(root).len() != 2
        || start[0] == start[1]
    {
        return pre("C_u and C_v must each induce a connected graph");
    }
    Ok(TwoComponentInstance { tree, start })
}

/// Minimum completion of a graph made of exactly two components, `C_u`
/// holding `u` and `C_v` holding `v`.
pub fn solve_2cc(
    g: &Graph,
    cu: &[VertexId],
    cv: &[VertexId],
    u: VertexId,
    v: VertexId,
) -> Result<CompletionResult> {
    let inst = two_component_instance(g, cu, cv, u, v)?;
    let (fill, _) = two_component_fill(&inst.tree, g, inst.start, [u, v]);
    CompletionResult::new(g, fill)?.validated()
}

/// All top-level candidates of a two-component instance, each realized and
/// checked with the recognizer. Infeasible constructions are dropped.
/// Subproblems left by a shape are solved optimally.
pub fn enumerate_candidates(
    g: &Graph,
    cu: &[VertexId],
    cv: &[VertexId],
    u: VertexId,
    v: VertexId,
) -> Result<Vec<Candidate>> {
    let inst = two_component_instance(g, cu, cv, u, v)?;
    let mut solver = Solver::new(&inst.tree, g, inst.start, [u, v]);
    solver.solve([0, 0]);
    let mut out = Vec::new();
    for (_, step) in solver.options([0, 0]) {
        let fill = solver.fill_from([0, 0], step);
        let Ok(res) = CompletionResult::new(g, fill) else {
            continue;
        };
        if build_tree(&res.completed).is_ok() {
            out.push(Candidate {
                shape: step.shape(),
                fill: res.fill,
                completed: res.completed,
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Spider cases

fn leg_index(p: &SpiderPartition, v: VertexId) -> Option<SpiderRole> {
    p.role_of(v)
}

fn ks_fill(p: &SpiderPartition, a: usize, b: usize) -> Result<Vec<Edge>> {
    // clique[a] ends up adjacent to every stable vertex
    if p.leg_adjacent(b, a) {
        return Err(Error::AlreadyAdjacent {
            u: p.clique[a],
            v: p.stable[b],
        });
    }
    let mut fill = vec![Edge::new(p.clique[a], p.stable[b])];
    if p.kind == SpiderKind::Thin {
        for j in (0..p.legs()).filter(|&j| j != a && j != b) {
            fill.push(Edge::new(p.clique[a], p.stable[j]));
        }
    }
    Ok(fill)
}

fn ss_fill(g: &Graph, p: &SpiderPartition, a: usize, b: usize) -> Vec<Edge> {
    let (sa, sb) = (p.stable[a], p.stable[b]);
    let (ka, kb) = (p.clique[a], p.clique[b]);
    let others = || (0..p.legs()).filter(move |&j| j != a && j != b);
    let mut fill = vec![Edge::new(sa, sb)];
    match p.kind {
        SpiderKind::Thin if p.head.len() <= 1 => {
            for j in others() {
                fill.push(Edge::new(sa, p.clique[j]));
                fill.push(Edge::new(sb, p.clique[j]));
            }
            if let Some(&r) = p.head.first() {
                // one more edge breaks the house on {r, k_a, k_b, s_a, s_b}
                let extra = [
                    Edge::new(r, sa),
                    Edge::new(r, sb),
                    Edge::new(ka, sb),
                    Edge::new(kb, sa),
                ];
                let pick = extra
                    .into_iter()
                    .find(|&e| {
                        let mut trial = fill.clone();
                        trial.push(e);
                        spider_fill_is_valid(g, p, &trial)
                    })
                    .unwrap_or(extra[2]);
                fill.push(pick);
            }
        }
        SpiderKind::Thin => {
            fill.push(Edge::new(sa, kb));
            fill.push(Edge::new(sb, ka));
            for j in others() {
                fill.push(Edge::new(ka, p.stable[j]));
                fill.push(Edge::new(kb, p.stable[j]));
            }
        }
        SpiderKind::Thick if p.legs() == 3 && p.head.is_empty() => {
            let c = others().next().expect("three legs");
            fill.push(Edge::new(sb, p.stable[c]));
        }
        SpiderKind::Thick => {
            fill.push(Edge::new(sa, ka));
            fill.push(Edge::new(sb, kb));
        }
    }
    fill
}

fn spider_fill_is_valid(g: &Graph, p: &SpiderPartition, fill: &[Edge]) -> bool {
    let vs: Vec<VertexId> = p.vertices().collect();
    let Ok((h, map)) = induced_subgraph(g, &vs) else {
        return false;
    };
    let local = fill
        .iter()
        .filter_map(|e| Some(Edge::new(map.new_id(e.a())?, map.new_id(e.b())?)));
    build_tree(&h.with_edges(local)).is_ok()
}

fn sr_base_fill(p: &SpiderPartition, a: usize) -> Vec<Edge> {
    let s = p.stable[a];
    match p.kind {
        SpiderKind::Thin => (0..p.legs())
            .filter(|&j| j != a)
            .map(|j| Edge::new(s, p.clique[j]))
            .collect(),
        SpiderKind::Thick => vec![Edge::new(s, p.clique[a])],
    }
}

fn spider_roles(
    g: &Graph,
    p: &SpiderPartition,
    u: VertexId,
    v: VertexId,
) -> Result<(SpiderRole, SpiderRole)> {
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    if u == v {
        return Err(Error::SameVertex(u));
    }
    p.validate(g)?;
    let role = |x| {
        leg_index(p, x)
            .ok_or_else(|| Error::RoleMismatch(format!("vertex {x} is not in the spider")))
    };
    Ok((role(u)?, role(v)?))
}

/// Non-edge between a clique vertex and a stable vertex of a spider.
pub fn spider_case_ks(
    g: &Graph,
    spider: &SpiderPartition,
    u: VertexId,
    v: VertexId,
) -> Result<CompletionResult> {
    let fill = match spider_roles(g, spider, u, v)? {
        (SpiderRole::Clique(a), SpiderRole::Stable(b))
        | (SpiderRole::Stable(b), SpiderRole::Clique(a)) => ks_fill(spider, a, b)?,
        _ => {
            return Err(Error::RoleMismatch(
                "expected one clique and one stable vertex".into(),
            ))
        }
    };
    CompletionResult::new(g, fill)
}

/// Non-edge between two stable vertices of a spider.
pub fn spider_case_ss(
    g: &Graph,
    spider: &SpiderPartition,
    u: VertexId,
    v: VertexId,
) -> Result<CompletionResult> {
    let fill = match spider_roles(g, spider, u, v)? {
        (SpiderRole::Stable(a), SpiderRole::Stable(b)) => ss_fill(g, spider, a, b),
        _ => return Err(Error::RoleMismatch("expected two stable vertices".into())),
    };
    CompletionResult::new(g, fill)
}

/// Non-edge between a stable vertex `s` and a head vertex `r` of a spider.
/// The part inside `{s} ∪ R` is an independent minimum completion of
/// `G[{s} ∪ R]` through `sr`.
pub fn spider_case_sr(
    g: &Graph,
    spider: &SpiderPartition,
    u: VertexId,
    v: VertexId,
) -> Result<CompletionResult> {
    let (a, s, r) = match spider_roles(g, spider, u, v)? {
        (SpiderRole::Stable(a), SpiderRole::Head) => (a, u, v),
        (SpiderRole::Head, SpiderRole::Stable(a)) => (a, v, u),
        _ => {
            return Err(Error::RoleMismatch(
                "expected one stable and one head vertex".into(),
            ))
        }
    };
    let mut tail_vertices = spider.head.clone();
    tail_vertices.push(s);
    let (h, map) = induced_subgraph(g, &tail_vertices)?;
    let tail = min_edge_addition(&h, map.new_id(s).unwrap(), map.new_id(r).unwrap())?;
    let mut fill = sr_base_fill(spider, a);
    fill.extend(tail.fill.into_iter().map(|e| map.edge_to_old(e)));
    CompletionResult::new(g, fill)
}

// ---------------------------------------------------------------------------
// Top level

/// Replaces `G[W]` by `completed_w`, whose vertex `i` stands for `w[i]`.
pub fn substitute(g: &Graph, w: &[VertexId], completed_w: &Graph) -> Result<Graph> {
    if completed_w.n() != w.len() {
        return Err(Error::Precondition(format!(
            "replacement has {} vertices, W has {}",
            completed_w.n(),
            w.len()
        )));
    }
    let mut inside = Marks::new(g.n());
    let gen = inside.stamp();
    for &x in w {
        g.check_vertex(x)?;
        if inside.is(x, gen) {
            return Err(Error::Precondition(format!("vertex {x} repeated in W")));
        }
        inside.set(x, gen);
    }
    let (gw, map) = induced_subgraph(g, w)?;
    let mut edges = Vec::with_capacity(g.m() + completed_w.m());
    for e in g.edges() {
        if !(inside.is(e.a(), gen) && inside.is(e.b(), gen)) {
            edges.push(e.endpoints());
        }
    }
    for e in gw.edges() {
        let (a, b) = map.edge_to_old(e).endpoints();
        let (i, j) = (
            w.iter().position(|&x| x == a),
            w.iter().position(|&x| x == b),
        );
        if !completed_w.has_edge(i.unwrap(), j.unwrap()) {
            return Err(Error::Precondition(format!(
                "replacement drops the edge {a} {b} of G[W]"
            )));
        }
    }
    for e in completed_w.edges() {
        edges.push((w[e.a()], w[e.b()]));
    }
    Graph::from_edges(g.n(), edges)
}

fn fill_via_tree(
    g: &Graph,
    t: &PSTree,
    u: VertexId,
    v: VertexId,
) -> Result<(Vec<Edge>, QueryStats)> {
    let l = lca(t, u, v)?;
    match l.label {
        NodeLabel::Union => Ok(two_component_fill(
            t,
            g,
            [t.child_toward(l.node, u), t.child_toward(l.node, v)],
            [u, v],
        )),
        NodeLabel::Spider => {
            let p = t.spider(l.node).expect("spider lca");
            let fill = match l.roles.expect("spider roles") {
                (SpiderRole::Clique(a), SpiderRole::Stable(b))
                | (SpiderRole::Stable(b), SpiderRole::Clique(a)) => ks_fill(p, a, b)?,
                (SpiderRole::Stable(a), SpiderRole::Stable(b)) => ss_fill(g, p, a, b),
                (SpiderRole::Stable(a), SpiderRole::Head)
                | (SpiderRole::Head, SpiderRole::Stable(a)) => {
                    let (s, r) = if p.stable[a] == u { (u, v) } else { (v, u) };
                    let head = t.spider_head(l.node).expect("non-empty head");
                    let (tail, stats) = two_component_fill(t, g, [t.leaf(s)?, head], [s, r]);
                    let mut fill = sr_base_fill(p, a);
                    fill.extend(tail);
                    return Ok((fill, stats));
                }
                _ => {
                    return Err(Error::RoleMismatch(format!(
                        "{u} and {v} are adjacent inside their spider"
                    )))
                }
            };
            Ok((fill, QueryStats::default()))
        }
        NodeLabel::Join | NodeLabel::Leaf => Err(Error::Precondition(format!(
            "{u} {v} is not a non-edge: its endpoints meet at a join"
        ))),
    }
}

/// Minimum set of fill edges, `uv` included, whose addition keeps `g`
/// P4-sparse.
pub fn min_edge_addition(g: &Graph, u: VertexId, v: VertexId) -> Result<CompletionResult> {
    min_edge_addition_with_stats(g, u, v).map(|(res, _)| res)
}

/// [`min_edge_addition`] plus solver counters.
pub fn min_edge_addition_with_stats(
    g: &Graph,
    u: VertexId,
    v: VertexId,
) -> Result<(CompletionResult, QueryStats)> {
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    if u == v {
        return Err(Error::SameVertex(u));
    }
    if g.has_edge(u, v) {
        return Err(Error::AlreadyAdjacent { u, v });
    }
    let t = build_tree(g)?;
    let (fill, stats) = fill_via_tree(g, &t, u, v)?;
    let res = CompletionResult::new(g, fill)?.validated()?;
    Ok((res, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn proto(role: ProtoRole, kind: Option<SpiderKind>, k: usize, s: usize, r: usize) -> Proto {
        Proto {
            role,
            kind,
            k,
            s,
            r,
            internal: 0,
            source: ProtoSource::Whole(0),
        }
    }

    #[test]
    fn shape_names_are_distinct() {
        let mut names: Vec<_> = Shape::ALL.iter().map(|s| s.name()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), Shape::ALL.len());
        assert_eq!(Shape::DoubleStar.to_string(), "DOUBLE_STAR");
        assert!(Shape::ALL.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn steps_map_to_their_side() {
        assert_eq!(Step::Universal(0).shape(), Shape::UniversalU);
        assert_eq!(Step::Universal(1).shape(), Shape::UniversalV);
        assert_eq!(Step::ThickLeg(1).shape(), Shape::ThickLegV);
        assert_eq!(Step::Join(2, 3).shape(), Shape::SpiderJoin);
    }

    #[test]
    fn join_cost_examples() {
        use ProtoRole::*;
        let single = proto(Clique, None, 1, 0, 0);
        // two singletons joined as a K2: just the edge uv
        assert_eq!(join_cost(&single, &single), Some(1));
        let head = proto(Head, None, 0, 0, 3);
        // a lone clique vertex cannot carry a head
        assert_eq!(join_cost(&single, &head), None);
        let pair = proto(Clique, Some(SpiderKind::Thin), 2, 2, 0);
        assert_eq!(join_cost(&pair, &head), Some(6));
        assert_eq!(join_cost(&head, &head), None);
        assert_eq!(join_cost(&proto(Clique, None, 0, 0, 0), &single), None);
        let thin = proto(Clique, Some(SpiderKind::Thin), 2, 2, 1);
        let thick = proto(Clique, Some(SpiderKind::Thick), 3, 3, 0);
        assert_eq!(join_cost(&thin, &thick), None);
        // thick: k·k' + s·k' + s'·k = 3 + 3 + 0
        assert_eq!(join_cost(&thick, &single), Some(6));
        let mut promoted = proto(Promoted, None, 1, 0, 0);
        promoted.internal = 2;
        assert_eq!(join_cost(&promoted, &proto(Stable, None, 0, 1, 0)), Some(3));
        assert_eq!(join_cost(&promoted, &single), None);
    }

    #[test]
    fn result_rejects_existing_edges() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert_eq!(
            CompletionResult::new(&g, vec![Edge::new(0, 1)]),
            Err(Error::AlreadyAdjacent { u: 0, v: 1 })
        );
        let res =
            CompletionResult::new(&g, vec![Edge::new(1, 2), Edge::new(0, 2), Edge::new(2, 1)])
                .unwrap();
        assert_eq!(res.fill, vec![Edge::new(0, 2), Edge::new(1, 2)]);
        assert_eq!(res.completed.m(), 3);
    }

    #[test]
    fn validation_reports_bad_completions() {
        let p4 = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let res = CompletionResult::new(&p4, vec![Edge::new(3, 4)]).unwrap();
        assert!(matches!(res.validated(), Err(Error::InvalidCompletion(_))));
    }

    #[test]
    fn substitute_examples() {
        // replace the path 1-2-3 by a triangle
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let k3 = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let h = substitute(&g, &[1, 2, 3], &k3).unwrap();
        assert!(h.has_edge(1, 3) && h.has_edge(0, 1) && h.has_edge(3, 4));
        assert_eq!(h.m(), 5);
        // order of W matters: vertex i of the replacement stands for w[i]
        let p3 = Graph::from_edges(3, [(0, 1), (0, 2)]).unwrap();
        assert!(matches!(
            substitute(&g, &[1, 2, 3], &p3),
            Err(Error::Precondition(_))
        ));
        let h = substitute(&g, &[2, 1, 3], &p3).unwrap();
        assert_eq!(h, g);
        assert!(matches!(
            substitute(&g, &[1, 1, 3], &k3),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            substitute(&g, &[1, 2], &k3),
            Err(Error::Precondition(_))
        ));
    }

    proptest! {
        // the product form of every join cost never undercuts the count of
        // edges a sum would need
        #[test]
        fn product_dominates_sum(a in 1usize..1000, b in 1usize..1000) {
            prop_assert!(a * b >= a + b - 1);
        }
    }
}
