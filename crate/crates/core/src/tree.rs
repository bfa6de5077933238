//! P4-sparse trees.
//!
//! Every P4-sparse graph has a unique rooted tree whose internal nodes are
//! disjoint unions (0-nodes), joins (1-nodes) or spiders (2-nodes), and whose
//! leaves are the vertices. [`build_tree`] computes it by repeated
//! component / co-component / spider splitting and [`realize_graph`] goes
//! back.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result, Witness};
use crate::graph::{
    co_components_within, components_within, induced_subgraph, Edge, Graph, Marks, VertexId,
};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpiderKind {
    /// Each stable vertex sees exactly its partner in the clique.
    Thin,
    /// Each stable vertex sees the whole clique except its partner.
    Thick,
}

impl SpiderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpiderKind::Thin => "thin",
            SpiderKind::Thick => "thick",
        }
    }
}

/// The (S, K, R) partition of a spider. `stable[i]` and `clique[i]` are
/// partners under the bijection `f: S -> K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpiderPartition {
    pub kind: SpiderKind,
    pub stable: Vec<VertexId>,
    pub clique: Vec<VertexId>,
    pub head: Vec<VertexId>,
}

/// Where a vertex sits inside a spider.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpiderRole {
    Stable(usize),
    Clique(usize),
    Head,
}

impl SpiderPartition {
    pub fn legs(&self) -> usize {
        self.clique.len()
    }

    pub fn role_of(&self, v: VertexId) -> Option<SpiderRole> {
        if let Some(i) = self.stable.iter().position(|&s| s == v) {
            return Some(SpiderRole::Stable(i));
        }
        if let Some(i) = self.clique.iter().position(|&k| k == v) {
            return Some(SpiderRole::Clique(i));
        }
        self.head.contains(&v).then_some(SpiderRole::Head)
    }

    /// All vertices of the spider.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.stable
            .iter()
            .chain(&self.clique)
            .chain(&self.head)
            .copied()
    }

    /// Whether `stable[i]` and `clique[j]` are adjacent.
    pub fn leg_adjacent(&self, i: usize, j: usize) -> bool {
        match self.kind {
            SpiderKind::Thin => i == j,
            SpiderKind::Thick => i != j,
        }
    }

    /// Checks every partition invariant against `g`, where the spider is
    /// taken to be the subgraph induced by its own vertices.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let bad = |msg: &str| Err(Error::MalformedTree(format!("spider partition: {msg}")));
        let k = self.legs();
        if self.stable.len() != k || k < 2 {
            return bad("|S| = |K| >= 2 violated");
        }
        if k == 2 && self.kind == SpiderKind::Thick {
            return bad("two-leg spiders must be labelled thin");
        }
        let mut all: Vec<VertexId> = self.vertices().collect();
        for &v in &all {
            g.check_vertex(v)?;
        }
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return bad("S, K, R are not disjoint");
        }
        for (i, &s) in self.stable.iter().enumerate() {
            for &t in &self.stable[i + 1..] {
                if g.has_edge(s, t) {
                    return bad("S is not independent");
                }
            }
            for (j, &c) in self.clique.iter().enumerate() {
                if g.has_edge(s, c) != self.leg_adjacent(i, j) {
                    return bad("S-K adjacency does not match the kind");
                }
            }
            if self.head.iter().any(|&r| g.has_edge(s, r)) {
                return bad("a head vertex sees S");
            }
        }
        for (i, &c) in self.clique.iter().enumerate() {
            if self.clique[i + 1..].iter().any(|&d| !g.has_edge(c, d)) {
                return bad("K is not a clique");
            }
            if self.head.iter().any(|&r| !g.has_edge(c, r)) {
                return bad("a head vertex misses part of K");
            }
        }
        Ok(())
    }
}

/// Node labels in the usual 0/1/2 numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeLabel {
    Leaf,
    Union,
    Join,
    Spider,
}

impl NodeLabel {
    /// 0, 1 or 2 for internal nodes.
    pub fn code(self) -> Option<u8> {
        match self {
            NodeLabel::Leaf => None,
            NodeLabel::Union => Some(0),
            NodeLabel::Join => Some(1),
            NodeLabel::Spider => Some(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Leaf(VertexId),
    Union,
    Join,
    /// The stable and clique vertices are leaf children; `head` is the
    /// child holding R, if R is non-empty.
    Spider {
        partition: SpiderPartition,
        head: Option<NodeId>,
    },
}

impl NodeKind {
    pub fn label(&self) -> NodeLabel {
        match self {
            NodeKind::Leaf(_) => NodeLabel::Leaf,
            NodeKind::Union => NodeLabel::Union,
            NodeKind::Join => NodeLabel::Join,
            NodeKind::Spider { .. } => NodeLabel::Spider,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    kind: NodeKind,
    children: Vec<NodeId>,
    parent: Option<NodeId>,
    depth: usize,
    // leaf positions [start, end) in `PSTree::order`
    span: (usize, usize),
}

impl Node {
    fn new(kind: NodeKind) -> Node {
        Node {
            kind,
            children: Vec::new(),
            parent: None,
            depth: 0,
            span: (0, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PSTree {
    nodes: Vec<Node>,
    root: NodeId,
    leaf_of: Vec<NodeId>,
    order: Vec<VertexId>,
}

impl PSTree {
    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Number of leaves, i.e. vertices of the represented graph.
    pub fn n(&self) -> usize {
        self.leaf_of.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id].kind
    }

    pub fn label(&self, id: NodeId) -> NodeLabel {
        self.nodes[id].kind.label()
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn depth(&self, id: NodeId) -> usize {
        self.nodes[id].depth
    }

    pub fn spider(&self, id: NodeId) -> Option<&SpiderPartition> {
        match &self.nodes[id].kind {
            NodeKind::Spider { partition, .. } => Some(partition),
            _ => None,
        }
    }

    pub fn spider_head(&self, id: NodeId) -> Option<NodeId> {
        match &self.nodes[id].kind {
            NodeKind::Spider { head, .. } => *head,
            _ => None,
        }
    }

    pub fn leaf(&self, v: VertexId) -> Result<NodeId> {
        self.leaf_of.get(v).copied().ok_or(Error::VertexOutOfRange {
            vertex: v,
            n: self.n(),
        })
    }

    /// Vertices below `id`, in tree order.
    pub fn vertex_set(&self, id: NodeId) -> &[VertexId] {
        let (a, b) = self.nodes[id].span;
        &self.order[a..b]
    }

    pub fn size(&self, id: NodeId) -> usize {
        let (a, b) = self.nodes[id].span;
        b - a
    }

    /// Position of `v` in the leaf order; `vertex_set(id)` is a contiguous
    /// range of positions.
    pub fn position(&self, v: VertexId) -> usize {
        self.nodes[self.leaf_of[v]].span.0
    }

    /// The vertex at a leaf-order position.
    pub fn vertex_at(&self, pos: usize) -> VertexId {
        self.order[pos]
    }

    /// Leaf-order positions `[start, end)` covered by `id`.
    pub fn span(&self, id: NodeId) -> (usize, usize) {
        self.nodes[id].span
    }

    pub fn contains(&self, id: NodeId, v: VertexId) -> bool {
        let p = self.position(v);
        let (a, b) = self.nodes[id].span;
        a <= p && p < b
    }

    pub fn min_vertex(&self, id: NodeId) -> VertexId {
        self.vertex_set(id).iter().copied().min().unwrap_or(0)
    }

    /// Nodes from the root down to the leaf of `v`.
    pub fn root_path(&self, v: VertexId) -> Result<Vec<NodeId>> {
        let mut path = vec![self.leaf(v)?];
        while let Some(p) = self.nodes[*path.last().unwrap()].parent {
            path.push(p);
        }
        path.reverse();
        Ok(path)
    }

    /// The child of `id` whose subtree holds `v`. `v` must lie strictly
    /// below `id`.
    pub fn child_toward(&self, id: NodeId, v: VertexId) -> NodeId {
        let target = self.nodes[id].depth + 1;
        let mut x = self.leaf_of[v];
        while self.nodes[x].depth > target {
            x = self.nodes[x]
                .parent
                .expect("depth is consistent with parents");
        }
        debug_assert_eq!(self.nodes[x].parent, Some(id));
        x
    }

    /// Edges of the represented graph.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for node in &self.nodes {
            match &node.kind {
                NodeKind::Leaf(_) | NodeKind::Union => {}
                NodeKind::Join => {
                    for (i, &a) in node.children.iter().enumerate() {
                        for &b in &node.children[i + 1..] {
                            for &x in self.vertex_set(a) {
                                for &y in self.vertex_set(b) {
                                    out.push(Edge::new(x, y));
                                }
                            }
                        }
                    }
                }
                NodeKind::Spider { partition: p, .. } => {
                    for (i, &c) in p.clique.iter().enumerate() {
                        for &d in &p.clique[i + 1..] {
                            out.push(Edge::new(c, d));
                        }
                        for (j, &s) in p.stable.iter().enumerate() {
                            if p.leg_adjacent(j, i) {
                                out.push(Edge::new(s, c));
                            }
                        }
                        for &r in &p.head {
                            out.push(Edge::new(c, r));
                        }
                    }
                }
            }
        }
        out
    }

    /// Parenthesized text form with children ordered by their smallest
    /// vertex, e.g. `(1 u0 (0 u3 u4))`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_node(self.root, &mut out);
        out
    }

    fn sorted_children(&self, id: NodeId) -> Vec<NodeId> {
        let mut kids = self.nodes[id].children.clone();
        kids.sort_by_key(|&c| self.min_vertex(c));
        kids
    }

    fn write_node(&self, id: NodeId, out: &mut String) {
        match &self.nodes[id].kind {
            NodeKind::Leaf(v) => {
                let _ = write!(out, "u{v}");
            }
            NodeKind::Union | NodeKind::Join => {
                let code = self.label(id).code().unwrap();
                let _ = write!(out, "({code}");
                for c in self.sorted_children(id) {
                    out.push(' ');
                    self.write_node(c, out);
                }
                out.push(')');
            }
            NodeKind::Spider { partition: p, head } => {
                let mut pairs: Vec<(VertexId, VertexId)> = p
                    .stable
                    .iter()
                    .copied()
                    .zip(p.clique.iter().copied())
                    .collect();
                pairs.sort_unstable();
                let _ = write!(out, "(2 {} [", p.kind.as_str());
                for (i, (s, k)) in pairs.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    let _ = write!(out, "s{s}:k{k}");
                }
                out.push(']');
                if let Some(h) = head {
                    out.push_str(" (head ");
                    self.write_node(*h, out);
                    out.push(')');
                }
                out.push(')');
            }
        }
    }

    /// Graphviz rendering of the tree.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph p4sparse_tree {\n");
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            let label = match &self.nodes[id].kind {
                NodeKind::Leaf(v) => format!("u{v}"),
                NodeKind::Union => "0".to_string(),
                NodeKind::Join => "1".to_string(),
                NodeKind::Spider { partition, .. } => format!("2 {}", partition.kind.as_str()),
            };
            let _ = writeln!(out, "  n{id} [label=\"{label}\"];");
            let kids = self.sorted_children(id);
            for &c in &kids {
                let _ = writeln!(out, "  n{id} -- n{c};");
            }
            stack.extend(kids.into_iter().rev());
        }
        out.push_str("}\n");
        out
    }
}

/// Assembles a [`PSTree`] bottom-up or top-down and validates it in
/// [`TreeBuilder::finish`].
#[derive(Debug, Default, Clone)]
pub struct TreeBuilder {
    nodes: Vec<Node>,
}

impl TreeBuilder {
    pub fn new() -> TreeBuilder {
        TreeBuilder::default()
    }

    fn push(&mut self, kind: NodeKind) -> NodeId {
        self.nodes.push(Node::new(kind));
        self.nodes.len() - 1
    }

    pub fn leaf(&mut self, v: VertexId) -> NodeId {
        self.push(NodeKind::Leaf(v))
    }

    pub fn union(&mut self, children: Vec<NodeId>) -> NodeId {
        let id = self.push(NodeKind::Union);
        self.nodes[id].children = children;
        id
    }

    pub fn join(&mut self, children: Vec<NodeId>) -> NodeId {
        let id = self.push(NodeKind::Join);
        self.nodes[id].children = children;
        id
    }

    /// A spider over `(stable, clique)` partner pairs with an optional head
    /// subtree. Leaf children are created here.
    pub fn spider(
        &mut self,
        kind: SpiderKind,
        pairs: &[(VertexId, VertexId)],
        head: Option<NodeId>,
    ) -> NodeId {
        let partition = SpiderPartition {
            kind,
            stable: pairs.iter().map(|p| p.0).collect(),
            clique: pairs.iter().map(|p| p.1).collect(),
            head: Vec::new(),
        };
        let id = self.push(NodeKind::Spider { partition, head });
        let mut children: Vec<NodeId> = pairs
            .iter()
            .map(|p| p.0)
            .chain(pairs.iter().map(|p| p.1))
            .map(|v| self.leaf(v))
            .collect();
        children.extend(head);
        self.nodes[id].children = children;
        id
    }

    fn add_child(&mut self, parent: NodeId, child: NodeId) {
        self.nodes[parent].children.push(child);
    }

    fn set_head(&mut self, spider: NodeId, head: NodeId) {
        if let NodeKind::Spider { head: h, .. } = &mut self.nodes[spider].kind {
            *h = Some(head);
        }
        self.add_child(spider, head);
    }

    /// Validates arity, label alternation and the leaf bijection, fills in
    /// spans and head vertex sets, and canonicalizes two-leg thick spiders
    /// as thin.
    pub fn finish(mut self, root: NodeId) -> Result<PSTree> {
        let bad = |msg: String| Err(Error::MalformedTree(msg));
        if root >= self.nodes.len() {
            return bad(format!("root {root} does not exist"));
        }
        for id in 0..self.nodes.len() {
            let kids = self.nodes[id].children.clone();
            for c in kids {
                if c >= self.nodes.len() || c == root || self.nodes[c].parent.is_some() {
                    return bad(format!("node {c} has zero or several parents"));
                }
                self.nodes[c].parent = Some(id);
            }
        }
        // iterative DFS assigning depth and leaf order
        let mut order = Vec::new();
        let mut visited = 0usize;
        let mut stack: Vec<(NodeId, bool)> = vec![(root, false)];
        while let Some((id, done)) = stack.pop() {
            if done {
                self.nodes[id].span.1 = order.len();
                continue;
            }
            visited += 1;
            self.nodes[id].span.0 = order.len();
            if let NodeKind::Leaf(v) = self.nodes[id].kind {
                order.push(v);
                self.nodes[id].span.1 = order.len();
                continue;
            }
            stack.push((id, true));
            let depth = self.nodes[id].depth;
            for i in (0..self.nodes[id].children.len()).rev() {
                let c = self.nodes[id].children[i];
                self.nodes[c].depth = depth + 1;
                stack.push((c, false));
            }
        }
        if visited != self.nodes.len() {
            return bad("some nodes are not reachable from the root".into());
        }
        let n = order.len();
        let mut leaf_of = vec![usize::MAX; n];
        for (id, node) in self.nodes.iter().enumerate() {
            if let NodeKind::Leaf(v) = node.kind {
                if v >= n || leaf_of[v] != usize::MAX {
                    return bad(format!(
                        "leaves are not a bijection onto 0..{n} (vertex {v})"
                    ));
                }
                leaf_of[v] = id;
            }
        }
        for id in 0..self.nodes.len() {
            let label = self.nodes[id].kind.label();
            let kids = &self.nodes[id].children;
            match label {
                NodeLabel::Leaf => {
                    if !kids.is_empty() {
                        return bad(format!("leaf node {id} has children"));
                    }
                }
                NodeLabel::Union | NodeLabel::Join => {
                    if kids.len() < 2 {
                        return bad(format!("internal node {id} has fewer than two children"));
                    }
                    if kids.iter().any(|&c| self.nodes[c].kind.label() == label) {
                        return bad(format!("node {id} has a child with the same label"));
                    }
                }
                NodeLabel::Spider => {}
            }
        }
        let spans: Vec<(usize, usize)> = self.nodes.iter().map(|n| n.span).collect();
        for id in 0..self.nodes.len() {
            let children = self.nodes[id].children.clone();
            if let NodeKind::Spider { partition, head } = &mut self.nodes[id].kind {
                let k = partition.clique.len();
                if k < 2 || partition.stable.len() != k {
                    return bad(format!("spider node {id} needs |S| = |K| >= 2"));
                }
                if children.len() != 2 * k + usize::from(head.is_some()) {
                    return bad(format!("spider node {id} has stray children"));
                }
                partition.head = match head {
                    Some(h) => {
                        let (a, b) = spans[*h];
                        order[a..b].to_vec()
                    }
                    None => Vec::new(),
                };
                if k == 2 && partition.kind == SpiderKind::Thick {
                    partition.kind = SpiderKind::Thin;
                    partition.clique.swap(0, 1);
                }
            }
        }
        Ok(PSTree {
            nodes: self.nodes,
            root,
            leaf_of,
            order,
        })
    }
}

/// The graph a tree represents.
pub fn realize_graph(t: &PSTree) -> Graph {
    Graph::from_edges(t.n(), t.edges().into_iter().map(Edge::into))
        .expect("tree edges are valid by construction")
}

struct Scratch {
    inside: Marks,
    other: Marks,
    degree: Vec<usize>,
}

impl Scratch {
    fn new(n: usize) -> Scratch {
        Scratch {
            inside: Marks::new(n),
            other: Marks::new(n),
            degree: vec![0; n],
        }
    }
}

/// Spider partition of `G[members]`, if that subgraph is a spider.
///
/// Stable vertices are exactly the minimum-degree vertices of a spider, so
/// they seed the search; every invariant is then checked.
fn extract_spider_within(
    g: &Graph,
    members: &[VertexId],
    scratch: &mut Scratch,
) -> Option<SpiderPartition> {
    if members.len() < 4 {
        return None;
    }
    let in_gen = scratch.inside.stamp();
    for &v in members {
        scratch.inside.set(v, in_gen);
    }
    for &v in members {
        scratch.degree[v] = g
            .neighbors(v)
            .iter()
            .filter(|&&w| scratch.inside.is(w, in_gen))
            .count();
    }
    let min_deg = members.iter().map(|&v| scratch.degree[v]).min()?;
    let mut stable: Vec<VertexId> = members
        .iter()
        .copied()
        .filter(|&v| scratch.degree[v] == min_deg)
        .collect();
    stable.sort_unstable();
    let k = stable.len();
    let kind = if min_deg == 1 {
        SpiderKind::Thin
    } else if k >= 3 && min_deg == k - 1 {
        SpiderKind::Thick
    } else {
        return None;
    };
    if k < 2 || 2 * k > members.len() {
        return None;
    }
    // K = N(S)
    let k_gen = scratch.other.stamp();
    let mut clique_set = Vec::with_capacity(k);
    for &s in &stable {
        for &w in g.neighbors(s) {
            if scratch.inside.is(w, in_gen) && !scratch.other.is(w, k_gen) {
                scratch.other.set(w, k_gen);
                clique_set.push(w);
            }
        }
    }
    if clique_set.len() != k {
        return None;
    }
    // S independent: a neighbor of s inside the spider is in K
    let clique = match kind {
        SpiderKind::Thin => {
            let mut partner = Vec::with_capacity(k);
            for &s in &stable {
                let w = *g
                    .neighbors(s)
                    .iter()
                    .find(|&&w| scratch.inside.is(w, in_gen))?;
                partner.push(w);
            }
            partner
        }
        SpiderKind::Thick => {
            let mut partner = Vec::with_capacity(k);
            for &s in &stable {
                let missing: Vec<VertexId> = clique_set
                    .iter()
                    .copied()
                    .filter(|&c| g.neighbors(s).binary_search(&c).is_err())
                    .collect();
                if missing.len() != 1 {
                    return None;
                }
                partner.push(missing[0]);
            }
            partner
        }
    };
    for &s in &stable {
        if g.neighbors(s)
            .iter()
            .any(|&w| scratch.inside.is(w, in_gen) && !scratch.other.is(w, k_gen))
        {
            return None;
        }
    }
    let mut distinct = clique.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != k {
        return None;
    }
    let head_size = members.len() - 2 * k;
    let legs_seen = match kind {
        SpiderKind::Thin => 1,
        SpiderKind::Thick => k - 1,
    };
    for &c in &clique {
        let in_clique = g
            .neighbors(c)
            .iter()
            .filter(|&&w| scratch.other.is(w, k_gen))
            .count();
        if in_clique != k - 1 || scratch.degree[c] != (k - 1) + legs_seen + head_size {
            return None;
        }
    }
    // with the counts above, each clique vertex sees every head vertex
    let s_gen = scratch.inside.stamp();
    for &v in stable.iter().chain(&clique) {
        scratch.inside.set(v, s_gen);
    }
    let mut head: Vec<VertexId> = members
        .iter()
        .copied()
        .filter(|&v| !scratch.inside.is(v, s_gen))
        .collect();
    head.sort_unstable();
    let (stable, clique) = if k == 2 && kind == SpiderKind::Thick {
        (stable, vec![clique[1], clique[0]])
    } else {
        (stable, clique)
    };
    Some(SpiderPartition {
        kind: if k == 2 { SpiderKind::Thin } else { kind },
        stable,
        clique,
        head,
    })
}

/// Spider partition of `g`, or `None` if `g` is not a spider. Two-leg
/// spiders are reported as thin.
pub fn extract_spider(g: &Graph) -> Option<SpiderPartition> {
    let all: Vec<VertexId> = g.vertices().collect();
    let mut scratch = Scratch::new(g.n());
    extract_spider_within(g, &all, &mut scratch)
}

enum Decomposition {
    Tree(PSTree),
    Stuck(Vec<VertexId>),
}

fn decompose(g: &Graph) -> Result<Decomposition> {
    if g.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut scratch = Scratch::new(g.n());
    let mut builder = TreeBuilder::new();
    // (members, parent, is_head)
    let mut stack: Vec<(Vec<VertexId>, Option<NodeId>, bool)> =
        vec![(g.vertices().collect(), None, false)];
    let mut root = None;
    while let Some((members, parent, is_head)) = stack.pop() {
        let id = if members.len() == 1 {
            builder.leaf(members[0])
        } else {
            let comps = components_within(g, &members, &mut scratch.inside, &mut scratch.other);
            if comps.len() > 1 {
                let id = builder.union(Vec::new());
                stack.extend(comps.into_iter().map(|c| (c, Some(id), false)));
                id
            } else {
                let co = co_components_within(g, &members, &mut scratch.inside, &mut scratch.other);
                if co.len() > 1 {
                    let id = builder.join(Vec::new());
                    stack.extend(co.into_iter().map(|c| (c, Some(id), false)));
                    id
                } else if let Some(p) = extract_spider_within(g, &members, &mut scratch) {
                    let pairs: Vec<(VertexId, VertexId)> = p
                        .stable
                        .iter()
                        .copied()
                        .zip(p.clique.iter().copied())
                        .collect();
                    let id = builder.spider(p.kind, &pairs, None);
                    if !p.head.is_empty() {
                        stack.push((p.head, Some(id), true));
                    }
                    id
                } else {
                    return Ok(Decomposition::Stuck(members));
                }
            }
        };
        match parent {
            None => root = Some(id),
            Some(p) if is_head => builder.set_head(p, id),
            Some(p) => builder.add_child(p, id),
        }
    }
    Ok(Decomposition::Tree(
        builder.finish(root.expect("non-empty graph has a root"))?,
    ))
}

fn subset_is_p4_sparse(g: &Graph, subset: &[VertexId]) -> bool {
    let (h, _) = induced_subgraph(g, subset).expect("subset of valid vertices");
    matches!(decompose(&h), Ok(Decomposition::Tree(_)))
}

/// Shrinks a non-P4-sparse vertex set to a minimal one by chunked deletion.
/// Minimal non-P4-sparse graphs have five vertices.
fn shrink_witness(g: &Graph, stuck: Vec<VertexId>) -> Witness {
    let mut set = stuck;
    let mut chunk = (set.len() / 2).max(1);
    loop {
        let mut i = 0;
        while i < set.len() && set.len() > 5 {
            let end = (i + chunk).min(set.len());
            let candidate: Vec<VertexId> = set[..i].iter().chain(&set[end..]).copied().collect();
            if candidate.len() >= 5 && !subset_is_p4_sparse(g, &candidate) {
                set = candidate;
            } else {
                i += chunk;
            }
        }
        if chunk == 1 {
            break;
        }
        chunk /= 2;
    }
    set.sort_unstable();
    match <[VertexId; 5]>::try_from(set.as_slice()) {
        Ok(five) => Witness::Five(five),
        Err(_) => Witness::Irreducible(set),
    }
}

/// The P4-sparse tree of `g`, or [`Error::NotP4Sparse`] with a witness.
pub fn build_tree(g: &Graph) -> Result<PSTree> {
    match decompose(g)? {
        Decomposition::Tree(t) => Ok(t),
        Decomposition::Stuck(members) => Err(Error::NotP4Sparse(shrink_witness(g, members))),
    }
}

/// Recognition through the tree decomposition, without witness extraction.
pub fn is_p4_sparse(g: &Graph) -> bool {
    g.n() == 0 || matches!(decompose(g), Ok(Decomposition::Tree(_)))
}

/// Largest graph the five-subset recognizer accepts by default.
pub const DEFINITIONAL_CAP: usize = 16;

pub(crate) fn induces_p4(g: &Graph, quad: [VertexId; 4]) -> bool {
    let mut degrees = [0usize; 4];
    let mut edges = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            if g.has_edge(quad[i], quad[j]) {
                degrees[i] += 1;
                degrees[j] += 1;
                edges += 1;
            }
        }
    }
    edges == 3 && degrees.iter().all(|&d| d == 1 || d == 2)
}

/// Definitional recognizer: every five vertices induce at most one P4.
/// Enumerates all five-subsets, so it refuses graphs above
/// [`DEFINITIONAL_CAP`] vertices.
pub fn is_p4_sparse_by_definition(g: &Graph) -> Result<bool> {
    is_p4_sparse_by_definition_capped(g, DEFINITIONAL_CAP)
}

pub fn is_p4_sparse_by_definition_capped(g: &Graph, cap: usize) -> Result<bool> {
    let n = g.n();
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    for e in d + 1..n {
                        let five = [a, b, c, d, e];
                        let mut p4s = 0;
                        for skip in 0..5 {
                            let mut quad = [0; 4];
                            let mut k = 0;
                            for (i, &x) in five.iter().enumerate() {
                                if i != skip {
                                    quad[k] = x;
                                    k += 1;
                                }
                            }
                            if induces_p4(g, quad) {
                                p4s += 1;
                            }
                        }
                        if p4s >= 2 {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

/// The root-to-leaf path of a vertex and the subtrees hanging off it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathDecomposition {
    /// `t_1 .. t_r`, root first, the leaf of the vertex last.
    pub path: Vec<NodeId>,
    /// `subtrees[j]` holds the vertices of `T_{u,j+1}`: those below
    /// `path[j]` but not below `path[j + 1]`.
    pub subtrees: Vec<Vec<VertexId>>,
}

pub fn leaf_path(t: &PSTree, u: VertexId) -> Result<PathDecomposition> {
    let path = t.root_path(u)?;
    let subtrees = path
        .windows(2)
        .map(|w| {
            let inner = w[1];
            t.vertex_set(w[0])
                .iter()
                .copied()
                .filter(|&x| !t.contains(inner, x))
                .collect()
        })
        .collect();
    Ok(PathDecomposition { path, subtrees })
}

/// Least common ancestor of two leaves, with spider roles when it is a
/// 2-node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lca {
    pub node: NodeId,
    pub label: NodeLabel,
    pub roles: Option<(SpiderRole, SpiderRole)>,
}

pub fn lca(t: &PSTree, u: VertexId, v: VertexId) -> Result<Lca> {
    let (mut a, mut b) = (t.leaf(u)?, t.leaf(v)?);
    if u == v {
        return Err(Error::SameVertex(u));
    }
    while t.depth(a) > t.depth(b) {
        a = t.parent(a).unwrap();
    }
    while t.depth(b) > t.depth(a) {
        b = t.parent(b).unwrap();
    }
    while a != b {
        a = t.parent(a).unwrap();
        b = t.parent(b).unwrap();
    }
    let roles = t.spider(a).map(|p| {
        let role = |x| p.role_of(x).expect("vertex below a spider has a role");
        (role(u), role(v))
    });
    Ok(Lca {
        node: a,
        label: t.label(a),
        roles,
    })
}

/// A random valid P4-sparse tree on `n` leaves, deterministic in `seed`.
///
/// Node types are drawn uniformly among the labels allowed under the parent;
/// union/join arity is 2 to 4, spiders get between two and `n/2` legs.
/// Leaf ids are a random permutation of `0..n`.
pub fn random_tree(n: usize, seed: u64) -> PSTree {
    assert!(n >= 1, "a tree needs at least one leaf");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<VertexId> = (0..n).collect();
    ids.shuffle(&mut rng);
    let mut next_id = ids.into_iter();
    let mut builder = TreeBuilder::new();
    // (leaves, parent label, parent, is_head)
    let mut stack: Vec<(usize, NodeLabel, Option<NodeId>, bool)> =
        vec![(n, NodeLabel::Leaf, None, false)];
    let mut root = None;
    while let Some((count, parent_label, parent, is_head)) = stack.pop() {
        let id = if count == 1 {
            builder.leaf(next_id.next().unwrap())
        } else {
            let mut choices = Vec::with_capacity(3);
            if parent_label != NodeLabel::Union {
                choices.push(NodeLabel::Union);
            }
            if parent_label != NodeLabel::Join {
                choices.push(NodeLabel::Join);
            }
            if count >= 4 {
                choices.push(NodeLabel::Spider);
            }
            match choices[rng.gen_range(0..choices.len())] {
                NodeLabel::Spider => {
                    let legs = rng.gen_range(2..=count / 2);
                    let kind = if legs >= 3 && rng.gen_bool(0.5) {
                        SpiderKind::Thick
                    } else {
                        SpiderKind::Thin
                    };
                    let pairs: Vec<(VertexId, VertexId)> = (0..legs)
                        .map(|_| (next_id.next().unwrap(), next_id.next().unwrap()))
                        .collect();
                    let id = builder.spider(kind, &pairs, None);
                    if count > 2 * legs {
                        stack.push((count - 2 * legs, NodeLabel::Spider, Some(id), true));
                    }
                    id
                }
                label => {
                    let arity = rng.gen_range(2..=count.min(4));
                    // random composition of `count` into `arity` positive parts
                    let mut cuts: Vec<usize> = (1..count).collect();
                    cuts.shuffle(&mut rng);
                    let mut cuts: Vec<usize> = cuts.into_iter().take(arity - 1).collect();
                    cuts.sort_unstable();
                    let id = if label == NodeLabel::Union {
                        builder.union(Vec::new())
                    } else {
                        builder.join(Vec::new())
                    };
                    let mut prev = 0;
                    for cut in cuts.into_iter().chain(std::iter::once(count)) {
                        stack.push((cut - prev, label, Some(id), false));
                        prev = cut;
                    }
                    id
                }
            }
        };
        match parent {
            None => root = Some(id),
            Some(p) if is_head => builder.set_head(p, id),
            Some(p) => builder.add_child(p, id),
        }
    }
    builder
        .finish(root.unwrap())
        .expect("generated trees are structurally valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::from_edges(n, edges.iter().copied()).unwrap()
    }

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    fn spider_graph(kind: SpiderKind, legs: usize, head: usize) -> Graph {
        let mut b = TreeBuilder::new();
        let pairs: Vec<_> = (0..legs).map(|i| (i, legs + i)).collect();
        let h = match head {
            0 => None,
            1 => Some(b.leaf(2 * legs)),
            _ => {
                let kids = (0..head).map(|i| b.leaf(2 * legs + i)).collect();
                Some(b.union(kids))
            }
        };
        let root = b.spider(kind, &pairs, h);
        realize_graph(&b.finish(root).unwrap())
    }

    fn same_edges(a: &Graph, b: &Graph) -> bool {
        a.n() == b.n() && a.edges().eq(b.edges())
    }

    #[test]
    fn p4_is_a_thin_spider() {
        let t = build_tree(&path(4)).unwrap();
        let p = t.spider(t.root()).unwrap();
        assert_eq!(p.kind, SpiderKind::Thin);
        assert_eq!(p.stable, vec![0, 3]);
        assert_eq!(p.clique, vec![1, 2]);
        assert!(p.head.is_empty());
        assert_eq!(t.to_text(), "(2 thin [s0:k1 s3:k2])");
    }

    #[test]
    fn single_vertex_is_a_leaf() {
        let t = build_tree(&Graph::empty(1)).unwrap();
        assert_eq!(t.kind(t.root()), &NodeKind::Leaf(0));
        assert_eq!(t.to_text(), "u0");
    }

    #[test]
    fn empty_graph_has_no_tree() {
        assert_eq!(build_tree(&Graph::empty(0)), Err(Error::EmptyGraph));
    }

    #[test]
    fn c5_is_rejected_with_a_five_vertex_witness() {
        let err = build_tree(&cycle(5)).unwrap_err();
        assert_eq!(err, Error::NotP4Sparse(Witness::Five([0, 1, 2, 3, 4])));
    }

    #[test]
    fn witnesses_are_shrunk_to_five_vertices() {
        // a P5 hanging off a clique of pendant-free vertices
        let mut edges: Vec<(usize, usize)> = (1..5).map(|i| (i - 1, i)).collect();
        for a in 5..9 {
            for b in a + 1..9 {
                edges.push((a, b));
            }
        }
        edges.push((4, 5));
        let g = graph(9, &edges);
        let Err(Error::NotP4Sparse(Witness::Five(w))) = build_tree(&g) else {
            panic!("expected a five-vertex witness");
        };
        let (h, _) = induced_subgraph(&g, &w).unwrap();
        assert!(!is_p4_sparse_by_definition(&h).unwrap());
    }

    #[test]
    fn realize_small_nodes() {
        let mut b = TreeBuilder::new();
        let kids = vec![b.leaf(0), b.leaf(1)];
        let root = b.join(kids);
        assert!(same_edges(
            &realize_graph(&b.finish(root).unwrap()),
            &path(2)
        ));

        let mut b = TreeBuilder::new();
        let kids = vec![b.leaf(0), b.leaf(1)];
        let root = b.union(kids);
        assert_eq!(realize_graph(&b.finish(root).unwrap()).m(), 0);
    }

    #[test]
    fn thick_three_leg_spider_realizes_net_complement() {
        let g = spider_graph(SpiderKind::Thick, 3, 0);
        for s in 0..3 {
            assert_eq!(
                g.neighbors(s),
                (3..6).filter(|&k| k != s + 3).collect::<Vec<_>>()
            );
        }
        assert_eq!(g.m(), 3 + 6);
        assert!(is_p4_sparse_by_definition(&g).unwrap());
        assert!(build_tree(&g).is_ok());
    }

    #[test]
    fn two_leg_thick_spiders_are_stored_thin() {
        let mut b = TreeBuilder::new();
        let root = b.spider(SpiderKind::Thick, &[(0, 2), (1, 3)], None);
        let t = b.finish(root).unwrap();
        let p = t.spider(root).unwrap();
        assert_eq!(p.kind, SpiderKind::Thin);
        assert_eq!(p.clique, vec![3, 2]);
        let g = realize_graph(&t);
        assert!(g.has_edge(0, 3) && g.has_edge(1, 2) && !g.has_edge(0, 2));
    }

    #[test]
    fn builder_rejects_malformed_trees() {
        let mut b = TreeBuilder::new();
        let leaf = b.leaf(0);
        let root = b.union(vec![leaf]);
        assert!(matches!(b.finish(root), Err(Error::MalformedTree(_))));

        let mut b = TreeBuilder::new();
        let (x, y, z) = (b.leaf(0), b.leaf(1), b.leaf(2));
        let inner = b.join(vec![y, z]);
        let root = b.join(vec![x, inner]);
        assert!(matches!(b.finish(root), Err(Error::MalformedTree(_))));

        let mut b = TreeBuilder::new();
        let (x, y) = (b.leaf(0), b.leaf(2));
        let root = b.union(vec![x, y]);
        assert!(matches!(b.finish(root), Err(Error::MalformedTree(_))));

        let mut b = TreeBuilder::new();
        let x = b.leaf(0);
        let root = b.union(vec![x, x]);
        assert!(matches!(b.finish(root), Err(Error::MalformedTree(_))));
    }

    #[test]
    fn extract_spider_examples() {
        let p = extract_spider(&spider_graph(SpiderKind::Thin, 3, 0)).unwrap();
        assert_eq!(p.stable, vec![0, 1, 2]);
        assert_eq!(p.clique, vec![3, 4, 5]);

        let p = extract_spider(&path(4)).unwrap();
        assert_eq!((p.stable.clone(), p.kind), (vec![0, 3], SpiderKind::Thin));

        assert_eq!(extract_spider(&cycle(4)), None);
        assert_eq!(extract_spider(&cycle(5)), None);
    }

    #[test]
    fn c4_has_no_spider_partition_at_all() {
        // exhaustive: no split of C4 into S, K with |S| = |K| = 2 validates
        let g = cycle(4);
        for mask in 0u32..16 {
            let s: Vec<usize> = (0..4).filter(|i| mask >> i & 1 == 1).collect();
            let k: Vec<usize> = (0..4).filter(|i| mask >> i & 1 == 0).collect();
            if s.len() != 2 {
                continue;
            }
            for kind in [SpiderKind::Thin, SpiderKind::Thick] {
                for clique in [k.clone(), vec![k[1], k[0]]] {
                    let p = SpiderPartition {
                        kind,
                        stable: s.clone(),
                        clique,
                        head: vec![],
                    };
                    assert!(p.validate(&g).is_err());
                }
            }
        }
    }

    #[test]
    fn definition_examples() {
        assert!(!is_p4_sparse_by_definition(&path(5)).unwrap());
        for mask in 0u32..64 {
            let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e);
            let g = Graph::from_edges(4, edges).unwrap();
            assert!(is_p4_sparse_by_definition(&g).unwrap());
        }
        assert_eq!(
            is_p4_sparse_by_definition(&Graph::empty(17)),
            Err(Error::TooLarge {
                n: 17,
                cap: DEFINITIONAL_CAP
            })
        );
    }

    #[test]
    fn leaf_path_examples() {
        let t = build_tree(&Graph::empty(1)).unwrap();
        let d = leaf_path(&t, 0).unwrap();
        assert_eq!(d.path.len(), 1);
        assert!(d.subtrees.is_empty());

        let t = build_tree(&path(2)).unwrap();
        assert_eq!(leaf_path(&t, 0).unwrap().subtrees, vec![vec![1]]);

        // u = 0 universal over a P4
        let g = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (2, 3), (3, 4)]);
        let t = build_tree(&g).unwrap();
        let d = leaf_path(&t, 0).unwrap();
        assert_eq!(d.subtrees.len(), 1);
        let mut rest = d.subtrees[0].clone();
        rest.sort_unstable();
        assert_eq!(rest, vec![1, 2, 3, 4]);
        assert!(matches!(
            leaf_path(&t, 5),
            Err(Error::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn lca_examples() {
        let t = build_tree(&Graph::empty(2)).unwrap();
        let l = lca(&t, 0, 1).unwrap();
        assert_eq!((l.node, l.label), (t.root(), NodeLabel::Union));

        let t = build_tree(&path(4)).unwrap();
        let l = lca(&t, 0, 3).unwrap();
        assert_eq!(l.label, NodeLabel::Spider);
        assert_eq!(
            l.roles,
            Some((SpiderRole::Stable(0), SpiderRole::Stable(1)))
        );

        // 1-node(x, 0-node(u, v))
        let t = build_tree(&graph(3, &[(0, 1), (0, 2)])).unwrap();
        let l = lca(&t, 1, 2).unwrap();
        assert_eq!(l.label, NodeLabel::Union);
        assert_ne!(l.node, t.root());
        assert_eq!(lca(&t, 1, 1), Err(Error::SameVertex(1)));
    }

    #[test]
    fn text_form_orders_children_by_smallest_vertex() {
        let g = graph(5, &[(0, 3), (0, 4), (1, 2)]);
        let t = build_tree(&g).unwrap();
        assert_eq!(t.to_text(), "(0 (1 u0 (0 u3 u4)) (1 u1 u2))");
        let t = build_tree(&spider_graph(SpiderKind::Thin, 2, 2)).unwrap();
        assert_eq!(t.to_text(), "(2 thin [s0:k2 s1:k3] (head (0 u4 u5)))");
        assert!(t.to_dot().starts_with("graph p4sparse_tree {"));
    }

    #[test]
    fn random_tree_small_cases() {
        assert_eq!(random_tree(1, 3).to_text(), "u0");
        for seed in 0..20 {
            let t = random_tree(2, seed);
            assert!(matches!(
                t.label(t.root()),
                NodeLabel::Union | NodeLabel::Join
            ));
        }
        let g = realize_graph(&random_tree(100, 7));
        assert!(build_tree(&g).is_ok());
        assert_eq!(random_tree(50, 11), random_tree(50, 11));
    }

    fn check_spider_neighborhoods(g: &Graph, p: &SpiderPartition) {
        // adjacent s, k: every spider vertex other than s, k sees N(s) \ {k},
        // and K \ {k} sees N(k) \ {s}
        let inside: Vec<VertexId> = p.vertices().collect();
        for (i, &s) in p.stable.iter().enumerate() {
            let k = p.clique[i];
            for &w in &inside {
                if w == s || w == k {
                    continue;
                }
                for &x in g.neighbors(s) {
                    if x != k && x != w {
                        assert!(g.has_edge(w, x), "{w} misses {x} from N({s})");
                    }
                }
            }
            for &c in p.clique.iter().filter(|&&c| c != k) {
                for &x in g.neighbors(k) {
                    if x != s && x != c && inside.contains(&x) {
                        assert!(g.has_edge(c, x), "{c} misses {x} from N({k})");
                    }
                }
            }
        }
    }

    #[test]
    fn thin_spider_neighborhood_closure() {
        for legs in 2..6 {
            for head in 0..3 {
                let g = spider_graph(SpiderKind::Thin, legs, head);
                let p = extract_spider(&g).unwrap();
                check_spider_neighborhoods(&g, &p);
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip(n in 1usize..60, seed in any::<u64>()) {
            let g = realize_graph(&random_tree(n, seed));
            let t = build_tree(&g).unwrap();
            prop_assert!(same_edges(&realize_graph(&t), &g));
        }

        #[test]
        fn tree_partitions_agree_with_the_graph(n in 4usize..40, seed in any::<u64>()) {
            let g = realize_graph(&random_tree(n, seed));
            let t = build_tree(&g).unwrap();
            for id in 0..t.node_count() {
                if let Some(p) = t.spider(id) {
                    let (h, map) = induced_subgraph(&g, t.vertex_set(id)).unwrap();
                    let local = SpiderPartition {
                        kind: p.kind,
                        stable: p.stable.iter().map(|&x| map.new_id(x).unwrap()).collect(),
                        clique: p.clique.iter().map(|&x| map.new_id(x).unwrap()).collect(),
                        head: p.head.iter().map(|&x| map.new_id(x).unwrap()).collect(),
                    };
                    prop_assert!(local.validate(&h).is_ok());
                    prop_assert_eq!(extract_spider(&h), Some(sorted(local)));
                }
            }
        }

        #[test]
        fn leaf_path_subtrees_partition_the_rest(n in 1usize..40, seed in any::<u64>(), pick in any::<usize>()) {
            let t = random_tree(n, seed);
            let u = pick % n;
            let d = leaf_path(&t, u).unwrap();
            prop_assert_eq!(d.path.len(), d.subtrees.len() + 1);
            let mut all: Vec<VertexId> = d.subtrees.concat();
            all.push(u);
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }

        #[test]
        fn recognizers_agree(n in 1usize..9, density in 0.1f64..0.9, seed in any::<u64>()) {
            let g = crate::oracle::random_graph(n, density, seed);
            prop_assert_eq!(build_tree(&g).is_ok(), is_p4_sparse_by_definition(&g).unwrap());
        }
    }

    /// Canonical pair order, as produced by extraction.
    fn sorted(mut p: SpiderPartition) -> SpiderPartition {
        let mut pairs: Vec<_> = p
            .stable
            .iter()
            .copied()
            .zip(p.clique.iter().copied())
            .collect();
        pairs.sort_unstable();
        p.stable = pairs.iter().map(|x| x.0).collect();
        p.clique = pairs.iter().map(|x| x.1).collect();
        p.head.sort_unstable();
        p
    }
}
