#![allow(dead_code)]

use p4sparse::completion::CompletionResult;
use p4sparse::tree::{
    build_tree, is_p4_sparse_by_definition, SpiderKind, SpiderPartition, DEFINITIONAL_CAP,
};
use p4sparse::Graph;

pub fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::from_edges(n, edges.iter().copied()).unwrap()
}

pub fn path(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
}

/// Spider with legs `s_i = i`, `k_i = legs + i` and head vertices
/// `2·legs..` carrying `head_edges` (given in head-local ids).
pub fn spider(
    kind: SpiderKind,
    legs: usize,
    head: usize,
    head_edges: &[(usize, usize)],
) -> (Graph, SpiderPartition) {
    let s: Vec<usize> = (0..legs).collect();
    let k: Vec<usize> = (legs..2 * legs).collect();
    let r: Vec<usize> = (2 * legs..2 * legs + head).collect();
    let mut edges = Vec::new();
    for i in 0..legs {
        for j in 0..legs {
            let adjacent = match kind {
                SpiderKind::Thin => i == j,
                SpiderKind::Thick => i != j,
            };
            if adjacent {
                edges.push((s[i], k[j]));
            }
            if i < j {
                edges.push((k[i], k[j]));
            }
        }
        for &x in &r {
            edges.push((k[i], x));
        }
    }
    edges.extend(head_edges.iter().map(|&(a, b)| (r[a], r[b])));
    let g = Graph::from_edges(2 * legs + head, edges).unwrap();
    let p = SpiderPartition {
        kind,
        stable: s,
        clique: k,
        head: r,
    };
    (g, p)
}

/// Fill edge endpoints, for readable assertions.
pub fn pairs(res: &CompletionResult) -> Vec<(usize, usize)> {
    res.fill.iter().map(|e| e.endpoints()).collect()
}

/// Everything a completion must satisfy regardless of optimality.
pub fn assert_sound(g: &Graph, u: usize, v: usize, res: &CompletionResult) {
    assert!(
        res.fill
            .iter()
            .any(|e| e.endpoints() == (u.min(v), u.max(v))),
        "uv missing"
    );
    assert!(
        res.fill.iter().all(|e| !g.has_edge(e.a(), e.b())),
        "fill repeats an edge"
    );
    assert_eq!(res.completed, g.with_edges(res.fill.iter().copied()));
    assert!(
        build_tree(&res.completed).is_ok(),
        "completion rejected by build_tree"
    );
    if g.n() <= DEFINITIONAL_CAP {
        assert!(
            is_p4_sparse_by_definition(&res.completed).unwrap(),
            "completion fails the definition"
        );
    }
}
