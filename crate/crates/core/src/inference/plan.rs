//! Elimination orders for a right-hand side.

use std::collections::BTreeSet;

use crate::fgg::{Fgg, Hypergraph};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationPlan {
    /// Internal nodes in elimination order.
    pub order: Vec<usize>,
    /// Predicted number of table operations for one contraction.
    pub cost: u64,
    /// Node set of the largest intermediate table.
    pub widest: Vec<usize>,
}

fn scopes(h: &Hypergraph) -> Vec<BTreeSet<usize>> {
    h.edges.iter().map(|e| e.att.iter().copied().collect()).collect()
}

/// Min-fill order, ties broken by the smallest node id.
pub fn plan_elimination(g: &Fgg, h: &Hypergraph) -> EliminationPlan {
    let n = h.nodes.len();
    let mut adj = vec![BTreeSet::new(); n];
    for s in scopes(h) {
        for &a in &s {
            for &b in &s {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
    }
    let mut left: Vec<usize> = h.internal_nodes();
    let mut order = Vec::new();
    while !left.is_empty() {
        let fill = |v: usize| {
            let nb: Vec<usize> = adj[v].iter().copied().collect();
            let mut missing = 0;
            for (i, &a) in nb.iter().enumerate() {
                missing += nb[i + 1..].iter().filter(|&&b| !adj[a].contains(&b)).count();
            }
            missing
        };
        let (pos, &v) = left
            .iter()
            .enumerate()
            .min_by(|(_, &a), (_, &b)| fill(a).cmp(&fill(b)).then_with(|| h.nodes[a].id.cmp(&h.nodes[b].id)))
            .expect("nonempty");
        left.remove(pos);
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for &a in &nb {
            adj[a].remove(&v);
            for &b in &nb {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        adj[v].clear();
        order.push(v);
    }
    plan_with_order(g, h, order)
}

/// Costs a given order. Panics if `order` is not a permutation of the
/// internal nodes.
pub fn plan_with_order(g: &Fgg, h: &Hypergraph, order: Vec<usize>) -> EliminationPlan {
    let mut sorted = order.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, h.internal_nodes(), "order must cover the internal nodes once");
    let size = |s: &BTreeSet<usize>| -> u64 { s.iter().map(|&v| g.node_domain(h, v).len() as u64).product() };
    let mut live = scopes(h);
    let mut cost = 0;
    let mut widest = BTreeSet::new();
    for &v in &order {
        let (touched, rest): (Vec<_>, Vec<_>) = live.into_iter().partition(|s| s.contains(&v));
        let mut union: BTreeSet<usize> = touched.into_iter().flatten().collect();
        union.insert(v);
        cost += size(&union);
        if size(&union) > size(&widest) || widest.is_empty() {
            widest = union.clone();
        }
        union.remove(&v);
        live = rest;
        live.push(union);
    }
    let ext: BTreeSet<usize> = h.ext.iter().copied().collect();
    cost += size(&ext);
    EliminationPlan { order, cost, widest: widest.into_iter().collect() }
}
