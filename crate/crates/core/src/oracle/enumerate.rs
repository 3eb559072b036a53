//! Derivation enumeration and brute-force weights of bounded-height trees.

use std::collections::HashMap;

use thiserror::Error;

use crate::fgg::{yield_graph, DerivationTree, FggError, Fgg, Hypergraph};
use crate::tensor::WeightTensor;

#[derive(Debug, Error)]
pub enum EnumerateError {
    #[error("more than {0} derivations; raise the limit or lower the height")]
    TooMany(usize),
    #[error(transparent)]
    Fgg(#[from] FggError),
}

/// All derivation trees rooted at `x` of height at most `max_height`, in
/// rule order with children varied last-edge-fastest.
pub fn derivations(g: &Fgg, x: &str, max_height: usize, limit: usize) -> Result<Vec<DerivationTree>, EnumerateError> {
    let mut memo = HashMap::new();
    go(g, x, max_height, limit, &mut memo)
}

fn go(
    g: &Fgg,
    x: &str,
    h: usize,
    limit: usize,
    memo: &mut HashMap<(String, usize), Vec<DerivationTree>>,
) -> Result<Vec<DerivationTree>, EnumerateError> {
    if h == 0 {
        return Ok(Vec::new());
    }
    if let Some(v) = memo.get(&(x.to_string(), h)) {
        return Ok(v.clone());
    }
    let mut out = Vec::new();
    for (ri, rule) in g.rules_for(x) {
        let nts = g.nonterminal_edges(rule);
        let mut partial: Vec<Vec<(usize, DerivationTree)>> = vec![Vec::new()];
        for &e in &nts {
            let kids = go(g, &rule.rhs.edges[e].label, h - 1, limit, memo)?;
            let mut next = Vec::new();
            for p in &partial {
                for k in &kids {
                    if next.len() >= limit {
                        return Err(EnumerateError::TooMany(limit));
                    }
                    let mut q = p.clone();
                    q.push((e, k.clone()));
                    next.push(q);
                }
            }
            partial = next;
        }
        for children in partial {
            out.push(DerivationTree::with_children(ri, children));
            if out.len() > limit {
                return Err(EnumerateError::TooMany(limit));
            }
        }
    }
    memo.insert((x.to_string(), h), out.clone());
    Ok(out)
}

/// Weight tensor over the external nodes of a terminal-only graph, by
/// depth-first enumeration of assignments with early zero cut-off.
pub fn brute_force_marginal(g: &Fgg, h: &Hypergraph) -> WeightTensor {
    let n = h.nodes.len();
    let mut order: Vec<usize> = h.ext.clone();
    order.extend((0..n).filter(|v| !h.ext.contains(v)));
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    // Edges become checkable once their last node in `order` is assigned.
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (ei, e) in h.edges.iter().enumerate() {
        let at = e.att.iter().map(|&a| pos[a] + 1).max().unwrap_or(0);
        ready[at].push(ei);
    }
    let sizes: Vec<usize> = order.iter().map(|&v| g.node_domain(h, v).len()).collect();
    let doms = h.ext.iter().map(|&x| g.node_domain(h, x).clone()).collect();
    let mut out = vec![0.0; h.ext.iter().map(|&x| g.node_domain(h, x).len()).product()];
    let mut assign = vec![0usize; n];

    struct Ctx<'a> {
        g: &'a Fgg,
        h: &'a Hypergraph,
        order: &'a [usize],
        sizes: &'a [usize],
        ready: &'a [Vec<usize>],
        n_ext: usize,
    }
    fn edge_weight(c: &Ctx, ei: usize, assign: &[usize]) -> f64 {
        let e = &c.h.edges[ei];
        let idx: Vec<usize> = e.att.iter().map(|&a| assign[a]).collect();
        c.g.factors[&e.label].weights.get(&idx)
    }
    fn dfs(c: &Ctx, depth: usize, w: f64, ext_index: usize, assign: &mut [usize], out: &mut [f64]) {
        if depth == c.order.len() {
            out[ext_index] += w;
            return;
        }
        let v = c.order[depth];
        for k in 0..c.sizes[depth] {
            assign[v] = k;
            let mut w2 = w;
            for &ei in &c.ready[depth + 1] {
                w2 *= edge_weight(c, ei, assign);
                if w2 == 0.0 {
                    break;
                }
            }
            if w2 == 0.0 {
                continue;
            }
            let idx = if depth < c.n_ext { ext_index * c.sizes[depth] + k } else { ext_index };
            dfs(c, depth + 1, w2, idx, assign, out);
        }
    }

    let ctx = Ctx { g, h, order: &order, sizes: &sizes, ready: &ready, n_ext: h.ext.len() };
    let w0: f64 = ready[0].iter().map(|&ei| edge_weight(&ctx, ei, &assign)).product();
    if w0 != 0.0 {
        dfs(&ctx, 0, w0, 0, &mut assign, &mut out);
    }
    WeightTensor::new(doms, out).expect("sums of finite nonnegative products")
}

/// Total weight of one derivation: the sum over all assignments of its yield.
pub fn tree_weight(g: &Fgg, tree: &DerivationTree) -> Result<WeightTensor, EnumerateError> {
    Ok(brute_force_marginal(g, &yield_graph(g, tree)?))
}

/// Sum of tree weights over derivations of `x` with height at most `max_height`.
pub fn truncated_wx(g: &Fgg, x: &str, max_height: usize, limit: usize) -> Result<WeightTensor, EnumerateError> {
    let doms = g.nonterminal_domains(x).unwrap_or_default();
    let mut acc = vec![0.0; doms.iter().map(|d| d.len()).product()];
    for t in derivations(g, x, max_height, limit)? {
        let w = tree_weight(g, &t)?;
        acc.iter_mut().zip(w.data()).for_each(|(a, b)| *a += b);
    }
    WeightTensor::new(doms, acc).map_err(|e| EnumerateError::Fgg(FggError::Invalid(e.to_string())))
}
