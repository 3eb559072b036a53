//! Hypergraphs, hyperedge replacement rules, and factor graph grammars.
//!
//! Node and edge ids are scoped to one hypergraph. Attachment sequences and
//! external-node sequences are ordered and that order is significant.

mod derivation;
mod iso;
pub mod json;
mod validate;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::WeightTensor;
use crate::value::Domain;

pub use derivation::{yield_graph, DerivationTree};
pub use iso::isomorphic;
pub use validate::{validate, DiagCode, Diagnostic};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Terminal,
    Nonterminal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeLabel {
    pub name: String,
    pub arity: usize,
    pub kind: LabelKind,
}

impl EdgeLabel {
    pub fn terminal(name: impl Into<String>, arity: usize) -> EdgeLabel {
        EdgeLabel { name: name.into(), arity, kind: LabelKind::Terminal }
    }

    pub fn nonterminal(name: impl Into<String>, arity: usize) -> EdgeLabel {
        EdgeLabel { name: name.into(), arity, kind: LabelKind::Nonterminal }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    /// Name of the node's domain in the enclosing grammar.
    pub domain: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub label: String,
    /// Attachment nodes, as indices into the graph's node list.
    pub att: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Hypergraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub ext: Vec<usize>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FggError {
    #[error("derivation: rule {rule} has no child for nonterminal edge `{edge}`")]
    MissingChild { rule: usize, edge: String },
    #[error("derivation: rule {rule} has a child for edge index {edge}, which is not a nonterminal edge")]
    ExtraChild { rule: usize, edge: usize },
    #[error("derivation: child of edge `{edge}` uses rule {child_rule} for `{found}`, expected `{expected}`")]
    ChildLabel { edge: String, child_rule: usize, found: String, expected: String },
    #[error("derivation: rule index {0} out of range")]
    NoSuchRule(usize),
    #[error("derivation: edge `{edge}` has {att} attachments but the child graph has {ext} external nodes")]
    ExtArity { edge: String, att: usize, ext: usize },
    #[error("grammar JSON: {0}")]
    Json(String),
    #[error("grammar is invalid: {0}")]
    Invalid(String),
}

/// How to name nodes and edges copied into a host graph during replacement.
#[derive(Clone, Debug)]
pub enum Naming {
    /// Prefix every copied id, e.g. `e3/v1`.
    Prefix(String),
    /// Keep the copied id when it is free in the host, else add a numeric suffix.
    Fresh,
}

impl Hypergraph {
    pub fn new() -> Hypergraph {
        Hypergraph::default()
    }

    pub fn add_node(&mut self, id: impl Into<String>, domain: impl Into<String>) -> usize {
        self.nodes.push(Node { id: id.into(), domain: domain.into() });
        self.nodes.len() - 1
    }

    pub fn add_edge(&mut self, id: impl Into<String>, label: impl Into<String>, att: Vec<usize>) -> usize {
        self.edges.push(Edge { id: id.into(), label: label.into(), att });
        self.edges.len() - 1
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn is_external(&self, node: usize) -> bool {
        self.ext.contains(&node)
    }

    /// Indices of nodes that are not external.
    pub fn internal_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|n| !self.is_external(*n)).collect()
    }

    /// Returns a node id not yet used in this graph, based on `hint`.
    pub fn fresh_node_id(&self, hint: &str) -> String {
        fresh_name(hint, |c| self.nodes.iter().any(|n| n.id == c))
    }

    pub fn fresh_edge_id(&self, hint: &str) -> String {
        fresh_name(hint, |c| self.edges.iter().any(|e| e.id == c))
    }

    /// Replaces the edges in `replacements` (keyed by edge index) with copies of
    /// the given graphs, fusing each graph's i-th external node with the
    /// edge's i-th attachment node. Copied edges take the replaced edge's place
    /// in the edge order.
    pub fn substitute(
        &self,
        replacements: &BTreeMap<usize, &Hypergraph>,
        naming: impl Fn(usize) -> Naming,
    ) -> Result<Hypergraph, FggError> {
        let mut out = Hypergraph { nodes: self.nodes.clone(), edges: Vec::new(), ext: self.ext.clone() };
        let mut node_ids: HashSet<String> = out.nodes.iter().map(|n| n.id.clone()).collect();
        let mut edge_ids: HashSet<String> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| !replacements.contains_key(i))
            .map(|(_, e)| e.id.clone())
            .collect();
        for (ei, edge) in self.edges.iter().enumerate() {
            let Some(child) = replacements.get(&ei) else {
                out.edges.push(edge.clone());
                continue;
            };
            if child.ext.len() != edge.att.len() {
                return Err(FggError::ExtArity {
                    edge: edge.id.clone(),
                    att: edge.att.len(),
                    ext: child.ext.len(),
                });
            }
            let naming = naming(ei);
            let mut map = vec![usize::MAX; child.nodes.len()];
            for (i, &x) in child.ext.iter().enumerate() {
                map[x] = edge.att[i];
            }
            for (ci, node) in child.nodes.iter().enumerate() {
                if map[ci] != usize::MAX {
                    continue;
                }
                let id = pick_name(&naming, &node.id, &node_ids);
                node_ids.insert(id.clone());
                out.nodes.push(Node { id, domain: node.domain.clone() });
                map[ci] = out.nodes.len() - 1;
            }
            for e in &child.edges {
                let id = pick_name(&naming, &e.id, &edge_ids);
                edge_ids.insert(id.clone());
                out.edges.push(Edge {
                    id,
                    label: e.label.clone(),
                    att: e.att.iter().map(|&a| map[a]).collect(),
                });
            }
        }
        Ok(out)
    }

    /// Removes node `drop` after redirecting all of its attachments to `keep`.
    pub fn merge_nodes(&mut self, keep: usize, drop: usize) {
        assert!(keep != drop);
        for e in &mut self.edges {
            for a in &mut e.att {
                if *a == drop {
                    *a = keep;
                }
            }
        }
        for x in &mut self.ext {
            if *x == drop {
                *x = keep;
            }
        }
        self.remove_node(drop);
    }

    /// Removes an unattached, non-external node and renumbers the rest.
    pub fn remove_node(&mut self, node: usize) {
        debug_assert!(!self.edges.iter().any(|e| e.att.contains(&node)));
        debug_assert!(!self.ext.contains(&node));
        self.nodes.remove(node);
        let fix = |a: &mut usize| {
            if *a > node {
                *a -= 1;
            }
        };
        for e in &mut self.edges {
            e.att.iter_mut().for_each(fix);
        }
        self.ext.iter_mut().for_each(fix);
    }

    /// Number of edge attachment slots that point at `node`.
    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().map(|e| e.att.iter().filter(|&&a| a == node).count()).sum()
    }
}

fn pick_name(naming: &Naming, base: &str, taken: &HashSet<String>) -> String {
    match naming {
        Naming::Prefix(p) => fresh_name(&format!("{p}{base}"), |c| taken.contains(c)),
        Naming::Fresh => fresh_name(base, |c| taken.contains(c)),
    }
}

pub(crate) fn fresh_name(hint: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(hint) {
        return hint.to_string();
    }
    (2..)
        .map(|k| format!("{hint}_{k}"))
        .find(|c| !taken(c))
        .expect("unbounded suffix search")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub lhs: String,
    pub rhs: Hypergraph,
}

/// Weight function of a terminal label; `weights` carries the domains.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorTable {
    pub label: String,
    pub weights: WeightTensor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fgg {
    pub labels: IndexMap<String, EdgeLabel>,
    pub rules: Vec<Rule>,
    pub start: String,
    pub domains: IndexMap<String, Arc<Domain>>,
    pub factors: IndexMap<String, FactorTable>,
}

impl Fgg {
    pub fn label(&self, name: &str) -> Option<&EdgeLabel> {
        self.labels.get(name)
    }

    pub fn is_nonterminal(&self, name: &str) -> bool {
        matches!(self.labels.get(name), Some(l) if l.kind == LabelKind::Nonterminal)
    }

    pub fn is_terminal(&self, name: &str) -> bool {
        matches!(self.labels.get(name), Some(l) if l.kind == LabelKind::Terminal)
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = &EdgeLabel> {
        self.labels.values().filter(|l| l.kind == LabelKind::Nonterminal)
    }

    pub fn rules_for<'a>(&'a self, lhs: &'a str) -> impl Iterator<Item = (usize, &'a Rule)> + 'a {
        self.rules.iter().enumerate().filter(move |(_, r)| r.lhs == lhs)
    }

    pub fn domain(&self, name: &str) -> Option<&Arc<Domain>> {
        self.domains.get(name)
    }

    /// Domain of node `n` in graph `g`. Panics on an undeclared domain; run
    /// [`validate`] first on untrusted grammars.
    pub fn node_domain(&self, g: &Hypergraph, n: usize) -> &Arc<Domain> {
        let name = &g.nodes[n].domain;
        self.domains
            .get(name)
            .unwrap_or_else(|| panic!("node `{}` has undeclared domain `{name}`", g.nodes[n].id))
    }

    /// Domains of a nonterminal's attachment slots, taken from its first rule
    /// or, if it has none, from the first edge that uses it.
    pub fn nonterminal_domains(&self, name: &str) -> Option<Vec<Arc<Domain>>> {
        if let Some((_, r)) = self.rules_for(name).next() {
            return r
                .rhs
                .ext
                .iter()
                .map(|&x| self.domains.get(&r.rhs.nodes[x].domain).cloned())
                .collect();
        }
        for r in &self.rules {
            if let Some(e) = r.rhs.edges.iter().find(|e| e.label == name) {
                return e
                    .att
                    .iter()
                    .map(|&a| self.domains.get(&r.rhs.nodes[a].domain).cloned())
                    .collect();
            }
        }
        None
    }

    /// Nonterminal edge indices of a rule's right-hand side.
    pub fn nonterminal_edges(&self, rule: &Rule) -> Vec<usize> {
        rule.rhs
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| self.is_nonterminal(&e.label))
            .map(|(i, _)| i)
            .collect()
    }
}

impl fmt::Display for Hypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ext: Vec<&str> = self.ext.iter().map(|&x| self.nodes[x].id.as_str()).collect();
        write!(f, "[{}]", ext.join(", "))?;
        for e in &self.edges {
            let att: Vec<&str> = e.att.iter().map(|&a| self.nodes[a].id.as_str()).collect();
            write!(f, " {}({})", e.label, att.join(", "))?;
        }
        Ok(())
    }
}
