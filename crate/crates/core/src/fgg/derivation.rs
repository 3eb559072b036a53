use std::collections::BTreeMap;
use std::fmt;

use super::{FggError, Fgg, Hypergraph, Naming};

/// A rule together with one child derivation per nonterminal edge of its
/// right-hand side. Children are keyed by edge index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DerivationTree {
    pub rule: usize,
    pub children: BTreeMap<usize, DerivationTree>,
}

impl DerivationTree {
    pub fn leaf(rule: usize) -> DerivationTree {
        DerivationTree { rule, children: BTreeMap::new() }
    }

    pub fn with_children(rule: usize, children: impl IntoIterator<Item = (usize, DerivationTree)>) -> DerivationTree {
        DerivationTree { rule, children: children.into_iter().collect() }
    }

    /// Number of rules on the longest root-to-leaf path; a single rule has height 1.
    pub fn height(&self) -> usize {
        1 + self.children.values().map(DerivationTree::height).max().unwrap_or(0)
    }

    /// Total number of rule applications.
    pub fn size(&self) -> usize {
        1 + self.children.values().map(DerivationTree::size).sum::<usize>()
    }

    /// Checks shape against the grammar: every nonterminal edge has exactly
    /// one child whose rule rewrites that edge's label.
    pub fn check(&self, g: &Fgg) -> Result<(), FggError> {
        let rule = g.rules.get(self.rule).ok_or(FggError::NoSuchRule(self.rule))?;
        let nts = g.nonterminal_edges(rule);
        for &ei in &nts {
            let edge = &rule.rhs.edges[ei];
            let child = self
                .children
                .get(&ei)
                .ok_or_else(|| FggError::MissingChild { rule: self.rule, edge: edge.id.clone() })?;
            let child_rule = g.rules.get(child.rule).ok_or(FggError::NoSuchRule(child.rule))?;
            if child_rule.lhs != edge.label {
                return Err(FggError::ChildLabel {
                    edge: edge.id.clone(),
                    child_rule: child.rule,
                    found: child_rule.lhs.clone(),
                    expected: edge.label.clone(),
                });
            }
            child.check(g)?;
        }
        if let Some(&extra) = self.children.keys().find(|k| !nts.contains(k)) {
            return Err(FggError::ExtraChild { rule: self.rule, edge: extra });
        }
        Ok(())
    }
}

impl fmt::Display for DerivationTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.rule)?;
        if !self.children.is_empty() {
            write!(f, "(")?;
            for (i, c) in self.children.values().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// The graph generated by a derivation tree: every nonterminal edge is
/// replaced, recursively, by the graph its child yields. The result has the
/// root rule's external nodes.
pub fn yield_graph(g: &Fgg, tree: &DerivationTree) -> Result<Hypergraph, FggError> {
    tree.check(g)?;
    yield_checked(g, tree)
}

fn yield_checked(g: &Fgg, tree: &DerivationTree) -> Result<Hypergraph, FggError> {
    let rule = &g.rules[tree.rule];
    if tree.children.is_empty() {
        return Ok(rule.rhs.clone());
    }
    let yields: BTreeMap<usize, Hypergraph> = tree
        .children
        .iter()
        .map(|(&ei, child)| yield_checked(g, child).map(|h| (ei, h)))
        .collect::<Result<_, _>>()?;
    let refs: BTreeMap<usize, &Hypergraph> = yields.iter().map(|(&k, v)| (k, v)).collect();
    rule.rhs
        .substitute(&refs, |ei| Naming::Prefix(format!("{}/", rule.rhs.edges[ei].id)))
}
