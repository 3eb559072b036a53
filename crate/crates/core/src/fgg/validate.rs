use std::collections::HashSet;
use std::fmt;

use super::{Fgg, Hypergraph, LabelKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiagCode {
    UndeclaredStart,
    StartNotNonterminal,
    UndeclaredLabel,
    LhsNotNonterminal,
    ExtArity,
    ExtDuplicate,
    AttArity,
    DanglingNode,
    DuplicateNodeId,
    DuplicateEdgeId,
    UndeclaredDomain,
    MissingFactor,
    FactorArity,
    FactorDomain,
    FactorOnNonterminal,
    BadWeight,
    NonterminalDomain,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub code: DiagCode,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?}: {}", self.location, self.code, self.message)
    }
}

/// Checks every structural invariant of a grammar. An empty result means the
/// grammar can be handed to inference.
pub fn validate(g: &Fgg) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut diag = |code, location: String, message: String| out.push(Diagnostic { code, location, message });

    match g.labels.get(&g.start) {
        None => diag(DiagCode::UndeclaredStart, "start".into(), format!("start symbol `{}` is not declared", g.start)),
        Some(l) if l.kind != LabelKind::Nonterminal => diag(
            DiagCode::StartNotNonterminal,
            "start".into(),
            format!("start symbol `{}` is a terminal", g.start),
        ),
        _ => {}
    }

    for (name, label) in &g.labels {
        if label.kind == LabelKind::Terminal && !g.factors.contains_key(name) {
            diag(DiagCode::MissingFactor, format!("label `{name}`"), "terminal label has no factor table".into());
        }
    }

    for (name, table) in &g.factors {
        let loc = format!("factor `{name}`");
        match g.labels.get(name) {
            None => diag(DiagCode::UndeclaredLabel, loc.clone(), "factor table for undeclared label".into()),
            Some(l) if l.kind == LabelKind::Nonterminal => {
                diag(DiagCode::FactorOnNonterminal, loc.clone(), "nonterminal labels cannot carry factors".into())
            }
            Some(l) if l.arity != table.weights.arity() => diag(
                DiagCode::FactorArity,
                loc.clone(),
                format!("table has {} axes, label arity is {}", table.weights.arity(), l.arity),
            ),
            _ => {}
        }
        for d in table.weights.domains() {
            match g.domains.get(d.name()) {
                Some(decl) if decl.same_values(d) => {}
                _ => diag(
                    DiagCode::UndeclaredDomain,
                    loc.clone(),
                    format!("table axis domain `{}` does not match a declared domain", d.name()),
                ),
            }
        }
        if table.weights.data().iter().any(|x| !x.is_finite() || *x < 0.0) {
            diag(DiagCode::BadWeight, loc, "weights must be finite and nonnegative".into());
        }
    }

    let mut nt_domains: std::collections::HashMap<&str, (Vec<String>, String)> = Default::default();

    for (ri, rule) in g.rules.iter().enumerate() {
        let rloc = format!("rule {ri} ({})", rule.lhs);
        match g.labels.get(&rule.lhs) {
            None => diag(DiagCode::UndeclaredLabel, rloc.clone(), format!("lhs `{}` is not declared", rule.lhs)),
            Some(l) if l.kind != LabelKind::Nonterminal => {
                diag(DiagCode::LhsNotNonterminal, rloc.clone(), format!("lhs `{}` is a terminal", rule.lhs))
            }
            Some(l) if l.arity != rule.rhs.ext.len() => diag(
                DiagCode::ExtArity,
                rloc.clone(),
                format!("rhs has {} external nodes, lhs arity is {}", rule.rhs.ext.len(), l.arity),
            ),
            _ => {}
        }
        check_graph(g, &rule.rhs, &rloc, &mut diag);

        let ext_doms: Vec<String> = rule
            .rhs
            .ext
            .iter()
            .filter_map(|&x| rule.rhs.nodes.get(x).map(|n| n.domain.clone()))
            .collect();
        check_nt_domains(&mut nt_domains, &rule.lhs, ext_doms, rloc.clone(), &mut diag);
        for e in &rule.rhs.edges {
            if g.is_nonterminal(&e.label) {
                let doms = e
                    .att
                    .iter()
                    .filter_map(|&a| rule.rhs.nodes.get(a).map(|n| n.domain.clone()))
                    .collect();
                check_nt_domains(&mut nt_domains, &e.label, doms, format!("{rloc}, edge `{}`", e.id), &mut diag);
            }
        }
    }
    out
}

fn check_nt_domains<'a>(
    seen: &mut std::collections::HashMap<&'a str, (Vec<String>, String)>,
    label: &'a str,
    doms: Vec<String>,
    loc: String,
    diag: &mut impl FnMut(DiagCode, String, String),
) {
    match seen.get(label) {
        None => {
            seen.insert(label, (doms, loc));
        }
        Some((first, first_loc)) if *first != doms => diag(
            DiagCode::NonterminalDomain,
            loc,
            format!("`{label}` used with domains {doms:?}, but {first_loc} uses {first:?}"),
        ),
        _ => {}
    }
}

fn check_graph(g: &Fgg, h: &Hypergraph, loc: &str, diag: &mut impl FnMut(DiagCode, String, String)) {
    let mut ids = HashSet::new();
    for n in &h.nodes {
        if !ids.insert(n.id.as_str()) {
            diag(DiagCode::DuplicateNodeId, loc.to_string(), format!("node id `{}` repeated", n.id));
        }
        if !g.domains.contains_key(&n.domain) {
            diag(
                DiagCode::UndeclaredDomain,
                format!("{loc}, node `{}`", n.id),
                format!("domain `{}` is not declared", n.domain),
            );
        }
    }
    let mut ext_seen = HashSet::new();
    for &x in &h.ext {
        if x >= h.nodes.len() {
            diag(DiagCode::DanglingNode, loc.to_string(), format!("external node index {x} out of range"));
        } else if !ext_seen.insert(x) {
            diag(
                DiagCode::ExtDuplicate,
                loc.to_string(),
                format!("node `{}` appears twice in the external sequence", h.nodes[x].id),
            );
        }
    }
    let mut edge_ids = HashSet::new();
    for e in &h.edges {
        let eloc = format!("{loc}, edge `{}`", e.id);
        if !edge_ids.insert(e.id.as_str()) {
            diag(DiagCode::DuplicateEdgeId, eloc.clone(), "edge id repeated".into());
        }
        if let Some(&a) = e.att.iter().find(|&&a| a >= h.nodes.len()) {
            diag(DiagCode::DanglingNode, eloc.clone(), format!("attachment index {a} out of range"));
            continue;
        }
        let Some(label) = g.labels.get(&e.label) else {
            diag(DiagCode::UndeclaredLabel, eloc, format!("label `{}` is not declared", e.label));
            continue;
        };
        if label.arity != e.att.len() {
            diag(
                DiagCode::AttArity,
                eloc.clone(),
                format!("{} attachment nodes, label `{}` has arity {}", e.att.len(), e.label, label.arity),
            );
            continue;
        }
        if label.kind == LabelKind::Terminal {
            if let Some(table) = g.factors.get(&e.label) {
                for (pos, (&a, d)) in e.att.iter().zip(table.weights.domains()).enumerate() {
                    if h.nodes[a].domain != d.name() {
                        diag(
                            DiagCode::FactorDomain,
                            eloc.clone(),
                            format!(
                                "tentacle {pos} attaches node `{}` of domain `{}`, table expects `{}`",
                                h.nodes[a].id,
                                h.nodes[a].domain,
                                d.name()
                            ),
                        );
                    }
                }
            }
        }
    }
}
