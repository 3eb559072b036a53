//! Canonical JSON interchange format for grammars.
//!
//! ```text
//! { "labels":  [{"name", "arity", "kind"}],
//!   "start":   name,
//!   "rules":   [{"lhs", "rhs": {"nodes": [{"id", "domain"}],
//!                               "edges": [{"id", "label", "att": [ids]}],
//!                               "ext":   [ids]}}],
//!   "domains": {name: [values]},
//!   "factors": {label: {"domains": [names], "table": nested arrays}} }
//! ```
//!
//! Factor `domains` may be omitted on input, in which case they are read off
//! the first edge that carries the label.

use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::{EdgeLabel, FactorTable, Fgg, FggError, Hypergraph, Rule};
use crate::tensor::WeightTensor;
use crate::value::{Domain, Value};

#[derive(Serialize, Deserialize)]
struct FggJson {
    labels: Vec<EdgeLabel>,
    start: String,
    rules: Vec<RuleJson>,
    domains: IndexMap<String, Vec<Json>>,
    factors: IndexMap<String, FactorJson>,
}

#[derive(Serialize, Deserialize)]
struct RuleJson {
    lhs: String,
    rhs: GraphJson,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct GraphJson {
    nodes: Vec<NodeJson>,
    edges: Vec<EdgeJson>,
    ext: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    id: String,
    domain: String,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    id: String,
    label: String,
    att: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct FactorJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domains: Option<Vec<String>>,
    table: Json,
}

fn graph_to_json(h: &Hypergraph) -> GraphJson {
    let id = |i: usize| h.nodes[i].id.clone();
    GraphJson {
        nodes: h.nodes.iter().map(|n| NodeJson { id: n.id.clone(), domain: n.domain.clone() }).collect(),
        edges: h
            .edges
            .iter()
            .map(|e| EdgeJson { id: e.id.clone(), label: e.label.clone(), att: e.att.iter().map(|&a| id(a)).collect() })
            .collect(),
        ext: h.ext.iter().map(|&x| id(x)).collect(),
    }
}

fn graph_from_json(j: GraphJson) -> Result<Hypergraph, FggError> {
    let mut h = Hypergraph::new();
    for n in j.nodes {
        if h.node_index(&n.id).is_some() {
            return Err(FggError::Json(format!("node id `{}` repeated", n.id)));
        }
        h.add_node(n.id, n.domain);
    }
    let lookup = |h: &Hypergraph, id: &str| {
        h.node_index(id).ok_or_else(|| FggError::Json(format!("reference to unknown node `{id}`")))
    };
    for e in j.edges {
        let att = e.att.iter().map(|a| lookup(&h, a)).collect::<Result<Vec<_>, _>>()?;
        h.add_edge(e.id, e.label, att);
    }
    h.ext = j.ext.iter().map(|x| lookup(&h, x)).collect::<Result<Vec<_>, _>>()?;
    Ok(h)
}

pub fn to_json(g: &Fgg) -> Json {
    let doc = FggJson {
        labels: g.labels.values().cloned().collect(),
        start: g.start.clone(),
        rules: g.rules.iter().map(|r| RuleJson { lhs: r.lhs.clone(), rhs: graph_to_json(&r.rhs) }).collect(),
        domains: g
            .domains
            .iter()
            .map(|(k, d)| (k.clone(), d.values().iter().map(Value::to_json).collect()))
            .collect(),
        factors: g
            .factors
            .iter()
            .map(|(k, f)| {
                (
                    k.clone(),
                    FactorJson {
                        domains: Some(f.weights.domains().iter().map(|d| d.name().to_string()).collect()),
                        table: f.weights.to_nested_json(),
                    },
                )
            })
            .collect(),
    };
    serde_json::to_value(doc).expect("grammar serializes")
}

pub fn to_string_pretty(g: &Fgg) -> String {
    let mut s = serde_json::to_string_pretty(&to_json(g)).expect("grammar serializes");
    s.push('\n');
    s
}

pub fn from_str(text: &str) -> Result<Fgg, FggError> {
    let doc: FggJson = serde_json::from_str(text).map_err(|e| FggError::Json(e.to_string()))?;
    from_doc(doc)
}

pub fn from_json(j: &Json) -> Result<Fgg, FggError> {
    let doc: FggJson = serde_json::from_value(j.clone()).map_err(|e| FggError::Json(e.to_string()))?;
    from_doc(doc)
}

fn from_doc(doc: FggJson) -> Result<Fgg, FggError> {
    let mut labels = IndexMap::new();
    for l in doc.labels {
        let name = l.name.clone();
        if labels.insert(name.clone(), l).is_some() {
            return Err(FggError::Json(format!("label `{name}` declared twice")));
        }
    }
    let mut domains = IndexMap::new();
    for (name, vals) in doc.domains {
        let vals = vals
            .iter()
            .map(Value::from_json)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| FggError::Json(e.to_string()))?;
        let d = Domain::new(name.clone(), vals).map_err(|e| FggError::Json(e.to_string()))?;
        domains.insert(name, Arc::new(d));
    }
    let rules = doc
        .rules
        .into_iter()
        .map(|r| Ok(Rule { lhs: r.lhs, rhs: graph_from_json(r.rhs)? }))
        .collect::<Result<Vec<_>, FggError>>()?;

    let mut factors = IndexMap::new();
    for (label, f) in doc.factors {
        let names = match f.domains {
            Some(names) => names,
            None => infer_factor_domains(&rules, &label)
                .ok_or_else(|| FggError::Json(format!("factor `{label}`: no domains given and no edge uses it")))?,
        };
        let doms = names
            .iter()
            .map(|n| domains.get(n).cloned().ok_or_else(|| FggError::Json(format!("factor `{label}`: unknown domain `{n}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        let weights = WeightTensor::from_nested_json(doms, &f.table)
            .map_err(|e| FggError::Json(format!("factor `{label}`: {e}")))?;
        factors.insert(label.clone(), FactorTable { label, weights });
    }
    Ok(Fgg { labels, rules, start: doc.start, domains, factors })
}

fn infer_factor_domains(rules: &[Rule], label: &str) -> Option<Vec<String>> {
    rules.iter().find_map(|r| {
        r.rhs
            .edges
            .iter()
            .find(|e| e.label == label)
            .map(|e| e.att.iter().map(|&a| r.rhs.nodes[a].domain.clone()).collect())
    })
}

/// Debug dump of a tensor: its domains (with values) and a nested table.
pub fn tensor_to_json(t: &WeightTensor) -> Json {
    serde_json::json!({
        "domains": t.domains().iter().map(|d| serde_json::json!({
            "name": d.name(),
            "values": d.values().iter().map(Value::to_json).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "table": t.to_nested_json(),
    })
}

pub fn hypergraph_to_json(h: &Hypergraph) -> Json {
    serde_json::to_value(graph_to_json(h)).expect("graph serializes")
}
