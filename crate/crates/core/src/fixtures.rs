//! Shared test material: the example programs and parameter files, plus
//! grammars encoded by hand.

use std::sync::Arc;

use indexmap::IndexMap;

use crate::fgg::{EdgeLabel, FactorTable, Fgg, Hypergraph, Rule};
use crate::frontend::Params;
use crate::tensor::WeightTensor;
use crate::value::{Domain, Value};

pub const PCFG_SOURCE: &str = include_str!("../programs/pcfg.ppl");
pub const PCFGW_SOURCE: &str = include_str!("../programs/pcfgw.ppl");
pub const PCFGW_AND_SOURCE: &str = include_str!("../programs/pcfgw_and.ppl");
pub const CONST_SOURCE: &str = include_str!("../programs/const.ppl");
pub const LET_CHAIN_SOURCE: &str = include_str!("../programs/let_chain.ppl");
pub const BRANCH_SOURCE: &str = include_str!("../programs/branch.ppl");
pub const OBSERVE_SOURCE: &str = include_str!("../programs/observe.ppl");
pub const ANDOR_SOURCE: &str = include_str!("../programs/andor.ppl");
pub const MUTUAL_SOURCE: &str = include_str!("../programs/mutual.ppl");
pub const MARKOV_SOURCE: &str = include_str!("../programs/markov.ppl");

pub const PCFG_PARAMS: &str = include_str!("../programs/pcfg.json");
pub const CKY_PARAMS: &str = include_str!("../programs/cky.json");
pub const SMALL_PARAMS: &str = include_str!("../programs/small.json");

/// A program together with the parameters it runs under.
#[derive(Clone, Debug)]
pub struct SuiteProgram {
    pub name: &'static str,
    pub source: &'static str,
    pub params: &'static str,
    /// Exact total weight of the least fixed point, where known in closed form.
    pub total: Option<f64>,
}

impl SuiteProgram {
    pub fn params(&self) -> Params {
        Params::from_str(self.params).expect("fixture parameters parse")
    }
}

pub fn all_sources() -> Vec<(&'static str, &'static str)> {
    vec![
        ("pcfg", PCFG_SOURCE),
        ("pcfgw", PCFGW_SOURCE),
        ("pcfgw_and", PCFGW_AND_SOURCE),
        ("const", CONST_SOURCE),
        ("let_chain", LET_CHAIN_SOURCE),
        ("branch", BRANCH_SOURCE),
        ("observe", OBSERVE_SOURCE),
        ("andor", ANDOR_SOURCE),
        ("mutual", MUTUAL_SOURCE),
        ("markov", MARKOV_SOURCE),
    ]
}

/// Programs used for end-to-end semantic checks.
pub fn suite() -> Vec<SuiteProgram> {
    let p = |name, source, params, total| SuiteProgram { name, source, params, total };
    vec![
        p("const", CONST_SOURCE, SMALL_PARAMS, Some(1.0)),
        p("let_chain", LET_CHAIN_SOURCE, SMALL_PARAMS, Some(1.0)),
        p("branch", BRANCH_SOURCE, SMALL_PARAMS, Some(1.0)),
        p("observe", OBSERVE_SOURCE, SMALL_PARAMS, None),
        // Everything except a = b = false: 1 - 0.7*0.4.
        p("andor", ANDOR_SOURCE, SMALL_PARAMS, Some(1.0 - 0.7 * 0.4)),
        p("mutual", MUTUAL_SOURCE, SMALL_PARAMS, Some(1.0)),
        p("markov", MARKOV_SOURCE, SMALL_PARAMS, Some(1.0)),
        p("pcfg", PCFG_SOURCE, PCFG_PARAMS, Some(1.0)),
        p("pcfgw", PCFGW_SOURCE, CKY_PARAMS, Some(0.6)),
    ]
}

pub fn pcfg_params() -> Params {
    Params::from_str(PCFG_PARAMS).expect("fixture parameters parse")
}

/// Parameters for the CNF string program: a binary table over nonterminal
/// names, a lexical table, and the input string.
pub fn cnf_params(binary: &[(&str, &str, &str, f64)], lexical: &[(&str, &str, f64)], input: &[&str]) -> Params {
    let mut rows: IndexMap<Value, Vec<(Value, f64)>> = IndexMap::new();
    for &(x, y, z, w) in binary {
        rows.entry(Value::atom(x))
            .or_default()
            .push((Value::inr(Value::pair(Value::atom(y), Value::atom(z))), w));
    }
    for &(x, a, w) in lexical {
        rows.entry(Value::atom(x)).or_default().push((Value::inl(Value::atom(a)), w));
    }
    Params::empty()
        .with_table("p", rows.into_iter().collect())
        .with_input("w", Value::list(input.iter().map(|a| Value::atom(*a))))
}

fn dom(name: &str, values: &[&str]) -> Arc<Domain> {
    Arc::new(Domain::new(name, values.iter().map(|v| Value::atom(*v)).collect()).expect("fixture domain"))
}

/// PCFG weights for the hand-encoded grammars: binary rules `X -> Y Z` and
/// lexical rules `X -> a`.
#[derive(Clone, Debug)]
pub struct PcfgWeights {
    pub nonterminals: Vec<&'static str>,
    pub terminals: Vec<&'static str>,
    pub binary: Vec<(&'static str, &'static str, &'static str, f64)>,
    pub lexical: Vec<(&'static str, &'static str, f64)>,
}

impl PcfgWeights {
    /// One nonterminal `S`, `S -> a` with 0.7 and `S -> S S` with 0.3.
    pub fn single() -> PcfgWeights {
        PcfgWeights {
            nonterminals: vec!["S"],
            terminals: vec!["a"],
            binary: vec![("S", "S", "S", 0.3)],
            lexical: vec![("S", "a", 0.7)],
        }
    }

    pub fn small() -> PcfgWeights {
        PcfgWeights {
            nonterminals: vec!["S", "A", "B"],
            terminals: vec!["a", "b"],
            binary: vec![("S", "A", "B", 0.6), ("A", "A", "B", 0.2)],
            lexical: vec![("S", "a", 0.4), ("A", "a", 0.8), ("B", "b", 1.0)],
        }
    }

    fn tables(&self) -> (Arc<Domain>, Arc<Domain>, WeightTensor, WeightTensor, WeightTensor) {
        let n = dom("N", &self.nonterminals);
        let w = dom("W", &self.terminals);
        let is_s = WeightTensor::from_fn(vec![n.clone()], |v| f64::from(*v[0] == Value::atom("S")));
        let bin = WeightTensor::from_fn(vec![n.clone(), n.clone(), n.clone()], |v| {
            self.binary
                .iter()
                .filter(|(x, y, z, _)| {
                    *v[0] == Value::atom(*x) && *v[1] == Value::atom(*y) && *v[2] == Value::atom(*z)
                })
                .map(|r| r.3)
                .sum()
        });
        let lex = WeightTensor::from_fn(vec![n.clone(), w.clone()], |v| {
            self.lexical
                .iter()
                .filter(|(x, a, _)| *v[0] == Value::atom(*x) && *v[1] == Value::atom(*a))
                .map(|r| r.2)
                .sum()
        });
        (n, w, is_s, bin, lex)
    }
}

/// The PCFG-derivation grammar: `S' -> N1=S, X(N1)`, `X -> p(N1 -> N2 N3),
/// X(N2), X(N3)` and `X -> p(N1 -> W2)`.
pub fn pcfg_derivation_fgg(p: &PcfgWeights) -> Fgg {
    let (n, w, is_s, bin, lex) = p.tables();
    let mut labels = IndexMap::new();
    for l in [
        EdgeLabel::nonterminal("S'", 0),
        EdgeLabel::nonterminal("X", 1),
        EdgeLabel::terminal("is_S", 1),
        EdgeLabel::terminal("p_bin", 3),
        EdgeLabel::terminal("p_lex", 2),
    ] {
        labels.insert(l.name.clone(), l);
    }

    let mut start = Hypergraph::new();
    let n1 = start.add_node("N1", "N");
    start.add_edge("e1", "is_S", vec![n1]);
    start.add_edge("e2", "X", vec![n1]);

    let mut binary = Hypergraph::new();
    let (a, b, c) = (binary.add_node("N1", "N"), binary.add_node("N2", "N"), binary.add_node("N3", "N"));
    binary.add_edge("e1", "p_bin", vec![a, b, c]);
    binary.add_edge("e2", "X", vec![b]);
    binary.add_edge("e3", "X", vec![c]);
    binary.ext = vec![a];

    let mut lexical = Hypergraph::new();
    let (a, b) = (lexical.add_node("N1", "N"), lexical.add_node("W2", "W"));
    lexical.add_edge("e1", "p_lex", vec![a, b]);
    lexical.ext = vec![a];

    let factors = [("is_S", is_s), ("p_bin", bin), ("p_lex", lex)]
        .into_iter()
        .map(|(l, t)| (l.to_string(), FactorTable { label: l.to_string(), weights: t }))
        .collect();
    Fgg {
        labels,
        rules: vec![
            Rule { lhs: "S'".into(), rhs: start },
            Rule { lhs: "X".into(), rhs: binary },
            Rule { lhs: "X".into(), rhs: lexical },
        ],
        start: "S'".into(),
        domains: [("N".to_string(), n), ("W".to_string(), w)].into_iter().collect(),
        factors,
    }
}

/// The five-node factor graph of a tree `N1 -> N2 N3`, `N2 -> W4`, `N3 -> W5`,
/// using the factor labels of [`pcfg_derivation_fgg`].
pub fn parse_tree_graph() -> Hypergraph {
    let mut g = Hypergraph::new();
    let n1 = g.add_node("N1", "N");
    let n2 = g.add_node("N2", "N");
    let n3 = g.add_node("N3", "N");
    let w4 = g.add_node("W4", "W");
    let w5 = g.add_node("W5", "W");
    g.add_edge("f1", "is_S", vec![n1]);
    g.add_edge("f2", "p_bin", vec![n1, n2, n3]);
    g.add_edge("f3", "p_lex", vec![n2, w4]);
    g.add_edge("f4", "p_lex", vec![n3, w5]);
    g
}

/// Nullary branching grammar `X -> [a]`, `X -> [b] X X`: its weight is the
/// least root of `Z = a + b Z^2`.
pub fn branching_fgg(a: f64, b: f64) -> Fgg {
    let mut labels = IndexMap::new();
    for l in [EdgeLabel::nonterminal("X", 0), EdgeLabel::terminal("stop", 0), EdgeLabel::terminal("split", 0)] {
        labels.insert(l.name.clone(), l);
    }
    let mut leaf = Hypergraph::new();
    leaf.add_edge("e1", "stop", vec![]);
    let mut split = Hypergraph::new();
    split.add_edge("e1", "split", vec![]);
    split.add_edge("e2", "X", vec![]);
    split.add_edge("e3", "X", vec![]);
    let factors = [("stop", a), ("split", b)]
        .into_iter()
        .map(|(l, w)| (l.to_string(), FactorTable { label: l.to_string(), weights: WeightTensor::scalar(w) }))
        .collect();
    Fgg {
        labels,
        rules: vec![Rule { lhs: "X".into(), rhs: leaf }, Rule { lhs: "X".into(), rhs: split }],
        start: "X".into(),
        domains: IndexMap::new(),
        factors,
    }
}

/// Least root of `Z = a + b Z^2` for `a, b > 0`, if real.
pub fn branching_closed_form(a: f64, b: f64) -> Option<f64> {
    let disc = 1.0 - 4.0 * a * b;
    (disc >= 0.0).then(|| (1.0 - disc.sqrt()) / (2.0 * b))
}
