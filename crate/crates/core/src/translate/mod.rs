//! Program to grammar translation: one nonterminal per live subexpression,
//! plus one per function and a start symbol.

mod builtins;
pub mod simplify;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::fgg::{fresh_name, EdgeLabel, FactorTable, Fgg, Hypergraph, Rule};
use crate::frontend::{Builtin, Expr, ExprKind, Span, TypedExpr, TypedProgram};
use crate::tensor::WeightTensor;
use crate::value::Domain;

pub use simplify::{flatten, simplify, Pass, PassEvent, PassSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NtRole {
    Start,
    Function,
    If,
    Case,
    Expr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    /// Builtin operation or constant; composable.
    Builtin,
    /// `if`/`case` arm constraint; composable.
    Guard,
    /// Variable read `v = x`; contractible.
    Copy,
    /// Distribution density `d(v)`.
    Density,
}

impl FactorKind {
    pub fn composable(self) -> bool {
        matches!(self, FactorKind::Builtin | FactorKind::Guard)
    }
}

/// Where a rule came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub span: Span,
    pub construct: String,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.span, self.construct)
    }
}

#[derive(Clone, Debug)]
pub struct CompilationUnit {
    pub fgg: Fgg,
    /// Parallel to `fgg.rules`.
    pub provenance: Vec<Provenance>,
    pub roles: IndexMap<String, NtRole>,
    pub factor_kinds: IndexMap<String, FactorKind>,
    /// Human-readable factor formulas; `{i}` stands for attachment node i.
    pub descriptions: IndexMap<String, String>,
    pub pass_log: Vec<PassEvent>,
}

impl CompilationUnit {
    /// Provenance sidecar: rule index to source span and construct.
    pub fn provenance_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.provenance
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    serde_json::json!({
                        "rule": i,
                        "lhs": self.fgg.rules[i].lhs,
                        "line": p.span.line,
                        "col": p.span.col,
                        "construct": p.construct,
                    })
                })
                .collect(),
        )
    }
}

/// Translates a typed program. Every live expression gets a nonterminal whose
/// attachment nodes are its environment followed by its result.
pub fn translate(tp: &TypedProgram) -> CompilationUnit {
    let mut t = Translator {
        tp,
        cu: CompilationUnit {
            fgg: Fgg {
                labels: IndexMap::new(),
                rules: Vec::new(),
                start: String::new(),
                domains: tp.domains.clone(),
                factors: IndexMap::new(),
            },
            provenance: Vec::new(),
            roles: IndexMap::new(),
            factor_kinds: IndexMap::new(),
            descriptions: IndexMap::new(),
            pass_log: Vec::new(),
        },
        expr_label: HashMap::new(),
    };
    t.declare_labels();
    t.emit_start();
    for f in &tp.program.functions {
        if tp.functions.contains_key(&f.name) {
            t.emit_function(&f.name, &f.params, &f.body, f.span);
        }
    }
    for f in &tp.program.functions {
        if tp.functions.contains_key(&f.name) {
            t.emit_expr(&f.body);
        }
    }
    t.emit_expr(&tp.program.main);
    t.cu
}

struct Translator<'a> {
    tp: &'a TypedProgram,
    cu: CompilationUnit,
    expr_label: HashMap<usize, String>,
}

/// A right-hand side under construction with its external frame in place.
struct Frame {
    g: Hypergraph,
    env: Vec<usize>,
    v: usize,
    next_edge: usize,
}

impl Frame {
    fn node(&mut self, hint: &str, domain: &Domain) -> usize {
        let id = self.g.fresh_node_id(hint);
        self.g.add_node(id, domain.name())
    }

    fn edge(&mut self, label: &str, att: Vec<usize>) {
        self.next_edge += 1;
        let id = format!("e{}", self.next_edge);
        self.g.add_edge(id, label, att);
    }

    fn with_v(&self, extra: &[usize]) -> Vec<usize> {
        let mut att = self.env.clone();
        att.extend_from_slice(extra);
        att
    }
}

impl<'a> Translator<'a> {
    fn declare_labels(&mut self) {
        let taken = |labels: &IndexMap<String, EdgeLabel>, c: &str| labels.contains_key(c);
        for name in self.tp.functions.keys() {
            let f = self.tp.program.function(name).expect("signature of a defined function");
            self.cu.fgg.labels.insert(name.clone(), EdgeLabel::nonterminal(name.clone(), f.params.len() + 1));
            self.cu.roles.insert(name.clone(), NtRole::Function);
        }
        let start = fresh_name("S", |c| taken(&self.cu.fgg.labels, c));
        self.cu.fgg.labels.insert(start.clone(), EdgeLabel::nonterminal(start.clone(), 1));
        self.cu.roles.insert(start.clone(), NtRole::Start);
        self.cu.fgg.start = start;

        let mut exprs = Vec::new();
        self.tp.program.walk(&mut |e| exprs.push(e));
        for e in exprs {
            let Some(te) = self.tp.typed(e.id) else { continue };
            let base = format!("{}@{}", e.kind_tag(), e.span);
            let name = fresh_name(&base, |c| taken(&self.cu.fgg.labels, c));
            self.cu.fgg.labels.insert(name.clone(), EdgeLabel::nonterminal(name.clone(), te.env.len() + 1));
            let role = match e.kind {
                ExprKind::If { .. } => NtRole::If,
                ExprKind::Case { .. } => NtRole::Case,
                _ => NtRole::Expr,
            };
            self.cu.roles.insert(name.clone(), role);
            self.expr_label.insert(e.id, name);
        }
    }

    fn label_of(&self, e: &Expr) -> &str {
        &self.expr_label[&e.id]
    }

    fn typed(&self, e: &Expr) -> &'a TypedExpr {
        self.tp.typed(e.id).expect("live expression")
    }

    fn frame(&self, env: &[(String, Arc<Domain>)], result: &Domain) -> Frame {
        let mut g = Hypergraph::new();
        let mut ids = Vec::new();
        for (x, d) in env {
            let id = fresh_name(x, |c| g.node_index(c).is_some());
            ids.push(g.add_node(id, d.name()));
        }
        let vid = fresh_name("v", |c| g.node_index(c).is_some());
        let v = g.add_node(vid, result.name());
        g.ext = ids.clone();
        g.ext.push(v);
        Frame { g, env: ids, v, next_edge: 0 }
    }

    fn push_rule(&mut self, lhs: &str, f: Frame, span: Span, construct: impl Into<String>) {
        self.cu.fgg.rules.push(Rule { lhs: lhs.to_string(), rhs: f.g });
        self.cu.provenance.push(Provenance { span, construct: construct.into() });
    }

    fn terminal(&mut self, owner: &str, suffix: &str, weights: WeightTensor, kind: FactorKind, desc: String) -> String {
        let name = fresh_name(&format!("{owner}.{suffix}"), |c| self.cu.fgg.labels.contains_key(c));
        self.cu.fgg.labels.insert(name.clone(), EdgeLabel::terminal(name.clone(), weights.arity()));
        self.cu.fgg.factors.insert(name.clone(), FactorTable { label: name.clone(), weights });
        self.cu.factor_kinds.insert(name.clone(), kind);
        self.cu.descriptions.insert(name.clone(), desc);
        name
    }

    fn emit_start(&mut self) {
        let main = &self.tp.program.main;
        let te = self.typed(main);
        let mut f = self.frame(&[], &te.result);
        let v = f.v;
        f.edge(&self.expr_label[&main.id], vec![v]);
        let start = self.cu.fgg.start.clone();
        self.push_rule(&start, f, main.span, "program");
    }

    fn emit_function(&mut self, name: &str, params: &[String], body: &Expr, span: Span) {
        let sig = &self.tp.functions[name];
        let env: Vec<(String, Arc<Domain>)> = params.iter().cloned().zip(sig.params.iter().cloned()).collect();
        let mut f = self.frame(&env, &sig.result);
        let att = f.with_v(&[f.v]);
        f.edge(self.label_of(body), att);
        self.push_rule(name, f, span, format!("fun {name}"));
    }

    fn emit_expr(&mut self, e: &'a Expr) {
        let Some(te) = self.tp.typed(e.id) else { return };
        let lhs = self.label_of(e).to_string();
        let params = &self.tp.params;
        match &e.kind {
            ExprKind::Var(x) => {
                let j = te.env.iter().rposition(|(n, _)| n == x).expect("bound variable");
                let mut f = self.frame(&te.env, &te.result);
                let table = builtins::copy_table(&te.env[j].1, &te.result);
                let label = self.terminal(&lhs, "copy", table, FactorKind::Copy, "{1} = {0}".into());
                let (xj, v) = (f.env[j], f.v);
                f.edge(&label, vec![xj, v]);
                self.push_rule(&lhs, f, e.span, format!("variable {x}"));
            }
            ExprKind::Let { name, bound, body } => {
                let mut f = self.frame(&te.env, &te.result);
                let d1 = &self.typed(bound).result;
                let v1 = f.node(name, d1);
                let att = f.with_v(&[v1]);
                f.edge(self.label_of(bound), att);
                let att = f.with_v(&[v1, f.v]);
                f.edge(self.label_of(body), att);
                self.push_rule(&lhs, f, e.span, format!("let {name}"));
                self.emit_expr(bound);
                self.emit_expr(body);
            }
            ExprKind::Call { func, args } => {
                let mut f = self.frame(&te.env, &te.result);
                let mut vs = Vec::new();
                for a in args {
                    let vj = f.node("v", &self.typed(a).result);
                    let att = f.with_v(&[vj]);
                    f.edge(self.label_of(a), att);
                    vs.push(vj);
                }
                vs.push(f.v);
                f.edge(func, vs);
                self.push_rule(&lhs, f, e.span, format!("call {func}"));
                for a in args {
                    self.emit_expr(a);
                }
            }
            ExprKind::Sample(arg) => {
                let mut f = self.frame(&te.env, &te.result);
                let d1 = &self.typed(arg).result;
                let v1 = f.node("v", d1);
                let att = f.with_v(&[v1]);
                f.edge(self.label_of(arg), att);
                let table = builtins::density_table(d1, &te.result, params);
                let label = self.terminal(&lhs, "density", table, FactorKind::Density, "{0}({1})".into());
                let v = f.v;
                f.edge(&label, vec![v1, v]);
                self.push_rule(&lhs, f, e.span, "sample");
                self.emit_expr(arg);
            }
            ExprKind::Observe { value, dist } => {
                let mut f = self.frame(&te.env, &te.result);
                let att = f.with_v(&[f.v]);
                f.edge(self.label_of(value), att);
                let d2 = &self.typed(dist).result;
                let v2 = f.node("v", d2);
                let att = f.with_v(&[v2]);
                f.edge(self.label_of(dist), att);
                let table = builtins::density_table(d2, &te.result, params);
                let label = self.terminal(&lhs, "density", table, FactorKind::Density, "{0}({1})".into());
                let v = f.v;
                f.edge(&label, vec![v2, v]);
                self.push_rule(&lhs, f, e.span, "observe");
                self.emit_expr(value);
                self.emit_expr(dist);
            }
            ExprKind::If { cond, then_branch, else_branch } => {
                let dc = &self.typed(cond).result;
                for (b, arm) in [(true, then_branch), (false, else_branch)] {
                    if self.tp.typed(arm.id).is_none() {
                        continue;
                    }
                    let mut f = self.frame(&te.env, &te.result);
                    let v1 = f.node("v", dc);
                    let att = f.with_v(&[v1]);
                    f.edge(self.label_of(cond), att);
                    let table = builtins::bool_guard(dc, b);
                    let label = self.terminal(&lhs, &b.to_string(), table, FactorKind::Guard, format!("{{0}} = {b}"));
                    f.edge(&label, vec![v1]);
                    let att = f.with_v(&[f.v]);
                    f.edge(self.label_of(arm), att);
                    self.push_rule(&lhs, f, e.span, format!("if ({b} arm)"));
                }
                self.emit_expr(cond);
                self.emit_expr(then_branch);
                self.emit_expr(else_branch);
            }
            ExprKind::Case { scrutinee, left_binder, left, right_binder, right } => {
                let ds = &self.typed(scrutinee).result;
                for (is_left, y, arm) in [(true, left_binder, left), (false, right_binder, right)] {
                    let Some(ta) = self.tp.typed(arm.id) else { continue };
                    let dy = &ta.env.last().expect("binder in scope").1;
                    let mut f = self.frame(&te.env, &te.result);
                    let v1 = f.node("v", ds);
                    let att = f.with_v(&[v1]);
                    f.edge(self.label_of(scrutinee), att);
                    let yn = f.node(y, dy);
                    let tag = if is_left { "inl" } else { "inr" };
                    let table = builtins::sum_guard(ds, dy, is_left);
                    let label = self.terminal(&lhs, tag, table, FactorKind::Guard, format!("{{0}} = {tag} {{1}}"));
                    f.edge(&label, vec![v1, yn]);
                    let att = f.with_v(&[yn, f.v]);
                    f.edge(self.label_of(arm), att);
                    self.push_rule(&lhs, f, e.span, format!("case ({tag} arm)"));
                }
                self.emit_expr(scrutinee);
                self.emit_expr(left);
                self.emit_expr(right);
            }
            ExprKind::Builtin { op, args } => {
                let mut f = self.frame(&te.env, &te.result);
                let mut vs = Vec::new();
                let mut doms = Vec::new();
                for a in args {
                    let da = self.typed(a).result.clone();
                    let vj = f.node("v", &da);
                    let att = f.with_v(&[vj]);
                    f.edge(self.label_of(a), att);
                    vs.push(vj);
                    doms.push(da);
                }
                let table = builtins::builtin_table(op, &doms, &te.result, params);
                let desc = builtins::describe(op);
                let label = self.terminal(&lhs, op.tag(), table, FactorKind::Builtin, desc);
                vs.push(f.v);
                f.edge(&label, vs);
                let construct = match op {
                    Builtin::Const(c) => format!("constant {c}"),
                    other => format!("builtin {}", other.tag()),
                };
                self.push_rule(&lhs, f, e.span, construct);
                for a in args {
                    self.emit_expr(a);
                }
            }
            ExprKind::And(..) | ExprKind::Or(..) | ExprKind::Fail => {
                unreachable!("translation runs on desugared programs")
            }
        }
    }
}

#[cfg(test)]
mod tests;
