//! Finite domain assignment.
//!
//! Every expression result, variable and function parameter lives in a
//! "slot". Slots that must share a node in the compiled grammar (an `if` and
//! its arms, a variable and its binder, call arguments and the callee's
//! parameters, ...) are unified. Each class then receives the set of values
//! its members can produce with positive weight, computed as a least fixed
//! point over the whole program.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use indexmap::IndexMap;

use super::ast::{Builtin, Expr, ExprId, ExprKind, Program, Span};
use super::eval::apply;
use super::params::Params;
use super::FrontendError;
use crate::value::{Domain, Value};

/// Largest value set a single class may hold before analysis gives up.
pub const MAX_DOMAIN_SIZE: usize = 4096;
/// Most propagation rounds before analysis gives up.
pub const MAX_ROUNDS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct TypedExpr {
    /// Variables in scope, in binding order.
    pub env: Vec<(String, Arc<Domain>)>,
    pub result: Arc<Domain>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FnSig {
    pub params: Vec<Arc<Domain>>,
    pub result: Arc<Domain>,
}

#[derive(Clone, Debug)]
pub struct TypedProgram {
    pub program: Program,
    /// Indexed by expression id; `None` for expressions that can never run.
    pub exprs: Vec<Option<TypedExpr>>,
    /// Signatures of the functions reachable from the main expression.
    pub functions: IndexMap<String, FnSig>,
    pub domains: IndexMap<String, Arc<Domain>>,
    pub params: Params,
}

impl TypedProgram {
    pub fn typed(&self, id: ExprId) -> Option<&TypedExpr> {
        self.exprs.get(id).and_then(Option::as_ref)
    }

    pub fn is_live(&self, id: ExprId) -> bool {
        self.typed(id).is_some()
    }

    pub fn start_domain(&self) -> &Arc<Domain> {
        &self.typed(self.program.main.id).expect("main is live").result
    }
}

type Set = BTreeSet<Value>;

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

struct Analysis<'p> {
    program: &'p Program,
    params: &'p Params,
    exprs: Vec<&'p Expr>,
    /// Variable occurrence -> binder slot.
    var_binder: HashMap<ExprId, usize>,
    /// Case expression -> (left binder slot, right binder slot).
    case_binders: HashMap<ExprId, (usize, usize)>,
    param_slots: IndexMap<&'p str, Vec<usize>>,
    bodies: IndexMap<&'p str, &'p Expr>,
    uf: UnionFind,
    /// Slots whose values do not flow into their class (observed values).
    excluded: Vec<bool>,
    slot_span: Vec<Span>,

    pos: Vec<Set>,
    binder_vals: HashMap<usize, Set>,
    class_set: HashMap<usize, Set>,
    live: Vec<bool>,
    live_fns: BTreeSet<&'p str>,
}

pub fn assign_domains(program: &Program, params: &Params) -> Result<TypedProgram, FrontendError> {
    let mut exprs = Vec::new();
    program.walk(&mut |e| exprs.push(e));
    for (i, e) in exprs.iter().enumerate() {
        assert_eq!(e.id, i, "program must be renumbered before domain assignment");
    }
    let n = exprs.len();
    let mut a = Analysis {
        program,
        params,
        exprs,
        var_binder: HashMap::new(),
        case_binders: HashMap::new(),
        param_slots: IndexMap::new(),
        bodies: IndexMap::new(),
        uf: UnionFind((0..n).collect()),
        excluded: vec![false; n],
        slot_span: vec![Span::default(); n],
        pos: vec![Set::new(); n],
        binder_vals: HashMap::new(),
        class_set: HashMap::new(),
        live: vec![false; n],
        live_fns: BTreeSet::new(),
    };
    for e in &a.exprs {
        a.slot_span[e.id] = e.span;
    }
    for f in &program.functions {
        let slots = f.params.iter().map(|_| a.new_slot(f.span)).collect();
        a.param_slots.insert(&f.name, slots);
        a.bodies.insert(&f.name, &f.body);
    }
    for f in &program.functions {
        let mut env: Vec<(&str, usize)> = f.params.iter().map(String::as_str).zip(a.param_slots[f.name.as_str()].clone()).collect();
        a.bind(&f.body, &mut env);
    }
    a.bind(&program.main, &mut Vec::new());

    a.check_tables()?;
    a.solve()?;
    a.finish()
}

impl<'p> Analysis<'p> {
    fn new_slot(&mut self, span: Span) -> usize {
        let s = self.uf.0.len();
        self.uf.0.push(s);
        self.excluded.push(false);
        self.slot_span.push(span);
        s
    }

    /// Resolves variables and records the unifications.
    fn bind(&mut self, e: &'p Expr, env: &mut Vec<(&'p str, usize)>) {
        match &e.kind {
            ExprKind::Var(x) => {
                let slot = env.iter().rev().find(|(n, _)| n == x).map(|&(_, s)| s).expect("scope-checked");
                self.var_binder.insert(e.id, slot);
                self.uf.union(e.id, slot);
            }
            ExprKind::Let { name, bound, body } => {
                self.bind(bound, env);
                env.push((name, bound.id));
                self.bind(body, env);
                env.pop();
                self.uf.union(e.id, body.id);
            }
            ExprKind::Case { scrutinee, left_binder, left, right_binder, right } => {
                self.bind(scrutinee, env);
                let l = self.new_slot(left.span);
                let r = self.new_slot(right.span);
                self.case_binders.insert(e.id, (l, r));
                for (x, s, arm) in [(left_binder, l, left), (right_binder, r, right)] {
                    env.push((x, s));
                    self.bind(arm, env);
                    env.pop();
                    self.uf.union(e.id, arm.id);
                }
            }
            ExprKind::If { cond, then_branch, else_branch } => {
                for c in [cond, then_branch, else_branch] {
                    self.bind(c, env);
                }
                self.uf.union(e.id, then_branch.id);
                self.uf.union(e.id, else_branch.id);
            }
            ExprKind::Observe { value, dist } => {
                self.bind(value, env);
                self.bind(dist, env);
                self.uf.union(e.id, value.id);
                self.excluded[value.id] = true;
            }
            ExprKind::Call { func, args } => {
                for a in args {
                    self.bind(a, env);
                }
                let slots = self.param_slots[func.as_str()].clone();
                for (a, s) in args.iter().zip(slots) {
                    self.uf.union(a.id, s);
                }
                let body = self.bodies[func.as_str()].id;
                self.uf.union(e.id, body);
            }
            _ => {
                for c in e.children() {
                    self.bind(c, env);
                }
            }
        }
    }

    fn check_tables(&self) -> Result<(), FrontendError> {
        for e in &self.exprs {
            if let ExprKind::Builtin { op: Builtin::Param(t), .. } = &e.kind {
                if !self.params.has_table(t) {
                    return Err(FrontendError::domain(e.span, format!("unknown distribution table `{t}`")));
                }
            }
        }
        Ok(())
    }

    fn class_values(&mut self, slot: usize) -> Set {
        let c = self.uf.find(slot);
        self.class_set.get(&c).cloned().unwrap_or_default()
    }

    fn solve(&mut self) -> Result<(), FrontendError> {
        for _ in 0..MAX_ROUNDS {
            let before = (self.pos.clone(), self.binder_vals.clone(), self.live_fns.clone());
            self.live = vec![false; self.exprs.len()];
            let main = &self.program.main;
            self.eval(main);
            let mut done = BTreeSet::new();
            while let Some(f) = self.live_fns.iter().find(|f| !done.contains(*f)).copied() {
                done.insert(f);
                let body = self.bodies[f];
                self.eval(body);
            }
            self.rebuild_classes()?;
            if (self.pos.clone(), self.binder_vals.clone(), self.live_fns.clone()) == before {
                return Ok(());
            }
        }
        Err(FrontendError::domain(
            self.program.main.span,
            format!("value sets still growing after {MAX_ROUNDS} rounds; bound the recursion or restrict its inputs"),
        ))
    }

    fn rebuild_classes(&mut self) -> Result<(), FrontendError> {
        let mut sets: HashMap<usize, Set> = HashMap::new();
        for slot in 0..self.uf.0.len() {
            if self.excluded[slot] {
                continue;
            }
            let vals = if slot < self.exprs.len() { Some(&self.pos[slot]) } else { self.binder_vals.get(&slot) };
            let c = self.uf.find(slot);
            let entry = sets.entry(c).or_default();
            if let Some(v) = vals {
                entry.extend(v.iter().cloned());
            }
            if entry.len() > MAX_DOMAIN_SIZE {
                return Err(FrontendError::domain(
                    self.slot_span[slot],
                    format!(
                        "the values of this expression cannot be enumerated within {MAX_DOMAIN_SIZE} elements; \
                         bound the recursion or restrict its inputs"
                    ),
                ));
            }
        }
        self.class_set = sets;
        Ok(())
    }

    fn eval(&mut self, e: &'p Expr) -> Set {
        self.live[e.id] = true;
        let out: Set = match &e.kind {
            ExprKind::Var(_) => {
                let b = self.var_binder[&e.id];
                self.class_values(b)
            }
            ExprKind::Let { bound, body, .. } => {
                self.eval(bound);
                self.eval(body)
            }
            ExprKind::Call { func, args } => {
                for a in args {
                    self.eval(a);
                }
                self.live_fns.insert(self.bodies.get_key_value(func.as_str()).unwrap().0);
                self.pos[self.bodies[func.as_str()].id].clone()
            }
            ExprKind::Sample(arg) => {
                let dists = self.eval(arg);
                dists.iter().flat_map(|d| self.params.support(d)).collect()
            }
            ExprKind::Observe { value, dist } => {
                let vals = self.eval(value);
                let dists = self.eval(dist);
                vals.into_iter().filter(|v| dists.iter().any(|d| self.params.density(d, v) > 0.0)).collect()
            }
            ExprKind::If { cond, then_branch, else_branch } => {
                let c = self.eval(cond);
                let t = self.eval(then_branch);
                let f = self.eval(else_branch);
                let mut out = Set::new();
                if c.contains(&Value::Bool(true)) {
                    out.extend(t);
                }
                if c.contains(&Value::Bool(false)) {
                    out.extend(f);
                }
                out
            }
            ExprKind::Case { scrutinee, left, right, .. } => {
                let s = self.eval(scrutinee);
                let (ls, rs) = self.case_binders[&e.id];
                let lv: Set = s.iter().filter_map(|v| if let Value::Inl(x) = v { Some((**x).clone()) } else { None }).collect();
                let rv: Set = s.iter().filter_map(|v| if let Value::Inr(x) = v { Some((**x).clone()) } else { None }).collect();
                let mut out = Set::new();
                for (slot, vals, arm) in [(ls, lv, left), (rs, rv, right)] {
                    if vals.is_empty() {
                        continue;
                    }
                    self.binder_vals.insert(slot, vals);
                    out.extend(self.eval(arm));
                }
                out
            }
            ExprKind::Builtin { op, args } => {
                let sets: Vec<Set> = args.iter().map(|a| self.eval(a)).collect();
                let mut out = Set::new();
                match sets.as_slice() {
                    [] => out.extend(apply(op, &[], self.params)),
                    [a] => out.extend(a.iter().filter_map(|x| apply(op, &[x], self.params))),
                    [a, b] => {
                        for x in a {
                            out.extend(b.iter().filter_map(|y| apply(op, &[x, y], self.params)));
                        }
                    }
                    _ => unreachable!("builtins take at most two arguments"),
                }
                out
            }
            ExprKind::And(..) | ExprKind::Or(..) | ExprKind::Fail => {
                unreachable!("domain assignment runs on desugared programs")
            }
        };
        self.pos[e.id] = out.clone();
        out
    }

    fn finish(mut self) -> Result<TypedProgram, FrontendError> {
        // Final value set per class, with fallbacks for classes that never
        // produce a positive-weight value.
        let mut members: HashMap<usize, Vec<usize>> = HashMap::new();
        for slot in 0..self.uf.0.len() {
            let c = self.uf.find(slot);
            members.entry(c).or_default().push(slot);
        }
        let mut final_set: HashMap<usize, Set> = HashMap::new();
        for (&c, slots) in &members {
            let mut s = self.class_set.get(&c).cloned().unwrap_or_default();
            if s.is_empty() {
                for &m in slots {
                    if m < self.exprs.len() {
                        s.extend(self.pos[m].iter().cloned());
                    }
                }
            }
            if s.is_empty() {
                s.insert(Value::Unit);
            }
            final_set.insert(c, s);
        }

        // Shape checks on positive values.
        for e in self.exprs.clone() {
            if !self.live[e.id] {
                continue;
            }
            let check = |a: &mut Self, child: &Expr, ok: fn(&Value) -> bool, what: &str| {
                let vals = a.class_values(child.id);
                match vals.iter().find(|v| !ok(v)) {
                    Some(bad) => Err(FrontendError::domain(child.span, format!("{what}, but it can be `{bad}`"))),
                    None => Ok(()),
                }
            };
            match &e.kind {
                ExprKind::If { cond, .. } => {
                    check(&mut self, cond, |v| matches!(v, Value::Bool(_)), "the condition of `if` must be boolean")?
                }
                ExprKind::Case { scrutinee, .. } => {
                    check(&mut self, scrutinee, Value::is_sum, "a `case` scrutinee must be `inl` or `inr`")?
                }
                ExprKind::Sample(arg) => check(&mut self, arg, Value::is_dist, "`sample` needs a distribution")?,
                ExprKind::Observe { dist, .. } => {
                    check(&mut self, dist, Value::is_dist, "`observe` needs a distribution")?
                }
                _ => {}
            }
        }

        let mut interner = Interner::new(self.params);
        let mut class_dom: HashMap<usize, Arc<Domain>> = HashMap::new();
        // Intern in slot order so domain names are deterministic.
        for slot in 0..self.uf.0.len() {
            let c = self.uf.find(slot);
            if !class_dom.contains_key(&c) && (slot >= self.exprs.len() || self.live[slot]) {
                class_dom.insert(c, interner.intern(&final_set[&c]));
            }
        }
        let mut dom_of = |a: &mut Self, slot: usize| {
            let c = a.uf.find(slot);
            class_dom.get(&c).cloned().unwrap_or_else(|| interner.intern(&final_set[&c]))
        };

        let mut typed: Vec<Option<TypedExpr>> = vec![None; self.exprs.len()];
        let mut functions = IndexMap::new();
        let program = self.program;
        for f in &program.functions {
            if !self.live_fns.contains(f.name.as_str()) {
                continue;
            }
            let slots = self.param_slots[f.name.as_str()].clone();
            let doms: Vec<Arc<Domain>> = slots.iter().map(|&s| dom_of(&mut self, s)).collect();
            let env = f.params.iter().cloned().zip(doms.iter().cloned()).collect();
            self.annotate(&f.body, env, &mut typed, &mut dom_of);
            functions.insert(f.name.clone(), FnSig { params: doms, result: dom_of(&mut self, f.body.id) });
        }
        self.annotate(&program.main, Vec::new(), &mut typed, &mut dom_of);

        Ok(TypedProgram {
            program: program.clone(),
            exprs: typed,
            functions,
            domains: interner.domains,
            params: self.params.clone(),
        })
    }

    fn annotate(
        &mut self,
        e: &Expr,
        env: Vec<(String, Arc<Domain>)>,
        out: &mut Vec<Option<TypedExpr>>,
        dom_of: &mut impl FnMut(&mut Self, usize) -> Arc<Domain>,
    ) {
        if !self.live[e.id] {
            return;
        }
        out[e.id] = Some(TypedExpr { env: env.clone(), result: dom_of(self, e.id) });
        match &e.kind {
            ExprKind::Let { name, bound, body } => {
                self.annotate(bound, env.clone(), out, dom_of);
                let mut inner = env;
                inner.push((name.clone(), dom_of(self, bound.id)));
                self.annotate(body, inner, out, dom_of);
            }
            ExprKind::Case { scrutinee, left_binder, left, right_binder, right } => {
                self.annotate(scrutinee, env.clone(), out, dom_of);
                let (ls, rs) = self.case_binders[&e.id];
                for (x, s, arm) in [(left_binder, ls, left), (right_binder, rs, right)] {
                    let mut inner = env.clone();
                    inner.push((x.clone(), dom_of(self, s)));
                    self.annotate(arm, inner, out, dom_of);
                }
            }
            _ => {
                for c in e.children() {
                    self.annotate(c, env.clone(), out, dom_of);
                }
            }
        }
    }
}

struct Interner<'p> {
    params: &'p Params,
    by_content: HashMap<Vec<Value>, Arc<Domain>>,
    domains: IndexMap<String, Arc<Domain>>,
    counter: usize,
}

impl<'p> Interner<'p> {
    fn new(params: &'p Params) -> Interner<'p> {
        Interner { params, by_content: HashMap::new(), domains: IndexMap::new(), counter: 0 }
    }

    fn intern(&mut self, set: &Set) -> Arc<Domain> {
        // Adopt the smallest declared domain that covers the set.
        let declared = self
            .params
            .domains
            .iter()
            .filter(|(_, vals)| set.iter().all(|v| vals.contains(v)))
            .min_by_key(|(_, vals)| vals.len());
        let (name, values) = match declared {
            Some((name, vals)) => (Some(name.clone()), vals.clone()),
            None => (None, set.iter().cloned().collect::<Vec<_>>()),
        };
        if let Some(d) = self.by_content.get(&values) {
            return d.clone();
        }
        let name = name.unwrap_or_else(|| {
            let base = if values == [Value::Bool(false), Value::Bool(true)] {
                "bool".to_string()
            } else if values == [Value::Unit] {
                "unit".to_string()
            } else {
                self.counter += 1;
                format!("D{}", self.counter)
            };
            crate::fgg::fresh_name(&base, |c| self.domains.contains_key(c) || self.params.domains.contains_key(c))
        });
        let d = Arc::new(Domain::new(name.clone(), values.clone()).expect("distinct nonempty values"));
        self.by_content.insert(values, d.clone());
        self.domains.insert(name, d.clone());
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::frontend::load;

    #[test]
    fn suite_programs_type() {
        for p in fixtures::suite() {
            let t = load(p.source, &p.params()).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            for (id, te) in t.exprs.iter().enumerate() {
                if let Some(te) = te {
                    assert!(!te.result.is_empty(), "{}: expr {id}", p.name);
                }
            }
        }
    }

    #[test]
    fn string_argument_ranges_over_suffixes() {
        let t = load(fixtures::PCFGW_SOURCE, &Params::from_str(fixtures::CKY_PARAMS).unwrap()).unwrap();
        let sig = &t.functions["d"];
        let a = || Value::atom("a");
        let b = || Value::atom("b");
        let expected: Set = [Value::list([a(), b()]), Value::list([b()]), Value::nil()].into_iter().collect();
        let got: Set = sig.params[1].values().iter().cloned().collect();
        assert_eq!(got, expected);
        assert_eq!(sig.result.values().iter().cloned().collect::<Set>(), expected);
    }

    #[test]
    fn sample_result_is_support_union() {
        let t = load(fixtures::PCFG_SOURCE, &fixtures::pcfg_params()).unwrap();
        let mut sample = None;
        t.program.walk(&mut |e| {
            if matches!(e.kind, ExprKind::Sample(_)) {
                sample = Some(e.id);
            }
        });
        let d = &t.typed(sample.unwrap()).unwrap().result;
        let s = Value::atom("S");
        let expected: Set = [Value::inl(Value::atom("a")), Value::inr(Value::pair(s.clone(), s))].into_iter().collect();
        assert_eq!(d.values().iter().cloned().collect::<Set>(), expected);
    }

    #[test]
    fn non_boolean_condition() {
        let err = load("if 'a then true else false", &Params::empty()).unwrap_err();
        assert!(err.to_string().contains("boolean"), "{err}");
    }

    #[test]
    fn unknown_table() {
        let err = load("sample q['a]", &Params::empty()).unwrap_err();
        assert!(err.to_string().contains("`q`"), "{err}");
    }

    #[test]
    fn unbounded_growth_is_reported() {
        let src = "fun f(x) = if sample c['k] then x else f(cons('a, x)); f(nil)";
        let params = Params::from_str(r#"{"params": {"c": {"k": {"true": 0.5, "false": 0.5}}}}"#).unwrap();
        assert!(load(src, &params).is_err());
    }

    #[test]
    fn env_extends_only_at_binders() {
        for p in fixtures::suite() {
            let t = load(p.source, &p.params()).unwrap();
            t.program.walk(&mut |e| {
                let Some(parent) = t.typed(e.id) else { return };
                let binders: Vec<Option<&str>> = match &e.kind {
                    ExprKind::Let { name, .. } => vec![None, Some(name)],
                    ExprKind::Case { left_binder, right_binder, .. } => {
                        vec![None, Some(left_binder), Some(right_binder)]
                    }
                    _ => vec![None; e.children().len()],
                };
                for (c, b) in e.children().into_iter().zip(binders) {
                    let Some(child) = t.typed(c.id) else { continue };
                    let n = parent.env.len();
                    assert_eq!(&child.env[..n], &parent.env[..]);
                    assert_eq!(child.env.len(), n + usize::from(b.is_some()));
                    if let Some(b) = b {
                        assert_eq!(child.env[n].0, b);
                    }
                }
            });
        }
    }
}
