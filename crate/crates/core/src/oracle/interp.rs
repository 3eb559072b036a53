//! Direct enumerating interpreter over the surface syntax.

use std::collections::BTreeMap;

use crate::frontend::{Builtin, Expr, ExprId, ExprKind, Params, Program};
use crate::value::Value;

/// Which way a branching construct went: `true` for the then/inl side.
pub type Decision = (ExprId, bool);

/// One control path through the program with the summed weight of each
/// result value reachable along it.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub path: Vec<Decision>,
    pub value: Value,
    pub weight: f64,
}

type Outcomes = BTreeMap<(Vec<Decision>, Value), f64>;

struct Interp<'a> {
    program: &'a Program,
    params: &'a Params,
    bound: usize,
}

fn single(v: Value) -> Outcomes {
    BTreeMap::from([((Vec::new(), v), 1.0)])
}

fn add(out: &mut Outcomes, path: Vec<Decision>, v: Value, w: f64) {
    if w > 0.0 {
        *out.entry((path, v)).or_insert(0.0) += w;
    }
}

fn joined(a: &[Decision], b: &[Decision]) -> Vec<Decision> {
    let mut p = a.to_vec();
    p.extend_from_slice(b);
    p
}

impl Interp<'_> {
    fn dist(&self, table: &str, key: &Value) -> Option<Value> {
        self.params.tables.get(table)?.get(key)?;
        Some(Value::Dist(format!("{table}[{key}]")))
    }

    fn row(&self, d: &Value) -> Vec<(Value, f64)> {
        let Value::Dist(name) = d else { return Vec::new() };
        for (t, rows) in &self.params.tables {
            for (k, row) in rows {
                if *name == format!("{t}[{k}]") {
                    return row.iter().map(|(v, w)| (v.clone(), *w)).collect();
                }
            }
        }
        Vec::new()
    }

    fn density(&self, d: &Value, v: &Value) -> f64 {
        self.row(d).into_iter().find(|(x, _)| x == v).map_or(0.0, |(_, w)| w)
    }

    fn builtin(&self, op: &Builtin, args: &[Value]) -> Option<Value> {
        let cell = |v: &Value| match v {
            Value::Inr(c) => match &**c {
                Value::Pair(h, t) => Some(((**h).clone(), (**t).clone())),
                _ => None,
            },
            _ => None,
        };
        Some(match (op, args) {
            (Builtin::Const(c), []) => c.clone(),
            (Builtin::Eq, [a, b]) => Value::Bool(a == b),
            (Builtin::Neq, [a, b]) => Value::Bool(a != b),
            (Builtin::Pair, [a, b]) => Value::Pair(Box::new(a.clone()), Box::new(b.clone())),
            (Builtin::Cons, [a, b]) => {
                Value::Inr(Box::new(Value::Pair(Box::new(a.clone()), Box::new(b.clone()))))
            }
            (Builtin::Fst, [Value::Pair(a, _)]) => (**a).clone(),
            (Builtin::Snd, [Value::Pair(_, b)]) => (**b).clone(),
            (Builtin::Inl, [a]) => Value::Inl(Box::new(a.clone())),
            (Builtin::Inr, [a]) => Value::Inr(Box::new(a.clone())),
            (Builtin::Car, [l]) => cell(l)?.0,
            (Builtin::Cdr, [l]) => cell(l)?.1,
            (Builtin::Param(t), [k]) => self.dist(t, k)?,
            _ => return None,
        })
    }

    /// Evaluates `items` left to right, then continues with `k` on the values.
    fn sequence(
        &self,
        items: &[&Expr],
        env: &mut Vec<(String, Value)>,
        depth: usize,
        k: &mut dyn FnMut(&[Value], &mut Vec<(String, Value)>) -> Outcomes,
    ) -> Outcomes {
        let Some((first, rest)) = items.split_first() else { return k(&[], env) };
        let mut out = Outcomes::new();
        for ((p1, v1), w1) in self.eval(first, env, depth) {
            let inner = self.sequence(rest, env, depth, &mut |vs, env| {
                let mut all = vec![v1.clone()];
                all.extend_from_slice(vs);
                k(&all, env)
            });
            for ((p2, v2), w2) in inner {
                add(&mut out, joined(&p1, &p2), v2, w1 * w2);
            }
        }
        out
    }

    fn branch(&self, e: &Expr, taken: bool, then: Outcomes) -> Outcomes {
        then.into_iter()
            .map(|((p, v), w)| ((joined(&[(e.id, taken)], &p), v), w))
            .collect()
    }

    fn eval(&self, e: &Expr, env: &mut Vec<(String, Value)>, depth: usize) -> Outcomes {
        match &e.kind {
            ExprKind::Var(x) => {
                let v = env.iter().rev().find(|(n, _)| n == x).map(|(_, v)| v.clone());
                let v = v.or_else(|| self.params.inputs.get(x).cloned()).unwrap_or_else(|| panic!("unbound `{x}`"));
                single(v)
            }
            ExprKind::Let { name, bound, body } => {
                let mut out = Outcomes::new();
                for ((p1, v1), w1) in self.eval(bound, env, depth) {
                    env.push((name.clone(), v1));
                    for ((p2, v2), w2) in self.eval(body, env, depth) {
                        add(&mut out, joined(&p1, &p2), v2, w1 * w2);
                    }
                    env.pop();
                }
                out
            }
            ExprKind::Call { func, args } => {
                if depth + 1 > self.bound {
                    return Outcomes::new();
                }
                let f = self.program.function(func).unwrap_or_else(|| panic!("undefined `{func}`"));
                let items: Vec<&Expr> = args.iter().collect();
                self.sequence(&items, env, depth, &mut |vs, _| {
                    let mut frame: Vec<(String, Value)> = f.params.iter().cloned().zip(vs.iter().cloned()).collect();
                    self.eval(&f.body, &mut frame, depth + 1)
                })
            }
            ExprKind::Builtin { op, args } => {
                let items: Vec<&Expr> = args.iter().collect();
                self.sequence(&items, env, depth, &mut |vs, _| match self.builtin(op, vs) {
                    Some(v) => single(v),
                    None => Outcomes::new(),
                })
            }
            ExprKind::Sample(d) => {
                let mut out = Outcomes::new();
                for ((p, dv), w) in self.eval(d, env, depth) {
                    for (x, q) in self.row(&dv) {
                        add(&mut out, p.clone(), x, w * q);
                    }
                }
                out
            }
            ExprKind::Observe { value, dist } => self.sequence(&[&**value, &**dist], env, depth, &mut |vs, _| {
                let mut out = Outcomes::new();
                add(&mut out, Vec::new(), vs[0].clone(), self.density(&vs[1], &vs[0]));
                out
            }),
            ExprKind::If { cond, then_branch, else_branch } => self.choose(e, cond, env, depth, |this, b, env| {
                this.eval(if b { then_branch } else { else_branch }, env, depth)
            }),
            ExprKind::And(a, b) => self.choose(e, a, env, depth, |this, t, env| {
                if t {
                    this.eval(b, env, depth)
                } else {
                    single(Value::Bool(false))
                }
            }),
            ExprKind::Or(a, b) => self.choose(e, a, env, depth, |this, t, env| {
                if t {
                    single(Value::Bool(true))
                } else {
                    this.eval(b, env, depth)
                }
            }),
            ExprKind::Fail => Outcomes::new(),
            ExprKind::Case { scrutinee, left_binder, left, right_binder, right } => {
                let mut out = Outcomes::new();
                for ((p1, v1), w1) in self.eval(scrutinee, env, depth) {
                    let (taken, x, payload, arm) = match v1 {
                        Value::Inl(y) => (true, left_binder, *y, left),
                        Value::Inr(y) => (false, right_binder, *y, right),
                        _ => continue,
                    };
                    env.push((x.clone(), payload));
                    let inner = self.branch(e, taken, self.eval(arm, env, depth));
                    env.pop();
                    for ((p2, v2), w2) in inner {
                        add(&mut out, joined(&p1, &p2), v2, w1 * w2);
                    }
                }
                out
            }
        }
    }

    fn choose(
        &self,
        e: &Expr,
        cond: &Expr,
        env: &mut Vec<(String, Value)>,
        depth: usize,
        arm: impl Fn(&Self, bool, &mut Vec<(String, Value)>) -> Outcomes,
    ) -> Outcomes {
        let mut out = Outcomes::new();
        for ((p1, c), w1) in self.eval(cond, env, depth) {
            let Value::Bool(b) = c else { continue };
            for ((p2, v2), w2) in self.branch(e, b, arm(self, b, env)) {
                add(&mut out, joined(&p1, &p2), v2, w1 * w2);
            }
        }
        out
    }
}

/// Every control path of depth at most `depth_bound`, where the main
/// expression runs at depth 1 and each call adds one. Paths that would go
/// deeper contribute nothing. Only positive weights are kept.
pub fn branches(program: &Program, params: &Params, depth_bound: usize) -> Vec<Branch> {
    let it = Interp { program, params, bound: depth_bound };
    if depth_bound == 0 {
        return Vec::new();
    }
    it.eval(&program.main, &mut Vec::new(), 1)
        .into_iter()
        .map(|((path, value), weight)| Branch { path, value, weight })
        .collect()
}

/// Total weight per result value over paths within the depth bound.
pub fn interpret(program: &Program, params: &Params, depth_bound: usize) -> BTreeMap<Value, f64> {
    let mut out = BTreeMap::new();
    for b in branches(program, params, depth_bound) {
        *out.entry(b.value).or_insert(0.0) += b.weight;
    }
    out
}

/// Total weight per control path.
pub fn path_weights(program: &Program, params: &Params, depth_bound: usize) -> BTreeMap<Vec<Decision>, f64> {
    let mut out = BTreeMap::new();
    for b in branches(program, params, depth_bound) {
        *out.entry(b.path).or_insert(0.0) += b.weight;
    }
    out
}
