//! Pretty-printer producing source the parser reads back to the same tree.

use super::ast::{Builtin, Expr, ExprKind, Program};
use crate::value::{Value, ZERO_DIST};

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for f in &p.functions {
        out.push_str(&format!("fun {}({}) =\n  {};\n", f.name, f.params.join(", "), print_expr(&f.body)));
    }
    out.push_str(&print_expr(&p.main));
    out.push('\n');
    out
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    expr(e, &mut s);
    s
}

// Levels mirror the parser: 0 expr, 1 or, 2 and, 3 cmp, 4 prefix, 5 primary.
fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Let { .. } | ExprKind::If { .. } | ExprKind::Case { .. } => 0,
        ExprKind::Or(..) => 1,
        ExprKind::And(..) => 2,
        ExprKind::Builtin { op: Builtin::Eq | Builtin::Neq, .. } => 3,
        ExprKind::Sample(_) | ExprKind::Observe { .. } => 4,
        ExprKind::Builtin { op, .. } if op.arity() == 1 && !matches!(op, Builtin::Param(_)) => 4,
        ExprKind::Builtin { op: Builtin::Const(v), .. } if const_needs_prefix(v) => 4,
        _ => 5,
    }
}

fn const_needs_prefix(v: &Value) -> bool {
    matches!(v, Value::Inl(_) | Value::Inr(_)) && *v != Value::nil()
}

fn at(e: &Expr, min: u8, out: &mut String) {
    if level(e) < min {
        out.push('(');
        expr(e, out);
        out.push(')');
    } else {
        expr(e, out);
    }
}

fn expr(e: &Expr, out: &mut String) {
    match &e.kind {
        ExprKind::Var(x) => out.push_str(x),
        ExprKind::Let { name, bound, body } => {
            out.push_str(&format!("let {name} = "));
            expr(bound, out);
            out.push_str(" in ");
            expr(body, out);
        }
        ExprKind::If { cond, then_branch, else_branch } => {
            out.push_str("if ");
            expr(cond, out);
            out.push_str(" then ");
            expr(then_branch, out);
            out.push_str(" else ");
            expr(else_branch, out);
        }
        ExprKind::Case { scrutinee, left_binder, left, right_binder, right } => {
            out.push_str("case ");
            expr(scrutinee, out);
            out.push_str(&format!(" of inl {left_binder} => "));
            // A nested case in the left arm would swallow our `|`.
            at(left, 1, out);
            out.push_str(&format!(" | inr {right_binder} => "));
            expr(right, out);
        }
        ExprKind::Or(a, b) => {
            at(a, 1, out);
            out.push_str(" or ");
            at(b, 2, out);
        }
        ExprKind::And(a, b) => {
            at(a, 2, out);
            out.push_str(" and ");
            at(b, 3, out);
        }
        ExprKind::Fail => out.push_str("fail"),
        ExprKind::Sample(a) => {
            out.push_str("sample ");
            at(a, 4, out);
        }
        ExprKind::Observe { value, dist } => {
            out.push_str("observe ");
            at(value, 4, out);
            out.push_str(" <- ");
            at(dist, 4, out);
        }
        ExprKind::Call { func, args } => {
            out.push_str(func);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(a, out);
            }
            out.push(')');
        }
        ExprKind::Builtin { op, args } => match op {
            Builtin::Const(v) => constant(v, out),
            Builtin::Eq | Builtin::Neq => {
                at(&args[0], 4, out);
                out.push_str(if *op == Builtin::Eq { " = " } else { " != " });
                at(&args[1], 4, out);
            }
            Builtin::Pair | Builtin::Cons => {
                out.push_str(if *op == Builtin::Cons { "cons(" } else { "(" });
                expr(&args[0], out);
                out.push_str(", ");
                expr(&args[1], out);
                out.push(')');
            }
            Builtin::Param(p) => {
                out.push_str(p);
                out.push('[');
                expr(&args[0], out);
                out.push(']');
            }
            _ => {
                out.push_str(op.tag());
                out.push(' ');
                at(&args[0], 4, out);
            }
        },
    }
}

/// Writes a constant in expression syntax. Compound constants (which only
/// arise from substituted inputs) print as the builtin applications that
/// build them.
fn constant(v: &Value, out: &mut String) {
    match v {
        Value::Atom(a) => out.push_str(&format!("'{a}")),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Unit => out.push_str("unit"),
        v if *v == Value::nil() => out.push_str("nil"),
        Value::Dist(d) if d == ZERO_DIST => out.push_str("zero"),
        Value::Dist(d) => out.push_str(&format!("dist({d})")),
        Value::Pair(a, b) => {
            out.push('(');
            constant(a, out);
            out.push_str(", ");
            constant(b, out);
            out.push(')');
        }
        Value::Inl(x) | Value::Inr(x) => {
            out.push_str(if matches!(v, Value::Inl(_)) { "inl " } else { "inr " });
            let atomic = !const_needs_prefix(x);
            if !atomic {
                out.push('(');
            }
            constant(x, out);
            if !atomic {
                out.push(')');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse;

    fn same_shape(a: &Program, b: &Program) -> bool {
        fn strip(e: &Expr) -> Expr {
            let mut e = e.clone();
            clear(&mut e);
            e
        }
        fn clear(e: &mut Expr) {
            e.span = Default::default();
            e.id = 0;
            match &mut e.kind {
                ExprKind::Let { bound, body, .. } => {
                    clear(bound);
                    clear(body)
                }
                ExprKind::Call { args, .. } | ExprKind::Builtin { args, .. } => args.iter_mut().for_each(clear),
                ExprKind::Sample(x) => clear(x),
                ExprKind::Observe { value, dist } => {
                    clear(value);
                    clear(dist)
                }
                ExprKind::If { cond, then_branch, else_branch } => {
                    clear(cond);
                    clear(then_branch);
                    clear(else_branch)
                }
                ExprKind::Case { scrutinee, left, right, .. } => {
                    clear(scrutinee);
                    clear(left);
                    clear(right)
                }
                ExprKind::And(x, y) | ExprKind::Or(x, y) => {
                    clear(x);
                    clear(y)
                }
                _ => {}
            }
        }
        a.functions.len() == b.functions.len()
            && a.functions.iter().zip(&b.functions).all(|(f, g)| {
                f.name == g.name && f.params == g.params && strip(&f.body) == strip(&g.body)
            })
            && strip(&a.main) == strip(&b.main)
    }

    #[test]
    fn round_trip_examples() {
        for (_, src) in crate::fixtures::all_sources() {
            let p = parse(src).unwrap();
            let printed = print_program(&p);
            let q = parse(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
            assert!(same_shape(&p, &q), "{printed}");
        }
    }

    #[test]
    fn nested_case_in_left_arm() {
        let src = "case x of inl a => (case a of inl b => b | inr c => c) | inr d => d";
        let p = parse(src).unwrap();
        let q = parse(&print_program(&p)).unwrap();
        assert!(same_shape(&p, &q));
    }
}
