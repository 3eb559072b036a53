use super::ast::{Builtin, Expr, ExprKind, Program};
use crate::value::{Value, ZERO_DIST};

/// Rewrites `and`, `or` and `fail` into the core forms.
pub fn desugar(p: &Program) -> Program {
    let mut out = p.clone();
    for f in &mut out.functions {
        f.body = desugar_expr(&f.body);
    }
    out.main = desugar_expr(&out.main);
    out.renumber();
    out
}

fn constant(e: &Expr, v: Value) -> Box<Expr> {
    Box::new(Expr::new(e.span, ExprKind::Builtin { op: Builtin::Const(v), args: vec![] }))
}

pub fn desugar_expr(e: &Expr) -> Expr {
    let d = |x: &Expr| Box::new(desugar_expr(x));
    let kind = match &e.kind {
        ExprKind::And(a, b) => ExprKind::If {
            cond: d(a),
            then_branch: d(b),
            else_branch: constant(e, Value::Bool(false)),
        },
        ExprKind::Or(a, b) => ExprKind::If {
            cond: d(a),
            then_branch: constant(e, Value::Bool(true)),
            else_branch: d(b),
        },
        ExprKind::Fail => ExprKind::Observe {
            value: constant(e, Value::Bool(true)),
            dist: constant(e, Value::Dist(ZERO_DIST.into())),
        },
        ExprKind::Var(x) => ExprKind::Var(x.clone()),
        ExprKind::Let { name, bound, body } => ExprKind::Let { name: name.clone(), bound: d(bound), body: d(body) },
        ExprKind::Call { func, args } => ExprKind::Call { func: func.clone(), args: args.iter().map(desugar_expr).collect() },
        ExprKind::Sample(a) => ExprKind::Sample(d(a)),
        ExprKind::Observe { value, dist } => ExprKind::Observe { value: d(value), dist: d(dist) },
        ExprKind::If { cond, then_branch, else_branch } => ExprKind::If {
            cond: d(cond),
            then_branch: d(then_branch),
            else_branch: d(else_branch),
        },
        ExprKind::Case { scrutinee, left_binder, left, right_binder, right } => ExprKind::Case {
            scrutinee: d(scrutinee),
            left_binder: left_binder.clone(),
            left: d(left),
            right_binder: right_binder.clone(),
            right: d(right),
        },
        ExprKind::Builtin { op, args } => {
            ExprKind::Builtin { op: op.clone(), args: args.iter().map(desugar_expr).collect() }
        }
    };
    Expr { id: e.id, span: e.span, kind }
}

/// True if no surface-only forms remain.
pub fn is_core(p: &Program) -> bool {
    let mut ok = true;
    p.walk(&mut |e| {
        if matches!(e.kind, ExprKind::And(..) | ExprKind::Or(..) | ExprKind::Fail) {
            ok = false;
        }
    });
    ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::{parse, parse_expr};

    fn strip(e: &Expr) -> String {
        crate::frontend::printer::print_expr(e)
    }

    #[test]
    fn and_or_fail() {
        assert_eq!(strip(&desugar_expr(&parse_expr("a and b").unwrap())), "if a then b else false");
        assert_eq!(strip(&desugar_expr(&parse_expr("a or b").unwrap())), "if a then true else b");
        assert_eq!(strip(&desugar_expr(&parse_expr("fail").unwrap())), "observe true <- zero");
    }

    #[test]
    fn idempotent() {
        let p = parse(crate::fixtures::PCFGW_AND_SOURCE).unwrap();
        let once = desugar(&p);
        assert!(is_core(&once));
        assert_eq!(desugar(&once), once);
    }
}
