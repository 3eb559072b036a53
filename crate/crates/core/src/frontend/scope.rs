use std::collections::{HashMap, HashSet};
use std::fmt;

use super::ast::{Expr, ExprKind, Program, Span};

#[derive(Clone, Debug, PartialEq)]
pub struct ScopeDiagnostic {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for ScopeDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

/// Checks binding structure: every variable bound, every call well-aimed.
pub fn scope_check(p: &Program) -> Vec<ScopeDiagnostic> {
    let mut out = Vec::new();
    let mut arity: HashMap<&str, usize> = HashMap::new();
    for f in &p.functions {
        if arity.insert(&f.name, f.params.len()).is_some() {
            out.push(ScopeDiagnostic { span: f.span, message: format!("function `{}` defined twice", f.name) });
        }
    }
    for f in &p.functions {
        let mut seen = HashSet::new();
        for x in &f.params {
            if !seen.insert(x.as_str()) {
                out.push(ScopeDiagnostic {
                    span: f.span,
                    message: format!("parameter `{x}` repeated in `{}`", f.name),
                });
            }
            check_binder(x, f.span, &arity, &mut out);
        }
        let mut env: Vec<&str> = f.params.iter().map(String::as_str).collect();
        check(&f.body, &mut env, &arity, &mut out);
    }
    check(&p.main, &mut Vec::new(), &arity, &mut out);
    out
}

fn check_binder(x: &str, span: Span, arity: &HashMap<&str, usize>, out: &mut Vec<ScopeDiagnostic>) {
    if arity.contains_key(x) {
        out.push(ScopeDiagnostic { span, message: format!("variable `{x}` has the same name as a function") });
    }
}

fn check<'a>(e: &'a Expr, env: &mut Vec<&'a str>, arity: &HashMap<&str, usize>, out: &mut Vec<ScopeDiagnostic>) {
    match &e.kind {
        ExprKind::Var(x) => {
            if !env.contains(&x.as_str()) {
                out.push(ScopeDiagnostic { span: e.span, message: format!("unbound variable `{x}`") });
            }
        }
        ExprKind::Let { name, bound, body } => {
            check(bound, env, arity, out);
            check_binder(name, e.span, arity, out);
            env.push(name);
            check(body, env, arity, out);
            env.pop();
        }
        ExprKind::Case { scrutinee, left_binder, left, right_binder, right } => {
            check(scrutinee, env, arity, out);
            for (x, arm) in [(left_binder, left), (right_binder, right)] {
                check_binder(x, arm.span, arity, out);
                env.push(x);
                check(arm, env, arity, out);
                env.pop();
            }
        }
        ExprKind::Call { func, args } => {
            match arity.get(func.as_str()) {
                None => out.push(ScopeDiagnostic { span: e.span, message: format!("call to undefined function `{func}`") }),
                Some(&n) if n != args.len() => out.push(ScopeDiagnostic {
                    span: e.span,
                    message: format!("`{func}` takes {n} argument(s) but is called with {}", args.len()),
                }),
                _ => {}
            }
            for a in args {
                check(a, env, arity, out);
            }
        }
        _ => {
            for c in e.children() {
                check(c, env, arity, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse;

    #[test]
    fn pcfg_is_clean() {
        assert_eq!(scope_check(&parse(crate::fixtures::PCFG_SOURCE).unwrap()), vec![]);
    }

    #[test]
    fn wrong_arity() {
        let d = scope_check(&parse("fun d(x) = x; d('a, 'b)").unwrap());
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("`d` takes 1"));
    }

    #[test]
    fn unbound() {
        let d = scope_check(&parse("let x = 'a in z").unwrap());
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("`z`"));
    }

    #[test]
    fn variable_shadowing_a_function() {
        let d = scope_check(&parse("fun f(x) = x; let f = 'a in f").unwrap());
        assert_eq!(d.len(), 1);
    }
}
