//! Source language: lexing, parsing, desugaring, scope and domain checks.

pub mod ast;
pub mod desugar;
pub mod domains;
pub mod eval;
pub mod lexer;
pub mod params;
pub mod parser;
pub mod printer;
pub mod scope;

use std::fmt;

use thiserror::Error;

pub use ast::{Builtin, Expr, ExprId, ExprKind, FunDef, Program, Span};
pub use desugar::desugar;
pub use domains::{assign_domains, FnSig, TypedExpr, TypedProgram};
pub use params::{Params, ParamsError};
pub use parser::parse;
pub use printer::print_program;
pub use scope::{scope_check, ScopeDiagnostic};

use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{span}: syntax error: {message}")]
pub struct SyntaxError {
    pub span: Span,
    pub message: String,
}

impl SyntaxError {
    pub fn new(span: Span, message: impl Into<String>) -> SyntaxError {
        SyntaxError { span, message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{}", join(.0))]
    Scope(Vec<ScopeDiagnostic>),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("{span}: {message}")]
    Domain { span: Span, message: String },
}

fn join(ds: &[ScopeDiagnostic]) -> String {
    ds.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

impl FrontendError {
    pub fn domain(span: Span, message: impl fmt::Display) -> FrontendError {
        FrontendError::Domain { span, message: message.to_string() }
    }
}

/// Replaces free variables named in `inputs` by constants.
pub fn bind_inputs(p: &Program, inputs: &indexmap::IndexMap<String, Value>) -> Program {
    fn go(e: &mut Expr, bound: &mut Vec<String>, inputs: &indexmap::IndexMap<String, Value>) {
        match &mut e.kind {
            ExprKind::Var(x) if !bound.contains(x) => {
                if let Some(v) = inputs.get(x.as_str()) {
                    e.kind = ExprKind::Builtin { op: Builtin::Const(v.clone()), args: vec![] };
                }
            }
            ExprKind::Let { name, bound: b, body } => {
                go(b, bound, inputs);
                bound.push(name.clone());
                go(body, bound, inputs);
                bound.pop();
            }
            ExprKind::Case { scrutinee, left_binder, left, right_binder, right } => {
                go(scrutinee, bound, inputs);
                for (x, arm) in [(left_binder, left), (right_binder, right)] {
                    bound.push(x.clone());
                    go(arm, bound, inputs);
                    bound.pop();
                }
            }
            ExprKind::Var(_) => {}
            ExprKind::Call { args, .. } | ExprKind::Builtin { args, .. } => {
                args.iter_mut().for_each(|a| go(a, bound, inputs))
            }
            ExprKind::Sample(a) => go(a, bound, inputs),
            ExprKind::Observe { value, dist } => {
                go(value, bound, inputs);
                go(dist, bound, inputs);
            }
            ExprKind::If { cond, then_branch, else_branch } => {
                go(cond, bound, inputs);
                go(then_branch, bound, inputs);
                go(else_branch, bound, inputs);
            }
            ExprKind::And(a, b) | ExprKind::Or(a, b) => {
                go(a, bound, inputs);
                go(b, bound, inputs);
            }
            ExprKind::Fail => {}
        }
    }
    let mut out = p.clone();
    for f in &mut out.functions {
        go(&mut f.body, &mut f.params.clone(), inputs);
    }
    go(&mut out.main, &mut Vec::new(), inputs);
    out.renumber();
    out
}

/// Runs the whole front end: parse, desugar, bind inputs, scope check and
/// domain assignment.
pub fn load(source: &str, params: &Params) -> Result<TypedProgram, FrontendError> {
    let parsed = parse(source)?;
    let core = bind_inputs(&desugar(&parsed), &params.inputs);
    let diags = scope_check(&core);
    if !diags.is_empty() {
        return Err(FrontendError::Scope(diags));
    }
    assign_domains(&core, params)
}
