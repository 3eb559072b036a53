use std::fmt;

use crate::value::Value;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Preorder index of an expression within its program.
pub type ExprId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub id: ExprId,
    pub span: Span,
    pub kind: ExprKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Var(String),
    Let { name: String, bound: Box<Expr>, body: Box<Expr> },
    Call { func: String, args: Vec<Expr> },
    Sample(Box<Expr>),
    /// `observe value <- dist`
    Observe { value: Box<Expr>, dist: Box<Expr> },
    If { cond: Box<Expr>, then_branch: Box<Expr>, else_branch: Box<Expr> },
    Case { scrutinee: Box<Expr>, left_binder: String, left: Box<Expr>, right_binder: String, right: Box<Expr> },
    Builtin { op: Builtin, args: Vec<Expr> },
    // Surface forms removed by desugaring.
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Const(Value),
    Eq,
    Neq,
    Pair,
    Fst,
    Snd,
    Inl,
    Inr,
    Cons,
    Car,
    Cdr,
    /// Table lookup `p[x]` on a declared parameter map.
    Param(String),
}

impl Builtin {
    pub fn arity(&self) -> usize {
        match self {
            Builtin::Const(_) => 0,
            Builtin::Eq | Builtin::Neq | Builtin::Pair | Builtin::Cons => 2,
            _ => 1,
        }
    }

    /// Short name used in generated labels.
    pub fn tag(&self) -> &'static str {
        match self {
            Builtin::Const(_) => "const",
            Builtin::Eq => "eq",
            Builtin::Neq => "neq",
            Builtin::Pair => "pair",
            Builtin::Fst => "fst",
            Builtin::Snd => "snd",
            Builtin::Inl => "inl",
            Builtin::Inr => "inr",
            Builtin::Cons => "cons",
            Builtin::Car => "car",
            Builtin::Cdr => "cdr",
            Builtin::Param(_) => "param",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Some(match name {
            "fst" => Builtin::Fst,
            "snd" => Builtin::Snd,
            "inl" => Builtin::Inl,
            "inr" => Builtin::Inr,
            "cons" => Builtin::Cons,
            "car" => Builtin::Car,
            "cdr" => Builtin::Cdr,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub functions: Vec<FunDef>,
    pub main: Expr,
}

impl Expr {
    pub fn new(span: Span, kind: ExprKind) -> Expr {
        Expr { id: 0, span, kind }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Var(_) | ExprKind::Fail => vec![],
            ExprKind::Let { bound, body, .. } => vec![bound, body],
            ExprKind::Call { args, .. } | ExprKind::Builtin { args, .. } => args.iter().collect(),
            ExprKind::Sample(e) => vec![e],
            ExprKind::Observe { value, dist } => vec![value, dist],
            ExprKind::If { cond, then_branch, else_branch } => vec![cond, then_branch, else_branch],
            ExprKind::Case { scrutinee, left, right, .. } => vec![scrutinee, left, right],
            ExprKind::And(a, b) | ExprKind::Or(a, b) => vec![a, b],
        }
    }

    fn children_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            ExprKind::Var(_) | ExprKind::Fail => vec![],
            ExprKind::Let { bound, body, .. } => vec![bound, body],
            ExprKind::Call { args, .. } | ExprKind::Builtin { args, .. } => args.iter_mut().collect(),
            ExprKind::Sample(e) => vec![e],
            ExprKind::Observe { value, dist } => vec![value, dist],
            ExprKind::If { cond, then_branch, else_branch } => vec![cond, then_branch, else_branch],
            ExprKind::Case { scrutinee, left, right, .. } => vec![scrutinee, left, right],
            ExprKind::And(a, b) | ExprKind::Or(a, b) => vec![a, b],
        }
    }

    /// Visits this expression and all descendants in preorder.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    fn number(&mut self, next: &mut usize) {
        self.id = *next;
        *next += 1;
        for c in self.children_mut() {
            c.number(next);
        }
    }

    /// Short kind name used in generated labels and messages.
    pub fn kind_tag(&self) -> &'static str {
        match &self.kind {
            ExprKind::Var(_) => "var",
            ExprKind::Let { .. } => "let",
            ExprKind::Call { .. } => "call",
            ExprKind::Sample(_) => "sample",
            ExprKind::Observe { .. } => "observe",
            ExprKind::If { .. } => "if",
            ExprKind::Case { .. } => "case",
            ExprKind::Builtin { op, .. } => op.tag(),
            ExprKind::And(..) => "and",
            ExprKind::Or(..) => "or",
            ExprKind::Fail => "fail",
        }
    }
}

impl Program {
    /// Reassigns expression ids in preorder: function bodies in order, then main.
    pub fn renumber(&mut self) {
        let mut next = 0;
        for f in &mut self.functions {
            f.body.number(&mut next);
        }
        self.main.number(&mut next);
    }

    pub fn expr_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        for d in &self.functions {
            d.body.walk(f);
        }
        self.main.walk(f);
    }

    pub fn function(&self, name: &str) -> Option<&FunDef> {
        self.functions.iter().find(|f| f.name == name)
    }
}
