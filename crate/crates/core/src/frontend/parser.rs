//! Recursive-descent parser.
//!
//! ```text
//! program ::= { "fun" f "(" [x {"," x}] ")" "=" expr ";" } expr
//! expr    ::= "let" x "=" expr "in" expr
//!           | "if" expr "then" expr "else" expr
//!           | "case" expr "of" "inl" x "=>" expr "|" "inr" x "=>" expr
//!           | or
//! or      ::= and {"or" and}
//! and     ::= cmp {"and" cmp}
//! cmp     ::= prefix [("=" | "!=") prefix]
//! prefix  ::= "sample" prefix | "observe" prefix "<-" prefix
//!           | ("fst"|"snd"|"inl"|"inr"|"car"|"cdr") prefix | primary
//! primary ::= x | 'atom | true | false | unit | nil | zero | fail
//!           | f "(" args ")" | "cons" "(" expr "," expr ")" | p "[" expr "]"
//!           | "(" expr ")" | "(" expr "," expr ")" | let | if | case
//! ```

use super::ast::{Builtin, Expr, ExprKind, FunDef, Program, Span};
use super::lexer::{lex, Tok, Token};
use super::SyntaxError;
use crate::value::{Value, ZERO_DIST};

pub const KEYWORDS: &[&str] = &[
    "fun", "let", "in", "if", "then", "else", "case", "of", "sample", "observe", "and", "or", "fail", "true",
    "false", "unit", "nil", "zero", "fst", "snd", "inl", "inr", "cons", "car", "cdr",
];

pub fn parse(src: &str) -> Result<Program, SyntaxError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut program = p.program()?;
    program.renumber();
    Ok(program)
}

/// Parses a single expression (used by tests and the REPL-less CLI paths).
pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    p.expect(&Tok::Eof)?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.tokens[(self.pos + k).min(self.tokens.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, what: &str) -> Result<T, SyntaxError> {
        Err(SyntaxError::new(self.span(), format!("expected {what}, found {}", self.peek().describe())))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect(&mut self, tok: &Tok) -> Result<Span, SyntaxError> {
        if self.peek() == tok {
            Ok(self.bump().span)
        } else {
            self.error(&tok.describe())
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<Span, SyntaxError> {
        if self.is_kw(kw) {
            Ok(self.bump().span)
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(what),
        }
    }

    fn program(&mut self) -> Result<Program, SyntaxError> {
        let mut functions = Vec::new();
        while self.is_kw("fun") {
            let span = self.bump().span;
            let name = self.ident("a function name")?;
            self.expect(&Tok::LParen)?;
            let mut params = Vec::new();
            if self.peek() != &Tok::RParen {
                params.push(self.ident("a parameter name")?);
                while self.peek() == &Tok::Comma {
                    self.bump();
                    params.push(self.ident("a parameter name")?);
                }
            }
            self.expect(&Tok::RParen)?;
            self.expect(&Tok::Eq)?;
            let body = self.expr()?;
            self.expect(&Tok::Semi)?;
            functions.push(FunDef { name, params, body, span });
        }
        let main = self.expr()?;
        self.expect(&Tok::Eof)?;
        Ok(Program { functions, main })
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let span = self.span();
        if self.is_kw("let") {
            self.bump();
            let name = self.ident("a variable name")?;
            self.expect(&Tok::Eq)?;
            let bound = self.expr()?;
            self.expect_kw("in")?;
            let body = self.expr()?;
            return Ok(Expr::new(span, ExprKind::Let { name, bound: Box::new(bound), body: Box::new(body) }));
        }
        if self.is_kw("if") {
            self.bump();
            let cond = self.expr()?;
            self.expect_kw("then")?;
            let then_branch = self.expr()?;
            self.expect_kw("else")?;
            let else_branch = self.expr()?;
            return Ok(Expr::new(
                span,
                ExprKind::If {
                    cond: Box::new(cond),
                    then_branch: Box::new(then_branch),
                    else_branch: Box::new(else_branch),
                },
            ));
        }
        if self.is_kw("case") {
            self.bump();
            let scrutinee = self.expr()?;
            self.expect_kw("of")?;
            self.expect_kw("inl")?;
            let left_binder = self.binder()?;
            self.expect(&Tok::FatArrow)?;
            let left = self.expr()?;
            self.expect(&Tok::Bar)?;
            self.expect_kw("inr")?;
            let right_binder = self.binder()?;
            self.expect(&Tok::FatArrow)?;
            let right = self.expr()?;
            return Ok(Expr::new(
                span,
                ExprKind::Case {
                    scrutinee: Box::new(scrutinee),
                    left_binder,
                    left: Box::new(left),
                    right_binder,
                    right: Box::new(right),
                },
            ));
        }
        self.or()
    }

    /// `x` or `(x)`.
    fn binder(&mut self) -> Result<String, SyntaxError> {
        if self.peek() == &Tok::LParen {
            self.bump();
            let x = self.ident("a binder name")?;
            self.expect(&Tok::RParen)?;
            Ok(x)
        } else {
            self.ident("a binder name")
        }
    }

    fn or(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.and()?;
        while self.is_kw("or") {
            self.bump();
            let rhs = self.and()?;
            lhs = Expr::new(lhs.span, ExprKind::Or(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.cmp()?;
        while self.is_kw("and") {
            self.bump();
            let rhs = self.cmp()?;
            lhs = Expr::new(lhs.span, ExprKind::And(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn cmp(&mut self) -> Result<Expr, SyntaxError> {
        let lhs = self.prefix()?;
        let op = match self.peek() {
            Tok::Eq => Builtin::Eq,
            Tok::Neq => Builtin::Neq,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.prefix()?;
        Ok(Expr::new(lhs.span, ExprKind::Builtin { op, args: vec![lhs, rhs] }))
    }

    fn prefix(&mut self) -> Result<Expr, SyntaxError> {
        let span = self.span();
        if self.is_kw("sample") {
            self.bump();
            let e = self.prefix()?;
            return Ok(Expr::new(span, ExprKind::Sample(Box::new(e))));
        }
        if self.is_kw("observe") {
            self.bump();
            let value = self.prefix()?;
            self.expect(&Tok::LArrow)?;
            let dist = self.prefix()?;
            return Ok(Expr::new(span, ExprKind::Observe { value: Box::new(value), dist: Box::new(dist) }));
        }
        if let Tok::Ident(name) = self.peek() {
            if let Some(op) = Builtin::from_name(name) {
                if op.arity() == 1 {
                    self.bump();
                    let arg = self.prefix()?;
                    return Ok(Expr::new(span, ExprKind::Builtin { op, args: vec![arg] }));
                }
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        let span = self.span();
        let constant = |v: Value| Expr::new(span, ExprKind::Builtin { op: Builtin::Const(v), args: vec![] });
        match self.peek().clone() {
            Tok::Atom(a) => {
                self.bump();
                Ok(constant(Value::Atom(a)))
            }
            Tok::LParen => {
                self.bump();
                let first = self.expr()?;
                if self.peek() == &Tok::Comma {
                    self.bump();
                    let second = self.expr()?;
                    self.expect(&Tok::RParen)?;
                    return Ok(Expr::new(span, ExprKind::Builtin { op: Builtin::Pair, args: vec![first, second] }));
                }
                self.expect(&Tok::RParen)?;
                Ok(first)
            }
            Tok::Ident(name) => match name.as_str() {
                "let" | "if" | "case" => self.expr(),
                "true" | "false" | "unit" | "nil" | "zero" => {
                    self.bump();
                    Ok(constant(match name.as_str() {
                        "true" => Value::Bool(true),
                        "false" => Value::Bool(false),
                        "unit" => Value::Unit,
                        "nil" => Value::nil(),
                        _ => Value::Dist(ZERO_DIST.into()),
                    }))
                }
                "fail" => {
                    self.bump();
                    Ok(Expr::new(span, ExprKind::Fail))
                }
                "cons" => {
                    self.bump();
                    self.expect(&Tok::LParen)?;
                    let head = self.expr()?;
                    self.expect(&Tok::Comma)?;
                    let tail = self.expr()?;
                    self.expect(&Tok::RParen)?;
                    Ok(Expr::new(span, ExprKind::Builtin { op: Builtin::Cons, args: vec![head, tail] }))
                }
                n if KEYWORDS.contains(&n) => self.error("an expression"),
                _ => {
                    self.bump();
                    match self.peek() {
                        Tok::LParen => {
                            self.bump();
                            let mut args = Vec::new();
                            if self.peek() != &Tok::RParen {
                                args.push(self.expr()?);
                                while self.peek() == &Tok::Comma {
                                    self.bump();
                                    args.push(self.expr()?);
                                }
                            }
                            self.expect(&Tok::RParen)?;
                            Ok(Expr::new(span, ExprKind::Call { func: name, args }))
                        }
                        Tok::LBracket if self.peek_at(1) != &Tok::RBracket => {
                            self.bump();
                            let key = self.expr()?;
                            self.expect(&Tok::RBracket)?;
                            Ok(Expr::new(span, ExprKind::Builtin { op: Builtin::Param(name), args: vec![key] }))
                        }
                        _ => Ok(Expr::new(span, ExprKind::Var(name))),
                    }
                }
            },
            _ => self.error("an expression"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_of_variable() {
        let e = parse_expr("sample d").unwrap();
        match e.kind {
            ExprKind::Sample(inner) => assert_eq!(inner.kind, ExprKind::Var("d".into())),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pcfg_program_shape() {
        let p = parse(crate::fixtures::PCFG_SOURCE).unwrap();
        assert_eq!(p.functions.len(), 1);
        assert_eq!(p.functions[0].name, "d");
        assert!(matches!(p.main.kind, ExprKind::Call { .. }));
    }

    #[test]
    fn let_without_bound_expression() {
        let err = parse("let x = in x").unwrap_err();
        assert_eq!(err.span, Span { line: 1, col: 9 });
        assert!(err.message.contains("`in`"), "{}", err.message);
    }

    #[test]
    fn precedence() {
        let e = parse_expr("a = b and c or d").unwrap();
        let ExprKind::Or(l, _) = e.kind else { panic!() };
        let ExprKind::And(l, _) = l.kind else { panic!() };
        assert!(matches!(l.kind, ExprKind::Builtin { op: Builtin::Eq, .. }));
    }

    #[test]
    fn observe_binds_prefix_operands() {
        let e = parse_expr("observe car w <- p[x]").unwrap();
        let ExprKind::Observe { value, dist } = e.kind else { panic!() };
        assert!(matches!(value.kind, ExprKind::Builtin { op: Builtin::Car, .. }));
        assert!(matches!(dist.kind, ExprKind::Builtin { op: Builtin::Param(_), .. }));
    }

    #[test]
    fn keywords_are_not_variables() {
        assert!(parse("let in = 'a in in").is_err());
    }
}
