//! Runtime values, finite domains, and their textual and JSON encodings.
//!
//! Lists are not a separate variant: `nil` is `inl(unit)` and `cons(h, t)` is
//! `inr((h, t))`, so list-shaped data can be inspected with `case`.

use std::collections::HashMap;
use std::fmt;

use serde_json::{json, Value as Json};
use thiserror::Error;

/// Name of the reserved distribution whose density is zero everywhere.
pub const ZERO_DIST: &str = "zero";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Atom(String),
    Bool(bool),
    Unit,
    Pair(Box<Value>, Box<Value>),
    Inl(Box<Value>),
    Inr(Box<Value>),
    Dist(String),
}

impl Value {
    pub fn atom(name: impl Into<String>) -> Value {
        Value::Atom(name.into())
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn inl(v: Value) -> Value {
        Value::Inl(Box::new(v))
    }

    pub fn inr(v: Value) -> Value {
        Value::Inr(Box::new(v))
    }

    pub fn nil() -> Value {
        Value::inl(Value::Unit)
    }

    pub fn cons(head: Value, tail: Value) -> Value {
        Value::inr(Value::pair(head, tail))
    }

    /// Builds a list value from its elements.
    pub fn list<I>(items: I) -> Value
    where
        I: IntoIterator<Item = Value>,
        I::IntoIter: DoubleEndedIterator,
    {
        items
            .into_iter()
            .rev()
            .fold(Value::nil(), |tail, head| Value::cons(head, tail))
    }

    /// Returns the elements if this value is a well-formed list.
    pub fn as_list(&self) -> Option<Vec<Value>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Value::Inl(inner) if **inner == Value::Unit => return Some(out),
                Value::Inr(inner) => match &**inner {
                    Value::Pair(h, t) => {
                        out.push((**h).clone());
                        cur = t;
                    }
                    _ => return None,
                },
                _ => return None,
            }
        }
    }

    pub fn is_dist(&self) -> bool {
        matches!(self, Value::Dist(_))
    }

    pub fn is_sum(&self) -> bool {
        matches!(self, Value::Inl(_) | Value::Inr(_))
    }

    pub fn to_json(&self) -> Json {
        match self {
            Value::Atom(s) => json!({ "atom": s }),
            Value::Bool(b) => json!({ "bool": b }),
            Value::Unit => json!("unit"),
            Value::Pair(a, b) => json!({ "pair": [a.to_json(), b.to_json()] }),
            Value::Inl(v) => json!({ "inl": v.to_json() }),
            Value::Inr(v) => json!({ "inr": v.to_json() }),
            Value::Dist(s) => json!({ "dist": s }),
        }
    }

    /// Decodes the tagged JSON form. Also accepts `{"list": [..]}` and a
    /// plain string holding a value literal, which parameter files use.
    pub fn from_json(j: &Json) -> Result<Value, ValueError> {
        match j {
            Json::String(s) if s == "unit" => Ok(Value::Unit),
            Json::String(s) => parse_value(s),
            Json::Object(map) if map.len() == 1 => {
                let (tag, body) = map.iter().next().unwrap();
                match (tag.as_str(), body) {
                    ("atom", Json::String(s)) => Ok(Value::Atom(s.clone())),
                    ("bool", Json::Bool(b)) => Ok(Value::Bool(*b)),
                    ("dist", Json::String(s)) => Ok(Value::Dist(s.clone())),
                    ("pair", Json::Array(items)) if items.len() == 2 => Ok(Value::pair(
                        Value::from_json(&items[0])?,
                        Value::from_json(&items[1])?,
                    )),
                    ("inl", v) => Ok(Value::inl(Value::from_json(v)?)),
                    ("inr", v) => Ok(Value::inr(Value::from_json(v)?)),
                    ("list", Json::Array(items)) => {
                        let vals = items.iter().map(Value::from_json).collect::<Result<Vec<_>, _>>()?;
                        Ok(Value::list(vals))
                    }
                    _ => Err(ValueError::Json(j.to_string())),
                }
            }
            _ => Err(ValueError::Json(j.to_string())),
        }
    }
}

const RESERVED_ATOMS: &[&str] = &["true", "false", "unit", "nil", "inl", "inr", "dist"];

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(s) if RESERVED_ATOMS.contains(&s.as_str()) || !is_ident(s) => {
                write!(f, "'{s}")
            }
            Value::Atom(s) => write!(f, "{s}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Unit => write!(f, "unit"),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::Inl(v) => write!(f, "inl({v})"),
            Value::Inr(v) => write!(f, "inr({v})"),
            Value::Dist(s) => write!(f, "dist({s})"),
        }
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValueError {
    #[error("invalid value literal `{0}`: {1}")]
    Literal(String, String),
    #[error("invalid JSON value encoding: {0}")]
    Json(String),
    #[error("domain `{0}` is empty")]
    EmptyDomain(String),
    #[error("domain `{0}` lists value {1} twice")]
    DuplicateValue(String, Value),
}

/// Parses a value literal: `a`, `'a`, `true`, `unit`, `nil`, `(v, w)`,
/// `inl v`, `inr(v)`, `[a, b]`, `dist(p[S])`.
pub fn parse_value(text: &str) -> Result<Value, ValueError> {
    let mut p = LiteralParser { src: text, pos: 0 };
    let v = p.value().map_err(|m| ValueError::Literal(text.to_string(), m))?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(ValueError::Literal(text.to_string(), format!("trailing input at byte {}", p.pos)));
    }
    Ok(v)
}

struct LiteralParser<'a> {
    src: &'a str,
    pos: usize,
}

impl LiteralParser<'_> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), String> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(format!("expected `{c}` at byte {}", self.pos))
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        let mut first = true;
        while let Some(c) = self.peek() {
            let ok = if first {
                c.is_ascii_alphabetic() || c == '_'
            } else {
                c.is_ascii_alphanumeric() || c == '_' || c == '\''
            };
            if !ok {
                break;
            }
            first = false;
            self.pos += c.len_utf8();
        }
        (self.pos > start).then(|| self.src[start..self.pos].to_string())
    }

    fn value(&mut self) -> Result<Value, String> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let a = self.value()?;
                if self.eat(')') {
                    return Ok(a);
                }
                self.expect(',')?;
                let b = self.value()?;
                self.expect(')')?;
                Ok(Value::pair(a, b))
            }
            Some('[') => {
                self.pos += 1;
                let mut items = Vec::new();
                if !self.eat(']') {
                    loop {
                        items.push(self.value()?);
                        if self.eat(']') {
                            break;
                        }
                        self.expect(',')?;
                    }
                }
                Ok(Value::list(items))
            }
            Some('\'') => {
                self.pos += 1;
                self.ident().map(Value::Atom).ok_or_else(|| "expected atom name after `'`".into())
            }
            _ => {
                let word = self.ident().ok_or_else(|| format!("unexpected input at byte {}", self.pos))?;
                match word.as_str() {
                    "true" => Ok(Value::Bool(true)),
                    "false" => Ok(Value::Bool(false)),
                    "unit" => Ok(Value::Unit),
                    "nil" => Ok(Value::nil()),
                    "inl" => Ok(Value::inl(self.value()?)),
                    "inr" => Ok(Value::inr(self.value()?)),
                    "dist" => {
                        self.expect('(')?;
                        let start = self.pos;
                        let mut depth = 1usize;
                        while let Some(c) = self.peek() {
                            match c {
                                '(' => depth += 1,
                                ')' => {
                                    depth -= 1;
                                    if depth == 0 {
                                        break;
                                    }
                                }
                                _ => {}
                            }
                            self.pos += c.len_utf8();
                        }
                        let name = self.src[start..self.pos].trim().to_string();
                        self.expect(')')?;
                        Ok(Value::Dist(name))
                    }
                    _ => Ok(Value::Atom(word)),
                }
            }
        }
    }
}

/// A named, ordered, finite set of values.
#[derive(Clone, Debug)]
pub struct Domain {
    name: String,
    values: Vec<Value>,
    index: HashMap<Value, usize>,
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.values == other.values
    }
}

impl Domain {
    pub fn new(name: impl Into<String>, values: Vec<Value>) -> Result<Domain, ValueError> {
        let name = name.into();
        if values.is_empty() {
            return Err(ValueError::EmptyDomain(name));
        }
        let mut index = HashMap::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(ValueError::DuplicateValue(name, v.clone()));
            }
        }
        Ok(Domain { name, values, index })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, v: &Value) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.index.contains_key(v)
    }

    pub fn value(&self, i: usize) -> &Value {
        &self.values[i]
    }

    pub fn same_values(&self, other: &Domain) -> bool {
        self.values == other.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_round_trip() {
        let samples = [
            "a",
            "'true",
            "true",
            "unit",
            "(S, S)",
            "inl(a)",
            "inr((A, B))",
            "dist(p[S])",
            "inr((a, inr((b, inl(unit)))))",
        ];
        for s in samples {
            let v = parse_value(s).unwrap();
            assert_eq!(parse_value(&v.to_string()).unwrap(), v, "{s}");
        }
    }

    #[test]
    fn list_sugar() {
        let v = parse_value("[a, b]").unwrap();
        assert_eq!(v.as_list().unwrap(), vec![Value::atom("a"), Value::atom("b")]);
        assert_eq!(parse_value("nil").unwrap(), Value::list(Vec::new()));
        assert_eq!(parse_value("inl a").unwrap(), Value::inl(Value::atom("a")));
    }

    #[test]
    fn json_tags() {
        let v = Value::cons(Value::atom("a"), Value::nil());
        assert_eq!(Value::from_json(&v.to_json()).unwrap(), v);
        assert_eq!(Value::from_json(&json!({"list": [{"atom": "a"}]})).unwrap(), v);
        assert_eq!(Value::from_json(&json!("unit")).unwrap(), Value::Unit);
        assert!(Value::from_json(&json!(3)).is_err());
    }

    #[test]
    fn domain_rejects_duplicates_and_empty() {
        assert!(Domain::new("d", vec![]).is_err());
        assert!(Domain::new("d", vec![Value::Unit, Value::Unit]).is_err());
        let d = Domain::new("b", vec![Value::Bool(false), Value::Bool(true)]).unwrap();
        assert_eq!(d.index_of(&Value::Bool(true)), Some(1));
    }
}
