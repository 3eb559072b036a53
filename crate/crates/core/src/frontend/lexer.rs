use super::ast::Span;
use super::SyntaxError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    /// `'name`
    Atom(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Bar,
    FatArrow,
    LArrow,
    Eq,
    Neq,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Atom(s) => format!("`'{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Bar => "`|`".into(),
            Tok::FatArrow => "`=>`".into(),
            Tok::LArrow => "`<-`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let ident_start = |c: char| c.is_ascii_alphabetic() || c == '_';
    let ident_rest = |c: char| c.is_ascii_alphanumeric() || c == '_' || c == '\'';

    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n as u32;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            ',' => (Tok::Comma, 1),
            ';' => (Tok::Semi, 1),
            '|' => (Tok::Bar, 1),
            '←' => (Tok::LArrow, 1),
            '⇒' => (Tok::FatArrow, 1),
            '≠' => (Tok::Neq, 1),
            '=' if next == Some('>') => (Tok::FatArrow, 2),
            '=' => (Tok::Eq, 1),
            '<' if next == Some('-') => (Tok::LArrow, 2),
            '!' if next == Some('=') => (Tok::Neq, 2),
            '\'' => {
                let start = i + 1;
                let mut j = start;
                if j < chars.len() && ident_start(chars[j]) {
                    while j < chars.len() && ident_rest(chars[j]) {
                        j += 1;
                    }
                }
                if j == start {
                    return Err(SyntaxError::new(span, "expected an atom name after `'`"));
                }
                (Tok::Atom(chars[start..j].iter().collect()), j - i)
            }
            c if ident_start(c) => {
                let mut j = i;
                while j < chars.len() && ident_rest(chars[j]) {
                    j += 1;
                }
                (Tok::Ident(chars[i..j].iter().collect()), j - i)
            }
            other => return Err(SyntaxError::new(span, format!("unexpected character `{other}`"))),
        };
        out.push(Token { tok, span });
        advance(len, &mut i);
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let toks = lex("let w' = 'S in\n  observe x <- p[x] # note\n=>").unwrap();
        let kinds: Vec<Tok> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Ident("let".into()),
                Tok::Ident("w'".into()),
                Tok::Eq,
                Tok::Atom("S".into()),
                Tok::Ident("in".into()),
                Tok::Ident("observe".into()),
                Tok::Ident("x".into()),
                Tok::LArrow,
                Tok::Ident("p".into()),
                Tok::LBracket,
                Tok::Ident("x".into()),
                Tok::RBracket,
                Tok::FatArrow,
                Tok::Eof,
            ]
        );
        assert_eq!(toks[5].span, Span { line: 2, col: 3 });
    }

    #[test]
    fn bad_character() {
        let err = lex("x $ y").unwrap_err();
        assert_eq!(err.span, Span { line: 1, col: 3 });
    }
}
