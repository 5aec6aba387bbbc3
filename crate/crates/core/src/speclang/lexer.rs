use super::{Diagnostic, DiagnosticKind, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Section(String),
    Ident(String),
    Int(i64),
    Prime,
    Colon,
    DotDot,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Iff,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    LParen,
    RParen,
    Newline,
    Eof,
}

impl Tok {
    pub fn text(&self) -> String {
        match self {
            Tok::Section(s) => format!("[{s}]"),
            Tok::Ident(s) => s.clone(),
            Tok::Int(v) => v.to_string(),
            Tok::Prime => "'".into(),
            Tok::Colon => ":".into(),
            Tok::DotDot => "..".into(),
            Tok::Bang => "!".into(),
            Tok::Amp => "&".into(),
            Tok::Pipe => "|".into(),
            Tok::Arrow => "->".into(),
            Tok::Iff => "<->".into(),
            Tok::Eq => "=".into(),
            Tok::Ne => "!=".into(),
            Tok::Lt => "<".into(),
            Tok::Le => "<=".into(),
            Tok::Gt => ">".into(),
            Tok::Ge => ">=".into(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// Literals beyond this magnitude are rejected so that arithmetic stays
/// far from i64 overflow.
pub(crate) const MAX_LITERAL: i64 = 1_000_000_000;

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let mut advance = 1;
        let tok = match c {
            '\n' => {
                out.push(Token { tok: Tok::Newline, pos });
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '#' => {
                while i + advance < chars.len() && chars[i + advance] != '\n' {
                    advance += 1;
                }
                None
            }
            '[' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let name: String = chars[i + 1..j].iter().collect();
                if j >= chars.len() || chars[j] != ']' {
                    return Err(Diagnostic::new(
                        DiagnosticKind::SyntaxError,
                        pos,
                        format!("[{name}"),
                        "unterminated section header",
                    ));
                }
                advance = j + 1 - i;
                Some(Tok::Section(name))
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                advance = j - i;
                Some(Tok::Ident(chars[i..j].iter().collect()))
            }
            c if c.is_ascii_digit() => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let value = text
                    .parse::<i64>()
                    .ok()
                    .filter(|v| *v <= MAX_LITERAL)
                    .ok_or_else(|| {
                        Diagnostic::new(
                            DiagnosticKind::SyntaxError,
                            pos,
                            text.clone(),
                            "integer literal out of range",
                        )
                    })?;
                advance = j - i;
                Some(Tok::Int(value))
            }
            _ => {
                let next = chars.get(i + 1).copied();
                let next2 = chars.get(i + 2).copied();
                let (tok, len) = match (c, next, next2) {
                    ('<', Some('-'), Some('>')) => (Tok::Iff, 3),
                    ('<', Some('='), _) => (Tok::Le, 2),
                    ('>', Some('='), _) => (Tok::Ge, 2),
                    ('!', Some('='), _) => (Tok::Ne, 2),
                    ('-', Some('>'), _) => (Tok::Arrow, 2),
                    ('.', Some('.'), _) => (Tok::DotDot, 2),
                    ('<', ..) => (Tok::Lt, 1),
                    ('>', ..) => (Tok::Gt, 1),
                    ('!', ..) => (Tok::Bang, 1),
                    ('=', ..) => (Tok::Eq, 1),
                    ('&', ..) => (Tok::Amp, 1),
                    ('|', ..) => (Tok::Pipe, 1),
                    ('+', ..) => (Tok::Plus, 1),
                    ('-', ..) => (Tok::Minus, 1),
                    ('(', ..) => (Tok::LParen, 1),
                    (')', ..) => (Tok::RParen, 1),
                    (':', ..) => (Tok::Colon, 1),
                    ('\'', ..) => (Tok::Prime, 1),
                    _ => {
                        return Err(Diagnostic::new(
                            DiagnosticKind::SyntaxError,
                            pos,
                            c.to_string(),
                            "unexpected character",
                        ))
                    }
                };
                advance = len;
                Some(tok)
            }
        };
        if let Some(tok) = tok {
            out.push(Token { tok, pos });
        }
        i += advance;
        col += advance;
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_and_primes() {
        assert_eq!(
            kinds("a' <-> !b -> c<=1"),
            vec![
                Tok::Ident("a".into()),
                Tok::Prime,
                Tok::Iff,
                Tok::Bang,
                Tok::Ident("b".into()),
                Tok::Arrow,
                Tok::Ident("c".into()),
                Tok::Le,
                Tok::Int(1),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let toks = tokenize("# header\n  x : 0..3 # trailing\n").unwrap();
        assert_eq!(toks[0].tok, Tok::Newline);
        assert_eq!(toks[1].tok, Tok::Ident("x".into()));
        assert_eq!((toks[1].pos.line, toks[1].pos.col), (2, 3));
        assert_eq!(toks[3].tok, Tok::Int(0));
        assert_eq!(toks[4].tok, Tok::DotDot);
    }

    #[test]
    fn huge_literal_is_a_diagnostic() {
        assert!(tokenize("99999999999999999999999").is_err());
    }
}
