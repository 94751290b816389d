use std::fmt;

use crate::diag::{Code, Diagnostic};
use crate::span::Span;

pub const KEYWORDS: &[&str] = &[
    "type", "let", "in", "box", "select", "match", "close", "wait", "send", "receive", "new",
    "fork", "fix", "lambda", "lambda1", "rec", "oplus", "if", "then", "else", "true", "false",
    "unit",
];

const SYMBOLS: &[&str] = &[
    "1->", "->", "|-", "==", "<=", "(", ")", "{", "}", "[", "]", ",", ":", ";", ".", "=", "!",
    "?", "*", "+", "-", "/", "%", "<", ">", "^", "@", "&", "\\",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Ident,
    /// Capitalised names: choice labels, type names and base types.
    Label,
    Int,
    Symbol,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
    /// True for the first token on a line that starts in column 1.
    pub line_start: bool,
}

impl Token {
    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }

    pub fn is_sym(&self, s: &str) -> bool {
        self.is(TokenKind::Symbol, s)
    }

    pub fn is_kw(&self, k: &str) -> bool {
        self.is(TokenKind::Keyword, k)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self.lexeme)
    }
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '#'
}

pub fn lex(source: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut at_col1 = true;
    let mut line_has_token = false;
    while i < bytes.len() {
        let c = source[i..].chars().next().unwrap();
        if c == '\n' {
            at_col1 = true;
            line_has_token = false;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            at_col1 = false;
            i += c.len_utf8();
            continue;
        }
        if source[i..].starts_with("--") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let line_start = at_col1 && !line_has_token;
        at_col1 = false;
        line_has_token = true;
        let start = i;
        let kind;
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if &source[start..i] == "1" && source[i..].starts_with("->") {
                i += 2;
                kind = TokenKind::Symbol;
            } else {
                kind = TokenKind::Int;
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && ident_char(bytes[i] as char) {
                i += 1;
            }
            let word = &source[start..i];
            kind = if KEYWORDS.contains(&word) {
                TokenKind::Keyword
            } else if c.is_ascii_uppercase() {
                TokenKind::Label
            } else {
                TokenKind::Ident
            };
        } else if let Some(sym) = SYMBOLS.iter().find(|s| source[i..].starts_with(**s)) {
            i += sym.len();
            kind = TokenKind::Symbol;
        } else {
            return Err(Diagnostic::new(
                Code::Lexical,
                format!("illegal character `{c}`"),
                Span::new(i, i + c.len_utf8()),
            ));
        }
        tokens.push(Token {
            kind,
            lexeme: source[start..i].to_string(),
            span: Span::new(start, i),
            line_start,
        });
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        lex(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.lexeme))
            .collect()
    }

    #[test]
    fn close_c() {
        assert_eq!(
            kinds("close c"),
            vec![
                (TokenKind::Keyword, "close".into()),
                (TokenKind::Ident, "c".into())
            ]
        );
    }

    #[test]
    fn choice_type() {
        let toks = kinds("oplus{More: !Int.Stream}");
        let lexemes: Vec<&str> = toks.iter().map(|(_, l)| l.as_str()).collect();
        assert_eq!(
            lexemes,
            ["oplus", "{", "More", ":", "!", "Int", ".", "Stream", "}"]
        );
        assert_eq!(toks[0].0, TokenKind::Keyword);
        assert_eq!(toks[2].0, TokenKind::Label);
    }

    #[test]
    fn box_with_binder() {
        let lexemes: Vec<String> = kinds("box (y. close y)").into_iter().map(|t| t.1).collect();
        assert_eq!(lexemes, ["box", "(", "y", ".", "close", "y", ")"]);
    }

    #[test]
    fn comments_and_linear_arrow() {
        let toks = kinds("Close 1-> Unit -- trailing\n x");
        let lexemes: Vec<&str> = toks.iter().map(|(_, l)| l.as_str()).collect();
        assert_eq!(lexemes, ["Close", "1->", "Unit", "x"]);
    }

    #[test]
    fn line_starts_are_marked() {
        let toks = lex("f : Int\nf = 1\n  + 2").unwrap();
        let starts: Vec<bool> = toks.iter().map(|t| t.line_start).collect();
        assert_eq!(starts, [true, false, false, true, false, false, false, false]);
    }

    #[test]
    fn illegal_character() {
        let err = lex("x $ y").unwrap_err();
        assert_eq!(err.code, Code::Lexical);
        assert_eq!((err.span.start, err.span.end), (2, 3));
    }
}
