//! Diagnostics: a stable code, a message and a source span.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::span::{LineIndex, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Code {
    Lexical,
    Syntax,
    UnknownType,
    UnknownVariable,
    LevelViolation,
    LinearEscapes,
    LinearUnused,
    IllFormedType,
    DualityMismatch,
    TypeMismatch,
    UnresolvedScheme,
    NoMain,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::Lexical => "lexical-error",
            Code::Syntax => "syntax-error",
            Code::UnknownType => "unknown-type",
            Code::UnknownVariable => "unknown-variable",
            Code::LevelViolation => "level-violation",
            Code::LinearEscapes => "linear-escapes",
            Code::LinearUnused => "linear-unused",
            Code::IllFormedType => "ill-formed-type",
            Code::DualityMismatch => "duality-mismatch",
            Code::TypeMismatch => "type-mismatch",
            Code::UnresolvedScheme => "unresolved-scheme",
            Code::NoMain => "no-main",
        }
    }

    pub fn parse(s: &str) -> Option<Code> {
        ALL_CODES.iter().copied().find(|c| c.as_str() == s)
    }
}

pub const ALL_CODES: &[Code] = &[
    Code::Lexical,
    Code::Syntax,
    Code::UnknownType,
    Code::UnknownVariable,
    Code::LevelViolation,
    Code::LinearEscapes,
    Code::LinearUnused,
    Code::IllFormedType,
    Code::DualityMismatch,
    Code::TypeMismatch,
    Code::UnresolvedScheme,
    Code::NoMain,
];

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{code}: {message}")]
pub struct Diagnostic {
    pub code: Code,
    pub message: String,
    pub span: Span,
}

#[derive(Serialize)]
struct JsonDiagnostic<'a> {
    file: &'a str,
    line: usize,
    col: usize,
    code: &'a str,
    message: &'a str,
}

impl Diagnostic {
    pub fn new(code: Code, message: impl Into<String>, span: Span) -> Self {
        Diagnostic {
            code,
            message: message.into(),
            span,
        }
    }

    /// `file:line:col: code: message`
    pub fn render(&self, file: &str, index: &LineIndex, color: bool) -> String {
        let (line, col) = index.line_col(self.span.start);
        if color {
            format!(
                "{file}:{line}:{col}: \x1b[1;31m{}\x1b[0m: {}",
                self.code, self.message
            )
        } else {
            format!("{file}:{line}:{col}: {}: {}", self.code, self.message)
        }
    }

    pub fn to_json(&self, file: &str, index: &LineIndex) -> String {
        let (line, col) = index.line_col(self.span.start);
        serde_json::to_string(&JsonDiagnostic {
            file,
            line,
            col,
            code: self.code.as_str(),
            message: &self.message,
        })
        .expect("diagnostics serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_with_position() {
        let src = "a\nbb cc";
        let d = Diagnostic::new(Code::LinearUnused, "`c` is never used", Span::new(5, 7));
        assert_eq!(
            d.render("f.semp", &LineIndex::new(src), false),
            "f.semp:2:4: linear-unused: `c` is never used"
        );
        let json: serde_json::Value =
            serde_json::from_str(&d.to_json("f.semp", &LineIndex::new(src))).unwrap();
        assert_eq!(json["code"], "linear-unused");
        assert_eq!(json["line"], 2);
    }

    #[test]
    fn codes_round_trip() {
        for c in ALL_CODES {
            assert_eq!(Code::parse(c.as_str()), Some(*c));
        }
    }
}
