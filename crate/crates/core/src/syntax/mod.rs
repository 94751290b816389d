//! Concrete syntax: lexing, parsing, alias resolution and pretty printing.

pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod resolve;

use crate::span::Span;
use crate::term::Term;
use crate::types::{Name, Type};

pub use lexer::{lex, Token, TokenKind};
pub use parser::{parse_program, parse_term, parse_type};
pub use pretty::Printer;
pub use resolve::{resolve_program, resolve_type, Aliases};

/// `type Name = T`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: Name,
    pub ty: Type,
    pub span: Span,
}

/// `name : T` followed by `name x y = M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub name: Name,
    pub sig: Option<Type>,
    pub params: Vec<Name>,
    pub body: Term,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub types: Vec<TypeDecl>,
    pub decls: Vec<Decl>,
}

impl Program {
    pub fn decl(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().find(|d| d.name == name)
    }
}
