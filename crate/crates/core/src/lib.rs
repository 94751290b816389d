//! A type checker and interpreter for a functional language with binary
//! session types and multi-level contextual modal types: code fragments
//! with free variables are first-class values that can be spliced,
//! specialised and sent over channels.

pub mod constants;
pub mod context;
pub mod diag;
pub mod driver;
pub mod span;
pub mod syntax;
pub mod term;
pub mod types;
pub mod check;
pub mod eval;
pub mod runtime;
