//! Whole programs: desugaring declarations and checking them in order.
//!
//! Declarations behave like a chain of `let`s: each one is checked in the
//! context left over by the previous ones, and a linear declaration must be
//! consumed by a later one.

use std::collections::BTreeSet;

use super::synth::Checker;
use crate::context::Context;
use crate::diag::{Code, Diagnostic};
use crate::span::Span;
use crate::syntax::resolve::type_error_code;
use crate::syntax::{parse_program, resolve_program, Aliases, Decl, Printer, Program};
use crate::term::{Const, Term, TermKind};
use crate::types::{check_type, equal, CtxType, Mult, Name, Type};

#[derive(Clone, Debug)]
pub struct CheckedDecl {
    pub name: Name,
    pub ty: Type,
    /// Desugared and elaborated definition.
    pub term: Term,
    pub span: Span,
}

#[derive(Clone, Debug, Default)]
pub struct CheckedProgram {
    pub aliases: Aliases,
    pub decls: Vec<CheckedDecl>,
}

impl CheckedProgram {
    pub fn printer(&self) -> Printer {
        Printer::with_dual_aliases(&self.aliases)
    }

    pub fn decl(&self, name: &str) -> Option<&CheckedDecl> {
        self.decls.iter().find(|d| d.name == name)
    }

    /// `name : T` for every declaration.
    pub fn signatures(&self) -> Vec<String> {
        let p = self.printer();
        self.decls
            .iter()
            .map(|d| format!("{} : {}", d.name, p.ty(&d.ty)))
            .collect()
    }

    /// A closed term running `name`: the declarations it depends on bound
    /// by a chain of `let`s, in declaration order.
    pub fn entry_term(&self, name: &str) -> Result<Term, Diagnostic> {
        let Some(i) = self.decls.iter().position(|d| d.name == name) else {
            return Err(Diagnostic::new(
                Code::NoMain,
                format!("no declaration named `{name}`"),
                Span::default(),
            ));
        };
        Ok(self.close_over(Term::var(name), i + 1))
    }

    /// Binds the free declaration names of `m` among the first `upto`
    /// declarations.
    pub fn close_over(&self, m: Term, upto: usize) -> Term {
        let decls = &self.decls[..upto.min(self.decls.len())];
        let mut needed: BTreeSet<Name> = m.free_vars();
        for d in decls.iter().rev() {
            if needed.contains(&d.name) {
                needed.extend(d.term.free_vars());
            }
        }
        decls.iter().rev().filter(|d| needed.contains(&d.name)).fold(m, |body, d| {
            Term::new(
                TermKind::Let(d.name.clone(), Box::new(d.term.clone()), Box::new(body)),
                d.span,
            )
        })
    }

    /// The unrestricted declarations, as a context for further terms.
    pub fn context(&self) -> Context {
        Context::from_bindings(
            self.decls
                .iter()
                .filter(|d| d.ty.is_unrestricted())
                .map(|d| (d.name.clone(), CtxType::plain(d.ty.clone()))),
        )
    }
}

/// Turns `f x y = M` with signature `A -> B -> C` into annotated lambdas,
/// wrapped in `fix` when `f` refers to itself.
pub fn desugar_decl(d: &Decl) -> Result<Term, Diagnostic> {
    let mut lambdas = Vec::new();
    let mut cur = d.sig.as_ref();
    for p in &d.params {
        match cur {
            Some(Type::Fun(a, m, r)) => {
                lambdas.push((*m, p.clone(), Some((**a).clone())));
                cur = Some(r);
            }
            Some(other) => {
                return Err(Diagnostic::new(
                    Code::TypeMismatch,
                    format!(
                        "`{}` has parameter `{p}` but its signature `{other}` is not a function type",
                        d.name
                    ),
                    d.span,
                ))
            }
            None => lambdas.push((Mult::Un, p.clone(), None)),
        }
    }
    let mut term = d.body.clone();
    for (m, x, t) in lambdas.into_iter().rev() {
        let span = term.span;
        term = Term::new(TermKind::Lam(m, x, t, Box::new(term)), span);
    }
    let recursive = d.body.free_vars().contains(&d.name) && !d.params.contains(&d.name);
    if recursive {
        let Some(sig) = &d.sig else {
            return Err(Diagnostic::new(
                Code::UnresolvedScheme,
                format!("recursive definition `{}` needs a type signature", d.name),
                d.span,
            ));
        };
        let span = term.span;
        let functional = Term::new(
            TermKind::Lam(Mult::Un, d.name.clone(), Some(sig.clone()), Box::new(term)),
            span,
        );
        term = Term::app(Term::new(TermKind::Const(Const::Fix, None), d.span), functional);
    }
    Ok(term)
}

/// Checks the declarations of a resolved program in order.
pub fn check_program(p: &Program, aliases: &Aliases) -> Result<CheckedProgram, Vec<Diagnostic>> {
    let printer = Printer::with_dual_aliases(aliases);
    let mut ctx = Context::new();
    let mut diags = Vec::new();
    let mut decls = Vec::new();
    let mut declared_at: Vec<(Name, Span)> = Vec::new();
    for d in &p.decls {
        let r = check_decl(&ctx, d, &printer);
        let ty = match r {
            Ok((ty, term, residual)) => {
                ctx = residual;
                decls.push(CheckedDecl {
                    name: d.name.clone(),
                    ty: ty.clone(),
                    term,
                    span: d.span,
                });
                Some(ty)
            }
            Err(e) => {
                diags.push(e);
                d.sig.clone()
            }
        };
        if let Some(ty) = ty {
            ctx.insert(d.name.clone(), CtxType::plain(ty));
            declared_at.push((d.name.clone(), d.span));
        }
    }
    for b in ctx.iter().filter(|b| b.ty.is_linear()) {
        let span = declared_at
            .iter()
            .find(|(n, _)| *n == b.name)
            .map(|(_, s)| *s)
            .unwrap_or_default();
        diags.push(Diagnostic::new(
            Code::LinearUnused,
            format!("linear declaration `{}` is never used", b.name),
            span,
        ));
    }
    if diags.is_empty() {
        Ok(CheckedProgram {
            aliases: aliases.clone(),
            decls,
        })
    } else {
        diags.sort_by_key(|d| d.span.start);
        Err(diags)
    }
}

fn check_decl(ctx: &Context, d: &Decl, printer: &Printer) -> Result<(Type, Term, Context), Diagnostic> {
    if let Some(sig) = &d.sig {
        check_type(sig).map_err(|e| Diagnostic::new(type_error_code(&e), e.to_string(), d.span))?;
    }
    let term = desugar_decl(d)?;
    let mut ctx = ctx.clone();
    if ctx.remove(&d.name).is_some_and(|t| t.is_linear()) {
        return Err(Diagnostic::new(
            Code::LinearUnused,
            format!("linear declaration `{}` is redefined before it is used", d.name),
            d.span,
        ));
    }
    let s = Checker::with_printer(printer.clone()).synth_top(ctx, &term)?;
    if let Some(sig) = &d.sig {
        if !equal(sig, &s.ty) {
            return Err(Diagnostic::new(
                Code::TypeMismatch,
                format!(
                    "`{}` is declared as `{}` but has type `{}`",
                    d.name,
                    printer.ty(sig),
                    printer.ty(&s.ty)
                ),
                d.span,
            ));
        }
    }
    let ty = d.sig.clone().unwrap_or(s.ty);
    Ok((ty, s.term, s.residual))
}

/// Parse, resolve and check a source file.
pub fn check_source(source: &str) -> Result<CheckedProgram, Vec<Diagnostic>> {
    let parsed = parse_program(source).map_err(|d| vec![d])?;
    let (resolved, aliases) = resolve_program(&parsed).map_err(|d| vec![d])?;
    check_program(&resolved, &aliases)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SEND_FIVES: &str = "\
type Stream = oplus{More: !Int.Stream, Done: Close}
sendFives : Int -> [Stream |-1 Unit]
sendFives n =
  if n == 0 then box((y:Stream)^1. close (select Done y))
  else let box u = sendFives (n - 1) in box((x:Stream)^1. u[send 5 (select More x)])
";

    #[test]
    fn recursive_declaration_checks_against_signature() {
        let p = check_source(SEND_FIVES).unwrap();
        assert_eq!(p.signatures(), ["sendFives : Int -> [Stream |-1 Unit]"]);
        assert!(matches!(p.decls[0].term.kind, TermKind::App(..)));
    }

    #[test]
    fn entry_term_chains_dependencies() {
        let src = format!("{SEND_FIVES}unused : Int\nunused = 3\nmain : [Stream |-1 Unit]\nmain = sendFives 2\n");
        let p = check_source(&src).unwrap();
        let t = p.entry_term("main").unwrap();
        let TermKind::Let(x, _, body) = &t.kind else { panic!() };
        assert_eq!(x, "sendFives");
        assert!(matches!(&body.kind, TermKind::Let(y, _, _) if y == "main"));
        assert_eq!(p.decl("unused").map(|d| d.ty.clone()), Some(Type::Int));
        assert!(!t.free_vars().contains("unused"));
        assert!(t.free_vars().is_empty());
    }

    #[test]
    fn signature_mismatch() {
        let e = check_source("f : Int\nf = true").unwrap_err();
        assert_eq!(e[0].code, Code::TypeMismatch);
    }

    #[test]
    fn unused_linear_declaration() {
        let src = "c : !Int.Close * ?Int.Wait\nc = new @(!Int.Close) unit";
        let e = check_source(src).unwrap_err();
        assert_eq!(e[0].code, Code::LinearUnused);
    }
}
