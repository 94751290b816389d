//! Alias and `Dual` resolution.
//!
//! A self-referential alias `type Stream = oplus{More: !Int.Stream, ...}`
//! becomes `rec stream. oplus{More: !Int.stream, ...}`; mutually recursive
//! aliases nest their binders. `Dual S` is replaced by the dual of `S`.

use std::collections::HashMap;

use super::{Decl, Program, TypeDecl};
use crate::diag::{Code, Diagnostic};
use crate::span::Span;
use crate::term::{Arm, CtxValue, Term, TermKind};
use crate::types::{
    check_type_contractive, dualize, free_type_vars, CtxType, Name, SessionType, Type, TypeError,
};

/// Resolved type aliases, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Aliases {
    pub entries: Vec<(Name, Type)>,
}

impl Aliases {
    pub fn get(&self, name: &str) -> Option<&Type> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

fn is_alias_name(name: &str) -> bool {
    name.starts_with(|c: char| c.is_ascii_uppercase())
}

fn rec_var(name: &str) -> Name {
    name.to_lowercase()
}

pub fn type_error_code(e: &TypeError) -> Code {
    match e {
        TypeError::UnknownType(_) => Code::UnknownType,
        TypeError::UnsupportedDuality(_) => Code::DualityMismatch,
        _ => Code::IllFormedType,
    }
}

fn diag(e: TypeError, span: Span) -> Diagnostic {
    Diagnostic::new(type_error_code(&e), e.to_string(), span)
}

struct Resolver<'a> {
    raw: HashMap<&'a str, &'a Type>,
    done: HashMap<Name, Type>,
    stack: Vec<Name>,
}

impl<'a> Resolver<'a> {
    fn alias(&mut self, name: &str) -> Result<Type, TypeError> {
        if let Some(t) = self.done.get(name) {
            return Ok(t.clone());
        }
        if self.stack.iter().any(|n| n == name) {
            return Ok(SessionType::Var(rec_var(name)).into());
        }
        let raw = *self
            .raw
            .get(name)
            .ok_or_else(|| TypeError::UnknownType(name.to_string()))?;
        self.stack.push(name.to_string());
        let body = self.ty(raw);
        self.stack.pop();
        let body = body?;
        let v = rec_var(name);
        let result = if free_type_vars(&body).contains(&v) {
            match body {
                Type::Session(s) => SessionType::rec(v, s).into(),
                _ => {
                    return Err(TypeError::IllFormed(format!(
                        "recursive type `{name}` must be a session type"
                    )))
                }
            }
        } else {
            body
        };
        check_type_contractive(&result)?;
        if free_type_vars(&result).is_empty() {
            self.done.insert(name.to_string(), result.clone());
        }
        Ok(result)
    }

    fn ty(&mut self, t: &Type) -> Result<Type, TypeError> {
        Ok(match t {
            Type::Unit | Type::Int | Type::Bool => t.clone(),
            Type::Fun(a, m, r) => Type::fun(self.ty(a)?, *m, self.ty(r)?),
            Type::Pair(a, b) => Type::pair(self.ty(a)?, self.ty(b)?),
            Type::Boxed(c) => Type::boxed(self.ctx(c)?),
            Type::Session(SessionType::Var(n)) if is_alias_name(n) => self.alias(n)?,
            Type::Session(s) => Type::Session(self.session(s)?),
        })
    }

    fn ctx(&mut self, c: &CtxType) -> Result<CtxType, TypeError> {
        Ok(CtxType {
            params: c.params.iter().map(|p| self.ctx(p)).collect::<Result<_, _>>()?,
            level: c.level,
            body: self.ty(&c.body)?,
        })
    }

    fn session(&mut self, s: &SessionType) -> Result<SessionType, TypeError> {
        use SessionType::*;
        Ok(match s {
            Close | Wait => s.clone(),
            Out(t, k) => SessionType::out(self.ty(t)?, self.session(k)?),
            In(t, k) => SessionType::inp(self.ty(t)?, self.session(k)?),
            Select(bs) => Select(
                bs.iter()
                    .map(|(l, b)| Ok((l.clone(), self.session(b)?)))
                    .collect::<Result<_, TypeError>>()?,
            ),
            Branch(bs) => Branch(
                bs.iter()
                    .map(|(l, b)| Ok((l.clone(), self.session(b)?)))
                    .collect::<Result<_, TypeError>>()?,
            ),
            Var(n) if is_alias_name(n) => match self.alias(n)? {
                Type::Session(s) => s,
                _ => return Err(TypeError::NotSession(n.clone())),
            },
            Var(_) => s.clone(),
            Rec(a, body) => Rec(a.clone(), Box::new(self.session(body)?)),
            Dual(t) => {
                let inner = self.ty(t)?;
                let Type::Session(inner) = inner else {
                    return Err(TypeError::NotSession(super::Printer::plain().ty(&inner)));
                };
                if !free_type_vars(&Type::Session(inner.clone())).is_empty() {
                    return Err(TypeError::IllFormed(
                        "Dual of a type that refers to an enclosing recursive type".into(),
                    ));
                }
                dualize(&inner)?
            }
        })
    }
}

/// Resolves a type against already-resolved aliases.
pub fn resolve_type(t: &Type, aliases: &Aliases) -> Result<Type, TypeError> {
    let mut r = Resolver {
        raw: HashMap::new(),
        done: aliases.entries.iter().cloned().collect(),
        stack: Vec::new(),
    };
    let out = r.ty(t)?;
    check_type_contractive(&out)?;
    Ok(out)
}

/// Resolves every alias declaration and every type occurring in signatures
/// and term annotations. The result contains no alias names or `Dual`.
pub fn resolve_program(p: &Program) -> Result<(Program, Aliases), Diagnostic> {
    let mut r = Resolver {
        raw: p.types.iter().map(|d| (d.name.as_str(), &d.ty)).collect(),
        done: HashMap::new(),
        stack: Vec::new(),
    };
    let mut aliases = Aliases::default();
    let mut types = Vec::new();
    for d in &p.types {
        let t = r.alias(&d.name).map_err(|e| diag(e, d.span))?;
        aliases.entries.push((d.name.clone(), t.clone()));
        types.push(TypeDecl {
            name: d.name.clone(),
            ty: t,
            span: d.span,
        });
    }
    let mut decls = Vec::new();
    for d in &p.decls {
        let sig = match &d.sig {
            Some(t) => Some(resolve_type(t, &aliases).map_err(|e| diag(e, d.span))?),
            None => None,
        };
        let body = resolve_term(&d.body, &aliases)?;
        decls.push(Decl {
            name: d.name.clone(),
            sig,
            params: d.params.clone(),
            body,
            span: d.span,
        });
    }
    Ok((Program { types, decls }, aliases))
}

/// Resolves the types in a term's annotations.
pub fn resolve_term(t: &Term, aliases: &Aliases) -> Result<Term, Diagnostic> {
    map_types(t, &mut |ty, span| resolve_type(ty, aliases).map_err(|e| diag(e, span)))
}

fn resolve_ctx_type(
    c: &CtxType,
    span: Span,
    f: &mut impl FnMut(&Type, Span) -> Result<Type, Diagnostic>,
) -> Result<CtxType, Diagnostic> {
    // Resolving the whole contextual type at once keeps parameters and body
    // in one pass; a box wrapper is the cheapest way to reuse `f`.
    match f(&Type::boxed(c.clone()), span)? {
        Type::Boxed(c) => Ok(*c),
        _ => unreachable!("resolution preserves the box constructor"),
    }
}

/// Applies `f` to every type annotation in a term.
pub fn map_types(
    t: &Term,
    f: &mut impl FnMut(&Type, Span) -> Result<Type, Diagnostic>,
) -> Result<Term, Diagnostic> {
    use TermKind::*;
    let kind = match &t.kind {
        Var(x, subs) => Var(
            x.clone(),
            subs.iter()
                .map(|s| map_ctx_value(s, t.span, f))
                .collect::<Result<_, _>>()?,
        ),
        Const(c, a) => Const(
            c.clone(),
            match a {
                Some(a) => Some(f(a, t.span)?),
                None => None,
            },
        ),
        Unit | Int(_) | Bool(_) => t.kind.clone(),
        Lam(m, x, a, b) => Lam(
            *m,
            x.clone(),
            match a {
                Some(a) => Some(f(a, t.span)?),
                None => None,
            },
            Box::new(map_types(b, f)?),
        ),
        App(a, b) => App(Box::new(map_types(a, f)?), Box::new(map_types(b, f)?)),
        Pair(a, b) => Pair(Box::new(map_types(a, f)?), Box::new(map_types(b, f)?)),
        LetPair(x, y, a, b) => LetPair(
            x.clone(),
            y.clone(),
            Box::new(map_types(a, f)?),
            Box::new(map_types(b, f)?),
        ),
        Let(x, a, b) => Let(x.clone(), Box::new(map_types(a, f)?), Box::new(map_types(b, f)?)),
        Boxed(s) => Boxed(Box::new(map_ctx_value(s, t.span, f)?)),
        LetBox(u, a, b) => {
            LetBox(u.clone(), Box::new(map_types(a, f)?), Box::new(map_types(b, f)?))
        }
        Match(s, arms) => Match(
            Box::new(map_types(s, f)?),
            arms.iter()
                .map(|a| {
                    Ok(Arm {
                        label: a.label.clone(),
                        var: a.var.clone(),
                        body: map_types(&a.body, f)?,
                    })
                })
                .collect::<Result<_, Diagnostic>>()?,
        ),
        If(c, a, b) => If(
            Box::new(map_types(c, f)?),
            Box::new(map_types(a, f)?),
            Box::new(map_types(b, f)?),
        ),
        Bin(op, a, b) => Bin(*op, Box::new(map_types(a, f)?), Box::new(map_types(b, f)?)),
    };
    Ok(Term::new(kind, t.span))
}

fn map_ctx_value(
    s: &CtxValue,
    span: Span,
    f: &mut impl FnMut(&Type, Span) -> Result<Type, Diagnostic>,
) -> Result<CtxValue, Diagnostic> {
    Ok(CtxValue {
        binders: s
            .binders
            .iter()
            .map(|(x, c)| {
                let c = match c {
                    Some(c) => Some(resolve_ctx_type(c, span, f)?),
                    None => None,
                };
                Ok((x.clone(), c))
            })
            .collect::<Result<_, Diagnostic>>()?,
        level: s.level,
        body: map_types(&s.body, f)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, parse_type};
    use std::collections::BTreeMap;

    const STREAM: &str = "type Stream = oplus{More: !Int.Stream, Done: Close}\n\
                          type Builder = ?Int.![Stream |-1 Unit].Wait\n";

    fn aliases() -> Aliases {
        resolve_program(&parse_program(STREAM).unwrap()).unwrap().1
    }

    fn stream() -> SessionType {
        let mut bs = BTreeMap::new();
        bs.insert("More".to_string(), SessionType::out(Type::Int, SessionType::var("stream")));
        bs.insert("Done".to_string(), SessionType::Close);
        SessionType::rec("stream", SessionType::Select(bs))
    }

    #[test]
    fn stream_becomes_rec() {
        assert_eq!(aliases().get("Stream"), Some(&stream().into()));
    }

    #[test]
    fn dual_builder() {
        let t = resolve_type(&parse_type("Dual Builder").unwrap(), &aliases()).unwrap();
        let code = Type::boxed(CtxType::new(vec![CtxType::plain(stream().into())], 1, Type::Unit));
        assert_eq!(
            t,
            SessionType::out(Type::Int, SessionType::inp(code, SessionType::Close)).into()
        );
    }

    #[test]
    fn dual_unit_is_rejected() {
        let e = resolve_type(&parse_type("Dual Unit").unwrap(), &aliases()).unwrap_err();
        assert!(matches!(e, TypeError::NotSession(_)));
    }

    #[test]
    fn unknown_and_non_contractive() {
        let e = resolve_type(&parse_type("!Int.Nope").unwrap(), &aliases()).unwrap_err();
        assert_eq!(e, TypeError::UnknownType("Nope".into()));
        let p = parse_program("type Loop = Loop").unwrap();
        let d = resolve_program(&p).unwrap_err();
        assert_eq!(d.code, Code::IllFormedType);
    }

    #[test]
    fn mutual_recursion() {
        let p = parse_program("type A = !Int.B\ntype B = ?Int.A").unwrap();
        let (_, al) = resolve_program(&p).unwrap();
        let a = al.get("A").unwrap().as_session().unwrap().clone();
        assert!(crate::types::is_dual(
            &a,
            al.get("B").unwrap().as_session().unwrap()
        ));
        assert!(crate::types::equal_session(
            &a,
            &SessionType::rec("x", SessionType::out(Type::Int, SessionType::inp(Type::Int, SessionType::var("x"))))
        ));
    }

    #[test]
    fn resolution_is_idempotent() {
        let (p, al) = resolve_program(&parse_program(STREAM).unwrap()).unwrap();
        for d in &p.types {
            assert_eq!(resolve_type(&d.ty, &al).unwrap(), d.ty);
        }
    }
}
