//! Capture-avoiding contextual substitution.
//!
//! `[σ/x]M` replaces `x` by the contextual value `σ = (z̄)^n. N`. Occurrences
//! of `x` carry their own explicit substitution `x[ρ̄]`; those are rewritten
//! first and then plugged into `N` for `z̄` simultaneously.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::term::{Arm, CtxValue, Term, TermKind};
use crate::types::Name;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SubstError {
    #[error("`{var}` takes {expected} substitution(s) but is applied to {found}")]
    Arity {
        var: Name,
        expected: usize,
        found: usize,
    },
}

/// Source of fresh names `base#k`, shared by everything that renames
/// binders or allocates endpoints during one execution.
#[derive(Clone, Debug, Default)]
pub struct Fresh {
    next: usize,
}

impl Fresh {
    pub fn new() -> Fresh {
        Fresh::default()
    }

    pub fn name(&mut self, base: &str) -> Name {
        let base = base.split('#').next().unwrap_or(base);
        let k = self.next;
        self.next += 1;
        format!("{base}#{k}")
    }
}

/// Lifts a value to a contextual value with no binders, at level 0.
pub fn lift(v: Term) -> CtxValue {
    CtxValue {
        binders: Vec::new(),
        level: Some(0),
        body: v,
    }
}

pub fn substitute(s: &CtxValue, x: &str, m: &Term, fresh: &mut Fresh) -> Result<Term, SubstError> {
    let mut sub = Subst {
        s: With::Value(s),
        x,
        fv: s.free_vars(),
        fresh,
    };
    sub.term(m)
}

/// `[ρ̄/z̄]N`, simultaneous.
pub fn substitute_many(
    rho: &[CtxValue],
    zs: &[Name],
    n: &Term,
    fresh: &mut Fresh,
) -> Result<Term, SubstError> {
    // rename the z̄ apart first so that sequential substitution cannot
    // capture a z_j occurring free in some ρ_i
    let mut body = n.clone();
    let mut names = Vec::with_capacity(zs.len());
    for z in zs {
        let z2 = fresh.name(z);
        body = rename(&body, z, &z2, fresh)?;
        names.push(z2);
    }
    for (r, z) in rho.iter().zip(&names) {
        body = substitute(r, z, &body, fresh)?;
    }
    Ok(body)
}

/// `[y/x]M`: renames free occurrences of `x`, applied or not.
pub fn rename(m: &Term, x: &str, y: &str, fresh: &mut Fresh) -> Result<Term, SubstError> {
    let mut sub = Subst {
        s: With::Name(y),
        x,
        fv: [y.to_string()].into(),
        fresh,
    };
    sub.term(m)
}

#[derive(Clone, Copy)]
enum With<'a> {
    Value(&'a CtxValue),
    Name(&'a str),
}

struct Subst<'a> {
    s: With<'a>,
    x: &'a str,
    fv: BTreeSet<Name>,
    fresh: &'a mut Fresh,
}

impl Subst<'_> {
    fn term(&mut self, m: &Term) -> Result<Term, SubstError> {
        use TermKind::*;
        let kind = match &m.kind {
            Var(y, rho) => {
                let rho = rho
                    .iter()
                    .map(|r| self.ctx(r))
                    .collect::<Result<Vec<_>, _>>()?;
                match self.s {
                    _ if y != self.x => Var(y.clone(), rho),
                    With::Name(z) => Var(z.to_string(), rho),
                    With::Value(s) => return self.apply(s, rho),
                }
            }
            Const(..) | Unit | Int(_) | Bool(_) => return Ok(m.clone()),
            Lam(mult, y, t, b) => {
                let (y, b) = self.binder(y, b)?;
                Lam(*mult, y, t.clone(), Box::new(b))
            }
            App(a, b) => App(Box::new(self.term(a)?), Box::new(self.term(b)?)),
            Pair(a, b) => Pair(Box::new(self.term(a)?), Box::new(self.term(b)?)),
            Bin(op, a, b) => Bin(*op, Box::new(self.term(a)?), Box::new(self.term(b)?)),
            If(c, a, b) => If(
                Box::new(self.term(c)?),
                Box::new(self.term(a)?),
                Box::new(self.term(b)?),
            ),
            LetPair(y, z, a, b) => {
                let a = self.term(a)?;
                if y == self.x || z == self.x {
                    LetPair(y.clone(), z.clone(), Box::new(a), b.clone())
                } else {
                    let (y, b) = self.freshen(y, b)?;
                    let (z, b) = self.freshen(z, &b)?;
                    LetPair(y, z, Box::new(a), Box::new(self.term(&b)?))
                }
            }
            Let(y, a, b) => {
                let a = self.term(a)?;
                let (y, b) = self.binder(y, b)?;
                Let(y, Box::new(a), Box::new(b))
            }
            LetBox(u, a, b) => {
                let a = self.term(a)?;
                let (u, b) = self.binder(u, b)?;
                LetBox(u, Box::new(a), Box::new(b))
            }
            Boxed(v) => Boxed(Box::new(self.ctx(v)?)),
            Match(scrut, arms) => {
                let scrut = self.term(scrut)?;
                let arms = arms
                    .iter()
                    .map(|a| {
                        let (var, body) = self.binder(&a.var, &a.body)?;
                        Ok(Arm {
                            label: a.label.clone(),
                            var,
                            body,
                        })
                    })
                    .collect::<Result<Vec<_>, SubstError>>()?;
                Match(Box::new(scrut), arms)
            }
        };
        Ok(Term::new(kind, m.span))
    }

    /// The applied-variable case: `[σ/x](x[ρ̄])` with `ρ̄` already rewritten.
    fn apply(&mut self, s: &CtxValue, rho: Vec<CtxValue>) -> Result<Term, SubstError> {
        let zs: Vec<Name> = s.binders.iter().map(|(z, _)| z.clone()).collect();
        if zs.len() != rho.len() {
            return Err(SubstError::Arity {
                var: self.x.to_string(),
                expected: zs.len(),
                found: rho.len(),
            });
        }
        if zs.is_empty() {
            return Ok(s.body.clone());
        }
        substitute_many(&rho, &zs, &s.body, self.fresh)
    }

    /// Substitution under a single binder `y` scoping over `b`.
    fn binder(&mut self, y: &Name, b: &Term) -> Result<(Name, Term), SubstError> {
        if y == self.x {
            return Ok((y.clone(), b.clone()));
        }
        let (y, b) = self.freshen(y, b)?;
        let b = self.term(&b)?;
        Ok((y, b))
    }

    /// Renames `y` in `b` when it would capture a free variable of σ.
    fn freshen(&mut self, y: &Name, b: &Term) -> Result<(Name, Term), SubstError> {
        if !self.fv.contains(y) {
            return Ok((y.clone(), b.clone()));
        }
        let y2 = self.fresh.name(y);
        let b = rename(b, y, &y2, self.fresh)?;
        Ok((y2, b))
    }

    fn ctx(&mut self, v: &CtxValue) -> Result<CtxValue, SubstError> {
        if v.binders.iter().any(|(z, _)| z == self.x) {
            return Ok(v.clone());
        }
        let mut binders = v.binders.clone();
        let mut body = v.body.clone();
        for (z, _) in binders.iter_mut() {
            if self.fv.contains(z) {
                let z2 = self.fresh.name(z);
                body = rename(&body, z, &z2, self.fresh)?;
                *z = z2;
            }
        }
        Ok(CtxValue {
            binders,
            level: v.level,
            body: self.term(&body)?,
        })
    }
}
