//! A brute-force checker for the declarative judgement `Γ ⊢ M : T`.
//!
//! Every multiplicative rule tries the context splits `Γ = Γ1 ∘ Γ2` one by
//! one instead of threading a residual context. It exists to cross-check the
//! algorithmic checker on small terms and is exponential in the number of
//! linear bindings.
//!
//! Splits are pruned by free variables: a linear binding can only be
//! consumed by a subderivation whose term mentions it, since every leaf
//! discards only unrestricted bindings.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::constants::instantiate_annotated;
use crate::context::Context;
use crate::term::{BinOp, CtxValue, Term, TermKind};
use crate::types::{check_type, equal, equal_ctx, unfold_head, well_formed, CtxType, Mult, Name, SessionType, Type};

/// Linear bindings of the context plus binders of the term.
pub const ORACLE_CAP: usize = 12;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{0} linear bindings and binders exceed the oracle cap of {ORACLE_CAP}")]
    Scale(usize),
}

pub fn oracle_size(g: &Context, m: &Term) -> usize {
    g.lin_part().len() + binders(m)
}

/// Is there a derivation of `g ⊢ m : t`?
pub fn declarative_typable(g: &Context, m: &Term, t: &Type) -> Result<bool, OracleError> {
    Ok(declarative_type(g, m)?.is_some_and(|u| equal(&u, t)))
}

/// The conclusion type of a derivation of `g ⊢ m : _`, if one exists.
/// Annotated terms have at most one type up to equality.
pub fn declarative_type(g: &Context, m: &Term) -> Result<Option<Type>, OracleError> {
    let n = oracle_size(g, m);
    if n > ORACLE_CAP {
        return Err(OracleError::Scale(n));
    }
    Ok(derive(g, m))
}

fn binders(m: &Term) -> usize {
    use TermKind::*;
    let ctx = |v: &CtxValue| v.binders.len() + binders(&v.body);
    match &m.kind {
        Var(_, subs) => subs.iter().map(ctx).sum(),
        Const(..) | Unit | Int(_) | Bool(_) => 0,
        Lam(_, _, _, b) => 1 + binders(b),
        App(a, b) | Pair(a, b) | Bin(_, a, b) => binders(a) + binders(b),
        LetPair(_, _, a, b) => 2 + binders(a) + binders(b),
        Let(_, a, b) | LetBox(_, a, b) => 1 + binders(a) + binders(b),
        Boxed(v) => ctx(v),
        Match(s, arms) => binders(s) + arms.iter().map(|a| 1 + binders(&a.body)).sum::<usize>(),
        If(c, a, b) => binders(c) + binders(a) + binders(b),
    }
}

fn fv_ctx(v: &CtxValue) -> BTreeSet<Name> {
    v.free_vars()
}

/// `Γ, x:τ`, where an unrestricted `x` already present is shadowed. A
/// linear one cannot be: it would be discarded.
fn bind(g: &Context, x: &str, t: CtxType) -> Option<Context> {
    let mut g = g.clone();
    if let Some(old) = g.remove(x) {
        if old.is_linear() {
            return None;
        }
    }
    g.insert(x.to_string(), t);
    Some(g)
}

/// Splits of `g` compatible with the free variables of the two sides.
fn splits(g: &Context, left: &BTreeSet<Name>, right: &BTreeSet<Name>) -> Vec<(Context, Context)> {
    let all = g.enumerate_splits().unwrap_or_default();
    all.into_iter()
        .filter(|(l, r)| {
            l.iter().filter(|b| b.ty.is_linear()).all(|b| left.contains(&b.name))
                && r.iter().filter(|b| b.ty.is_linear()).all(|b| right.contains(&b.name))
        })
        .collect()
}

fn two<T>(g: &Context, a: &Term, b: &Term, f: impl Fn(&Context, &Context) -> Option<T>) -> Option<T> {
    let (fa, fb) = (a.free_vars(), b.free_vars());
    splits(g, &fa, &fb).into_iter().find_map(|(l, r)| f(&l, &r))
}

fn base(g: &Context, t: Type) -> Option<Type> {
    g.is_unrestricted().then_some(t)
}

fn derive(g: &Context, m: &Term) -> Option<Type> {
    use TermKind::*;
    match &m.kind {
        Unit => base(g, Type::Unit),
        Int(_) => base(g, Type::Int),
        Bool(_) => base(g, Type::Bool),
        Const(c, Some(t)) => {
            check_type(t).ok()?;
            base(g, instantiate_annotated(c, t).ok()?)
        }
        Const(_, None) => None,
        Var(x, subs) => var(g, x, subs),
        Lam(mult, x, Some(t), body) => {
            check_type(t).ok()?;
            if *mult == Mult::Un && !g.is_unrestricted() {
                return None;
            }
            let inner = bind(g, x, CtxType::plain(t.clone()))?;
            let u = derive(&inner, body)?;
            Some(Type::fun(t.clone(), *mult, u))
        }
        Lam(_, _, None, _) => None,
        App(f, a) => two(g, f, a, |l, r| {
            let Type::Fun(dom, _, cod) = derive(l, f)? else {
                return None;
            };
            let ta = derive(r, a)?;
            equal(&dom, &ta).then_some(*cod)
        }),
        Pair(a, b) => two(g, a, b, |l, r| Some(Type::pair(derive(l, a)?, derive(r, b)?))),
        LetPair(x, y, a, b) => {
            if x == y {
                return None;
            }
            let mut fb = b.free_vars();
            fb.remove(x);
            fb.remove(y);
            let fa = a.free_vars();
            splits(g, &fa, &fb).into_iter().find_map(|(l, r)| {
                let Type::Pair(t1, t2) = derive(&l, a)? else {
                    return None;
                };
                let inner = bind(&r, x, CtxType::plain(*t1))?;
                let inner = bind(&inner, y, CtxType::plain(*t2))?;
                derive(&inner, b)
            })
        }
        Let(x, a, b) => {
            let mut fb = b.free_vars();
            fb.remove(x);
            let fa = a.free_vars();
            splits(g, &fa, &fb).into_iter().find_map(|(l, r)| {
                let t = derive(&l, a)?;
                derive(&bind(&r, x, CtxType::plain(t))?, b)
            })
        }
        Boxed(v) => {
            if !g.is_unrestricted() {
                return None;
            }
            let ty = Type::boxed(ctx_value(g, v, None)?);
            check_type(&ty).ok()?;
            Some(ty)
        }
        LetBox(u, a, b) => {
            let mut fb = b.free_vars();
            fb.remove(u);
            let fa = a.free_vars();
            splits(g, &fa, &fb).into_iter().find_map(|(l, r)| {
                let Type::Boxed(ct) = derive(&l, a)? else {
                    return None;
                };
                derive(&bind(&r, u, *ct)?, b)
            })
        }
        Match(scrut, arms) => {
            let fa = scrut.free_vars();
            let mut fb = BTreeSet::new();
            for arm in arms {
                let mut f = arm.body.free_vars();
                f.remove(&arm.var);
                fb.extend(f);
            }
            splits(g, &fa, &fb).into_iter().find_map(|(l, r)| {
                let s = derive(&l, scrut)?;
                let SessionType::Branch(bs) = unfold_head(s.as_session()?) else {
                    return None;
                };
                let labels: BTreeSet<&String> = arms.iter().map(|a| &a.label).collect();
                if labels.len() != arms.len() || labels != bs.keys().collect() {
                    return None;
                }
                let mut result: Option<Type> = None;
                for arm in arms {
                    let st = Type::Session(bs[&arm.label].clone());
                    let t = derive(&bind(&r, &arm.var, CtxType::plain(st))?, &arm.body)?;
                    match &result {
                        Some(t0) if !equal(t0, &t) => return None,
                        Some(_) => {}
                        None => result = Some(t),
                    }
                }
                result
            })
        }
        If(c, a, b) => {
            let fc = c.free_vars();
            let mut fb = a.free_vars();
            fb.extend(b.free_vars());
            splits(g, &fc, &fb).into_iter().find_map(|(l, r)| {
                if derive(&l, c)? != Type::Bool {
                    return None;
                }
                let ta = derive(&r, a)?;
                let tb = derive(&r, b)?;
                equal(&ta, &tb).then_some(ta)
            })
        }
        Bin(op, a, b) => two(g, a, b, |l, r| {
            let (ta, tb) = (derive(l, a)?, derive(r, b)?);
            match op {
                BinOp::Eq if ta == Type::Bool && tb == Type::Bool => Some(Type::Bool),
                _ if ta == Type::Int && tb == Type::Int => {
                    Some(if op.is_comparison() { Type::Bool } else { Type::Int })
                }
                _ => None,
            }
        }),
    }
}

/// `Γ1 ∘ … ∘ Γk ∘ (Δ0, x:τ) ⊢ x[σ1…σk] : T` with `un Δ0`. An unrestricted
/// `x` is copied into every `Γi`; a linear one sits in the last part only.
fn var(g: &Context, x: &str, subs: &[CtxValue]) -> Option<Type> {
    let tau = g.get(x)?.clone();
    if tau.params.len() != subs.len() {
        return None;
    }
    let mut rest = g.clone();
    if tau.is_linear() {
        rest.remove(x);
    }
    if parts(&rest, subs, &tau.params) {
        Some(tau.body)
    } else {
        None
    }
}

fn parts(g: &Context, subs: &[CtxValue], params: &[CtxType]) -> bool {
    let Some((sigma, more)) = subs.split_first() else {
        return g.is_unrestricted();
    };
    let here = fv_ctx(sigma);
    let later: BTreeSet<Name> = more.iter().flat_map(fv_ctx).collect();
    splits(g, &here, &later).into_iter().any(|(l, r)| {
        ctx_value(&l, sigma, Some(params[0].level)).is_some_and(|ct| equal_ctx(&ct, &params[0])) && parts(&r, more, &params[1..])
    })
}

/// `Γ ⊢ (x̄:τ̄)^n. M : τ̄ ⊢n T`. The body sees the bindings of level at
/// least `n`; the rest must be unrestricted and is discarded. A
/// substitution may leave its level to the expected parameter type.
fn ctx_value(g: &Context, v: &CtxValue, level: Option<usize>) -> Option<CtxType> {
    let n = v.level.or(level)?;
    let mut params = Vec::new();
    for (_, t) in &v.binders {
        let t = t.clone()?;
        if well_formed(&t).ok()? >= n {
            return None;
        }
        params.push(t);
    }
    let low = g.filter(|b| b.ty.level < n);
    if !low.is_unrestricted() {
        return None;
    }
    let mut inner = g.filter(|b| b.ty.level >= n);
    for ((z, _), t) in v.binders.iter().zip(&params) {
        if inner.contains(z) {
            // a binder may shadow an outer variable
            inner = bind(&inner, z, t.clone())?;
        } else {
            inner.insert(z.clone(), t.clone());
        }
    }
    let body = derive(&inner, &v.body)?;
    let ct = CtxType::new(params, n, body);
    well_formed(&ct).ok()?;
    Some(ct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term, parse_type, resolve_type, Aliases};
    use crate::types::SessionType;

    fn ty(src: &str) -> Type {
        resolve_type(&parse_type(src).unwrap(), &Aliases::default()).unwrap()
    }

    fn typable(g: &Context, m: &str, t: &str) -> bool {
        declarative_typable(g, &parse_term(m).unwrap(), &ty(t)).unwrap()
    }

    #[test]
    fn linear_identity_on_close() {
        let g = Context::new();
        assert!(typable(&g, "lambda1 (x:Close). close @(Close -> Unit) x", "Close 1-> Unit"));
    }

    #[test]
    fn unrestricted_lambda_cannot_discard() {
        assert!(!typable(&Context::new(), "lambda (c:Close). unit", "Close -> Unit"));
    }

    #[test]
    fn box_over_code_variable() {
        let stream = SessionType::out(Type::Int, SessionType::Close);
        let u = CtxType::new(vec![CtxType::plain(Type::Session(stream))], 1, Type::Unit);
        let g = Context::from_bindings([("u".to_string(), u)]);
        assert!(typable(&g, "box ((x:!Int.Close)^1. u[x])", "[!Int.Close |-1 Unit]"));
    }

    #[test]
    fn linear_variable_used_twice_or_never() {
        let g = Context::from_bindings([("c".to_string(), CtxType::plain(ty("Close")))]);
        assert!(typable(&g, "close @(Close -> Unit) c", "Unit"));
        assert!(!typable(&g, "unit", "Unit"));
        assert!(!typable(&g, "(close @(Close -> Unit) c, close @(Close -> Unit) c)", "Unit * Unit"));
    }

    #[test]
    fn low_level_linear_invisible_in_code() {
        let g = Context::from_bindings([("c".to_string(), CtxType::plain(ty("Close")))]);
        assert!(!typable(&g, "(box (()^1. close @(Close -> Unit) c), unit)", "[|-1 Unit] * Unit"));
    }

    #[test]
    fn scale_cap() {
        let g = Context::from_bindings((0..13).map(|i| (format!("c{i}"), CtxType::plain(ty("Close")))));
        assert!(matches!(
            declarative_type(&g, &parse_term("unit").unwrap()),
            Err(OracleError::Scale(13))
        ));
    }
}
