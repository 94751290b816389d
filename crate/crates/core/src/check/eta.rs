//! Eta-expansion of variables at contextual types.
//!
//! `η(u : ρ̄ ⊢ⁿ T) = (z̄:ρ̄)ⁿ. u[η(z₁:ρ₁), ..., η(zₖ:ρₖ)]`: a variable of
//! contextual type can always be turned into a contextual value of the same
//! type. This lets a bare code variable stand where a substitution is
//! expected.

use std::cell::Cell;

use crate::term::{CtxValue, Term, TermKind};
use crate::types::CtxType;

pub fn eta_expand(u: &str, ty: &CtxType) -> CtxValue {
    let counter = Cell::new(0);
    expand(u, ty, &counter)
}

fn expand(u: &str, ty: &CtxType, counter: &Cell<usize>) -> CtxValue {
    let binders: Vec<(String, CtxType)> = ty
        .params
        .iter()
        .map(|p| {
            let k = counter.get();
            counter.set(k + 1);
            (format!("eta#{k}"), p.clone())
        })
        .collect();
    let subs = binders.iter().map(|(z, p)| expand(z, p, counter)).collect();
    CtxValue {
        binders: binders.into_iter().map(|(z, p)| (z, Some(p))).collect(),
        level: Some(ty.level),
        body: Term::synth(TermKind::Var(u.to_string(), subs)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::Checker;
    use crate::context::Context;
    use crate::types::{equal_ctx, SessionType, Type};

    #[test]
    fn level_two_expansion_checks() {
        let stream: Type = SessionType::rec(
            "a",
            SessionType::out(Type::Int, SessionType::var("a")),
        )
        .into();
        let code = CtxType::new(vec![CtxType::plain(stream.clone())], 1, stream.clone());
        let ty = CtxType::new(vec![CtxType::plain(stream), code], 2, Type::Unit);
        let v = eta_expand("v", &ty);
        let printed = crate::syntax::Printer::plain().ctx_value(&v);
        assert!(printed.starts_with("(eta#0:"), "{printed}");
        assert!(printed.contains("v[()^0. eta#0, (eta#2:"), "{printed}");
        let ctx = Context::from_bindings([("v".to_string(), ty.clone())]);
        let body = Term::synth(TermKind::Boxed(Box::new(v)));
        let s = Checker::new().synth_top(ctx, &body).unwrap();
        match s.ty {
            Type::Boxed(c) => assert!(equal_ctx(&c, &ty)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
