//! Term evaluation: substitution, single steps, and a fuelled driver for
//! the pure fragment.

pub mod step;
pub mod subst;

pub use step::{decompose, is_value, step_term, EvalContext, Frame, Request, Rule, StepError, StepOutcome};
pub use subst::{lift, rename, substitute, substitute_many, Fresh, SubstError};

use crate::term::Term;

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum PureOutcome {
    Value(Term),
    FuelExhausted(Term),
    /// The term needs a channel, a fork or a new channel to continue.
    Blocked(Request, EvalContext),
}

/// Iterates [`step_term`] until a value, a request, or `fuel` steps.
pub fn eval_pure(m: &Term, fuel: u64) -> Result<PureOutcome, StepError> {
    eval_pure_with(m, fuel, &mut Fresh::new(), |_, _| {})
}

/// Like [`eval_pure`], calling `observe` on every intermediate term.
pub fn eval_pure_with(
    m: &Term,
    fuel: u64,
    fresh: &mut Fresh,
    mut observe: impl FnMut(&Term, Rule),
) -> Result<PureOutcome, StepError> {
    let mut cur = m.clone();
    for _ in 0..fuel {
        match step_term(&cur, fresh)? {
            StepOutcome::IsValue => return Ok(PureOutcome::Value(cur)),
            StepOutcome::Stepped(next, rule) => {
                observe(&next, rule);
                cur = next;
            }
            StepOutcome::Blocked(r, ctx) => return Ok(PureOutcome::Blocked(r, ctx)),
        }
    }
    if crate::eval::is_value(&cur) {
        Ok(PureOutcome::Value(cur))
    } else {
        Ok(PureOutcome::FuelExhausted(cur))
    }
}
