//! Type schemes of the built-in constants and their instantiation.
//!
//! ```text
//! close    : Close ->ω Unit
//! wait     : Wait ->ω Unit
//! send     : T ->ω !T.S ->1 S
//! receive  : ?T.S ->ω T * S
//! select l : oplus{.. l: S ..} ->ω S
//! new      : Unit ->ω S * Dual S
//! fork     : (Unit ->m Unit) ->ω Unit
//! fix      : ((T -> U) -> (T -> U)) -> (T -> U)
//! forkWith : (S ->m Unit) ->ω Dual S
//! ```
//!
//! Schemes are instantiated from the types of the arguments the constant is
//! applied to, or from an explicit annotation (`new` always needs one).

use thiserror::Error;

use crate::term::Const;
use crate::types::{dualize, equal, is_dual, unfold_head, Mult, SessionType, Type};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SchemeError {
    #[error("cannot determine the type of `{0}`; add an annotation `@T`")]
    Unresolved(Const),
    #[error("`{constant}` expects {expected}")]
    Mismatch {
        constant: Const,
        expected: String,
        found: Type,
    },
    #[error("`{constant}`: {reason}")]
    Duality { constant: Const, reason: String },
}

fn mismatch(c: &Const, expected: &str, found: &Type) -> SchemeError {
    SchemeError::Mismatch {
        constant: c.clone(),
        expected: expected.to_string(),
        found: found.clone(),
    }
}

fn un(a: Type, r: Type) -> Type {
    Type::fun(a, Mult::Un, r)
}

fn unfolded_session(t: &Type) -> Option<SessionType> {
    t.as_session().map(unfold_head)
}

/// The instance of `new`'s scheme at session type `s`.
pub fn new_instance(s: &SessionType) -> Result<Type, SchemeError> {
    let d = dualize(s).map_err(|e| SchemeError::Duality {
        constant: Const::New,
        reason: e.to_string(),
    })?;
    Ok(un(Type::Unit, Type::pair(s.clone().into(), d.into())))
}

/// Instantiates the scheme of `c` from the types of (a prefix of) its
/// arguments. Returns the full instantiated type of the constant.
pub fn instantiate_from_args(c: &Const, args: &[Type]) -> Result<Type, SchemeError> {
    let first = args.first().ok_or_else(|| SchemeError::Unresolved(c.clone()))?;
    match c {
        Const::Close | Const::Wait => {
            let want = if *c == Const::Close {
                SessionType::Close
            } else {
                SessionType::Wait
            };
            match unfolded_session(first) {
                Some(s) if s == want => Ok(un(first.clone(), Type::Unit)),
                _ => Err(mismatch(c, if *c == Const::Close { "Close" } else { "Wait" }, first)),
            }
        }
        Const::Send => {
            let chan = args.get(1).ok_or_else(|| SchemeError::Unresolved(c.clone()))?;
            match unfolded_session(chan) {
                Some(SessionType::Out(t, s)) if equal(&t, first) => Ok(un(
                    first.clone(),
                    Type::fun(chan.clone(), Mult::Lin, Type::Session(*s)),
                )),
                Some(SessionType::Out(t, _)) => Err(SchemeError::Mismatch {
                    constant: c.clone(),
                    expected: "a value of the type the channel expects".into(),
                    found: Type::pair(first.clone(), *t),
                }),
                _ => Err(mismatch(c, "an output channel !T.S", chan)),
            }
        }
        Const::Receive => match unfolded_session(first) {
            Some(SessionType::In(t, s)) => Ok(un(first.clone(), Type::pair(*t, Type::Session(*s)))),
            _ => Err(mismatch(c, "an input channel ?T.S", first)),
        },
        Const::Select(l) => match unfolded_session(first) {
            Some(SessionType::Select(bs)) => match bs.get(l) {
                Some(s) => Ok(un(first.clone(), Type::Session(s.clone()))),
                None => Err(mismatch(c, &format!("a choice offering `{l}`"), first)),
            },
            _ => Err(mismatch(c, "an internal choice oplus{...}", first)),
        },
        Const::New => Err(SchemeError::Unresolved(c.clone())),
        Const::Fork => match first {
            Type::Fun(a, _, r) if **a == Type::Unit && **r == Type::Unit => {
                Ok(un(first.clone(), Type::Unit))
            }
            _ => Err(mismatch(c, "a thunk Unit -> Unit", first)),
        },
        Const::Fix => match first {
            Type::Fun(f, Mult::Un, g) => match (&**f, &**g) {
                (Type::Fun(_, Mult::Un, _), Type::Fun(_, Mult::Un, _)) if equal(f, g) => {
                    Ok(un(first.clone(), (**f).clone()))
                }
                _ => Err(mismatch(c, "a functional (T -> U) -> (T -> U)", first)),
            },
            _ => Err(mismatch(c, "a functional (T -> U) -> (T -> U)", first)),
        },
        Const::ForkWith => match first {
            Type::Fun(a, _, r) if **r == Type::Unit => match a.as_session() {
                Some(s) => {
                    let d = dualize(s).map_err(|e| SchemeError::Duality {
                        constant: c.clone(),
                        reason: e.to_string(),
                    })?;
                    Ok(un(first.clone(), Type::Session(d)))
                }
                None => Err(mismatch(c, "a function S -> Unit on a session type", first)),
            },
            _ => Err(mismatch(c, "a function S -> Unit on a session type", first)),
        },
    }
}

/// Checks an explicit annotation against the scheme of `c` and returns the
/// full instantiated type. For `new`, a bare session type `S` is accepted as
/// shorthand for `Unit -> S * Dual S`.
pub fn instantiate_annotated(c: &Const, annot: &Type) -> Result<Type, SchemeError> {
    if *c == Const::New {
        return match annot {
            Type::Session(s) => new_instance(s),
            Type::Fun(a, Mult::Un, r) if **a == Type::Unit => match &**r {
                Type::Pair(x, y) => match (x.as_session(), y.as_session()) {
                    (Some(s), Some(d)) if is_dual(s, d) => Ok(annot.clone()),
                    (Some(_), Some(_)) => Err(SchemeError::Duality {
                        constant: c.clone(),
                        reason: "the two channel ends are not dual".into(),
                    }),
                    _ => Err(mismatch(c, "a pair of session types", r)),
                },
                _ => Err(mismatch(c, "Unit -> S * Dual S", annot)),
            },
            _ => Err(mismatch(c, "Unit -> S * Dual S", annot)),
        };
    }
    let mut domains = Vec::new();
    let mut cur = annot;
    while domains.len() < c.arity() {
        match cur {
            Type::Fun(a, _, r) => {
                domains.push((**a).clone());
                cur = r;
            }
            _ => return Err(mismatch(c, "a function type", annot)),
        }
    }
    let inst = instantiate_from_args(c, &domains)?;
    if equal(&inst, annot) {
        Ok(annot.clone())
    } else {
        Err(SchemeError::Mismatch {
            constant: c.clone(),
            expected: "an instance of its type scheme".into(),
            found: annot.clone(),
        })
    }
}

/// Domain and codomain of a fixpoint instance `fix : F -> (T -> U)`.
pub fn fix_arg_type(inst: &Type) -> Option<&Type> {
    match inst {
        Type::Fun(_, _, r) => match &**r {
            Type::Fun(t, _, _) => Some(t),
            _ => None,
        },
        _ => None,
    }
}
