//! Typing of processes: threads in parallel under channel binders.

use super::synth::synth_closed;
use crate::context::Context;
use crate::term::Term;
use crate::types::{equal, is_dual, CtxType, Name, SessionType, Type};

#[derive(Clone, Debug)]
pub enum Process {
    /// `⟨M⟩`, expected to have the given type. Spawned threads are at
    /// `Unit`; the initial thread runs at the type of the entry point.
    Thread(Term, Type),
    Par(Box<Process>, Box<Process>),
    /// `(νxy)P` with `x : S` and `y : R`.
    Res(Name, SessionType, Name, SessionType, Box<Process>),
}

impl Process {
    pub fn thread(m: Term) -> Process {
        Process::Thread(m, Type::Unit)
    }

    pub fn par(p: Process, q: Process) -> Process {
        Process::Par(Box::new(p), Box::new(q))
    }

    pub fn res(x: impl Into<Name>, s: SessionType, y: impl Into<Name>, r: SessionType, p: Process) -> Process {
        Process::Res(x.into(), s, y.into(), r, Box::new(p))
    }

    pub fn free_vars(&self) -> std::collections::BTreeSet<Name> {
        match self {
            Process::Thread(m, _) => m.free_vars(),
            Process::Par(p, q) => {
                let mut s = p.free_vars();
                s.extend(q.free_vars());
                s
            }
            Process::Res(x, _, y, _, p) => {
                let mut s = p.free_vars();
                s.remove(x);
                s.remove(y);
                s
            }
        }
    }
}

/// `Γ ⊢ P`. For parallel composition only one split can succeed: a linear
/// binding must go to the side where it occurs free.
pub fn check_process(ctx: &Context, p: &Process) -> bool {
    match p {
        Process::Thread(m, t) => match synth_closed(ctx.clone(), m) {
            Ok(s) => equal(&s.ty, t),
            Err(_) => false,
        },
        Process::Par(l, r) => {
            let (fl, fr) = (l.free_vars(), r.free_vars());
            let mut left = ctx.un_part();
            let mut right = ctx.un_part();
            for b in ctx.iter().filter(|b| b.ty.is_linear()) {
                match (fl.contains(&b.name), fr.contains(&b.name)) {
                    (true, false) => left.insert(b.name.clone(), b.ty.clone()),
                    (false, true) => right.insert(b.name.clone(), b.ty.clone()),
                    _ => return false,
                }
            }
            check_process(&left, l) && check_process(&right, r)
        }
        Process::Res(x, s, y, r, q) => {
            if !is_dual(s, r) {
                return false;
            }
            let mut inner = ctx.clone();
            inner.insert(x.clone(), CtxType::plain(Type::Session(s.clone())));
            inner.insert(y.clone(), CtxType::plain(Type::Session(r.clone())));
            check_process(&inner, q)
        }
    }
}
