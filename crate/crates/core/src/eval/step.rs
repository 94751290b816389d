//! Single-thread call-by-value reduction.
//!
//! A term decomposes into an evaluation context (a stack of frames) and a
//! redex. Pure redexes reduce here; channel operations surface as requests
//! that only the runtime can answer.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use super::subst::{lift, substitute, Fresh, SubstError};
use crate::term::{Arm, BinOp, Const, Term, TermKind};
use crate::types::{Label, Mult, Name, Type};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Rule {
    Beta,
    Split,
    LetBox,
    Fix,
    Prim,
    Close,
    Com,
    Branch,
    New,
    Fork,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Beta => "R-Beta",
            Rule::Split => "R-Split",
            Rule::LetBox => "R-LetBox",
            Rule::Fix => "R-Fix",
            Rule::Prim => "R-Prim",
            Rule::Close => "R-Close",
            Rule::Com => "R-Com",
            Rule::Branch => "R-Branch",
            Rule::New => "New",
            Rule::Fork => "Fork",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An operation that needs the rest of the configuration.
#[derive(Clone, Debug, PartialEq)]
pub enum Request {
    Close(Name),
    Wait(Name),
    Send(Term, Name),
    Receive(Name),
    Select(Label, Name),
    Match(Name, Vec<Arm>),
    /// Carries the instantiated type of `new`, when known.
    New(Option<Type>),
    Fork(Term),
    /// `forkWith v`: a fresh channel, `v` forked on one end; carries the
    /// instantiated type of `forkWith`, when known.
    ForkWith(Term, Option<Type>),
}

impl Request {
    /// The endpoint the request acts on, for communication requests.
    pub fn subject(&self) -> Option<&Name> {
        match self {
            Request::Close(x)
            | Request::Wait(x)
            | Request::Send(_, x)
            | Request::Receive(x)
            | Request::Select(_, x)
            | Request::Match(x, _) => Some(x),
            Request::New(_) | Request::Fork(_) | Request::ForkWith(..) => None,
        }
    }

    /// A short description: `close x`, `send x`, ...
    pub fn describe(&self) -> String {
        match self {
            Request::Close(x) => format!("close {x}"),
            Request::Wait(x) => format!("wait {x}"),
            Request::Send(_, x) => format!("send on {x}"),
            Request::Receive(x) => format!("receive {x}"),
            Request::Select(l, x) => format!("select {l} {x}"),
            Request::Match(x, _) => format!("match {x}"),
            Request::New(_) => "new".into(),
            Request::Fork(_) => "fork".into(),
            Request::ForkWith(..) => "forkWith".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Frame {
    AppFun(Term),
    AppArg(Term),
    PairL(Term),
    PairR(Term),
    LetPair(Name, Name, Term),
    Let(Name, Term),
    LetBox(Name, Term),
    Match(Vec<Arm>),
    If(Term, Term),
    BinL(BinOp, Term),
    BinR(BinOp, Term),
}

/// An evaluation context `E`, innermost frame last.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalContext {
    pub frames: Vec<Frame>,
}

impl EvalContext {
    /// `E[m]`.
    pub fn plug(&self, m: Term) -> Term {
        let mut t = m;
        for f in self.frames.iter().rev() {
            let b = Box::new;
            let kind = match f.clone() {
                Frame::AppFun(a) => TermKind::App(b(t), b(a)),
                Frame::AppArg(v) => TermKind::App(b(v), b(t)),
                Frame::PairL(r) => TermKind::Pair(b(t), b(r)),
                Frame::PairR(l) => TermKind::Pair(b(l), b(t)),
                Frame::LetPair(x, y, n) => TermKind::LetPair(x, y, b(t), b(n)),
                Frame::Let(x, n) => TermKind::Let(x, b(t), b(n)),
                Frame::LetBox(u, n) => TermKind::LetBox(u, b(t), b(n)),
                Frame::Match(arms) => TermKind::Match(b(t), arms),
                Frame::If(x, y) => TermKind::If(b(t), b(x), b(y)),
                Frame::BinL(op, r) => TermKind::Bin(op, b(t), b(r)),
                Frame::BinR(op, l) => TermKind::Bin(op, b(l), b(t)),
            };
            t = Term::synth(kind);
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepOutcome {
    IsValue,
    Stepped(Term, Rule),
    Blocked(Request, EvalContext),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StepError {
    #[error("stuck term: {0}")]
    Stuck(String),
    #[error(transparent)]
    Subst(#[from] SubstError),
}

pub fn is_value(m: &Term) -> bool {
    use TermKind::*;
    match &m.kind {
        Unit | Int(_) | Bool(_) | Lam(..) | Const(..) | Boxed(_) => true,
        Var(_, subs) => subs.is_empty(),
        Pair(a, b) => is_value(a) && is_value(b),
        App(f, a) => {
            matches!(&f.kind, Const(crate::term::Const::Send, _)) && is_value(a)
        }
        _ => false,
    }
}

/// Splits `m` into `E[r]` where `r` is the next redex, or `None` for values.
pub fn decompose(m: &Term) -> Option<(EvalContext, Term)> {
    if is_value(m) {
        return None;
    }
    // only non-values are ever descended into
    let mut frames = Vec::new();
    let mut cur = m.clone();
    loop {
        use TermKind::*;
        let span = cur.span;
        let next = match cur.kind {
            App(f, a) if !is_value(&f) => {
                frames.push(Frame::AppFun(*a));
                *f
            }
            App(f, a) if !is_value(&a) => {
                frames.push(Frame::AppArg(*f));
                *a
            }
            Pair(l, r) if !is_value(&l) => {
                frames.push(Frame::PairL(*r));
                *l
            }
            Pair(l, r) => {
                frames.push(Frame::PairR(*l));
                *r
            }
            LetPair(x, y, a, n) if !is_value(&a) => {
                frames.push(Frame::LetPair(x, y, *n));
                *a
            }
            Let(x, a, n) if !is_value(&a) => {
                frames.push(Frame::Let(x, *n));
                *a
            }
            LetBox(u, a, n) if !is_value(&a) => {
                frames.push(Frame::LetBox(u, *n));
                *a
            }
            Match(s, arms) if !is_value(&s) => {
                frames.push(Frame::Match(arms));
                *s
            }
            If(c, a, b) if !is_value(&c) => {
                frames.push(Frame::If(*a, *b));
                *c
            }
            Bin(op, a, b) if !is_value(&a) => {
                frames.push(Frame::BinL(op, *b));
                *a
            }
            Bin(op, a, b) if !is_value(&b) => {
                frames.push(Frame::BinR(op, *a));
                *b
            }
            kind => {
                // every immediate subterm in evaluation position is a value
                return Some((EvalContext { frames }, Term::new(kind, span)));
            }
        };
        cur = next;
    }
}

fn subject(v: &Term) -> Result<Name, StepError> {
    match &v.kind {
        TermKind::Var(x, subs) if subs.is_empty() => Ok(x.clone()),
        _ => Err(StepError::Stuck(format!("`{v}` is not a channel endpoint"))),
    }
}

/// One step of `m`.
pub fn step_term(m: &Term, fresh: &mut Fresh) -> Result<StepOutcome, StepError> {
    let Some((ctx, redex)) = decompose(m) else {
        return Ok(StepOutcome::IsValue);
    };
    match reduce(&redex, fresh)? {
        Reduced::Term(t, rule) => Ok(StepOutcome::Stepped(ctx.plug(t), rule)),
        Reduced::Request(r) => Ok(StepOutcome::Blocked(r, ctx)),
    }
}

enum Reduced {
    Term(Term, Rule),
    Request(Request),
}

fn reduce(redex: &Term, fresh: &mut Fresh) -> Result<Reduced, StepError> {
    use TermKind::*;
    let stuck = || StepError::Stuck(redex.to_string());
    let r = match &redex.kind {
        App(f, a) => match &f.kind {
            Lam(_, x, _, body) => {
                Reduced::Term(substitute(&lift((**a).clone()), x, body, fresh)?, Rule::Beta)
            }
            Const(c, annot) => constant(c, annot, f, a)?,
            App(g, v) if matches!(g.kind, Const(crate::term::Const::Send, _)) => {
                Reduced::Request(Request::Send((**v).clone(), subject(a)?))
            }
            _ => return Err(stuck()),
        },
        Let(x, v, body) => Reduced::Term(substitute(&lift((**v).clone()), x, body, fresh)?, Rule::Beta),
        LetPair(x, y, p, body) => match &p.kind {
            Pair(v, w) => {
                let body = substitute(&lift((**v).clone()), x, body, fresh)?;
                let body = if x == y {
                    body
                } else {
                    substitute(&lift((**w).clone()), y, &body, fresh)?
                };
                Reduced::Term(body, Rule::Split)
            }
            _ => return Err(stuck()),
        },
        LetBox(u, b, body) => match &b.kind {
            Boxed(sigma) => Reduced::Term(substitute(sigma, u, body, fresh)?, Rule::LetBox),
            _ => return Err(stuck()),
        },
        Match(s, arms) => Reduced::Request(Request::Match(subject(s)?, arms.clone())),
        If(c, a, b) => match &c.kind {
            Bool(true) => Reduced::Term((**a).clone(), Rule::Prim),
            Bool(false) => Reduced::Term((**b).clone(), Rule::Prim),
            _ => return Err(stuck()),
        },
        Bin(op, a, b) => Reduced::Term(Term::new(prim(*op, a, b).ok_or_else(stuck)?, redex.span), Rule::Prim),
        _ => return Err(stuck()),
    };
    Ok(r)
}

fn constant(
    c: &Const,
    annot: &Option<Type>,
    head: &Term,
    arg: &Term,
) -> Result<Reduced, StepError> {
    let arg = arg.clone();
    Ok(match c {
        Const::Close => Reduced::Request(Request::Close(subject(&arg)?)),
        Const::Wait => Reduced::Request(Request::Wait(subject(&arg)?)),
        Const::Receive => Reduced::Request(Request::Receive(subject(&arg)?)),
        Const::Select(l) => Reduced::Request(Request::Select(l.clone(), subject(&arg)?)),
        Const::New => Reduced::Request(Request::New(annot.clone())),
        Const::Fork => Reduced::Request(Request::Fork(arg)),
        Const::ForkWith => Reduced::Request(Request::ForkWith(arg, annot.clone())),
        Const::Send => unreachable!("send with one argument is a value"),
        Const::Fix => {
            // fix v  ->  v (λx. fix v x)
            let dom = match annot {
                Some(Type::Fun(_, _, r)) => match &**r {
                    Type::Fun(t, _, _) => Some((**t).clone()),
                    _ => None,
                },
                _ => None,
            };
            let x = "fix#x".to_string();
            let unfolded = Term::synth(TermKind::Lam(
                Mult::Un,
                x.clone(),
                dom,
                Box::new(Term::app(Term::app(head.clone(), arg.clone()), Term::var(x))),
            ));
            Reduced::Term(Term::app(arg, unfolded), Rule::Fix)
        }
    })
}

/// Arithmetic on arbitrary-precision integers. Division truncates; division
/// and remainder by zero give 0 and the dividend respectively.
fn prim(op: BinOp, a: &Term, b: &Term) -> Option<TermKind> {
    use TermKind::{Bool, Int};
    Some(match (&a.kind, &b.kind) {
        (Int(x), Int(y)) => match op {
            BinOp::Add => Int(x + y),
            BinOp::Sub => Int(x - y),
            BinOp::Mul => Int(x * y),
            BinOp::Div if *y == BigInt::ZERO => Int(BigInt::ZERO),
            BinOp::Div => Int(x / y),
            BinOp::Mod if *y == BigInt::ZERO => Int(x.clone()),
            BinOp::Mod => Int(x % y),
            BinOp::Eq => Bool(x == y),
            BinOp::Lt => Bool(x < y),
            BinOp::Gt => Bool(x > y),
            BinOp::Le => Bool(x <= y),
        },
        (Bool(x), Bool(y)) if op == BinOp::Eq => Bool(x == y),
        _ => return None,
    })
}
