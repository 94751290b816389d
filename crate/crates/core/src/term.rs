//! Terms of the object language.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;

use crate::span::Span;
use crate::types::{CtxType, Label, Mult, Name, Type};

/// Built-in constants. `ForkWith` is derived (fork a function on a fresh
/// channel and return the other end) but treated as primitive.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Const {
    Close,
    Wait,
    Send,
    Receive,
    Select(Label),
    New,
    Fork,
    Fix,
    ForkWith,
}

impl Const {
    /// Number of arguments the constant consumes before it reduces.
    pub fn arity(&self) -> usize {
        match self {
            Const::Send => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Close => write!(f, "close"),
            Const::Wait => write!(f, "wait"),
            Const::Send => write!(f, "send"),
            Const::Receive => write!(f, "receive"),
            Const::Select(l) => write!(f, "select {l}"),
            Const::New => write!(f, "new"),
            Const::Fork => write!(f, "fork"),
            Const::Fix => write!(f, "fix"),
            Const::ForkWith => write!(f, "forkWith"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Lt,
    Gt,
    Le,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Lt | BinOp::Gt | BinOp::Le)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub kind: TermKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TermKind {
    /// `x[σ̄]`; an ordinary variable has no substitution.
    Var(Name, Vec<CtxValue>),
    /// A constant with an optional explicit instantiation `c @T`.
    Const(Const, Option<Type>),
    Unit,
    Int(BigInt),
    Bool(bool),
    /// `lambda (x:T). M` (ω) or `lambda1 (x:T). M`; the annotation is
    /// optional only in the erased surface form `\x. M`.
    Lam(Mult, Name, Option<Type>, Box<Term>),
    App(Box<Term>, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    LetPair(Name, Name, Box<Term>, Box<Term>),
    Let(Name, Box<Term>, Box<Term>),
    Boxed(Box<CtxValue>),
    LetBox(Name, Box<Term>, Box<Term>),
    Match(Box<Term>, Vec<Arm>),
    If(Box<Term>, Box<Term>, Box<Term>),
    Bin(BinOp, Box<Term>, Box<Term>),
}

/// `(x̄:τ̄)^n. M`. A plain term written where a contextual value is expected
/// has no binders and no level; the checker fills the level in.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CtxValue {
    /// Binder annotations are absent only in erased terms.
    pub binders: Vec<(Name, Option<CtxType>)>,
    pub level: Option<usize>,
    pub body: Term,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Arm {
    pub label: Label,
    pub var: Name,
    pub body: Term,
}

impl Term {
    pub fn new(kind: TermKind, span: Span) -> Term {
        Term { kind, span }
    }

    pub fn synth(kind: TermKind) -> Term {
        Term {
            kind,
            span: Span::default(),
        }
    }

    pub fn var(x: impl Into<Name>) -> Term {
        Term::synth(TermKind::Var(x.into(), Vec::new()))
    }

    pub fn unit() -> Term {
        Term::synth(TermKind::Unit)
    }

    pub fn int(n: impl Into<BigInt>) -> Term {
        Term::synth(TermKind::Int(n.into()))
    }

    pub fn constant(c: Const) -> Term {
        Term::synth(TermKind::Const(c, None))
    }

    pub fn app(f: Term, a: Term) -> Term {
        let span = f.span.to(a.span);
        Term::new(TermKind::App(Box::new(f), Box::new(a)), span)
    }

    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn lam(m: Mult, x: impl Into<Name>, t: Type, body: Term) -> Term {
        Term::synth(TermKind::Lam(m, x.into(), Some(t), Box::new(body)))
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::synth(TermKind::Pair(Box::new(a), Box::new(b)))
    }

    pub fn let_in(x: impl Into<Name>, m: Term, n: Term) -> Term {
        Term::synth(TermKind::Let(x.into(), Box::new(m), Box::new(n)))
    }

    pub fn let_pair(x: impl Into<Name>, y: impl Into<Name>, m: Term, n: Term) -> Term {
        Term::synth(TermKind::LetPair(x.into(), y.into(), Box::new(m), Box::new(n)))
    }

    /// The head and arguments of an application spine.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let TermKind::App(f, a) = &cur.kind {
            args.push(&**a);
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        fv(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn mentions(&self, x: &str) -> bool {
        self.free_vars().contains(x)
    }

    /// Strips every annotation: lambda binder types, constant instantiations,
    /// contextual-value binder types and levels.
    pub fn erase(&self) -> Term {
        use TermKind::*;
        let kind = match &self.kind {
            Var(x, subs) => Var(x.clone(), subs.iter().map(CtxValue::erase).collect()),
            Const(c, _) => Const(c.clone(), None),
            Unit | Int(_) | Bool(_) => self.kind.clone(),
            Lam(_, x, _, b) => Lam(Mult::Un, x.clone(), None, Box::new(b.erase())),
            App(a, b) => App(Box::new(a.erase()), Box::new(b.erase())),
            Pair(a, b) => Pair(Box::new(a.erase()), Box::new(b.erase())),
            LetPair(x, y, a, b) => {
                LetPair(x.clone(), y.clone(), Box::new(a.erase()), Box::new(b.erase()))
            }
            Let(x, a, b) => Let(x.clone(), Box::new(a.erase()), Box::new(b.erase())),
            Boxed(s) => Boxed(Box::new(s.erase())),
            LetBox(u, a, b) => LetBox(u.clone(), Box::new(a.erase()), Box::new(b.erase())),
            Match(s, arms) => Match(
                Box::new(s.erase()),
                arms.iter()
                    .map(|a| Arm {
                        label: a.label.clone(),
                        var: a.var.clone(),
                        body: a.body.erase(),
                    })
                    .collect(),
            ),
            If(c, t, e) => If(Box::new(c.erase()), Box::new(t.erase()), Box::new(e.erase())),
            Bin(op, a, b) => Bin(*op, Box::new(a.erase()), Box::new(b.erase())),
        };
        Term::new(kind, self.span)
    }
}

impl CtxValue {
    pub fn plain(body: Term) -> CtxValue {
        CtxValue {
            binders: Vec::new(),
            level: None,
            body,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        fv_ctx(self, &mut Vec::new(), &mut out);
        out
    }

    fn erase(&self) -> CtxValue {
        CtxValue {
            binders: self.binders.iter().map(|(x, _)| (x.clone(), None)).collect(),
            level: None,
            body: self.body.erase(),
        }
    }
}

fn fv(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    use TermKind::*;
    match &t.kind {
        Var(x, subs) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
            for s in subs {
                fv_ctx(s, bound, out);
            }
        }
        Const(..) | Unit | Int(_) | Bool(_) => {}
        Lam(_, x, _, b) => under(bound, [x], |bound| fv(b, bound, out)),
        App(a, b) | Pair(a, b) | Bin(_, a, b) => {
            fv(a, bound, out);
            fv(b, bound, out);
        }
        LetPair(x, y, a, b) => {
            fv(a, bound, out);
            under(bound, [x, y], |bound| fv(b, bound, out));
        }
        Let(x, a, b) | LetBox(x, a, b) => {
            fv(a, bound, out);
            under(bound, [x], |bound| fv(b, bound, out));
        }
        Boxed(s) => fv_ctx(s, bound, out),
        Match(s, arms) => {
            fv(s, bound, out);
            for a in arms {
                under(bound, [&a.var], |bound| fv(&a.body, bound, out));
            }
        }
        If(c, a, b) => {
            fv(c, bound, out);
            fv(a, bound, out);
            fv(b, bound, out);
        }
    }
}

fn fv_ctx(s: &CtxValue, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    let names: Vec<&Name> = s.binders.iter().map(|(x, _)| x).collect();
    under(bound, names, |bound| fv(&s.body, bound, out));
}

fn under<'a>(
    bound: &mut Vec<Name>,
    names: impl IntoIterator<Item = &'a Name>,
    f: impl FnOnce(&mut Vec<Name>),
) {
    let before = bound.len();
    bound.extend(names.into_iter().cloned());
    f(bound);
    bound.truncate(before);
}
