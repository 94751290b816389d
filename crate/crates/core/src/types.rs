//! Types, session types and contextual types, with the decision procedures
//! the checker relies on: duality, equi-recursive equality, level
//! well-formedness and the unrestricted predicate.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

pub type Name = String;
pub type Label = String;

/// How often a value may be used: exactly once, or any number of times.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mult {
    Lin,
    Un,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Unit,
    Int,
    Bool,
    Fun(Box<Type>, Mult, Box<Type>),
    Pair(Box<Type>, Box<Type>),
    /// `[τ]`: a first-class code fragment of contextual type τ.
    Boxed(Box<CtxType>),
    Session(SessionType),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SessionType {
    Close,
    Wait,
    Out(Box<Type>, Box<SessionType>),
    In(Box<Type>, Box<SessionType>),
    /// Internal choice `oplus{...}`.
    Select(BTreeMap<Label, SessionType>),
    /// External choice `&{...}`.
    Branch(BTreeMap<Label, SessionType>),
    /// A rec-bound variable, or (before alias resolution) a type name.
    Var(Name),
    Rec(Name, Box<SessionType>),
    /// `Dual T`. Only present before alias resolution.
    Dual(Box<Type>),
}

/// `τ̄ |-n T`: code of type `T` over parameters `τ̄`, at level `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CtxType {
    pub params: Vec<CtxType>,
    pub level: usize,
    pub body: Type,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("recursion variable `{0}` occurs inside a message payload; Dual is only defined for tail recursion")]
    UnsupportedDuality(Name),
    #[error("`{0}` is not a session type")]
    NotSession(String),
    #[error("non-contractive recursive type `rec {0}. ...`")]
    NonContractive(Name),
    #[error("ill-formed contextual type: {0}")]
    IllFormed(String),
    #[error("unknown type `{0}`")]
    UnknownType(Name),
    #[error("empty choice")]
    EmptyChoice,
}

impl Type {
    pub fn fun(arg: Type, mult: Mult, res: Type) -> Type {
        Type::Fun(Box::new(arg), mult, Box::new(res))
    }

    pub fn pair(l: Type, r: Type) -> Type {
        Type::Pair(Box::new(l), Box::new(r))
    }

    pub fn boxed(inner: CtxType) -> Type {
        Type::Boxed(Box::new(inner))
    }

    pub fn as_session(&self) -> Option<&SessionType> {
        match self {
            Type::Session(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_unrestricted(&self) -> bool {
        match self {
            Type::Unit | Type::Int | Type::Bool | Type::Boxed(_) => true,
            Type::Fun(_, m, _) => *m == Mult::Un,
            Type::Pair(..) | Type::Session(_) => false,
        }
    }

    pub fn is_linear(&self) -> bool {
        !self.is_unrestricted()
    }
}

impl From<SessionType> for Type {
    fn from(s: SessionType) -> Type {
        Type::Session(s)
    }
}

impl SessionType {
    pub fn out(payload: Type, cont: SessionType) -> SessionType {
        SessionType::Out(Box::new(payload), Box::new(cont))
    }

    pub fn inp(payload: Type, cont: SessionType) -> SessionType {
        SessionType::In(Box::new(payload), Box::new(cont))
    }

    pub fn rec(var: impl Into<Name>, body: SessionType) -> SessionType {
        SessionType::Rec(var.into(), Box::new(body))
    }

    pub fn var(name: impl Into<Name>) -> SessionType {
        SessionType::Var(name.into())
    }
}

impl CtxType {
    /// The level-0 contextual type of an ordinary variable.
    pub fn plain(body: Type) -> CtxType {
        CtxType {
            params: Vec::new(),
            level: 0,
            body,
        }
    }

    pub fn new(params: Vec<CtxType>, level: usize, body: Type) -> CtxType {
        CtxType {
            params,
            level,
            body,
        }
    }

    /// Level 1 and above are always unrestricted; level 0 follows the body.
    pub fn is_unrestricted(&self) -> bool {
        self.level >= 1 || self.body.is_unrestricted()
    }

    pub fn is_linear(&self) -> bool {
        !self.is_unrestricted()
    }
}

/// `(level ≥ n, level < n)`.
pub fn level_bounds(t: &CtxType, n: usize) -> (bool, bool) {
    (t.level >= n, t.level < n)
}

// ---------------------------------------------------------------------------
// Substitution and unfolding

fn subst_session(s: &SessionType, var: &str, with: &SessionType) -> SessionType {
    use SessionType::*;
    match s {
        Close | Wait => s.clone(),
        Out(t, k) => SessionType::out(subst_type(t, var, with), subst_session(k, var, with)),
        In(t, k) => SessionType::inp(subst_type(t, var, with), subst_session(k, var, with)),
        Select(bs) => Select(subst_branches(bs, var, with)),
        Branch(bs) => Branch(subst_branches(bs, var, with)),
        Var(a) if a == var => with.clone(),
        Var(_) => s.clone(),
        Rec(a, _) if a == var => s.clone(),
        Rec(a, body) => Rec(a.clone(), Box::new(subst_session(body, var, with))),
        Dual(t) => Dual(Box::new(subst_type(t, var, with))),
    }
}

fn subst_branches(
    bs: &BTreeMap<Label, SessionType>,
    var: &str,
    with: &SessionType,
) -> BTreeMap<Label, SessionType> {
    bs.iter()
        .map(|(l, s)| (l.clone(), subst_session(s, var, with)))
        .collect()
}

fn subst_type(t: &Type, var: &str, with: &SessionType) -> Type {
    match t {
        Type::Unit | Type::Int | Type::Bool => t.clone(),
        Type::Fun(a, m, r) => Type::fun(subst_type(a, var, with), *m, subst_type(r, var, with)),
        Type::Pair(a, b) => Type::pair(subst_type(a, var, with), subst_type(b, var, with)),
        Type::Boxed(c) => Type::boxed(subst_ctx(c, var, with)),
        Type::Session(s) => Type::Session(subst_session(s, var, with)),
    }
}

fn subst_ctx(c: &CtxType, var: &str, with: &SessionType) -> CtxType {
    CtxType {
        params: c.params.iter().map(|p| subst_ctx(p, var, with)).collect(),
        level: c.level,
        body: subst_type(&c.body, var, with),
    }
}

/// One-step unfolding of a top-level `rec`; other types are returned as is.
pub fn unfold(s: &SessionType) -> SessionType {
    match s {
        SessionType::Rec(a, body) => subst_session(body, a, s),
        _ => s.clone(),
    }
}

/// Unfolds until the head is not a `rec`. Gives up (returning the last
/// unfolding) on non-contractive input.
pub fn unfold_head(s: &SessionType) -> SessionType {
    let mut cur = s.clone();
    for _ in 0..64 {
        if !matches!(cur, SessionType::Rec(..)) {
            return cur;
        }
        cur = unfold(&cur);
    }
    cur
}

/// Unfolds the head of a type when it is a recursive session type.
pub fn unfold_type_head(t: &Type) -> Type {
    match t {
        Type::Session(s) => Type::Session(unfold_head(s)),
        _ => t.clone(),
    }
}

// ---------------------------------------------------------------------------
// Well-formedness

/// `rec a. S` is contractive when `S` is not (after stripping further
/// `rec` binders) one of the variables bound along the way.
pub fn is_contractive(s: &SessionType) -> bool {
    check_contractive(s).is_ok()
}

fn check_contractive(s: &SessionType) -> Result<(), TypeError> {
    use SessionType::*;
    match s {
        Close | Wait | Var(_) => Ok(()),
        Out(t, k) | In(t, k) => {
            check_type_contractive(t)?;
            check_contractive(k)
        }
        Select(bs) | Branch(bs) => bs.values().try_for_each(check_contractive),
        Rec(a, _) => {
            let mut guard = vec![a.clone()];
            let mut cur = s;
            while let Rec(b, body) = cur {
                guard.push(b.clone());
                cur = body;
            }
            if let Var(v) = cur {
                if guard.contains(v) {
                    return Err(TypeError::NonContractive(a.clone()));
                }
            }
            check_contractive(cur)
        }
        Dual(t) => check_type_contractive(t),
    }
}

pub fn check_type_contractive(t: &Type) -> Result<(), TypeError> {
    match t {
        Type::Unit | Type::Int | Type::Bool => Ok(()),
        Type::Fun(a, _, r) | Type::Pair(a, r) => {
            check_type_contractive(a)?;
            check_type_contractive(r)
        }
        Type::Boxed(c) => {
            c.params.iter().try_for_each(|p| check_type_contractive(&p.body))?;
            check_type_contractive(&c.body)
        }
        Type::Session(s) => check_contractive(s),
    }
}

/// Returns the minimal level at which `t` is well formed: a level-0 type
/// has no parameters, and every parameter of a level `n+1` type is well
/// formed at level `n` or below.
pub fn well_formed(t: &CtxType) -> Result<usize, TypeError> {
    if t.level == 0 {
        if !t.params.is_empty() {
            return Err(TypeError::IllFormed(
                "a level-0 contextual type cannot have parameters".into(),
            ));
        }
    } else {
        for p in &t.params {
            let k = well_formed(p)?;
            if k >= t.level {
                return Err(TypeError::IllFormed(format!(
                    "parameter of level {k} inside a contextual type of level {}",
                    t.level
                )));
            }
        }
    }
    check_type(&t.body)?;
    Ok(t.level)
}

/// Checks that a (resolved) type is closed, contractive, has non-empty
/// choices and only well-formed box types of level 1 or more.
pub fn check_type(t: &Type) -> Result<(), TypeError> {
    check_type_in(t, &mut Vec::new())
}

fn check_type_in(t: &Type, bound: &mut Vec<Name>) -> Result<(), TypeError> {
    match t {
        Type::Unit | Type::Int | Type::Bool => Ok(()),
        Type::Fun(a, _, r) | Type::Pair(a, r) => {
            check_type_in(a, bound)?;
            check_type_in(r, bound)
        }
        Type::Boxed(c) => {
            let level = well_formed(c)?;
            if level == 0 {
                return Err(TypeError::IllFormed(
                    "box types must be of level 1 or above".into(),
                ));
            }
            for p in &c.params {
                check_ctx_in(p, bound)?;
            }
            check_type_in(&c.body, bound)
        }
        Type::Session(s) => {
            check_contractive(s)?;
            check_session_in(s, bound)
        }
    }
}

fn check_ctx_in(c: &CtxType, bound: &mut Vec<Name>) -> Result<(), TypeError> {
    for p in &c.params {
        check_ctx_in(p, bound)?;
    }
    check_type_in(&c.body, bound)
}

fn check_session_in(s: &SessionType, bound: &mut Vec<Name>) -> Result<(), TypeError> {
    use SessionType::*;
    match s {
        Close | Wait => Ok(()),
        Out(t, k) | In(t, k) => {
            check_type_in(t, bound)?;
            check_session_in(k, bound)
        }
        Select(bs) | Branch(bs) => {
            if bs.is_empty() {
                return Err(TypeError::EmptyChoice);
            }
            bs.values().try_for_each(|b| check_session_in(b, bound))
        }
        Var(a) if bound.contains(a) => Ok(()),
        Var(a) => Err(TypeError::UnknownType(a.clone())),
        Rec(a, body) => {
            bound.push(a.clone());
            let r = check_session_in(body, bound);
            bound.pop();
            r
        }
        Dual(_) => Err(TypeError::IllFormed("unresolved Dual".into())),
    }
}

// ---------------------------------------------------------------------------
// Duality

/// The dual of a session type: `Close`/`Wait`, `!`/`?` and `oplus`/`&` are
/// swapped; payloads are left alone. Recursion variables may only occur in
/// continuation position.
pub fn dualize(s: &SessionType) -> Result<SessionType, TypeError> {
    dualize_in(s, &mut Vec::new())
}

fn dualize_in(s: &SessionType, bound: &mut Vec<Name>) -> Result<SessionType, TypeError> {
    use SessionType::*;
    let payload_ok = |t: &Type, bound: &Vec<Name>| -> Result<(), TypeError> {
        let mut free = HashSet::new();
        free_vars_type(t, &mut Vec::new(), &mut free);
        match bound.iter().find(|b| free.contains(*b)) {
            Some(b) => Err(TypeError::UnsupportedDuality(b.clone())),
            None => Ok(()),
        }
    };
    Ok(match s {
        Close => Wait,
        Wait => Close,
        Out(t, k) => {
            payload_ok(t, bound)?;
            SessionType::inp((**t).clone(), dualize_in(k, bound)?)
        }
        In(t, k) => {
            payload_ok(t, bound)?;
            SessionType::out((**t).clone(), dualize_in(k, bound)?)
        }
        Select(bs) => Branch(dualize_branches(bs, bound)?),
        Branch(bs) => Select(dualize_branches(bs, bound)?),
        Var(a) => Var(a.clone()),
        Rec(a, body) => {
            bound.push(a.clone());
            let body = dualize_in(body, bound);
            bound.pop();
            Rec(a.clone(), Box::new(body?))
        }
        Dual(t) => match &**t {
            Type::Session(inner) => {
                let inner = dualize_in(inner, bound)?;
                dualize_in(&inner, bound)?
            }
            other => return Err(TypeError::NotSession(format!("{other:?}"))),
        },
    })
}

fn dualize_branches(
    bs: &BTreeMap<Label, SessionType>,
    bound: &mut Vec<Name>,
) -> Result<BTreeMap<Label, SessionType>, TypeError> {
    bs.iter()
        .map(|(l, s)| Ok((l.clone(), dualize_in(s, bound)?)))
        .collect()
}

fn free_vars_session(s: &SessionType, bound: &mut Vec<Name>, out: &mut HashSet<Name>) {
    use SessionType::*;
    match s {
        Close | Wait => {}
        Out(t, k) | In(t, k) => {
            free_vars_type(t, bound, out);
            free_vars_session(k, bound, out);
        }
        Select(bs) | Branch(bs) => bs.values().for_each(|b| free_vars_session(b, bound, out)),
        Var(a) => {
            if !bound.contains(a) {
                out.insert(a.clone());
            }
        }
        Rec(a, body) => {
            bound.push(a.clone());
            free_vars_session(body, bound, out);
            bound.pop();
        }
        Dual(t) => free_vars_type(t, bound, out),
    }
}

fn free_vars_type(t: &Type, bound: &mut Vec<Name>, out: &mut HashSet<Name>) {
    match t {
        Type::Unit | Type::Int | Type::Bool => {}
        Type::Fun(a, _, r) | Type::Pair(a, r) => {
            free_vars_type(a, bound, out);
            free_vars_type(r, bound, out);
        }
        Type::Boxed(c) => free_vars_ctx(c, bound, out),
        Type::Session(s) => free_vars_session(s, bound, out),
    }
}

fn free_vars_ctx(c: &CtxType, bound: &mut Vec<Name>, out: &mut HashSet<Name>) {
    for p in &c.params {
        free_vars_ctx(p, bound, out);
    }
    free_vars_type(&c.body, bound, out);
}

/// Free type names/recursion variables of a type.
pub fn free_type_vars(t: &Type) -> HashSet<Name> {
    let mut out = HashSet::new();
    free_vars_type(t, &mut Vec::new(), &mut out);
    out
}

/// Coinductive duality check: the greatest relation closed under the
/// duality rules, computed by unfolding with a set of assumed pairs.
pub fn is_dual(r: &SessionType, s: &SessionType) -> bool {
    Coinduction::default().dual(r, s)
}

/// Equi-recursive type equality.
pub fn equal(t: &Type, u: &Type) -> bool {
    Coinduction::default().types(t, u)
}

pub fn equal_session(s: &SessionType, r: &SessionType) -> bool {
    Coinduction::default().sessions(s, r)
}

pub fn equal_ctx(a: &CtxType, b: &CtxType) -> bool {
    Coinduction::default().ctx(a, b)
}

#[derive(Default)]
struct Coinduction {
    equal_seen: HashSet<(SessionType, SessionType)>,
    dual_seen: HashSet<(SessionType, SessionType)>,
}

impl Coinduction {
    fn types(&mut self, t: &Type, u: &Type) -> bool {
        match (t, u) {
            (Type::Unit, Type::Unit) | (Type::Int, Type::Int) | (Type::Bool, Type::Bool) => true,
            (Type::Fun(a1, m1, r1), Type::Fun(a2, m2, r2)) => {
                m1 == m2 && self.types(a1, a2) && self.types(r1, r2)
            }
            (Type::Pair(a1, b1), Type::Pair(a2, b2)) => self.types(a1, a2) && self.types(b1, b2),
            (Type::Boxed(c1), Type::Boxed(c2)) => self.ctx(c1, c2),
            (Type::Session(s1), Type::Session(s2)) => self.sessions(s1, s2),
            _ => false,
        }
    }

    fn ctx(&mut self, a: &CtxType, b: &CtxType) -> bool {
        a.level == b.level
            && a.params.len() == b.params.len()
            && a.params.iter().zip(&b.params).all(|(p, q)| self.ctx(p, q))
            && self.types(&a.body, &b.body)
    }

    fn sessions(&mut self, s: &SessionType, r: &SessionType) -> bool {
        use SessionType::*;
        if s == r {
            return true;
        }
        if !self.equal_seen.insert((s.clone(), r.clone())) {
            return true;
        }
        let (s, r) = (unfold_head(s), unfold_head(r));
        match (&s, &r) {
            (Close, Close) | (Wait, Wait) => true,
            (Out(t1, k1), Out(t2, k2)) | (In(t1, k1), In(t2, k2)) => {
                self.types(t1, t2) && self.sessions(k1, k2)
            }
            (Select(b1), Select(b2)) | (Branch(b1), Branch(b2)) => {
                b1.len() == b2.len()
                    && b1.iter().all(|(l, s1)| match b2.get(l) {
                        Some(s2) => self.sessions(s1, s2),
                        None => false,
                    })
            }
            (Var(a), Var(b)) => a == b,
            _ => false,
        }
    }

    fn dual(&mut self, s: &SessionType, r: &SessionType) -> bool {
        use SessionType::*;
        if !self.dual_seen.insert((s.clone(), r.clone())) {
            return true;
        }
        let (s, r) = (unfold_head(s), unfold_head(r));
        match (&s, &r) {
            (Close, Wait) | (Wait, Close) => true,
            (Out(t1, k1), In(t2, k2)) | (In(t1, k1), Out(t2, k2)) => {
                self.types(t1, t2) && self.dual(k1, k2)
            }
            (Select(b1), Branch(b2)) | (Branch(b1), Select(b2)) => {
                b1.len() == b2.len()
                    && b1.iter().all(|(l, s1)| match b2.get(l) {
                        Some(s2) => self.dual(s1, s2),
                        None => false,
                    })
            }
            _ => false,
        }
    }
}
