//! Seeded generators shared by the integration tests: session types,
//! contextual types and well-typed annotated terms (plus mutations of them).
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semp::context::Context;
use semp::term::{Arm, BinOp, Const, CtxValue, Term, TermKind};
use semp::types::{dualize, unfold_head, CtxType, Mult, SessionType, Type};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/programs")
}

/// Positive corpus programs, sorted by name.
pub fn corpus_programs() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "semp"))
        .collect();
    v.sort();
    v
}

pub fn int() -> Type {
    Type::Int
}

pub fn sess(s: SessionType) -> Type {
    Type::Session(s)
}

pub fn close() -> SessionType {
    SessionType::Close
}

pub fn wait() -> SessionType {
    SessionType::Wait
}

fn choice(pairs: &[(&str, SessionType)]) -> BTreeMap<String, SessionType> {
    pairs.iter().map(|(l, s)| (l.to_string(), s.clone())).collect()
}

/// Linear bindings still to be consumed.
type Lin = Vec<(String, Type)>;

/// Unrestricted bindings in scope.
#[derive(Clone, Default)]
struct Env {
    un: Vec<(String, CtxType)>,
}

impl Env {
    fn at_least(&self, n: usize) -> Env {
        Env {
            un: self.un.iter().filter(|(_, t)| t.level >= n).cloned().collect(),
        }
    }
}

pub struct Gen {
    rng: ChaCha8Rng,
    next: usize,
    fuel: usize,
    /// Allow `new` to manufacture channels.
    pub channels: bool,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            next: 0,
            fuel: 0,
            channels: true,
        }
    }

    fn fresh(&mut self, base: &str) -> String {
        let k = self.next;
        self.next += 1;
        format!("{base}{k}")
    }

    fn coin(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn pick<T: Clone>(&mut self, xs: &[T]) -> T {
        xs.choose(&mut self.rng).expect("non-empty").clone()
    }

    // -----------------------------------------------------------------
    // Types

    /// A closed, contractive session type. Recursion variables occur only in
    /// tail position, so every generated type has a dual.
    pub fn session(&mut self, depth: usize) -> SessionType {
        let mut vars = Vec::new();
        self.session_in(depth, &mut vars, false)
    }

    fn session_in(&mut self, depth: usize, vars: &mut Vec<String>, guarded: bool) -> SessionType {
        let roll = self.rng.gen_range(0..if depth == 0 { 3 } else { 9 });
        match roll {
            0 => close(),
            1 => wait(),
            2 if guarded && !vars.is_empty() => SessionType::var(self.pick(vars)),
            2 => close(),
            3 | 4 => {
                let p = self.payload(depth);
                let k = self.session_in(depth - 1, vars, true);
                if roll == 3 {
                    SessionType::out(p, k)
                } else {
                    SessionType::inp(p, k)
                }
            }
            5 | 6 => {
                let n = self.rng.gen_range(1..=3);
                let bs = (0..n)
                    .map(|i| (["A", "B", "C"][i].to_string(), self.session_in(depth - 1, vars, true)))
                    .collect();
                if roll == 5 {
                    SessionType::Select(bs)
                } else {
                    SessionType::Branch(bs)
                }
            }
            _ => {
                let a = self.fresh("a");
                vars.push(a.clone());
                let body = self.session_in(depth - 1, vars, false);
                vars.pop();
                SessionType::rec(a, body)
            }
        }
    }

    fn payload(&mut self, depth: usize) -> Type {
        match self.rng.gen_range(0..6) {
            0 => Type::Unit,
            1 => Type::Bool,
            2 if depth > 1 => sess(self.session(depth / 2)),
            3 => Type::boxed(CtxType::new(vec![], 1, Type::Int)),
            _ => Type::Int,
        }
    }

    /// A well-formed contextual type of level at most `max_level`.
    pub fn ctx_type(&mut self, max_level: usize) -> CtxType {
        let level = self.rng.gen_range(0..=max_level);
        if level == 0 {
            return CtxType::plain(self.simple_type());
        }
        let n = self.rng.gen_range(0..=3);
        let params = (0..n).map(|_| self.ctx_type(level - 1)).collect();
        CtxType::new(params, level, self.simple_type())
    }

    fn simple_type(&mut self) -> Type {
        match self.rng.gen_range(0..7) {
            0 => Type::Unit,
            1 => Type::Bool,
            2 => sess(self.session(2)),
            3 => Type::fun(Type::Int, Mult::Un, Type::Int),
            4 => Type::pair(Type::Int, sess(close())),
            _ => Type::Int,
        }
    }

    /// Small session types for channels that terms hold and consume.
    fn channel_type(&mut self) -> SessionType {
        let opts = [
            close(),
            wait(),
            SessionType::out(int(), close()),
            SessionType::inp(int(), wait()),
            SessionType::out(Type::Bool, SessionType::out(int(), close())),
            SessionType::Branch(choice(&[("A", close()), ("B", SessionType::out(int(), close()))])),
            SessionType::Select(choice(&[("A", wait()), ("B", SessionType::inp(int(), wait()))])),
        ];
        self.pick(&opts)
    }

    fn linear_type(&mut self) -> Type {
        match self.rng.gen_range(0..8) {
            0 => Type::fun(Type::Unit, Mult::Lin, Type::Unit),
            1 => Type::pair(sess(close()), Type::Int),
            _ => sess(self.channel_type()),
        }
    }

    fn code_type(&mut self) -> CtxType {
        let opts = [
            CtxType::new(vec![], 1, int()),
            CtxType::new(vec![CtxType::plain(int())], 1, int()),
            CtxType::new(vec![CtxType::plain(sess(close()))], 1, Type::Unit),
            CtxType::new(vec![CtxType::plain(sess(SessionType::out(int(), close())))], 1, Type::Unit),
            CtxType::new(
                vec![
                    CtxType::plain(sess(close())),
                    CtxType::new(vec![CtxType::plain(sess(close()))], 1, Type::Unit),
                ],
                2,
                Type::Unit,
            ),
        ];
        self.pick(&opts)
    }

    /// Types for intermediate results.
    fn small_type(&mut self) -> Type {
        match self.rng.gen_range(0..12) {
            0 => Type::Unit,
            1 | 2 => Type::Bool,
            3 => Type::fun(int(), Mult::Un, int()),
            4 => Type::fun(Type::Unit, Mult::Lin, Type::Unit),
            5 => Type::pair(int(), Type::Bool),
            6 | 7 => Type::boxed(self.code_type()),
            8 => sess(close()),
            _ => int(),
        }
    }

    // -----------------------------------------------------------------
    // Terms

    /// A well-typed annotated term `Γ ⊢ M : T` over at most four linear
    /// variables. Returns `(Γ, M, T)`.
    pub fn typed_term(&mut self) -> (Context, Term, Type) {
        loop {
            self.fuel = 400;
            let nlin = self.rng.gen_range(0..=4);
            let lin: Lin = (0..nlin).map(|_| (self.fresh("c"), self.linear_type())).collect();
            let nun = self.rng.gen_range(0..=2);
            let mut env = Env::default();
            for _ in 0..nun {
                let t = if self.coin(0.3) {
                    CtxType::plain(int())
                } else {
                    self.code_type()
                };
                env.un.push((self.fresh("u"), t));
            }
            let t = self.small_type();
            let depth = self.rng.gen_range(1..=5);
            if let Some(m) = self.term(&env, &lin, &t, depth) {
                let ctx = Context::from_bindings(
                    env.un.into_iter().chain(lin.into_iter().map(|(x, t)| (x, CtxType::plain(t)))),
                );
                return (ctx, m, t);
            }
        }
    }

    /// A closed well-typed term of a non-session type.
    pub fn closed_term(&mut self) -> (Term, Type) {
        loop {
            self.fuel = 400;
            let t = self.small_type();
            if t.as_session().is_some() {
                continue;
            }
            let depth = self.rng.gen_range(1..=5);
            if let Some(m) = self.term(&Env::default(), &Vec::new(), &t, depth) {
                return (m, t);
            }
        }
    }

    fn split(&mut self, lin: &Lin) -> (Lin, Lin) {
        let mut l = Vec::new();
        let mut r = Vec::new();
        for b in lin {
            if self.coin(0.5) {
                l.push(b.clone());
            } else {
                r.push(b.clone());
            }
        }
        (l, r)
    }

    fn extend(env: &Env, lin: &Lin, x: &str, t: &Type) -> (Env, Lin) {
        let (mut env, mut lin) = (env.clone(), lin.clone());
        if t.is_linear() {
            lin.push((x.to_string(), t.clone()));
        } else {
            env.un.push((x.to_string(), CtxType::plain(t.clone())));
        }
        (env, lin)
    }

    fn term(&mut self, env: &Env, lin: &Lin, t: &Type, depth: usize) -> Option<Term> {
        if self.fuel == 0 {
            return None;
        }
        self.fuel -= 1;
        let mut strategies: Vec<(u32, u8)> = vec![(4, 0), (3, 1), (3, 8)];
        if depth > 0 {
            strategies.extend([(2, 2), (2, 3), (3, 4), (3, 5), (1, 6), (3, 7), (2, 9), (2, 10), (1, 11)]);
            if self.channels {
                strategies.push((1, 12));
            }
        }
        let mut order = Vec::new();
        while !strategies.is_empty() {
            let total: u32 = strategies.iter().map(|s| s.0).sum();
            let mut roll = self.rng.gen_range(0..total);
            let i = strategies
                .iter()
                .position(|s| {
                    if roll < s.0 {
                        true
                    } else {
                        roll -= s.0;
                        false
                    }
                })
                .unwrap();
            order.push(strategies.remove(i).1);
        }
        let d = depth.saturating_sub(1);
        for s in order {
            let r = match s {
                0 => self.variable(env, lin, t),
                1 => self.intro(env, lin, t, d),
                2 => self.bin(env, lin, t, d),
                3 => self.cond(env, lin, t, d),
                4 => self.beta(env, lin, t, d),
                5 => self.let_(env, lin, t, d),
                6 => self.let_pair(env, lin, t, d),
                7 => self.let_box(env, lin, t, d),
                8 => self.consume(env, lin, t, d),
                9 => self.code_var(env, lin, t, d),
                10 => self.apply_un(env, lin, t, d),
                11 => self.fix(env, lin, t, d),
                _ => self.new_channel(env, lin, t, d),
            };
            if r.is_some() {
                return r;
            }
            if self.fuel == 0 {
                return None;
            }
        }
        None
    }

    fn variable(&mut self, env: &Env, lin: &Lin, t: &Type) -> Option<Term> {
        match lin.as_slice() {
            [(x, u)] if u == t => Some(Term::var(x)),
            [] => {
                let cands: Vec<&String> = env
                    .un
                    .iter()
                    .filter(|(_, c)| c.level == 0 && c.body == *t)
                    .map(|(x, _)| x)
                    .collect();
                cands.choose(&mut self.rng).map(|x| Term::var(*x))
            }
            _ => None,
        }
    }

    fn literal(&mut self, t: &Type) -> Option<Term> {
        match t {
            Type::Unit => Some(Term::unit()),
            Type::Int => Some(Term::int(self.rng.gen_range(-3..10))),
            Type::Bool => Some(Term::synth(TermKind::Bool(self.coin(0.5)))),
            _ => None,
        }
    }

    fn intro(&mut self, env: &Env, lin: &Lin, t: &Type, d: usize) -> Option<Term> {
        match t {
            Type::Unit | Type::Int | Type::Bool => {
                if lin.is_empty() {
                    self.literal(t)
                } else {
                    None
                }
            }
            Type::Fun(a, m, b) => {
                if *m == Mult::Un && !lin.is_empty() {
                    return None;
                }
                let x = self.fresh("x");
                let (env2, lin2) = Self::extend(env, lin, &x, a);
                let body = self.term(&env2, &lin2, b, d)?;
                Some(Term::lam(*m, x, (**a).clone(), body))
            }
            Type::Pair(a, b) => {
                let (l, r) = self.split(lin);
                let ma = self.term(env, &l, a, d)?;
                let mb = self.term(env, &r, b, d)?;
                Some(Term::pair(ma, mb))
            }
            Type::Boxed(ct) => {
                if !lin.is_empty() {
                    return None;
                }
                let v = self.ctx_value(env, ct, d)?;
                Some(Term::synth(TermKind::Boxed(Box::new(v))))
            }
            Type::Session(_) => None,
        }
    }

    /// `(z̄:τ̄)^n. M` of type `ct`: the body sees the outer bindings of level
    /// at least `n` and the binders.
    fn ctx_value(&mut self, env: &Env, ct: &CtxType, d: usize) -> Option<CtxValue> {
        let mut inner = env.at_least(ct.level);
        let mut lin = Vec::new();
        let mut binders = Vec::new();
        for p in &ct.params {
            let z = self.fresh("z");
            if p.level == 0 && p.body.is_linear() {
                lin.push((z.clone(), p.body.clone()));
            } else {
                inner.un.push((z.clone(), p.clone()));
            }
            binders.push((z, Some(p.clone())));
        }
        let body = self.term(&inner, &lin, &ct.body, d)?;
        Some(CtxValue {
            binders,
            level: Some(ct.level),
            body,
        })
    }

    fn bin(&mut self, env: &Env, lin: &Lin, t: &Type, d: usize) -> Option<Term> {
        let (op, operand) = match t {
            Type::Int => (self.pick(&[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Mod]), int()),
            Type::Bool if self.coin(0.3) => (BinOp::Eq, Type::Bool),
            Type::Bool => (self.pick(&[BinOp::Eq, BinOp::Lt, BinOp::Gt, BinOp::Le]), int()),
            _ => return None,
        };
        let (l, r) = self.split(lin);
        let a = self.term(env, &l, &operand, d)?;
        let b = self.term(env, &r, &operand, d)?;
        Some(Term::synth(TermKind::Bin(op, Box::new(a), Box::new(b))))
    }

    fn cond(&mut self, env: &Env, lin: &Lin, t: &Type, d: usize) -> Option<Term> {
        let (l, r) = self.split(lin);
        let c = self.term(env, &l, &Type::Bool, d)?;
        let a = self.term(env, &r, t, d)?;
        let b = self.term(env, &r, t, d)?;
        Some(Term::synth(TermKind::If(Box::new(c), Box::new(a), Box::new(b))))
    }

    fn beta(&mut self, env: &Env, lin: &Lin, t: &Type, d: usize) -> Option<Term> {
        let a = self.small_type();
        let (l, r) = self.split(lin);
        let x = self.fresh("y");
        let (env2, lin2) = Self::extend(env, &r, &x, &a);
        let body = self.term(&env2, &lin2, t, d)?;
        let arg = self.term(env, &l, &a, d)?;
        let m = if r.is_empty() && self.coin(0.5) { Mult::Un } else { Mult::Lin };
        Some(Term::app(Term::lam(m, x, a, body), arg))
    }

    fn let_(&mut self, env: &Env, lin: &Lin, t: &Type, d: usize) -> Option<Term> {
        let a = self.small_type();
        let (l, r) = self.split(lin);
        let bound = self.term(env, &l, &a, d)?;
        let x = self.fresh("v");
        let (env2, lin2) = Self::extend(env, &r, &x, &a);
        let body = self.term(&env2, &lin2, t, d)?;
        Some(Term::let_in(x, bound, body))
    }

    fn let_pair(&mut self, env: &Env, lin: &Lin, t: &Type, d: usize) -> Option<Term> {
        let (a, b) = (self.small_type(), self.small_type());
        let (l, r) = self.split(lin);
        let bound = self.term(env, &l, &Type::pair(a.clone(), b.clone()), d)?;
        let (x, y) = (self.fresh("p"), self.fresh("q"));
        let (env2, lin2) = Self::extend(env, &r, &x, &a);
        let (env2, lin2) = Self::extend(&env2, &lin2, &y, &b);
        let body = self.term(&env2, &lin2, t, d)?;
        Some(Term::let_pair(x, y, bound, body))
    }

    fn let_box(&mut self, env: &Env, lin: &Lin, t: &Type, d: usize) -> Option<Term> {
        let ct = self.code_type();
        let (l, r) = self.split(lin);
        let bound = self.term(env, &l, &Type::boxed(ct.clone()), d)?;
        let u = self.fresh("w");
        let mut env2 = env.clone();
        env2.un.push((u.clone(), ct));
        let body = self.term(&env2, &r, t, d)?;
        Some(Term::synth(TermKind::LetBox(u, Box::new(bound), Box::new(body))))
    }

    fn constant(c: Const, t: Type) -> Term {
        Term::synth(TermKind::Const(c, Some(t)))
    }

    /// Uses up one linear variable and continues with the rest.
    fn consume(&mut self, env: &Env, lin: &Lin, t: &Type, d: usize) -> Option<Term> {
        if lin.is_empty() {
            return None;
        }
        let i = self.rng.gen_range(0..lin.len());
        let mut rest = lin.clone();
        let (x, a) = rest.remove(i);
        let xv = Term::var(&x);
        match &a {
            Type::Session(s) => {
                let s = unfold_head(s);
                let st = sess(s.clone());
                match &s {
                    SessionType::Close | SessionType::Wait => {
                        let c = if s == SessionType::Close { Const::Close } else { Const::Wait };
                        let op = Term::app(Self::constant(c, Type::fun(st, Mult::Un, Type::Unit)), xv);
                        let k = self.term(env, &rest, t, d)?;
                        Some(Term::let_in(self.fresh("_"), op, k))
                    }
                    SessionType::Out(p, k) => {
                        let (l, r) = self.split(&rest);
                        let v = self.term(env, &l, p, d)?;
                        let ty = Type::fun(
                            (**p).clone(),
                            Mult::Un,
                            Type::fun(st, Mult::Lin, sess((**k).clone())),
                        );
                        let op = Term::apps(Self::constant(Const::Send, ty), [v, xv]);
                        let y = self.fresh("c");
                        let (env2, lin2) = Self::extend(env, &r, &y, &sess((**k).clone()));
                        let body = self.term(&env2, &lin2, t, d)?;
                        Some(Term::let_in(y, op, body))
                    }
                    SessionType::In(p, k) => {
                        let ty = Type::fun(st, Mult::Un, Type::pair((**p).clone(), sess((**k).clone())));
                        let op = Term::app(Self::constant(Const::Receive, ty), xv);
                        let (n, y) = (self.fresh("n"), self.fresh("c"));
                        let (env2, lin2) = Self::extend(env, &rest, &n, p);
                        let (env2, lin2) = Self::extend(&env2, &lin2, &y, &sess((**k).clone()));
                        let body = self.term(&env2, &lin2, t, d)?;
                        Some(Term::let_pair(n, y, op, body))
                    }
                    SessionType::Select(bs) => {
                        let labels: Vec<&String> = bs.keys().collect();
                        let l = (*labels.choose(&mut self.rng)?).clone();
                        let k = bs[&l].clone();
                        let ty = Type::fun(st, Mult::Un, sess(k.clone()));
                        let op = Term::app(Self::constant(Const::Select(l), ty), xv);
                        let y = self.fresh("c");
                        let (env2, lin2) = Self::extend(env, &rest, &y, &sess(k));
                        let body = self.term(&env2, &lin2, t, d)?;
                        Some(Term::let_in(y, op, body))
                    }
                    SessionType::Branch(bs) => {
                        let mut arms = Vec::new();
                        for (l, k) in bs {
                            let y = self.fresh("c");
                            let (env2, lin2) = Self::extend(env, &rest, &y, &sess(k.clone()));
                            let body = self.term(&env2, &lin2, t, d)?;
                            arms.push(Arm {
                                label: l.clone(),
                                var: y,
                                body,
                            });
                        }
                        Some(Term::synth(TermKind::Match(Box::new(xv), arms)))
                    }
                    _ => None,
                }
            }
            Type::Fun(p, _, r) => {
                let (l, rest) = self.split(&rest);
                let arg = self.term(env, &l, p, d)?;
                let y = self.fresh("r");
                let (env2, lin2) = Self::extend(env, &rest, &y, r);
                let body = self.term(&env2, &lin2, t, d)?;
                Some(Term::let_in(y, Term::app(xv, arg), body))
            }
            Type::Pair(p, q) => {
                let (y, z) = (self.fresh("p"), self.fresh("q"));
                let (env2, lin2) = Self::extend(env, &rest, &y, p);
                let (env2, lin2) = Self::extend(&env2, &lin2, &z, q);
                let body = self.term(&env2, &lin2, t, d)?;
                Some(Term::let_pair(y, z, xv, body))
            }
            _ => None,
        }
    }

    /// `u[σ̄]` for a code variable `u` whose body type is the target.
    fn code_var(&mut self, env: &Env, lin: &Lin, t: &Type, d: usize) -> Option<Term> {
        let cands: Vec<(String, CtxType)> = env
            .un
            .iter()
            .filter(|(_, c)| c.level >= 1 && c.body == *t)
            .cloned()
            .collect();
        let (u, ct) = cands.choose(&mut self.rng)?.clone();
        let plain: Vec<usize> = (0..ct.params.len()).filter(|&i| ct.params[i].level == 0).collect();
        if plain.is_empty() && !lin.is_empty() {
            return None;
        }
        let mut shares: Vec<Lin> = vec![Vec::new(); ct.params.len()];
        for b in lin {
            let i = *plain.choose(&mut self.rng)?;
            shares[i].push(b.clone());
        }
        let mut subs = Vec::new();
        for (p, share) in ct.params.iter().zip(&shares) {
            let v = if p.level == 0 {
                CtxValue {
                    binders: Vec::new(),
                    level: Some(0),
                    body: self.term(env, share, &p.body, d)?,
                }
            } else {
                self.ctx_value(env, p, d)?
            };
            subs.push(v);
        }
        Some(Term::synth(TermKind::Var(u, subs)))
    }

    fn apply_un(&mut self, env: &Env, lin: &Lin, t: &Type, d: usize) -> Option<Term> {
        let cands: Vec<(String, Type)> = env
            .un
            .iter()
            .filter_map(|(x, c)| match &c.body {
                Type::Fun(a, _, b) if c.level == 0 && **b == *t => Some((x.clone(), (**a).clone())),
                _ => None,
            })
            .collect();
        let (f, a) = cands.choose(&mut self.rng)?.clone();
        let arg = self.term(env, lin, &a, d)?;
        Some(Term::app(Term::var(f), arg))
    }

    /// `fix (λf. λn. if n < 1 then k else f (n - 1)) m`.
    fn fix(&mut self, env: &Env, lin: &Lin, t: &Type, d: usize) -> Option<Term> {
        if *t != Type::Int {
            return None;
        }
        let base = self.term(env, &Vec::new(), &int(), d)?;
        let start = self.term(env, lin, &int(), d)?;
        let ii = Type::fun(int(), Mult::Un, int());
        let (f, n) = (self.fresh("f"), self.fresh("n"));
        let step = Term::synth(TermKind::If(
            Box::new(Term::synth(TermKind::Bin(BinOp::Lt, Box::new(Term::var(&n)), Box::new(Term::int(1))))),
            Box::new(base),
            Box::new(Term::app(
                Term::var(&f),
                Term::synth(TermKind::Bin(BinOp::Sub, Box::new(Term::var(&n)), Box::new(Term::int(1)))),
            )),
        ));
        let fun = Term::lam(Mult::Un, &f, ii.clone(), Term::lam(Mult::Un, &n, int(), step));
        let fix_ty = Type::fun(Type::fun(ii.clone(), Mult::Un, ii.clone()), Mult::Un, ii);
        Some(Term::apps(Self::constant(Const::Fix, fix_ty), [fun, start]))
    }

    /// `let (a, b) = new unit in M` with both ends to be consumed by `M`.
    fn new_channel(&mut self, env: &Env, lin: &Lin, t: &Type, d: usize) -> Option<Term> {
        let s = self.channel_type();
        let ds = dualize(&s).ok()?;
        let ty = Type::fun(Type::Unit, Mult::Un, Type::pair(sess(s.clone()), sess(ds.clone())));
        let (a, b) = (self.fresh("a"), self.fresh("b"));
        let mut lin2 = lin.clone();
        lin2.push((a.clone(), sess(s)));
        lin2.push((b.clone(), sess(ds)));
        let body = self.term(env, &lin2, t, d)?;
        Some(Term::let_pair(a, b, Term::app(Self::constant(Const::New, ty), Term::unit()), body))
    }

    // -----------------------------------------------------------------
    // Mutations

    /// A small random edit that usually (not always) breaks typing:
    /// dropping or duplicating a variable, flipping a multiplicity, changing
    /// an annotation or a level.
    pub fn mutate(&mut self, m: &Term) -> Term {
        let names = all_vars(m);
        for _ in 0..20 {
            let n = count(m);
            let mut k = self.rng.gen_range(0..n);
            let which = self.rng.gen_range(0..5);
            let replacement_ty = self.small_type();
            let name = names.choose(&mut self.rng).cloned();
            let up = self.coin(0.5);
            let mut f = |t: &Term| -> Option<Term> {
                use TermKind::*;
                let kind = match (&t.kind, which) {
                    (Var(..), 0) => Unit,
                    (Unit | Int(_) | Bool(_), 1) => Var(name.clone()?, Vec::new()),
                    (Lam(m, x, a, b), 2) => {
                        let m = if *m == Mult::Lin { Mult::Un } else { Mult::Lin };
                        Lam(m, x.clone(), a.clone(), b.clone())
                    }
                    (Lam(m, x, _, b), 3) => Lam(*m, x.clone(), Some(replacement_ty.clone()), b.clone()),
                    (Boxed(v), 4) => {
                        let mut v = (**v).clone();
                        let l = v.level.unwrap_or(1);
                        v.level = Some(if up { l + 1 } else { l.saturating_sub(1) });
                        Boxed(Box::new(v))
                    }
                    _ => return None,
                };
                Some(Term::new(kind, t.span))
            };
            let mut hit = false;
            let out = map_nth(m, &mut k, &mut f, &mut hit);
            if hit {
                return out;
            }
        }
        m.clone()
    }
}

fn count(m: &Term) -> usize {
    let mut n = 0;
    visit(m, &mut |_| n += 1);
    n
}

fn all_vars(m: &Term) -> Vec<String> {
    let mut out = Vec::new();
    visit(m, &mut |t| match &t.kind {
        TermKind::Var(x, _) => out.push(x.clone()),
        TermKind::Lam(_, x, _, _) | TermKind::Let(x, _, _) => out.push(x.clone()),
        _ => {}
    });
    out.sort();
    out.dedup();
    out
}

fn children(m: &Term) -> Vec<&Term> {
    use TermKind::*;
    match &m.kind {
        Var(_, subs) => subs.iter().map(|s| &s.body).collect(),
        Const(..) | Unit | Int(_) | Bool(_) => vec![],
        Lam(_, _, _, b) => vec![b],
        App(a, b) | Pair(a, b) | Bin(_, a, b) | LetPair(_, _, a, b) | Let(_, a, b) | LetBox(_, a, b) => {
            vec![a, b]
        }
        Boxed(v) => vec![&v.body],
        Match(s, arms) => std::iter::once(&**s).chain(arms.iter().map(|a| &a.body)).collect(),
        If(c, a, b) => vec![c, a, b],
    }
}

pub fn visit(m: &Term, f: &mut dyn FnMut(&Term)) {
    f(m);
    for c in children(m) {
        visit(c, f);
    }
}

/// Rebuilds `m`, offering the `k`-th node (pre-order) to `f`.
fn map_nth(m: &Term, k: &mut usize, f: &mut dyn FnMut(&Term) -> Option<Term>, hit: &mut bool) -> Term {
    use TermKind::*;
    if *k == 0 && !*hit {
        if let Some(t) = f(m) {
            *hit = true;
            return t;
        }
    }
    *k = k.saturating_sub(1);
    let mut go = |t: &Term| Box::new(map_nth(t, k, f, hit));
    let kind = match &m.kind {
        Var(x, subs) => Var(
            x.clone(),
            subs.iter()
                .map(|s| CtxValue {
                    binders: s.binders.clone(),
                    level: s.level,
                    body: *go(&s.body),
                })
                .collect(),
        ),
        Const(..) | Unit | Int(_) | Bool(_) => m.kind.clone(),
        Lam(mu, x, a, b) => Lam(*mu, x.clone(), a.clone(), go(b)),
        App(a, b) => App(go(a), go(b)),
        Pair(a, b) => Pair(go(a), go(b)),
        Bin(op, a, b) => Bin(*op, go(a), go(b)),
        LetPair(x, y, a, b) => LetPair(x.clone(), y.clone(), go(a), go(b)),
        Let(x, a, b) => Let(x.clone(), go(a), go(b)),
        LetBox(u, a, b) => LetBox(u.clone(), go(a), go(b)),
        Boxed(v) => Boxed(Box::new(CtxValue {
            binders: v.binders.clone(),
            level: v.level,
            body: *go(&v.body),
        })),
        Match(s, arms) => Match(
            go(s),
            arms.iter()
                .map(|a| Arm {
                    label: a.label.clone(),
                    var: a.var.clone(),
                    body: *go(&a.body),
                })
                .collect(),
        ),
        If(c, a, b) => If(go(c), go(a), go(b)),
    };
    Term::new(kind, m.span)
}
