//! The concurrent runtime: a pool of threads and a table of channels.
//!
//! Restriction binders are flattened into the channel table, so a
//! configuration is a process up to structural congruence. Communication is
//! synchronous: a request waits until the thread holding the other endpoint
//! issues the matching one.

mod trace;

pub use trace::TraceEvent;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::check::Process;
use crate::eval::{lift, step_term, substitute, EvalContext, Fresh, Request, Rule, StepError, StepOutcome};
use crate::term::Term;
use crate::types::{dualize, unfold_head, Name, SessionType, Type};

pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

#[derive(Clone, Debug)]
pub struct Thread {
    pub id: usize,
    /// The whole term `E[r]`; `pending` caches its decomposition once it is
    /// known to be a request.
    pub term: Term,
    pub done: bool,
    pending: Option<(Request, EvalContext)>,
}

impl Thread {
    pub fn pending(&self) -> Option<&Request> {
        self.pending.as_ref().map(|(r, _)| r)
    }
}

#[derive(Clone, Debug)]
pub struct Channel {
    pub id: usize,
    pub ends: [Name; 2],
    /// Current session types of the two ends, when the program was typed.
    pub types: Option<[SessionType; 2]>,
}

impl Channel {
    pub fn label(&self) -> String {
        format!("ch{}", self.id)
    }

    fn side(&self, x: &str) -> Option<usize> {
        self.ends.iter().position(|e| e == x)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RuntimeError {
    #[error("thread t{thread} is stuck: {source}")]
    Stuck { thread: usize, source: StepError },
    #[error("{0}")]
    Mismatch(RuntimeErrorReport),
    #[error("`{0}` is not an endpoint of any open channel")]
    UnknownEndpoint(Name),
}

/// Two threads acting on the two ends of a channel with operations that do
/// not fit together.
#[derive(Clone, Debug, PartialEq)]
pub struct RuntimeErrorReport {
    pub channel: String,
    pub threads: [usize; 2],
    pub requests: [String; 2],
}

impl fmt::Display for RuntimeErrorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "runtime error on {}: t{} does `{}` while t{} does `{}`",
            self.channel, self.threads[0], self.requests[0], self.threads[1], self.requests[1]
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockedThread {
    pub thread: usize,
    pub request: String,
    pub endpoint: Option<Name>,
    /// The thread holding the other end, and what it is doing.
    pub peer: Option<(usize, String)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeadlockReport {
    pub blocked: Vec<BlockedThread>,
    /// `(t, u)`: thread `t` waits for thread `u`.
    pub waits_for: Vec<(usize, usize)>,
}

impl fmt::Display for DeadlockReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "deadlock: {} thread(s) blocked", self.blocked.len())?;
        for b in &self.blocked {
            write!(f, "  t{} blocked on `{}`", b.thread, b.request)?;
            match &b.peer {
                Some((u, what)) => writeln!(f, "; peer t{u} is {what}")?,
                None => writeln!(f, "; no thread holds the other end")?,
            }
        }
        let edges: Vec<String> = self.waits_for.iter().map(|(t, u)| format!("t{t} -> t{u}")).collect();
        write!(f, "  waits-for: {}", edges.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    /// Every thread finished; the value of each, by thread id.
    Done(Vec<(usize, Term)>),
    Deadlock(DeadlockReport),
    StepLimit,
}

impl Outcome {
    /// The value left by the initial thread.
    pub fn main_value(&self) -> Option<&Term> {
        match self {
            Outcome::Done(vs) => vs.iter().find(|(t, _)| *t == 0).map(|(_, v)| v),
            _ => None,
        }
    }
}

enum Progress {
    Stepped,
    Done,
    Deadlock,
}

#[derive(Clone, Debug)]
pub struct Configuration {
    pub threads: Vec<Thread>,
    pub channels: Vec<Channel>,
    pub events: Vec<TraceEvent>,
    /// Type of the initial thread's term, when known.
    pub main_type: Option<Type>,
    fresh: Fresh,
    next_channel: usize,
    rng: Option<ChaCha8Rng>,
}

impl Configuration {
    /// A single thread running `m`.
    pub fn boot(m: Term, main_type: Option<Type>) -> Configuration {
        Configuration {
            threads: vec![Thread {
                id: 0,
                term: m,
                done: false,
                pending: None,
            }],
            channels: Vec::new(),
            events: Vec::new(),
            main_type,
            fresh: Fresh::new(),
            next_channel: 1,
            rng: None,
        }
    }

    /// Visit runnable threads in an order drawn from `seed` instead of by
    /// increasing id.
    pub fn randomize(&mut self, seed: u64) {
        self.rng = Some(ChaCha8Rng::seed_from_u64(seed));
    }

    /// A configuration built by hand: threads over already-open channels.
    /// Used to probe the runtime on terms the checker would reject.
    pub fn from_parts(threads: Vec<Term>, channels: Vec<([Name; 2], Option<[SessionType; 2]>)>) -> Configuration {
        let mut c = Configuration::boot(Term::unit(), None);
        c.threads = threads
            .into_iter()
            .enumerate()
            .map(|(id, term)| Thread {
                id,
                term,
                done: false,
                pending: None,
            })
            .collect();
        for (ends, types) in channels {
            let id = c.next_channel;
            c.next_channel += 1;
            c.channels.push(Channel { id, ends, types });
        }
        c
    }

    fn event(&mut self, rule: Rule, threads: Vec<usize>, channel: Option<String>, payload: Option<String>) {
        let step = self.events.len() + 1;
        self.events.push(TraceEvent {
            step,
            rule,
            threads,
            channel,
            payload,
        });
    }

    fn channel_of(&self, x: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.side(x).is_some())
    }

    /// The thread in whose term `x` occurs.
    pub fn owner(&self, x: &str) -> Option<usize> {
        self.threads
            .iter()
            .position(|t| !t.done && t.term.mentions(x))
    }

    fn peer_end(&self, x: &str) -> Option<Name> {
        let c = &self.channels[self.channel_of(x)?];
        let side = c.side(x)?;
        Some(c.ends[1 - side].clone())
    }

    /// Decomposes thread `i` if needed, applying a pure step when there is
    /// one. Returns whether a reduction happened.
    fn prepare(&mut self, i: usize) -> Result<bool, RuntimeError> {
        let t = &mut self.threads[i];
        if t.done || t.pending.is_some() {
            return Ok(false);
        }
        let id = t.id;
        match step_term(&t.term, &mut self.fresh).map_err(|source| RuntimeError::Stuck { thread: id, source })? {
            StepOutcome::IsValue => t.done = true,
            StepOutcome::Blocked(r, ctx) => t.pending = Some((r, ctx)),
            StepOutcome::Stepped(next, rule) => {
                t.term = next;
                self.event(rule, vec![id], None, None);
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn resume(&mut self, i: usize, m: Term) {
        let t = &mut self.threads[i];
        let (_, ctx) = t.pending.take().expect("resuming a thread without a request");
        t.term = ctx.plug(m);
    }

    fn spawn(&mut self, m: Term) -> usize {
        let id = self.threads.len();
        self.threads.push(Thread {
            id,
            term: m,
            done: false,
            pending: None,
        });
        id
    }

    fn open_channel(&mut self, s: Option<SessionType>) -> (Name, Name, String) {
        let id = self.next_channel;
        self.next_channel += 1;
        let ends = [format!("ch{id}#a"), format!("ch{id}#b")];
        let types = s.and_then(|s| dualize(&s).ok().map(|d| [s, d]));
        let ch = Channel {
            id,
            ends: ends.clone(),
            types,
        };
        let label = ch.label();
        self.channels.push(ch);
        let [a, b] = ends;
        (a, b, label)
    }

    /// Tries to make thread `i` progress by one reduction.
    fn try_thread(&mut self, i: usize) -> Result<bool, RuntimeError> {
        if self.prepare(i)? {
            return Ok(true);
        }
        let t = &self.threads[i];
        if t.done {
            return Ok(false);
        }
        let id = t.id;
        let req = t.pending.as_ref().map(|(r, _)| r.clone()).unwrap();
        match req {
            Request::New(annot) => {
                let s = annot.as_ref().and_then(new_session);
                let (a, b, label) = self.open_channel(s);
                self.resume(i, Term::pair(Term::var(a), Term::var(b)));
                self.event(Rule::New, vec![id], Some(label), None);
                Ok(true)
            }
            Request::Fork(v) => {
                let child = self.spawn(Term::app(v, Term::unit()));
                self.resume(i, Term::unit());
                self.event(Rule::Fork, vec![id, child], None, None);
                Ok(true)
            }
            Request::ForkWith(v, annot) => {
                let s = annot.as_ref().and_then(fork_with_session);
                let (a, b, label) = self.open_channel(s);
                self.event(Rule::New, vec![id], Some(label), None);
                let child = self.spawn(Term::app(v, Term::var(a)));
                self.resume(i, Term::var(b));
                self.event(Rule::Fork, vec![id, child], None, None);
                Ok(true)
            }
            _ => self.communicate(i),
        }
    }

    fn communicate(&mut self, i: usize) -> Result<bool, RuntimeError> {
        let req = self.threads[i].pending().cloned().unwrap();
        let x = req.subject().cloned().unwrap();
        let ci = self.channel_of(&x).ok_or_else(|| RuntimeError::UnknownEndpoint(x.clone()))?;
        let y = self.peer_end(&x).unwrap();
        let Some(j) = self.threads.iter().position(|t| t.pending().and_then(Request::subject) == Some(&y)) else {
            return Ok(false);
        };
        let other = self.threads[j].pending().cloned().unwrap();
        let (ti, tj) = (self.threads[i].id, self.threads[j].id);
        let label = self.channels[ci].label();
        // order the pair as (active, passive) so each rule is written once
        match (&req, &other) {
            (Request::Close(_), Request::Wait(_)) | (Request::Wait(_), Request::Close(_)) => {
                self.resume(i, Term::unit());
                self.resume(j, Term::unit());
                self.channels.remove(ci);
                let (c, w) = if matches!(req, Request::Close(_)) { (ti, tj) } else { (tj, ti) };
                self.event(Rule::Close, vec![c, w], Some(label), Some("close".into()));
            }
            (Request::Send(v, _), Request::Receive(_)) | (Request::Receive(_), Request::Send(v, _)) => {
                let (s, r, sx, ry) = if matches!(req, Request::Send(..)) { (i, j, &x, &y) } else { (j, i, &y, &x) };
                let (sx, ry) = (sx.clone(), ry.clone());
                let payload = v.erase().to_string();
                self.advance(ci, &sx, None);
                self.resume(s, Term::var(sx.clone()));
                self.resume(r, Term::pair(v.clone(), Term::var(ry)));
                let ids = vec![self.threads[s].id, self.threads[r].id];
                self.event(Rule::Com, ids, Some(label), Some(payload));
            }
            (Request::Select(l, _), Request::Match(_, arms)) | (Request::Match(_, arms), Request::Select(l, _)) => {
                let (s, m, sx, my) = if matches!(req, Request::Select(..)) { (i, j, &x, &y) } else { (j, i, &y, &x) };
                let (sx, my) = (sx.clone(), my.clone());
                let Some(arm) = arms.iter().find(|a| &a.label == l) else {
                    return Err(self.mismatch(ci, i, j));
                };
                let body = substitute(&lift(Term::var(my.clone())), &arm.var, &arm.body, &mut self.fresh)
                    .map_err(|e| RuntimeError::Stuck {
                        thread: self.threads[m].id,
                        source: e.into(),
                    })?;
                self.advance(ci, &sx, Some(l));
                self.resume(s, Term::var(sx));
                self.resume(m, body);
                let ids = vec![self.threads[s].id, self.threads[m].id];
                self.event(Rule::Branch, ids, Some(label), Some(l.clone()));
            }
            _ => return Err(self.mismatch(ci, i, j)),
        }
        Ok(true)
    }

    fn mismatch(&self, ci: usize, i: usize, j: usize) -> RuntimeError {
        RuntimeError::Mismatch(RuntimeErrorReport {
            channel: self.channels[ci].label(),
            threads: [self.threads[i].id, self.threads[j].id],
            requests: [
                self.threads[i].pending().map(Request::describe).unwrap_or_default(),
                self.threads[j].pending().map(Request::describe).unwrap_or_default(),
            ],
        })
    }

    /// Moves the recorded types of channel `ci` past one message sent from
    /// `from` (a value when `label` is `None`, a choice otherwise).
    fn advance(&mut self, ci: usize, from: &str, label: Option<&String>) {
        let ch = &mut self.channels[ci];
        let Some(side) = ch.side(from) else { return };
        let Some(types) = &mut ch.types else { return };
        let next = |s: &SessionType| -> Option<SessionType> {
            match (unfold_head(s), label) {
                (SessionType::Out(_, k) | SessionType::In(_, k), None) => Some(*k),
                (SessionType::Select(bs) | SessionType::Branch(bs), Some(l)) => bs.get(l).cloned(),
                _ => None,
            }
        };
        match (next(&types[side]), next(&types[1 - side])) {
            (Some(a), Some(b)) => {
                types[side] = a;
                types[1 - side] = b;
            }
            _ => ch.types = None,
        }
    }

    fn order(&mut self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.threads.len()).collect();
        if let Some(rng) = &mut self.rng {
            idx.shuffle(rng);
        }
        idx
    }

    fn step_once(&mut self) -> Result<Progress, RuntimeError> {
        for i in self.order() {
            if self.try_thread(i)? {
                return Ok(Progress::Stepped);
            }
        }
        if self.threads.iter().all(|t| t.done) {
            Ok(Progress::Done)
        } else {
            Ok(Progress::Deadlock)
        }
    }

    /// Applies one reduction. `Ok(None)` means a reduction happened.
    pub fn step_config(&mut self) -> Result<Option<Outcome>, RuntimeError> {
        Ok(match self.step_once()? {
            Progress::Stepped => None,
            Progress::Done => Some(Outcome::Done(
                self.threads.iter().map(|t| (t.id, t.term.clone())).collect(),
            )),
            Progress::Deadlock => Some(Outcome::Deadlock(self.deadlock_report())),
        })
    }

    /// Runs until every thread is done, a deadlock, or `max_steps` events.
    pub fn run(&mut self, max_steps: usize) -> Result<Outcome, RuntimeError> {
        self.run_observed(max_steps, |_| Ok(()))
    }

    /// Like [`Configuration::run`], calling `observe` after every reduction.
    pub fn run_observed(
        &mut self,
        max_steps: usize,
        mut observe: impl FnMut(&Configuration) -> Result<(), RuntimeError>,
    ) -> Result<Outcome, RuntimeError> {
        loop {
            if self.events.len() >= max_steps {
                return Ok(Outcome::StepLimit);
            }
            if let Some(report) = detect_runtime_error(self) {
                return Err(RuntimeError::Mismatch(report));
            }
            match self.step_config()? {
                None => observe(self)?,
                Some(o) => return Ok(o),
            }
        }
    }

    pub fn deadlock_report(&self) -> DeadlockReport {
        let mut blocked = Vec::new();
        let mut waits_for = Vec::new();
        for t in self.threads.iter().filter(|t| !t.done) {
            let Some(req) = t.pending() else { continue };
            let endpoint = req.subject().cloned();
            let peer = endpoint.as_ref().and_then(|x| self.peer_end(x)).and_then(|y| {
                let u = self.owner(&y)?;
                let what = match self.threads[u].pending() {
                    Some(r) => format!("blocked on `{}`", r.describe()),
                    None => "running".to_string(),
                };
                Some((self.threads[u].id, what))
            });
            if let Some((u, _)) = &peer {
                waits_for.push((t.id, *u));
            }
            blocked.push(BlockedThread {
                thread: t.id,
                request: req.describe(),
                endpoint,
                peer,
            });
        }
        DeadlockReport { blocked, waits_for }
    }

    /// Live endpoints and the threads they occur in.
    pub fn endpoint_occurrences(&self) -> BTreeMap<Name, BTreeSet<usize>> {
        let mut out: BTreeMap<Name, BTreeSet<usize>> = BTreeMap::new();
        for c in &self.channels {
            for e in &c.ends {
                out.entry(e.clone()).or_default();
            }
        }
        for t in &self.threads {
            for x in t.term.free_vars() {
                if let Some(s) = out.get_mut(&x) {
                    s.insert(t.id);
                }
            }
        }
        out
    }

    /// The configuration as a process `(ν..)(⟨M0⟩ | ⟨M1⟩ | ...)`, when every
    /// channel has known types.
    pub fn to_process(&self) -> Option<Process> {
        let mut threads = self.threads.iter().rev().map(|t| {
            let ty = if t.id == 0 {
                self.main_type.clone().unwrap_or(Type::Unit)
            } else {
                Type::Unit
            };
            Process::Thread(t.term.clone(), ty)
        });
        let last = threads.next()?;
        let mut p = threads.fold(last, |acc, t| Process::par(t, acc));
        for c in self.channels.iter().rev() {
            let [s, r] = c.types.clone()?;
            p = Process::res(c.ends[0].clone(), s, c.ends[1].clone(), r, p);
        }
        Some(p)
    }
}

/// Unit -> S * Dual S  gives S.
fn new_session(t: &Type) -> Option<SessionType> {
    match t {
        Type::Fun(_, _, r) => match &**r {
            Type::Pair(a, _) => a.as_session().cloned(),
            _ => None,
        },
        _ => None,
    }
}

/// (S ->m Unit) -> Dual S  gives S, the type of the forked end.
fn fork_with_session(t: &Type) -> Option<SessionType> {
    match t {
        Type::Fun(f, _, _) => match &**f {
            Type::Fun(s, _, _) => s.as_session().cloned(),
            _ => None,
        },
        _ => None,
    }
}

/// Reports two threads that act on the two ends of one channel with
/// operations that form no redex. Never fires on well-typed programs.
pub fn detect_runtime_error(c: &Configuration) -> Option<RuntimeErrorReport> {
    for ch in &c.channels {
        let holders: Vec<(usize, &Request)> = ch
            .ends
            .iter()
            .filter_map(|e| {
                c.threads
                    .iter()
                    .find(|t| t.pending().and_then(Request::subject) == Some(e))
                    .map(|t| (t.id, t.pending().unwrap()))
            })
            .collect();
        if let [(t, a), (u, b)] = holders[..] {
            if !forms_redex(a, b) {
                return Some(RuntimeErrorReport {
                    channel: ch.label(),
                    threads: [t, u],
                    requests: [a.describe(), b.describe()],
                });
            }
        }
    }
    None
}

fn forms_redex(a: &Request, b: &Request) -> bool {
    use Request::*;
    match (a, b) {
        (Close(_), Wait(_)) | (Wait(_), Close(_)) => true,
        (Send(..), Receive(_)) | (Receive(_), Send(..)) => true,
        (Select(l, _), Match(_, arms)) | (Match(_, arms), Select(l, _)) => arms.iter().any(|a| &a.label == l),
        _ => false,
    }
}

/// Decomposes every thread without reducing, so that pending requests are
/// visible to [`detect_runtime_error`].
pub fn settle(c: &mut Configuration) -> Result<(), RuntimeError> {
    for i in 0..c.threads.len() {
        let t = &mut c.threads[i];
        if t.done || t.pending.is_some() {
            continue;
        }
        let id = t.id;
        match step_term(&t.term, &mut c.fresh).map_err(|source| RuntimeError::Stuck { thread: id, source })? {
            StepOutcome::Blocked(r, ctx) => t.pending = Some((r, ctx)),
            StepOutcome::IsValue => t.done = true,
            StepOutcome::Stepped(..) => {}
        }
    }
    Ok(())
}
