//! Algorithmic type synthesis `Γ ⊢ M ⇒ T ; Δ`: synthesise a type for `M`
//! under `Γ` and return the unused part `Δ` of the context, together with
//! the fully annotated (elaborated) term.

use super::eta::eta_expand;
use crate::constants::{instantiate_annotated, instantiate_from_args, SchemeError};
use crate::context::Context;
use crate::diag::{Code, Diagnostic};
use crate::span::Span;
use crate::syntax::resolve::type_error_code;
use crate::syntax::Printer;
use crate::term::{Arm, BinOp, CtxValue, Term, TermKind};
use crate::types::{
    check_type, equal, equal_ctx, unfold_head, well_formed, CtxType, Mult, Name, SessionType,
    Type,
};

pub type CResult<T> = Result<T, Diagnostic>;

#[derive(Clone, Debug)]
pub struct Synth {
    pub ty: Type,
    pub residual: Context,
    /// The input term with every constant instantiated and every
    /// contextual value carrying its binder types and level.
    pub term: Term,
}

#[derive(Default)]
pub struct Checker {
    printer: Printer,
    /// Variables in lexical scope, innermost last.
    scope: Vec<Name>,
    /// Variables hidden by entering contextual values, innermost last.
    stripped: Vec<Vec<(Name, usize)>>,
}

fn err(code: Code, span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(code, msg, span)
}

impl Checker {
    pub fn new() -> Checker {
        Checker::default()
    }

    pub fn with_printer(printer: Printer) -> Checker {
        Checker {
            printer,
            ..Checker::default()
        }
    }

    fn show(&self, t: &Type) -> String {
        self.printer.ty(t)
    }

    fn mismatch(&self, span: Span, expected: &str, found: &Type) -> Diagnostic {
        err(
            Code::TypeMismatch,
            span,
            format!("expected {expected}, found {}", self.show(found)),
        )
    }

    fn expect_equal(&self, span: Span, expected: &Type, found: &Type) -> CResult<()> {
        if equal(expected, found) {
            Ok(())
        } else {
            Err(self.mismatch(span, &format!("`{}`", self.show(expected)), found))
        }
    }

    fn check_annotation(&self, t: &Type, span: Span) -> CResult<()> {
        check_type(t).map_err(|e| err(type_error_code(&e), span, e.to_string()))
    }

    /// Entry point: synthesises with every context variable in scope.
    pub fn synth_top(&mut self, ctx: Context, m: &Term) -> CResult<Synth> {
        let before = self.scope.len();
        self.scope.extend(ctx.names().cloned());
        let r = self.synth(ctx, m);
        self.scope.truncate(before);
        r
    }

    fn missing(&self, x: &str, span: Span) -> Diagnostic {
        for frame in self.stripped.iter().rev() {
            if let Some((_, level)) = frame.iter().find(|(y, _)| y == x) {
                return err(
                    Code::LevelViolation,
                    span,
                    format!("`{x}` has level {level} and is not available inside this contextual value"),
                );
            }
        }
        if self.scope.iter().any(|y| y == x) {
            err(
                Code::LinearEscapes,
                span,
                format!("linear variable `{x}` is used after it has been consumed"),
            )
        } else {
            err(Code::UnknownVariable, span, format!("unknown variable `{x}`"))
        }
    }

    /// Runs `body` with `binders` added to the context, then removes them
    /// again with context difference.
    fn under<T>(
        &mut self,
        ctx: Context,
        binders: &[(Name, CtxType)],
        span: Span,
        body: impl FnOnce(&mut Self, Context) -> CResult<(T, Context)>,
    ) -> CResult<(T, Context)> {
        let mut ctx = ctx;
        let mut shadowed = Vec::new();
        // a shadowed binding is invisible inside and passes through unused
        for (x, t) in binders {
            if let Some(old) = ctx.remove(x) {
                shadowed.push((x.clone(), old));
            }
            ctx.insert(x.clone(), t.clone());
        }
        let before = self.scope.len();
        self.scope.extend(binders.iter().map(|(x, _)| x.clone()));
        let r = body(self, ctx);
        self.scope.truncate(before);
        let (v, mut res) = r?;
        for (x, _) in binders {
            res = res.difference(x).map_err(|e| err(Code::LinearUnused, span, e.to_string()))?;
        }
        for (x, old) in shadowed {
            res.insert(x, old);
        }
        Ok((v, res))
    }

    pub fn synth(&mut self, ctx: Context, m: &Term) -> CResult<Synth> {
        let span = m.span;
        let done = |ty: Type, residual: Context, kind: TermKind| Synth {
            ty,
            residual,
            term: Term::new(kind, span),
        };
        match &m.kind {
            TermKind::Unit => Ok(done(Type::Unit, ctx, TermKind::Unit)),
            TermKind::Int(n) => Ok(done(Type::Int, ctx, TermKind::Int(n.clone()))),
            TermKind::Bool(b) => Ok(done(Type::Bool, ctx, TermKind::Bool(*b))),
            TermKind::Var(x, subs) => self.var(ctx, x, subs, span),
            TermKind::Const(..) | TermKind::App(..) if matches!(m.spine().0.kind, TermKind::Const(..)) => {
                self.constant_spine(ctx, m)
            }
            TermKind::Const(..) => unreachable!("a constant is its own spine head"),
            TermKind::App(f, a) => {
                let sf = self.synth(ctx, f)?;
                let sa = self.synth(sf.residual, a)?;
                match &sf.ty {
                    Type::Fun(dom, _, cod) => {
                        self.expect_equal(a.span, dom, &sa.ty)?;
                        Ok(done(
                            (**cod).clone(),
                            sa.residual,
                            TermKind::App(Box::new(sf.term), Box::new(sa.term)),
                        ))
                    }
                    other => Err(self.mismatch(f.span, "a function", other)),
                }
            }
            TermKind::Lam(mult, x, annot, body) => {
                let Some(t) = annot else {
                    return Err(err(
                        Code::UnresolvedScheme,
                        span,
                        format!("the binder `{x}` needs a type annotation"),
                    ));
                };
                self.check_annotation(t, span)?;
                let input = ctx.clone();
                let ((ty, el), res) =
                    self.under(ctx, &[(x.clone(), CtxType::plain(t.clone()))], span, |s, c| {
                        let r = s.synth(c, body)?;
                        Ok(((r.ty, r.term), r.residual))
                    })?;
                if *mult == Mult::Un {
                    if let Some(y) = input.linear_missing_from(&res).first() {
                        return Err(err(
                            Code::LinearEscapes,
                            span,
                            format!("linear variable `{y}` is captured by an unrestricted function"),
                        ));
                    }
                }
                Ok(done(
                    Type::fun(t.clone(), *mult, ty),
                    res,
                    TermKind::Lam(*mult, x.clone(), Some(t.clone()), Box::new(el)),
                ))
            }
            TermKind::Pair(a, b) => {
                let sa = self.synth(ctx, a)?;
                let sb = self.synth(sa.residual, b)?;
                Ok(done(
                    Type::pair(sa.ty, sb.ty),
                    sb.residual,
                    TermKind::Pair(Box::new(sa.term), Box::new(sb.term)),
                ))
            }
            TermKind::LetPair(x, y, a, b) => {
                let sa = self.synth(ctx, a)?;
                let Type::Pair(t1, t2) = &sa.ty else {
                    return Err(self.mismatch(a.span, "a pair", &sa.ty));
                };
                let binders = [
                    (x.clone(), CtxType::plain((**t1).clone())),
                    (y.clone(), CtxType::plain((**t2).clone())),
                ];
                let ((ty, el), res) = self.under(sa.residual, &binders, span, |s, c| {
                    let r = s.synth(c, b)?;
                    Ok(((r.ty, r.term), r.residual))
                })?;
                Ok(done(
                    ty,
                    res,
                    TermKind::LetPair(x.clone(), y.clone(), Box::new(sa.term), Box::new(el)),
                ))
            }
            TermKind::Let(x, a, b) => {
                let sa = self.synth(ctx, a)?;
                let binders = [(x.clone(), CtxType::plain(sa.ty.clone()))];
                let ((ty, el), res) = self.under(sa.residual, &binders, span, |s, c| {
                    let r = s.synth(c, b)?;
                    Ok(((r.ty, r.term), r.residual))
                })?;
                Ok(done(ty, res, TermKind::Let(x.clone(), Box::new(sa.term), Box::new(el))))
            }
            TermKind::Boxed(v) => {
                let binders = self.binder_types(v, None, span)?;
                let level = v.level.unwrap_or_else(|| {
                    binders.iter().map(|(_, t)| t.level + 1).max().unwrap_or(1)
                });
                if level == 0 {
                    return Err(err(
                        Code::IllFormedType,
                        span,
                        "a boxed contextual value must have level 1 or above",
                    ));
                }
                let input = ctx.clone();
                let (ct, res, el) = self.ctx_value(ctx, &binders, level, &v.body, span)?;
                if let Some(y) = input.linear_missing_from(&res).first() {
                    return Err(err(
                        Code::LinearEscapes,
                        span,
                        format!("linear variable `{y}` is captured by a box"),
                    ));
                }
                let ty = Type::boxed(ct);
                self.check_annotation(&ty, span)?;
                Ok(done(ty, res, TermKind::Boxed(Box::new(el))))
            }
            TermKind::LetBox(u, a, b) => {
                let sa = self.synth(ctx, a)?;
                let Type::Boxed(ct) = &sa.ty else {
                    return Err(self.mismatch(a.span, "a box", &sa.ty));
                };
                let binders = [(u.clone(), (**ct).clone())];
                let ((ty, el), res) = self.under(sa.residual, &binders, span, |s, c| {
                    let r = s.synth(c, b)?;
                    Ok(((r.ty, r.term), r.residual))
                })?;
                Ok(done(ty, res, TermKind::LetBox(u.clone(), Box::new(sa.term), Box::new(el))))
            }
            TermKind::Match(scrut, arms) => self.match_(ctx, scrut, arms, span),
            TermKind::If(c, a, b) => {
                let sc = self.synth(ctx, c)?;
                self.expect_equal(c.span, &Type::Bool, &sc.ty)?;
                let sa = self.synth(sc.residual.clone(), a)?;
                let sb = self.synth(sc.residual, b)?;
                self.expect_equal(b.span, &sa.ty, &sb.ty)?;
                self.same_residuals(&sa.residual, &sb.residual, span)?;
                Ok(done(
                    sa.ty,
                    sa.residual,
                    TermKind::If(Box::new(sc.term), Box::new(sa.term), Box::new(sb.term)),
                ))
            }
            TermKind::Bin(op, a, b) => {
                let sa = self.synth(ctx, a)?;
                let sb = self.synth(sa.residual, b)?;
                let ty = match op {
                    BinOp::Eq if sa.ty == Type::Bool => {
                        self.expect_equal(b.span, &Type::Bool, &sb.ty)?;
                        Type::Bool
                    }
                    _ => {
                        self.expect_equal(a.span, &Type::Int, &sa.ty)?;
                        self.expect_equal(b.span, &Type::Int, &sb.ty)?;
                        if op.is_comparison() {
                            Type::Bool
                        } else {
                            Type::Int
                        }
                    }
                };
                Ok(done(
                    ty,
                    sb.residual,
                    TermKind::Bin(*op, Box::new(sa.term), Box::new(sb.term)),
                ))
            }
        }
    }

    fn same_residuals(&self, a: &Context, b: &Context, span: Span) -> CResult<()> {
        if a == b {
            return Ok(());
        }
        let diff = a
            .linear_missing_from(b)
            .into_iter()
            .chain(b.linear_missing_from(a))
            .next()
            .unwrap_or_else(|| "?".into());
        Err(err(
            Code::LinearUnused,
            span,
            format!("branches disagree on the use of linear variable `{diff}`"),
        ))
    }

    fn var(&mut self, ctx: Context, x: &str, subs: &[CtxValue], span: Span) -> CResult<Synth> {
        let Some(tau) = ctx.get(x).cloned() else {
            return Err(self.missing(x, span));
        };
        let mut ctx = ctx;
        if tau.is_linear() {
            ctx.remove(x);
        }
        if subs.len() != tau.params.len() {
            return Err(err(
                Code::TypeMismatch,
                span,
                format!(
                    "`{x}` has type `{}` and needs {} substitution(s), found {}",
                    self.printer.ctx_type(&tau),
                    tau.params.len(),
                    subs.len()
                ),
            ));
        }
        let mut elaborated = Vec::new();
        for (sigma, param) in subs.iter().zip(&tau.params) {
            let expanded = self.eta_candidate(&ctx, sigma, param);
            let sigma = expanded.as_ref().unwrap_or(sigma);
            let binders = self.binder_types(sigma, Some(param), span)?;
            let level = sigma.level.unwrap_or(param.level);
            let (ct, res, el) = self.ctx_value(ctx, &binders, level, &sigma.body, span)?;
            if !equal_ctx(&ct, param) {
                return Err(err(
                    Code::TypeMismatch,
                    sigma.body.span,
                    format!(
                        "substitution for `{x}` has type `{}`, expected `{}`",
                        self.printer.ctx_type(&ct),
                        self.printer.ctx_type(param)
                    ),
                ));
            }
            ctx = res;
            elaborated.push(el);
        }
        Ok(Synth {
            ty: tau.body.clone(),
            residual: ctx,
            term: Term::new(TermKind::Var(x.to_string(), elaborated), span),
        })
    }

    /// A bare code variable `u` given where a contextual value with
    /// parameters is expected stands for its eta-expansion.
    fn eta_candidate(&self, ctx: &Context, sigma: &CtxValue, param: &CtxType) -> Option<CtxValue> {
        if !sigma.binders.is_empty() || sigma.level.is_some() || param.params.is_empty() {
            return None;
        }
        match &sigma.body.kind {
            TermKind::Var(u, subs) if subs.is_empty() => {
                let t = ctx.get(u)?;
                if t.params.is_empty() {
                    return None;
                }
                let mut v = eta_expand(u, t);
                v.body.span = sigma.body.span;
                Some(v)
            }
            _ => None,
        }
    }

    /// Binder types of a contextual value, taken from the expected type when
    /// the value is unannotated.
    fn binder_types(
        &self,
        v: &CtxValue,
        expected: Option<&CtxType>,
        span: Span,
    ) -> CResult<Vec<(Name, CtxType)>> {
        if let Some(exp) = expected {
            if v.binders.len() != exp.params.len() {
                return Err(err(
                    Code::TypeMismatch,
                    span,
                    format!(
                        "contextual value binds {} variable(s), expected `{}`",
                        v.binders.len(),
                        self.printer.ctx_type(exp)
                    ),
                ));
            }
        }
        v.binders
            .iter()
            .enumerate()
            .map(|(i, (x, t))| match (t, expected) {
                (Some(t), _) => Ok((x.clone(), t.clone())),
                (None, Some(exp)) => Ok((x.clone(), exp.params[i].clone())),
                (None, None) => Err(err(
                    Code::UnresolvedScheme,
                    span,
                    format!("the binder `{x}` needs a type annotation"),
                )),
            })
            .collect()
    }

    /// `(x̄:τ̄)^n. M`: divide the context at `n`, check `M` under the outer
    /// part and the binders, and return the untouched lower part.
    fn ctx_value(
        &mut self,
        ctx: Context,
        binders: &[(Name, CtxType)],
        level: usize,
        body: &Term,
        span: Span,
    ) -> CResult<(CtxType, Context, CtxValue)> {
        for (x, t) in binders {
            let k = well_formed(t).map_err(|e| err(type_error_code(&e), span, e.to_string()))?;
            if k >= level {
                return Err(err(
                    Code::LevelViolation,
                    span,
                    format!("binder `{x}` has level {k}, which is not below {level}"),
                ));
            }
        }
        let (outer, rest) = ctx.divide(level);
        self.stripped
            .push(rest.iter().map(|b| (b.name.clone(), b.ty.level)).collect());
        let r = self.under(outer, binders, span, |s, c| {
            let r = s.synth(c, body)?;
            Ok(((r.ty, r.term), r.residual))
        });
        self.stripped.pop();
        let ((ty, el), res) = r?;
        let ct = CtxType::new(binders.iter().map(|(_, t)| t.clone()).collect(), level, ty);
        well_formed(&ct).map_err(|e| err(type_error_code(&e), span, e.to_string()))?;
        let value = CtxValue {
            binders: binders.iter().map(|(x, t)| (x.clone(), Some(t.clone()))).collect(),
            level: Some(level),
            body: el,
        };
        Ok((ct, res.merge(&rest), value))
    }

    fn constant_spine(&mut self, ctx: Context, m: &Term) -> CResult<Synth> {
        let (head, args) = m.spine();
        let TermKind::Const(c, annot) = &head.kind else {
            unreachable!("caller checked the head")
        };
        let mut ctx = ctx;
        let mut arg_types = Vec::new();
        let mut arg_terms = Vec::new();
        for a in &args {
            let s = self.synth(ctx, a)?;
            ctx = s.residual;
            arg_types.push(s.ty);
            arg_terms.push(s.term);
        }
        let inst = match annot {
            Some(t) => {
                self.check_annotation(t, head.span)?;
                instantiate_annotated(c, t)
            }
            None => instantiate_from_args(c, &arg_types),
        }
        .map_err(|e| self.scheme_error(e, head.span))?;
        let mut cur = inst.clone();
        let mut term = Term::new(TermKind::Const(c.clone(), Some(inst)), head.span);
        for ((a, ty), el) in args.iter().zip(&arg_types).zip(arg_terms) {
            let Type::Fun(dom, _, cod) = cur else {
                return Err(self.mismatch(a.span, "fewer arguments", &cur));
            };
            self.expect_equal(a.span, &dom, ty)?;
            cur = *cod;
            let span = term.span.to(a.span);
            term = Term::new(TermKind::App(Box::new(term), Box::new(el)), span);
        }
        Ok(Synth {
            ty: cur,
            residual: ctx,
            term: Term::new(term.kind, m.span),
        })
    }

    fn scheme_error(&self, e: SchemeError, span: Span) -> Diagnostic {
        match e {
            SchemeError::Unresolved(_) => err(Code::UnresolvedScheme, span, e.to_string()),
            SchemeError::Mismatch {
                constant,
                expected,
                found,
            } => err(
                Code::TypeMismatch,
                span,
                format!("`{constant}` expects {expected}, found `{}`", self.show(&found)),
            ),
            SchemeError::Duality { .. } => err(Code::DualityMismatch, span, e.to_string()),
        }
    }

    fn match_(&mut self, ctx: Context, scrut: &Term, arms: &[Arm], span: Span) -> CResult<Synth> {
        let ss = self.synth(ctx, scrut)?;
        let branches = match ss.ty.as_session().map(unfold_head) {
            Some(SessionType::Branch(bs)) => bs,
            _ => return Err(self.mismatch(scrut.span, "an external choice &{...}", &ss.ty)),
        };
        let labels: Vec<&String> = arms.iter().map(|a| &a.label).collect();
        if labels.len() != branches.len() || !labels.iter().all(|l| branches.contains_key(*l)) {
            let offered: Vec<&String> = branches.keys().collect();
            return Err(err(
                Code::TypeMismatch,
                span,
                format!("match arms {labels:?} do not cover exactly the offered labels {offered:?}"),
            ));
        }
        let mut result: Option<(Type, Context)> = None;
        let mut el_arms = Vec::new();
        for arm in arms {
            let s = branches[&arm.label].clone();
            let binders = [(arm.var.clone(), CtxType::plain(Type::Session(s)))];
            let ((ty, el), res) = self.under(ss.residual.clone(), &binders, arm.body.span, |c, g| {
                let r = c.synth(g, &arm.body)?;
                Ok(((r.ty, r.term), r.residual))
            })?;
            match &result {
                None => result = Some((ty, res)),
                Some((t0, r0)) => {
                    self.expect_equal(arm.body.span, t0, &ty)?;
                    self.same_residuals(r0, &res, arm.body.span)?;
                }
            }
            el_arms.push(Arm {
                label: arm.label.clone(),
                var: arm.var.clone(),
                body: el,
            });
        }
        let (ty, residual) = result.expect("match has at least one arm");
        Ok(Synth {
            ty,
            residual,
            term: Term::new(TermKind::Match(Box::new(ss.term), el_arms), span),
        })
    }
}

/// Synthesises a type for a closed term and requires every linear resource
/// of `ctx` to be consumed.
pub fn synth_closed(ctx: Context, m: &Term) -> CResult<Synth> {
    let s = Checker::new().synth_top(ctx, m)?;
    if let Some(b) = s.residual.iter().find(|b| b.ty.is_linear()) {
        return Err(err(
            Code::LinearUnused,
            m.span,
            format!("linear variable `{}` is never used", b.name),
        ));
    }
    Ok(s)
}
