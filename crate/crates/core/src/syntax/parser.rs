//! Recursive-descent parser.
//!
//! Top-level items start in column 1; anything indented continues the
//! previous item.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;

use super::lexer::{lex, Token, TokenKind};
use super::{Decl, Program, TypeDecl};
use crate::diag::{Code, Diagnostic};
use crate::span::Span;
use crate::term::{Arm, BinOp, Const, CtxValue, Term, TermKind};
use crate::types::{CtxType, Mult, Name, SessionType, Type};

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Index of the token that started the current top-level item, when
    /// parsing with layout; tokens in column 1 after it end the item.
    item_start: Option<usize>,
    eof: usize,
}

pub fn parse_program(source: &str) -> PResult<Program> {
    let mut p = Parser::new(source, true)?;
    p.program()
}

/// Parses a single term spanning the whole input.
pub fn parse_term(source: &str) -> PResult<Term> {
    let mut p = Parser::new(source, false)?;
    let t = p.term()?;
    p.expect_end()?;
    Ok(t)
}

/// Parses a single type spanning the whole input.
pub fn parse_type(source: &str) -> PResult<Type> {
    let mut p = Parser::new(source, false)?;
    let t = p.ty()?;
    p.expect_end()?;
    Ok(t)
}

impl Parser {
    fn new(source: &str, layout: bool) -> PResult<Parser> {
        Ok(Parser {
            toks: lex(source)?,
            pos: 0,
            item_start: if layout { Some(0) } else { None },
            eof: source.len(),
        })
    }

    fn peek_at(&self, k: usize) -> Option<&Token> {
        let i = self.pos + k;
        let t = self.toks.get(i)?;
        match self.item_start {
            Some(start) if i > start && t.line_start => None,
            _ => Some(t),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.peek_at(0)
    }

    fn here(&self) -> Span {
        match self.peek() {
            Some(t) => t.span,
            None => match self.toks.get(self.pos) {
                Some(t) => Span::new(t.span.start, t.span.start),
                None => Span::new(self.eof, self.eof),
            },
        }
    }

    fn prev_span(&self) -> Span {
        self.pos
            .checked_sub(1)
            .and_then(|i| self.toks.get(i))
            .map(|t| t.span)
            .unwrap_or_default()
    }

    fn error(&self, expected: &str) -> Diagnostic {
        let found = match self.peek() {
            Some(t) => t.to_string(),
            None if self.pos < self.toks.len() => "a new declaration".to_string(),
            None => "end of input".to_string(),
        };
        Diagnostic::new(
            Code::Syntax,
            format!("expected {expected}, found {found}"),
            self.here(),
        )
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        self.pos += 1;
        t
    }

    fn at_sym(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.is_sym(s))
    }

    fn at_kw(&self, k: &str) -> bool {
        self.peek().is_some_and(|t| t.is_kw(k))
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.at_kw(k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<Span> {
        if self.at_sym(s) {
            Ok(self.bump().span)
        } else {
            Err(self.error(&format!("`{s}`")))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<Span> {
        if self.at_kw(k) {
            Ok(self.bump().span)
        } else {
            Err(self.error(&format!("`{k}`")))
        }
    }

    fn expect_kind(&mut self, kind: TokenKind, what: &str) -> PResult<Token> {
        match self.peek() {
            Some(t) if t.kind == kind => Ok(self.bump()),
            _ => Err(self.error(what)),
        }
    }

    fn ident(&mut self) -> PResult<(Name, Span)> {
        let t = self.expect_kind(TokenKind::Ident, "an identifier")?;
        Ok((t.lexeme, t.span))
    }

    fn expect_end(&mut self) -> PResult<()> {
        if self.pos < self.toks.len() {
            Err(self.error("end of input"))
        } else {
            Ok(())
        }
    }

    fn level(&mut self) -> PResult<usize> {
        let t = self.expect_kind(TokenKind::Int, "a level")?;
        t.lexeme
            .parse()
            .map_err(|_| Diagnostic::new(Code::Syntax, "level out of range", t.span))
    }

    // -- programs ----------------------------------------------------------

    fn program(&mut self) -> PResult<Program> {
        let mut program = Program::default();
        let mut sigs: HashMap<Name, (Type, Span)> = HashMap::new();
        while self.pos < self.toks.len() {
            self.item_start = Some(self.pos);
            let first = self.toks[self.pos].clone();
            if !first.line_start {
                return Err(Diagnostic::new(
                    Code::Syntax,
                    "declarations must start in the first column",
                    first.span,
                ));
            }
            if self.eat_kw("type") {
                let name = self.expect_kind(TokenKind::Label, "a type name")?;
                if program.types.iter().any(|d| d.name == name.lexeme) {
                    return Err(Diagnostic::new(
                        Code::Syntax,
                        format!("type `{}` is declared twice", name.lexeme),
                        name.span,
                    ));
                }
                self.expect_sym("=")?;
                let ty = self.ty()?;
                program.types.push(TypeDecl {
                    name: name.lexeme,
                    ty,
                    span: first.span.to(self.prev_span()),
                });
            } else if first.kind == TokenKind::Ident
                && self.peek_at(1).is_some_and(|t| t.is_sym(":"))
            {
                let (name, span) = self.ident()?;
                self.expect_sym(":")?;
                let ty = self.ty()?;
                if sigs.contains_key(&name) || program.decl(&name).is_some() {
                    return Err(Diagnostic::new(
                        Code::Syntax,
                        format!("signature for `{name}` must precede its only definition"),
                        span,
                    ));
                }
                sigs.insert(name, (ty, span));
            } else if first.kind == TokenKind::Ident {
                let (name, span) = self.ident()?;
                let mut params = Vec::new();
                while self.peek().is_some_and(|t| t.kind == TokenKind::Ident) {
                    params.push(self.ident()?.0);
                }
                self.expect_sym("=")?;
                let body = self.term()?;
                if program.decl(&name).is_some() {
                    return Err(Diagnostic::new(
                        Code::Syntax,
                        format!("`{name}` is defined twice"),
                        span,
                    ));
                }
                let sig = sigs.remove(&name).map(|(t, _)| t);
                program.decls.push(Decl {
                    name,
                    sig,
                    params,
                    body,
                    span: span.to(self.prev_span()),
                });
            } else {
                return Err(self.error("a declaration"));
            }
            if self.peek().is_some() {
                return Err(self.error("a new line"));
            }
        }
        if let Some((name, (_, span))) = sigs.into_iter().min_by_key(|(_, (_, s))| s.start) {
            return Err(Diagnostic::new(
                Code::Syntax,
                format!("signature for `{name}` has no definition"),
                span,
            ));
        }
        Ok(program)
    }

    // -- types -------------------------------------------------------------

    fn ty(&mut self) -> PResult<Type> {
        let l = self.prod_ty()?;
        if self.eat_sym("->") {
            Ok(Type::fun(l, Mult::Un, self.ty()?))
        } else if self.eat_sym("1->") {
            Ok(Type::fun(l, Mult::Lin, self.ty()?))
        } else {
            Ok(l)
        }
    }

    fn prod_ty(&mut self) -> PResult<Type> {
        let l = self.atom_ty()?;
        if self.eat_sym("*") {
            Ok(Type::pair(l, self.prod_ty()?))
        } else {
            Ok(l)
        }
    }

    fn atom_ty(&mut self) -> PResult<Type> {
        let Some(t) = self.peek().cloned() else {
            return Err(self.error("a type"));
        };
        match (t.kind, t.lexeme.as_str()) {
            (TokenKind::Label, name) => {
                self.pos += 1;
                Ok(match name {
                    "Unit" => Type::Unit,
                    "Int" => Type::Int,
                    "Bool" => Type::Bool,
                    "Close" => SessionType::Close.into(),
                    "Wait" => SessionType::Wait.into(),
                    "Dual" => SessionType::Dual(Box::new(self.atom_ty()?)).into(),
                    _ => SessionType::Var(name.to_string()).into(),
                })
            }
            (TokenKind::Ident, name) => {
                self.pos += 1;
                Ok(SessionType::Var(name.to_string()).into())
            }
            (TokenKind::Keyword, "rec") => {
                self.pos += 1;
                let (a, _) = self.ident()?;
                self.expect_sym(".")?;
                let body = self.session_atom()?;
                Ok(SessionType::rec(a, body).into())
            }
            (TokenKind::Keyword, "oplus") => {
                self.pos += 1;
                Ok(SessionType::Select(self.branches()?).into())
            }
            (TokenKind::Symbol, "+") => {
                self.pos += 1;
                Ok(SessionType::Select(self.branches()?).into())
            }
            (TokenKind::Symbol, "&") => {
                self.pos += 1;
                Ok(SessionType::Branch(self.branches()?).into())
            }
            (TokenKind::Symbol, dir @ ("!" | "?")) => {
                self.pos += 1;
                let payload = self.atom_ty()?;
                self.expect_sym(".")?;
                let cont = self.session_atom()?;
                Ok(if dir == "!" {
                    SessionType::out(payload, cont)
                } else {
                    SessionType::inp(payload, cont)
                }
                .into())
            }
            (TokenKind::Symbol, "[") => {
                self.pos += 1;
                let c = self.ctx_type()?;
                self.expect_sym("]")?;
                Ok(Type::boxed(c))
            }
            (TokenKind::Symbol, "(") => {
                self.pos += 1;
                if self.eat_sym(")") {
                    return Ok(Type::Unit);
                }
                let t = self.ty()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            _ => Err(self.error("a type")),
        }
    }

    fn session_atom(&mut self) -> PResult<SessionType> {
        let span = self.here();
        match self.atom_ty()? {
            Type::Session(s) => Ok(s),
            _ => Err(Diagnostic::new(Code::Syntax, "expected a session type", span)),
        }
    }

    fn branches(&mut self) -> PResult<BTreeMap<String, SessionType>> {
        self.expect_sym("{")?;
        let mut out = BTreeMap::new();
        loop {
            let l = self.expect_kind(TokenKind::Label, "a label")?;
            self.expect_sym(":")?;
            let s = self.session_atom()?;
            if out.insert(l.lexeme.clone(), s).is_some() {
                return Err(Diagnostic::new(
                    Code::Syntax,
                    format!("duplicate label `{}`", l.lexeme),
                    l.span,
                ));
            }
            if !self.eat_sym(",") || self.at_sym("}") {
                break;
            }
        }
        self.expect_sym("}")?;
        Ok(out)
    }

    /// True when the `(` at the cursor opens a parenthesised contextual type,
    /// i.e. a `|-` occurs at depth one before the matching `)`.
    fn paren_holds_turnstile(&self) -> bool {
        let mut depth = 0usize;
        let mut k = 0;
        while let Some(t) = self.peek_at(k) {
            if t.kind == TokenKind::Symbol {
                match t.lexeme.as_str() {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => {
                        depth -= 1;
                        if depth == 0 {
                            return false;
                        }
                    }
                    "|-" if depth == 1 => return true,
                    _ => {}
                }
            }
            k += 1;
        }
        false
    }

    fn ctx_type(&mut self) -> PResult<CtxType> {
        let mut params = Vec::new();
        if !self.at_sym("|-") {
            loop {
                params.push(self.param_ty()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym("|-")?;
        let level = if self.peek().is_some_and(|t| t.kind == TokenKind::Int) {
            self.level()?
        } else {
            1
        };
        let body = self.ty()?;
        Ok(CtxType::new(params, level, body))
    }

    fn param_ty(&mut self) -> PResult<CtxType> {
        if self.at_sym("(") && self.paren_holds_turnstile() {
            self.pos += 1;
            let c = self.ctx_type()?;
            self.expect_sym(")")?;
            Ok(c)
        } else {
            Ok(CtxType::plain(self.ty()?))
        }
    }

    // -- terms -------------------------------------------------------------

    fn term(&mut self) -> PResult<Term> {
        let start = self.here();
        if self.at_kw("lambda") || self.at_kw("lambda1") || self.at_sym("\\") {
            let tok = self.bump();
            let mult = if tok.lexeme == "lambda1" {
                Mult::Lin
            } else {
                Mult::Un
            };
            let (x, annot) = if tok.lexeme != "\\" && self.eat_sym("(") {
                let (x, _) = self.ident()?;
                self.expect_sym(":")?;
                let t = self.ty()?;
                self.expect_sym(")")?;
                (x, Some(t))
            } else {
                (self.ident()?.0, None)
            };
            self.expect_sym(".")?;
            let body = self.term()?;
            let span = start.to(body.span);
            return Ok(Term::new(
                TermKind::Lam(mult, x, annot, Box::new(body)),
                span,
            ));
        }
        if self.eat_kw("let") {
            let kind = if self.eat_kw("box") {
                let (u, _) = self.ident()?;
                self.expect_sym("=")?;
                let m = self.term()?;
                self.expect_kw("in")?;
                let n = self.term()?;
                TermKind::LetBox(u, Box::new(m), Box::new(n))
            } else if self.eat_sym("(") {
                let (x, _) = self.ident()?;
                self.expect_sym(",")?;
                let (y, _) = self.ident()?;
                self.expect_sym(")")?;
                self.expect_sym("=")?;
                let m = self.term()?;
                self.expect_kw("in")?;
                let n = self.term()?;
                TermKind::LetPair(x, y, Box::new(m), Box::new(n))
            } else {
                let (x, _) = self.ident()?;
                self.expect_sym("=")?;
                let m = self.term()?;
                self.expect_kw("in")?;
                let n = self.term()?;
                TermKind::Let(x, Box::new(m), Box::new(n))
            };
            return Ok(Term::new(kind, start.to(self.prev_span())));
        }
        if self.eat_kw("if") {
            let c = self.term()?;
            self.expect_kw("then")?;
            let a = self.term()?;
            self.expect_kw("else")?;
            let b = self.term()?;
            let span = start.to(b.span);
            return Ok(Term::new(
                TermKind::If(Box::new(c), Box::new(a), Box::new(b)),
                span,
            ));
        }
        let m = self.cmp()?;
        if self.eat_sym(";") {
            let n = self.term()?;
            let span = m.span.to(n.span);
            return Ok(Term::new(
                TermKind::Let("_".into(), Box::new(m), Box::new(n)),
                span,
            ));
        }
        Ok(m)
    }

    fn binop(&mut self, ops: &[(&str, BinOp)]) -> Option<BinOp> {
        let t = self.peek()?;
        let op = ops
            .iter()
            .find(|(s, _)| t.is_sym(s))
            .map(|(_, op)| *op)?;
        self.pos += 1;
        Some(op)
    }

    fn cmp(&mut self) -> PResult<Term> {
        let l = self.arith()?;
        let ops = [
            ("==", BinOp::Eq),
            ("<=", BinOp::Le),
            ("<", BinOp::Lt),
            (">", BinOp::Gt),
        ];
        if let Some(op) = self.binop(&ops) {
            let r = self.arith()?;
            let span = l.span.to(r.span);
            return Ok(Term::new(TermKind::Bin(op, Box::new(l), Box::new(r)), span));
        }
        Ok(l)
    }

    fn arith(&mut self) -> PResult<Term> {
        let mut l = self.mul()?;
        while let Some(op) = self.binop(&[("+", BinOp::Add), ("-", BinOp::Sub)]) {
            let r = self.mul()?;
            let span = l.span.to(r.span);
            l = Term::new(TermKind::Bin(op, Box::new(l), Box::new(r)), span);
        }
        Ok(l)
    }

    fn mul(&mut self) -> PResult<Term> {
        let mut l = self.app()?;
        let ops = [("*", BinOp::Mul), ("/", BinOp::Div), ("%", BinOp::Mod)];
        while let Some(op) = self.binop(&ops) {
            let r = self.app()?;
            let span = l.span.to(r.span);
            l = Term::new(TermKind::Bin(op, Box::new(l), Box::new(r)), span);
        }
        Ok(l)
    }

    fn atom_start(&self) -> bool {
        match self.peek() {
            None => false,
            Some(t) => match t.kind {
                TokenKind::Ident | TokenKind::Int => true,
                TokenKind::Keyword => matches!(
                    t.lexeme.as_str(),
                    "unit"
                        | "true"
                        | "false"
                        | "close"
                        | "wait"
                        | "send"
                        | "receive"
                        | "new"
                        | "fork"
                        | "fix"
                        | "select"
                        | "box"
                        | "match"
                ),
                TokenKind::Symbol => t.lexeme == "(",
                TokenKind::Label => false,
            },
        }
    }

    fn app(&mut self) -> PResult<Term> {
        let mut f = self.atom()?;
        while self.atom_start() {
            let a = self.atom()?;
            f = Term::app(f, a);
        }
        Ok(f)
    }

    fn annotation(&mut self) -> PResult<Option<Type>> {
        if self.eat_sym("@") {
            Ok(Some(self.atom_ty()?))
        } else {
            Ok(None)
        }
    }

    fn atom(&mut self) -> PResult<Term> {
        let Some(t) = self.peek().cloned() else {
            return Err(self.error("a term"));
        };
        let start = t.span;
        let kind = match (t.kind, t.lexeme.as_str()) {
            (TokenKind::Ident, "forkWith") => {
                self.pos += 1;
                TermKind::Const(Const::ForkWith, self.annotation()?)
            }
            (TokenKind::Ident, x) => {
                self.pos += 1;
                let mut subs = Vec::new();
                if self.eat_sym("[") {
                    loop {
                        subs.push(self.ctx_value()?);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                    self.expect_sym("]")?;
                }
                TermKind::Var(x.to_string(), subs)
            }
            (TokenKind::Int, n) => {
                self.pos += 1;
                TermKind::Int(n.parse::<BigInt>().expect("digits"))
            }
            (TokenKind::Symbol, "-")
                if self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Int) =>
            {
                self.pos += 1;
                let n = self.bump();
                TermKind::Int(-n.lexeme.parse::<BigInt>().expect("digits"))
            }
            (TokenKind::Keyword, "unit") => {
                self.pos += 1;
                TermKind::Unit
            }
            (TokenKind::Keyword, b @ ("true" | "false")) => {
                self.pos += 1;
                TermKind::Bool(b == "true")
            }
            (TokenKind::Keyword, kw @ ("close" | "wait" | "send" | "receive" | "new" | "fork" | "fix")) => {
                self.pos += 1;
                let c = match kw {
                    "close" => Const::Close,
                    "wait" => Const::Wait,
                    "send" => Const::Send,
                    "receive" => Const::Receive,
                    "new" => Const::New,
                    "fork" => Const::Fork,
                    _ => Const::Fix,
                };
                TermKind::Const(c, self.annotation()?)
            }
            (TokenKind::Keyword, "select") => {
                self.pos += 1;
                let l = self.expect_kind(TokenKind::Label, "a label")?;
                TermKind::Const(Const::Select(l.lexeme), self.annotation()?)
            }
            (TokenKind::Keyword, "box") => {
                self.pos += 1;
                self.expect_sym("(")?;
                let v = self.ctx_value()?;
                self.expect_sym(")")?;
                TermKind::Boxed(Box::new(v))
            }
            (TokenKind::Keyword, "match") => {
                self.pos += 1;
                let scrut = self.term()?;
                self.expect_sym("{")?;
                let mut arms: Vec<Arm> = Vec::new();
                loop {
                    let l = self.expect_kind(TokenKind::Label, "a label")?;
                    if arms.iter().any(|a| a.label == l.lexeme) {
                        return Err(Diagnostic::new(
                            Code::Syntax,
                            format!("duplicate label `{}`", l.lexeme),
                            l.span,
                        ));
                    }
                    let (var, _) = self.ident()?;
                    self.expect_sym("->")?;
                    let body = self.term()?;
                    arms.push(Arm {
                        label: l.lexeme,
                        var,
                        body,
                    });
                    if !self.eat_sym(",") || self.at_sym("}") {
                        break;
                    }
                }
                self.expect_sym("}")?;
                TermKind::Match(Box::new(scrut), arms)
            }
            (TokenKind::Symbol, "(") => {
                self.pos += 1;
                if self.eat_sym(")") {
                    TermKind::Unit
                } else {
                    let a = self.term()?;
                    if self.eat_sym(",") {
                        let b = self.term()?;
                        self.expect_sym(")")?;
                        TermKind::Pair(Box::new(a), Box::new(b))
                    } else {
                        self.expect_sym(")")?;
                        return Ok(Term::new(a.kind, start.to(self.prev_span())));
                    }
                }
            }
            _ => return Err(self.error("a term")),
        };
        Ok(Term::new(kind, start.to(self.prev_span())))
    }

    /// True when the `(` at the cursor is closed by a `)` followed by `.` or
    /// `^`: the binder list of a contextual value.
    fn paren_opens_binders(&self) -> bool {
        let mut depth = 0usize;
        let mut k = 0;
        while let Some(t) = self.peek_at(k) {
            if t.kind == TokenKind::Symbol {
                match t.lexeme.as_str() {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => {
                        depth -= 1;
                        if depth == 0 {
                            return self
                                .peek_at(k + 1)
                                .is_some_and(|n| n.is_sym(".") || n.is_sym("^"));
                        }
                    }
                    _ => {}
                }
            }
            k += 1;
        }
        false
    }

    /// `(x:τ, ...)^n. M`, `()^n. M`, erased `(x, y). M` or `x. M`, or a
    /// plain term.
    fn ctx_value(&mut self) -> PResult<CtxValue> {
        let single = self.peek().is_some_and(|t| t.kind == TokenKind::Ident)
            && self.peek_at(1).is_some_and(|t| t.is_sym("."));
        if single {
            let (x, _) = self.ident()?;
            self.expect_sym(".")?;
            let body = self.term()?;
            return Ok(CtxValue {
                binders: vec![(x, None)],
                level: None,
                body,
            });
        }
        if !(self.at_sym("(") && self.paren_opens_binders()) {
            return Ok(CtxValue::plain(self.term()?));
        }
        self.expect_sym("(")?;
        let mut binders: Vec<(Name, Option<CtxType>)> = Vec::new();
        if !self.at_sym(")") {
            loop {
                let (x, span) = self.ident()?;
                let t = if self.eat_sym(":") {
                    Some(self.param_ty()?)
                } else {
                    None
                };
                if binders.iter().any(|(y, _)| *y == x) {
                    return Err(Diagnostic::new(
                        Code::Syntax,
                        format!("duplicate binder `{x}`"),
                        span,
                    ));
                }
                binders.push((x, t));
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        let level = if self.eat_sym("^") {
            Some(self.level()?)
        } else {
            None
        };
        self.expect_sym(".")?;
        let body = self.term()?;
        Ok(CtxValue {
            binders,
            level,
            body,
        })
    }
}
