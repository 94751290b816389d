//! Pretty printing in the surface grammar.
//!
//! Output re-parses to the same tree. With aliases, any compound type equal
//! (up to unfolding) to a declared alias prints as the alias name.

use num_bigint::Sign;

use super::resolve::Aliases;
use crate::term::{BinOp, CtxValue, Term, TermKind};
use crate::types::{equal, CtxType, Mult, SessionType, Type};

#[derive(Clone, Debug, Default)]
pub struct Printer {
    aliases: Vec<(String, Type)>,
}

fn is_compound(t: &Type) -> bool {
    match t {
        Type::Unit | Type::Int | Type::Bool => false,
        Type::Session(SessionType::Close | SessionType::Wait) => false,
        _ => true,
    }
}

const ARROW: u8 = 0;
const PRODUCT: u8 = 1;
const ATOM: u8 = 2;

impl Printer {
    pub fn plain() -> Printer {
        Printer::default()
    }

    pub fn with_aliases(aliases: &Aliases) -> Printer {
        Printer {
            aliases: aliases
                .entries
                .iter()
                .filter(|(_, t)| is_compound(t))
                .cloned()
                .collect(),
        }
    }

    /// Like [`Printer::with_aliases`], additionally folding the duals of
    /// session aliases into `Dual Name`.
    pub fn with_dual_aliases(aliases: &Aliases) -> Printer {
        let mut p = Printer::with_aliases(aliases);
        let duals: Vec<(String, Type)> = p
            .aliases
            .iter()
            .filter_map(|(n, t)| match t {
                Type::Session(s) => crate::types::dualize(s)
                    .ok()
                    .map(|d| (format!("Dual {n}"), Type::Session(d))),
                _ => None,
            })
            .collect();
        p.aliases.extend(duals);
        p
    }

    fn alias_of(&self, t: &Type) -> Option<&str> {
        if !is_compound(t) {
            return None;
        }
        self.aliases
            .iter()
            .find(|(_, a)| equal(a, t))
            .map(|(n, _)| n.as_str())
    }

    pub fn ty(&self, t: &Type) -> String {
        self.ty_prec(t, ARROW)
    }

    pub fn session(&self, s: &SessionType) -> String {
        self.ty(&Type::Session(s.clone()))
    }

    fn ty_prec(&self, t: &Type, prec: u8) -> String {
        if let Some(name) = self.alias_of(t) {
            return name.to_string();
        }
        match t {
            Type::Unit => "Unit".into(),
            Type::Int => "Int".into(),
            Type::Bool => "Bool".into(),
            Type::Fun(a, m, r) => {
                let arrow = if *m == Mult::Lin { "1->" } else { "->" };
                let s = format!(
                    "{} {arrow} {}",
                    self.ty_prec(a, PRODUCT),
                    self.ty_prec(r, ARROW)
                );
                paren(s, prec > ARROW)
            }
            Type::Pair(a, b) => {
                let s = format!("{} * {}", self.ty_prec(a, ATOM), self.ty_prec(b, PRODUCT));
                paren(s, prec > PRODUCT)
            }
            Type::Boxed(c) => format!("[{}]", self.ctx_type(c)),
            Type::Session(s) => self.session_atom(s),
        }
    }

    fn session_atom(&self, s: &SessionType) -> String {
        use SessionType::*;
        let cont = |k: &SessionType| self.ty_prec(&Type::Session(k.clone()), ATOM);
        match s {
            Close => "Close".into(),
            Wait => "Wait".into(),
            Out(t, k) => format!("!{}.{}", self.ty_prec(t, ATOM), cont(k)),
            In(t, k) => format!("?{}.{}", self.ty_prec(t, ATOM), cont(k)),
            Select(bs) | Branch(bs) => {
                let head = if matches!(s, Select(_)) { "oplus" } else { "&" };
                let items: Vec<String> = bs.iter().map(|(l, b)| format!("{l}: {}", cont(b))).collect();
                format!("{head}{{{}}}", items.join(", "))
            }
            Var(a) => a.clone(),
            Rec(a, body) => format!("rec {a}. {}", cont(body)),
            Dual(t) => format!("Dual {}", self.ty_prec(t, ATOM)),
        }
    }

    pub fn ctx_type(&self, c: &CtxType) -> String {
        let params: Vec<String> = c.params.iter().map(|p| self.param(p)).collect();
        let turnstile = format!("|-{} {}", c.level, self.ty(&c.body));
        if params.is_empty() {
            turnstile
        } else {
            format!("{} {turnstile}", params.join(", "))
        }
    }

    fn param(&self, c: &CtxType) -> String {
        if c.level == 0 && c.params.is_empty() {
            self.ty(&c.body)
        } else {
            format!("({})", self.ctx_type(c))
        }
    }

    pub fn term(&self, t: &Term) -> String {
        self.term_prec(t, 0)
    }

    fn term_prec(&self, t: &Term, prec: u8) -> String {
        use TermKind::*;
        match &t.kind {
            Var(x, subs) if subs.is_empty() => x.clone(),
            Var(x, subs) => {
                let items: Vec<String> = subs.iter().map(|s| self.ctx_value(s)).collect();
                format!("{x}[{}]", items.join(", "))
            }
            Const(c, annot) => {
                let head = match c {
                    crate::term::Const::Select(l) => format!("select {l}"),
                    c => c.to_string(),
                };
                match annot {
                    Some(a) => format!("{head} @{}", self.ty_prec(a, ATOM)),
                    None => head,
                }
            }
            Unit => "unit".into(),
            Int(n) if n.sign() == Sign::Minus => format!("({n})"),
            Int(n) => n.to_string(),
            Bool(b) => b.to_string(),
            Lam(m, x, annot, body) => {
                let kw = if *m == Mult::Lin { "lambda1" } else { "lambda" };
                let head = match (m, annot) {
                    (_, Some(a)) => format!("{kw}({x}:{})", self.ty(a)),
                    (Mult::Un, None) => format!("\\{x}"),
                    (Mult::Lin, None) => format!("{kw} {x}"),
                };
                paren(format!("{head}. {}", self.term_prec(body, 0)), prec > 0)
            }
            App(f, a) => paren(
                format!("{} {}", self.term_prec(f, 4), self.term_prec(a, 5)),
                prec > 4,
            ),
            Pair(a, b) => format!("({}, {})", self.term(a), self.term(b)),
            LetPair(x, y, m, n) => paren(
                format!("let ({x}, {y}) = {} in {}", self.term(m), self.term(n)),
                prec > 0,
            ),
            Let(x, m, n) if x == "_" => paren(
                format!("{}; {}", self.term_prec(m, 1), self.term(n)),
                prec > 0,
            ),
            Let(x, m, n) => paren(
                format!("let {x} = {} in {}", self.term(m), self.term(n)),
                prec > 0,
            ),
            Boxed(v) => format!("box({})", self.ctx_value(v)),
            LetBox(u, m, n) => paren(
                format!("let box {u} = {} in {}", self.term(m), self.term(n)),
                prec > 0,
            ),
            Match(s, arms) => {
                let items: Vec<String> = arms
                    .iter()
                    .map(|a| format!("{} {} -> {}", a.label, a.var, self.term(&a.body)))
                    .collect();
                format!("match {} {{ {} }}", self.term(s), items.join(", "))
            }
            If(c, a, b) => paren(
                format!(
                    "if {} then {} else {}",
                    self.term(c),
                    self.term(a),
                    self.term(b)
                ),
                prec > 0,
            ),
            Bin(op, l, r) => {
                let (mine, lp, rp) = match op {
                    BinOp::Eq | BinOp::Lt | BinOp::Gt | BinOp::Le => (1, 2, 2),
                    BinOp::Add | BinOp::Sub => (2, 2, 3),
                    BinOp::Mul | BinOp::Div | BinOp::Mod => (3, 3, 4),
                };
                paren(
                    format!(
                        "{} {} {}",
                        self.term_prec(l, lp),
                        op.symbol(),
                        self.term_prec(r, rp)
                    ),
                    prec > mine,
                )
            }
        }
    }

    pub fn ctx_value(&self, v: &CtxValue) -> String {
        if v.binders.is_empty() && v.level.is_none() {
            return self.term(&v.body);
        }
        let binders: Vec<String> = v
            .binders
            .iter()
            .map(|(x, c)| match c {
                Some(c) => format!("{x}:{}", self.param(c)),
                None => x.clone(),
            })
            .collect();
        let level = v.level.map(|n| format!("^{n}")).unwrap_or_default();
        format!("({}){level}. {}", binders.join(", "), self.term(&v.body))
    }
}

fn paren(s: String, yes: bool) -> String {
    if yes {
        format!("({s})")
    } else {
        s
    }
}

impl std::fmt::Display for Type {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&Printer::plain().ty(self))
    }
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&Printer::plain().term(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, parse_term, parse_type, resolve_program};
    use crate::term::Const;

    #[test]
    fn atoms_and_lambda() {
        assert_eq!(Printer::plain().ty(&SessionType::Wait.into()), "Wait");
        let t = Term::lam(
            Mult::Lin,
            "x",
            SessionType::Close.into(),
            Term::app(Term::constant(Const::Close), Term::var("x")),
        );
        assert_eq!(t.to_string(), "lambda1(x:Close). close x");
    }

    #[test]
    fn alias_aware_signature() {
        let src = "type Stream = oplus{More: !Int.Stream, Done: Close}\n\
                   type Builder = ?Int.![Stream |-1 Unit].Wait\n";
        let (_, aliases) = resolve_program(&parse_program(src).unwrap()).unwrap();
        let p = Printer::with_aliases(&aliases);
        let sig = crate::syntax::resolve_type(
            &parse_type("Int -> [Stream |-1 Unit]").unwrap(),
            &aliases,
        )
        .unwrap();
        assert_eq!(p.ty(&sig), "Int -> [Stream |-1 Unit]");
        let dual = crate::syntax::resolve_type(&parse_type("Dual Builder").unwrap(), &aliases)
            .unwrap();
        assert_eq!(p.ty(&dual), "!Int.?[Stream |-1 Unit].Close");
        let d = Printer::with_dual_aliases(&aliases);
        let f = Type::fun(dual, Mult::Un, Type::Unit);
        assert_eq!(d.ty(&f), "Dual Builder -> Unit");
        let back = crate::syntax::resolve_type(&parse_type(&d.ty(&f)).unwrap(), &aliases).unwrap();
        assert!(equal(&back, &f));
    }

    #[test]
    fn round_trips() {
        for src in [
            "box((x:Stream)^1. send 5 (select More (send 5 (select More x))))",
            "let (x, y) = new @(!Int.Close) unit in fork (lambda1(_:Unit). wait (receive y)); x",
            "match c { More d -> f (n - 1) d, Done e -> close e }",
            "\\x. (-3) + 4 * (x - 1) % 2",
            "u[(z:Stream, v:(Stream |-1 Stream))^2. v[z], ()^1. unit]",
            "if a <= b then (1, true) else (2, false)",
            "box((y). close y)",
            "u[(a, b). a]",
        ] {
            let t = parse_term(src).unwrap();
            let printed = t.to_string();
            assert_eq!(parse_term(&printed).unwrap(), t, "{src} printed as {printed}");
        }
    }
}
