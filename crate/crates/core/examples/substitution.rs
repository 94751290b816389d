//! Substitutes a code value for a code variable: each use `x[σ]` is
//! replaced by the code's body with its binders instantiated by σ.
//!
//!     cargo run --example substitution

use semp::eval::{substitute, Fresh};
use semp::syntax::{parse_term, Printer};
use semp::term::TermKind;

fn code(text: &str) -> semp::term::CtxValue {
    match parse_term(text).unwrap().kind {
        TermKind::Boxed(v) => *v,
        _ => panic!("{text} is not a box"),
    }
}

fn main() {
    let p = Printer::plain();
    let cases = [
        ("box((z1, z2). send z1 z2)", "x[y, 42]"),
        ("box((c). close c)", "lambda(d:Close). x[d]"),
        ("box((a). a + 1)", "x[x[3]]"),
    ];
    for (value, target) in cases {
        let sigma = code(value);
        let m = parse_term(target).unwrap();
        let r = substitute(&sigma, "x", &m, &mut Fresh::new()).unwrap();
        println!("[{value} / x] {target}  =  {}", p.term(&r.erase()));
    }
}
