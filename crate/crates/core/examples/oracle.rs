//! Compares the algorithmic checker with the declarative rules, which
//! search every way to split the linear context. The declarative rules
//! read fully annotated terms, so constants carry their instance types.
//!
//!     cargo run --example oracle

use semp::check::{declarative_type, synth_closed};
use semp::context::Context;
use semp::syntax::{parse_term, parse_type, resolve_type, Aliases, Printer};
use semp::types::CtxType;

fn main() {
    let p = Printer::plain();
    let aliases = Aliases::default();
    let mut g = Context::new();
    let ty = |s: &str| CtxType::plain(resolve_type(&parse_type(s).unwrap(), &aliases).unwrap());
    g.insert("c", ty("!Int.Close"));
    g.insert("n", ty("Int"));
    let close = "close @(Close -> Unit)";
    let send = "send @(Int -> !Int.Close 1-> Close)";
    let terms = [
        format!("{close} ({send} n c)"),
        format!("{close} ({send} (n + n) c)"),
        format!("lambda(x:Int). {close} ({send} x c)"),
        format!("lambda1(x:Int). {close} ({send} x c)"),
        format!("({close} ({send} 1 c), {close} ({send} 2 c))"),
        "n".to_string(),
    ];
    for t in terms {
        let m = parse_term(&t).unwrap();
        let algo = synth_closed(g.clone(), &m).map(|s| p.ty(&s.ty)).map_err(|e| e.to_string());
        let decl = match declarative_type(&g, &m) {
            Ok(Some(t)) => p.ty(&t),
            Ok(None) => "no derivation".into(),
            Err(e) => e.to_string(),
        };
        println!("{t}\n  algorithmic: {}\n  declarative: {decl}", algo.unwrap_or_else(|e| format!("error: {e}")));
    }
}
