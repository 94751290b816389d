//! Generates code with `sendFives 4` and shows that the result is a
//! straight-line box: four sends, no recursion.
//!
//!     cargo run --example staging_eval

use semp::check::check_source;
use semp::driver::prepare_term;
use semp::eval::{eval_pure, PureOutcome, DEFAULT_FUEL};
use semp::syntax::Printer;

const SOURCE: &str = include_str!("programs/send_fives.semp");

fn main() {
    let program = check_source(SOURCE).unwrap();
    for n in 0..=4 {
        let (m, ty) = prepare_term(&format!("sendFives {n}"), Some(&program)).unwrap_or_else(|_| panic!("ill-typed"));
        match eval_pure(&m, DEFAULT_FUEL).unwrap() {
            PureOutcome::Value(v) => {
                let p = program.printer();
                println!("sendFives {n} : {}\n  = {}", p.ty(&ty), Printer::plain().term(&v.erase()));
            }
            _ => println!("sendFives {n} did not finish"),
        }
    }
}
