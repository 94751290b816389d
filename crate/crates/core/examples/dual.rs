//! Computes duals of session types, with and without aliases.
//!
//!     cargo run --example dual

use semp::check::check_source;
use semp::driver::dual_text;
use semp::syntax::Aliases;

fn main() {
    let plain = Aliases::default();
    for t in ["Close", "!Int.?Bool.Wait", "rec a. +{Go: !Int.a, Stop: Close}", "![Close |-1 Unit].Close"] {
        println!("dual {t}  =  {}", dual_text(t, &plain).unwrap());
    }
    let program = check_source(include_str!("programs/send_fives.semp")).unwrap();
    println!("dual Stream  =  {}", dual_text("Stream", &program.aliases).unwrap());
    println!("dual Dual Stream  =  {}", dual_text("Dual Stream", &program.aliases).unwrap());
    if let Err(d) = dual_text("Int", &plain) {
        println!("dual Int: {}", d.message);
    }
}
