//! Runs `main` of the stream example and prints its communication events.
//!
//!     cargo run --example run_trace

use semp::check::check_source;
use semp::driver::boot_main;
use semp::runtime::{Outcome, DEFAULT_MAX_STEPS};
use semp::syntax::Printer;

const SOURCE: &str = include_str!("programs/main_send_fives.semp");

fn main() {
    let program = check_source(SOURCE).expect("the example type-checks");
    let mut config = boot_main(&program).unwrap();
    let outcome = config.run(DEFAULT_MAX_STEPS).expect("well-typed programs do not go wrong");
    for e in config.events.iter().filter(|e| e.is_communication()) {
        println!("{e}");
    }
    match outcome {
        Outcome::Done(_) => {
            let v = config.threads[0].term.erase();
            println!("Done {}", Printer::plain().term(&v));
        }
        other => println!("{other:?}"),
    }
}
