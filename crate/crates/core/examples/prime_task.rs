//! A server receives code over a channel and runs it: the client ships a
//! primality test as a box, the server counts the primes among
//! the candidates it sends (7 and 8).
//!
//!     cargo run --example prime_task [SEED]

use semp::check::check_source;
use semp::driver::boot_main;
use semp::runtime::{Outcome, DEFAULT_MAX_STEPS};
use semp::syntax::Printer;

fn main() {
    let program = check_source(include_str!("programs/prime_task.semp")).unwrap();
    for s in program.signatures() {
        println!("{s}");
    }
    let mut config = boot_main(&program).unwrap();
    if let Some(seed) = std::env::args().nth(1).and_then(|s| s.parse().ok()) {
        config.randomize(seed);
    }
    match config.run(DEFAULT_MAX_STEPS).unwrap() {
        Outcome::Done(_) => {
            let v = config.threads[0].term.erase();
            println!("main = {}", Printer::plain().term(&v));
        }
        other => println!("{other:?}"),
    }
}
