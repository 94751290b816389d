//! Runs a well-typed program whose two threads wait on each other and
//! prints the deadlock report.
//!
//!     cargo run --example deadlock_report

use semp::check::check_source;
use semp::driver::boot_main;
use semp::runtime::{Outcome, DEFAULT_MAX_STEPS};

fn main() {
    let program = check_source(include_str!("programs/deadlock.semp")).unwrap();
    for s in program.signatures() {
        println!("{s}");
    }
    let mut config = boot_main(&program).unwrap();
    match config.run(DEFAULT_MAX_STEPS).unwrap() {
        Outcome::Deadlock(report) => println!("{report}"),
        other => println!("unexpected: {other:?}"),
    }
}
