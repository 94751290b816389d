//! Type-checks every program in the corpus and prints its signatures.
//!
//!     cargo run --example check_program

use std::fs;

use semp::check::check_source;

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/programs");
    let mut paths: Vec<_> = fs::read_dir(dir).unwrap().flatten().map(|e| e.path()).collect();
    paths.retain(|p| p.extension().is_some_and(|e| e == "semp"));
    paths.sort();
    for path in paths {
        println!("== {}", path.file_name().unwrap().to_string_lossy());
        match check_source(&fs::read_to_string(&path).unwrap()) {
            Ok(p) => p.signatures().iter().for_each(|s| println!("{s}")),
            Err(ds) => ds.iter().for_each(|d| println!("error: {}", d.message)),
        }
    }
}
