//! Invariants of the concurrent runtime over every corpus program and a
//! range of randomised schedules.

mod common;

use std::collections::BTreeMap;
use std::fs;

use common::corpus_programs;
use semp::check::{check_source, CheckedProgram};
use semp::driver::boot_main;
use semp::runtime::{detect_runtime_error, Configuration, Outcome, DEFAULT_MAX_STEPS};

const SEEDS: u64 = 20;

fn runnable() -> Vec<(String, CheckedProgram)> {
    corpus_programs()
        .into_iter()
        .map(|p| (p.display().to_string(), check_source(&fs::read_to_string(&p).unwrap()).unwrap()))
        .filter(|(_, p)| p.decl("main").is_some())
        .collect()
}

fn boot(p: &CheckedProgram, seed: Option<u64>) -> Configuration {
    let mut c = boot_main(p).unwrap();
    if let Some(s) = seed {
        c.randomize(s);
    }
    c
}

/// Communication events grouped per channel. Channel names depend on the
/// order in which threads allocate them, so the groups are compared as a
/// sorted list rather than by name.
fn per_channel(c: &Configuration) -> Vec<Vec<String>> {
    let mut by: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for e in c.events.iter().filter(|e| e.is_communication()) {
        let ch = e.channel.clone().unwrap_or_default();
        by.entry(ch).or_default().push(format!("{} {}", e.rule, e.payload.clone().unwrap_or_default()));
    }
    let mut groups: Vec<_> = by.into_values().collect();
    groups.sort();
    groups
}

#[test]
fn every_live_endpoint_occurs_in_exactly_one_thread() {
    for (name, p) in runnable() {
        for seed in std::iter::once(None).chain((0..SEEDS).map(Some)) {
            let mut c = boot(&p, seed);
            c.run_observed(DEFAULT_MAX_STEPS, |c| {
                for (x, ts) in c.endpoint_occurrences() {
                    assert_eq!(ts.len(), 1, "{name} seed {seed:?}: `{x}` occurs in threads {ts:?}");
                }
                Ok(())
            })
            .unwrap();
        }
    }
}

#[test]
fn per_channel_traces_do_not_depend_on_the_schedule() {
    for (name, p) in runnable() {
        let mut reference = boot(&p, None);
        let expected = reference.run(DEFAULT_MAX_STEPS).unwrap();
        let groups = per_channel(&reference);
        for seed in 0..SEEDS {
            let mut c = boot(&p, Some(seed));
            let outcome = c.run(DEFAULT_MAX_STEPS).unwrap();
            assert_eq!(
                std::mem::discriminant(&outcome),
                std::mem::discriminant(&expected),
                "{name} seed {seed}"
            );
            assert_eq!(per_channel(&c), groups, "{name} seed {seed}");
        }
    }
}

#[test]
fn runtime_errors_never_arise_in_randomised_runs() {
    let programs = runnable();
    let mut runs = 0;
    for seed in 0..100u64 {
        let (name, p) = &programs[seed as usize % programs.len()];
        let mut c = boot(p, Some(seed));
        let outcome = c
            .run_observed(DEFAULT_MAX_STEPS, |c| {
                assert!(detect_runtime_error(c).is_none(), "{name} seed {seed}");
                Ok(())
            })
            .unwrap_or_else(|e| panic!("{name} seed {seed}: {e}"));
        assert!(!matches!(outcome, Outcome::StepLimit), "{name} seed {seed}");
        runs += 1;
    }
    assert_eq!(runs, 100);
}
