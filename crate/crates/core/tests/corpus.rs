use std::fs;
use std::path::{Path, PathBuf};

use semp::check::check_source;

fn programs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/programs")
}

fn semp_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "semp"))
        .collect();
    v.sort();
    v
}

#[test]
fn positive_programs_check() {
    for path in semp_files(&programs()) {
        let src = fs::read_to_string(&path).unwrap();
        match check_source(&src) {
            Ok(p) => {
                for s in p.signatures() {
                    println!("{}: {s}", path.display());
                }
            }
            Err(ds) => panic!("{}: {:?}", path.display(), ds),
        }
    }
}

#[test]
fn negative_programs_report_expected_code() {
    let files = semp_files(&programs().join("negative"));
    assert!(files.len() >= 8);
    for path in files {
        let src = fs::read_to_string(&path).unwrap();
        let expected = src
            .lines()
            .find_map(|l| l.strip_prefix("-- expect: "))
            .unwrap_or_else(|| panic!("{} has no expectation", path.display()))
            .trim();
        let ds = check_source(&src).expect_err(&path.display().to_string());
        assert_eq!(ds[0].code.as_str(), expected, "{}: {}", path.display(), ds[0].message);
    }
}
