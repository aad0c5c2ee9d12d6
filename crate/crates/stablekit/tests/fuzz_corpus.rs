//! Replays the fuzz seed corpus through the same checks the fuzz targets run.

use std::path::Path;

mod checks {
    include!("../../../fuzz/checks.rs");
}

fn replay(target: &str, check: fn(&[u8])) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap_or_else(|e| panic!("{}: {e}", dir.display())) {
        let path = entry.unwrap().path();
        check(&std::fs::read(&path).unwrap());
        n += 1;
    }
    assert!(n > 0, "no seeds in {}", dir.display());
}

#[test]
fn parse_poly_seeds() {
    replay("parse_poly", checks::check_parse_poly);
}

#[test]
fn poly_json_seeds() {
    replay("poly_json", checks::check_poly_json);
}

#[test]
fn realization_json_seeds() {
    replay("realization_json", checks::check_realization_json);
}

#[test]
fn horn_json_seeds() {
    replay("horn_json", checks::check_horn_json);
}
