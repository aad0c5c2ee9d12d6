// Properties checked on every fuzz input. Included by the fuzz targets and by the
// corpus replay test in crates/stablekit/tests/fuzz_corpus.rs.

/// Parsed exact polynomials print and parse back to themselves.
pub fn check_parse_poly(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(p) = stablekit::Polynomial::parse2(text) else { return };
    if p.is_exact() {
        let again = stablekit::Polynomial::parse2(&p.to_string()).expect("printed polynomial parses");
        assert_eq!(again, p, "print/parse roundtrip of {text:?}");
    }
}

/// Accepted polynomial JSON survives a write/read cycle.
pub fn check_poly_json(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(p) = stablekit::Polynomial::from_json_str(text) else { return };
    let again = stablekit::Polynomial::from_json_str(&p.to_json_string()).expect("written JSON reads back");
    assert_eq!(again, p);
}

/// Accepted realizations roundtrip and can be split without panicking.
pub fn check_realization_json(data: &[u8]) {
    use stablekit::realization::{local_split, PipRealization};
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(r) = PipRealization::from_json_str(text) else { return };
    let again = PipRealization::from_json_str(&r.to_json().to_string()).expect("written JSON reads back");
    assert_eq!(again, r);
    if r.n() <= 8 {
        let _ = local_split(&r);
    }
}

/// Accepted horn specs roundtrip and answer membership queries.
pub fn check_horn_json(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(horns) = stablekit::boundary::parse_horns(text) else { return };
    for h in &horns {
        let _ = h.contains([1e-3, -1e-3]);
        let _ = h.contains([0.0, 0.0]);
    }
}
