//! Benchmark fixtures: triples grouped by degree.

use iep_core::Triple;

/// `(label, triple)` pairs with degree from about 10^4 to 10^7.
pub fn engine_fixtures() -> Vec<(&'static str, Triple)> {
    [
        ("deg 1e4", [11, 13, 97]),
        ("deg 1e5", [17, 19, 331]),
        ("deg 1e6", [31, 37, 1151]),
        ("deg 1e7", [61, 67, 2683]),
    ]
    .into_iter()
    .map(|(label, [p, q, r])| (label, Triple::new(p, q, r).expect("fixture is valid")))
    .collect()
}

/// Smaller triples for the lemma validators, `r = pq + s`.
pub fn lemma_fixtures() -> Vec<(&'static str, Triple)> {
    [("pqr 6e4", [13, 17, 224]), ("pqr 1.4e6", [29, 31, 902])]
        .into_iter()
        .map(|(label, [p, q, r])| (label, Triple::new(p, q, r).expect("fixture is valid")))
        .collect()
}
