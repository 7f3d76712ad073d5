//! Inputs shared by the benchmarks.

use std::fs;
use std::path::Path;

use denjoy_core::acpack::StaircaseSchedule;
use denjoy_core::treescheme::parse_scheme;
use denjoy_core::TreeScheme;

/// A scheme from the shipped corpus, by file stem.
pub fn corpus_scheme(name: &str) -> TreeScheme {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(format!("{name}.scheme"));
    parse_scheme(&fs::read_to_string(&p).unwrap()).unwrap()
}

/// Each of I_0..I_{n-1} refined at every stage up to `stages`.
pub fn dense_schedule(n: u64, stages: u64) -> StaircaseSchedule {
    let events = (1..=stages).flat_map(|s| (0..n).map(move |m| (m, s))).collect();
    StaircaseSchedule::new(events, stages).unwrap()
}
