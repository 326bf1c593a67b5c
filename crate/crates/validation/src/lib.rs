//! Shared fixtures for the acceptance suite: the shipped datasets and the
//! verdict line every criterion prints.

use std::io::Write;
use std::path::PathBuf;

use simmap_core::synth::SynthKind;
use simmap_core::tree::{preprocess, Tree};

pub const SYNTHETIC: [SynthKind; 3] = [SynthKind::MN, SynthKind::TwoLevel, SynthKind::Dense];

/// Seed the shipped datasets were generated with.
pub const DATASET_SEED: u64 = 42;

pub fn datasets_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../datasets")
}

pub fn dataset_text(kind: SynthKind) -> String {
    let p = datasets_dir().join(format!("{}.json", kind.name()));
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn dataset(kind: SynthKind) -> Tree {
    preprocess(&dataset_text(kind)).expect("shipped dataset parses")
}

/// Prints `criterion N: PASS|FAIL  detail` straight to stderr so the line
/// shows even when the test harness captures output, then returns `pass`.
pub fn verdict(criterion: u32, pass: bool, detail: &str) -> bool {
    let line = format!("criterion {criterion:>2}: {}  {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    pass
}
