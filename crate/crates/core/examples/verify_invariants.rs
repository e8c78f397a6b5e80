//! Run every invariant suite and print a one-line summary per suite.
//!
//! cargo run --release --example verify_invariants -- [trials] [seed]

use fusionlab::verify::{run_all, VerifyOptions};
use fusionlab::RngSeed;

fn main() -> fusionlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials: usize = args.next().map_or(1000, |s| s.parse().expect("trials"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let summary = run_all(&VerifyOptions {
        trials,
        seed: RngSeed(seed),
        ..VerifyOptions::default()
    })?;
    for s in &summary.suites {
        let mark = if s.passed() { "ok  " } else { "FAIL" };
        println!(
            "{mark} {:<52} {:>7} checks, worst {:.2e}",
            s.name, s.checks, s.worst
        );
    }
    std::process::exit(if summary.passed() { 0 } else { 1 });
}
