//! Maximize the probability of a maximally entangled link, P(S >= 1 bit).
//!
//! cargo run --release --example optimize_threshold -- [s_target] [seed]

use fusionlab::{derive_invariants, optimize, ObjectiveSpec, OptimizerConfig, RngSeed};

fn main() -> fusionlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let s_target: f64 = args.next().map_or(1.0, |s| s.parse().expect("s_target"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let cfg = OptimizerConfig {
        master_seed: RngSeed(seed),
        ..OptimizerConfig::default()
    };
    let started = std::time::Instant::now();
    let r = optimize(
        &ObjectiveSpec::ThresholdProbability {
            s_target_bits: s_target,
        },
        &cfg,
    )?;

    let n = derive_invariants(&r.best_matrix).n;
    println!(
        "P(S >= {s_target}) = {:.9} (mean over restarts {:.6})",
        r.hard_value,
        r.mean_hard_value()
    );
    println!("states used      = {}", r.states_used);
    println!(
        "max abs n        = {:.2e}",
        n.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    );
    println!("elapsed          = {:.1?}", started.elapsed());
    Ok(())
}
