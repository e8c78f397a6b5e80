//! Best P(S >= s) for s from 0 to 1 bit, and how many outcomes carry it.
//!
//! cargo run --release --example threshold_sweep -- [step] [restarts]

use fusionlab::optimize::target_grid;
use fusionlab::{sweep, ObjectiveSpec, OptimizerConfig, RngSeed};

fn main() -> fusionlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let step: f64 = args.next().map_or(0.1, |s| s.parse().expect("step"));
    let restarts: usize = args.next().map_or(20, |s| s.parse().expect("restarts"));

    let cfg = OptimizerConfig {
        restarts,
        master_seed: RngSeed(2024),
        ..OptimizerConfig::default()
    };
    let kind = ObjectiveSpec::ThresholdProbability { s_target_bits: 0.0 };
    let started = std::time::Instant::now();
    let rows = sweep(&kind, &target_grid(0.0, 1.0, step), &cfg)?;

    println!("s_target  P_best    P_mean    states_used");
    for r in &rows {
        println!(
            "{:<8.2}  {:.6}  {:.6}  {}",
            r.objective.target(),
            r.hard_value,
            r.mean_hard_value(),
            r.states_used
        );
    }
    println!("elapsed {:.1?}", started.elapsed());
    Ok(())
}
