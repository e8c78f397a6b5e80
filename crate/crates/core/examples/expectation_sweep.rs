//! Best expected link entropy as a function of the total success probability.
//!
//! cargo run --release --example expectation_sweep -- [step] [restarts]

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
    let kind = ObjectiveSpec::ExpectationEntropy {
        p_target: 0.5,
        alpha: 1000.0,
    };
    let started = std::time::Instant::now();
    let rows = sweep(&kind, &target_grid(0.5, 1.0, step), &cfg)?;

    println!("p_target  <S>_best  <S>_mean  p_total   1-p");
    for r in &rows {
        let p = r.objective.target();
        println!(
            "{p:<8.2}  {:.5}   {:.5}   {:.5}   {:.2}",
            r.hard_value,
            r.mean_hard_value(),
            r.p_total,
            1.0 - p
        );
    }
    println!("elapsed {:.1?}", started.elapsed());
    Ok(())
}
