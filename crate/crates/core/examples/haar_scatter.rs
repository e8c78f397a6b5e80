//! Haar-random fusion matrices: relevant probability against <S>, and the
//! empirical P(S >= s) that bounds what the optimizer can reach.
//!
//! cargo run --release --example haar_scatter -- [n] [seed]

use fusionlab::optimize::{random_scatter, ScatterMode};
use fusionlab::RngSeed;

fn main() -> fusionlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(10_000, |s| s.parse().expect("n"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));

    let rows = random_scatter(n, RngSeed(seed), &ScatterMode::Expectation)?;
    let min_p = rows.iter().map(|r| r.x).fold(f64::INFINITY, f64::min);
    let max_s = rows.iter().map(|r| r.y).fold(0.0f64, f64::max);
    let last = rows.last().unwrap();
    println!("{n} samples: min p_total {min_p:.6}, max <S> {max_s:.6}");
    println!(
        "<S> mean {:.6} +- {:.6}",
        last.running_mean, last.running_std
    );

    let targets: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let rows = random_scatter(n, RngSeed(seed), &ScatterMode::Threshold(targets.clone()))?;
    println!("s_target   best P    mean P");
    for (k, s) in targets.iter().enumerate() {
        let per_target = rows.iter().skip(k).step_by(targets.len());
        let best = per_target.map(|r| r.y).fold(0.0f64, f64::max);
        let mean = rows[rows.len() - targets.len() + k].running_mean;
        println!("{s:>8.1} {best:>9.6} {mean:>9.6}");
    }
    Ok(())
}
