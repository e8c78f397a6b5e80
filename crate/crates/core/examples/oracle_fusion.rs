//! Fuse two linear clusters in a dense state-vector simulation and compare
//! every outcome with the closed forms.
//!
//! cargo run --release --example oracle_fusion -- [NL] [NR] [matrix]

use fusionlab::matrix::{resolve_matrix, TOL_UNITARY};
use fusionlab::oracle::{run_scenario, FusionScenario};

fn main() -> fusionlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let nl: usize = args.next().map_or(3, |s| s.parse().expect("NL"));
    let nr: usize = args.next().map_or(3, |s| s.parse().expect("NR"));
    let source = args.next().unwrap_or_else(|| "pbs2".into());

    let scenario = FusionScenario::chains(nl, nr)?;
    let u = resolve_matrix(&source, TOL_UNITARY)?;
    let report = run_scenario(&scenario, &u, 1e-9)?;

    println!(
        "{} + {} chains, {} qubits, matrix {source}",
        nl, nr, report.qubits
    );
    for o in &report.outcomes {
        println!(
            "({},{}) p = {:.6} weight = {:.6} S = {:>8} vs cut {:>8}  {:<40} {}",
            o.i,
            o.j,
            o.probability,
            o.projector_weight,
            o.formula_entropy_bits
                .map_or("-".into(), |s| format!("{s:.6}")),
            o.cut_entropy_bits.map_or("-".into(), |s| format!("{s:.6}")),
            o.labels.join(","),
            if o.pass { "ok" } else { "MISMATCH" }
        );
    }
    println!(
        "{}",
        if report.pass {
            "all outcomes agree"
        } else {
            "disagreement found"
        }
    );
    Ok(())
}
