//! Outcome table of the two-polarizing-beam-splitter fusion and of a custom
//! matrix file.
//!
//! cargo run --example analyze_pbs2 -- [builtin-or-json-path]

use fusionlab::matrix::{resolve_matrix, TOL_UNITARY};
use fusionlab::{classify, expectation_entropy, outcome_table, EntanglementReport, NeighborArity};

fn main() -> fusionlab::Result<()> {
    let source = std::env::args().nth(1).unwrap_or_else(|| "pbs2".into());
    let u = resolve_matrix(&source, TOL_UNITARY)?;
    let table = outcome_table(&u)?;

    println!("outcome  relevant        p  S (bits)  classes");
    for o in &table.entries {
        let e = EntanglementReport::of(o)?;
        let class = classify(o, NeighborArity::One, 1e-8);
        println!(
            "({},{})    {:<8} {:>8.6} {:>9.6}  {}",
            o.i,
            o.j,
            o.relevant,
            o.probability,
            e.entropy_bits,
            class.names().join(", ")
        );
    }
    println!("sum p            = {:.12}", table.total_probability());
    println!(
        "relevant p       = {:.12}",
        fusionlab::total_relevant_probability(&u)
    );
    println!("<S>              = {:.12}", expectation_entropy(&u)?);
    Ok(())
}
