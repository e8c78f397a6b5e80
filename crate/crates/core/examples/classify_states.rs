//! Classify hand-written conditional states (A, B, C, D) of
//! A|0_L 0_R> + B|0_L 1_R> + C|1_L 0_R> + D|1_L 1_R>.

use std::f64::consts::{FRAC_PI_4, PI};

use fusionlab::classify::{ClusterParams, WeightedGraphParams, TOL_CLASSIFY};
use fusionlab::matrix::C64;
use fusionlab::{classify, EntanglementReport, NeighborArity, OutcomeCoefficients};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn main() -> fusionlab::Result<()> {
    let h = 0.5;
    let states = [
        (
            "product |+>|0>",
            [c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        ),
        (
            "Bell (|00> + |11>)",
            [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ),
        (
            "CZ|++>, computational basis",
            [c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)],
        ),
        (
            "weighted edge",
            WeightedGraphParams {
                theta1: 0.3,
                phi1: 0.4,
                theta2: 1.1,
                phi2: 0.9,
                chi: 2.0 * (0.4 - 0.9) + PI,
            }
            .reconstruct(),
        ),
        (
            "rotated cluster",
            ClusterParams {
                theta1: 0.2,
                theta2: -0.7,
                phi: FRAC_PI_4 / 2.0,
            }
            .reconstruct(),
        ),
        (
            "generic",
            [c(0.9, 0.0), c(0.1, 0.2), c(0.0, 0.3), c(0.2, -0.1)],
        ),
    ];

    for (name, coeffs) in states {
        let o = OutcomeCoefficients::from_state(coeffs)?;
        let e = EntanglementReport::of(&o)?;
        for arity in [NeighborArity::One, NeighborArity::Two] {
            let class = classify(&o, arity, TOL_CLASSIFY);
            println!(
                "{name:<28} {arity:?}  S = {:.6} bits  {}",
                e.entropy_bits,
                class.names().join(", ")
            );
        }
    }
    Ok(())
}
