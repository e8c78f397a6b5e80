//! Generalized type-II fusion of photonic cluster states.
//!
//! Given any 4×4 linear-optical fusion matrix the crate computes the ten
//! detection outcomes, the conditional two-cluster state of each, its
//! entanglement and its class (stabilizer, weighted graph, cluster up to
//! rotations), checks all of it against a dense state-vector and a two-photon
//! Fock-space oracle, and optimizes fusion matrices for entanglement.
//!
//! ```
//! use fusionlab::{builtin, outcome_table, threshold_probability};
//!
//! let pbs2 = builtin("pbs2").unwrap();
//! let table = outcome_table(&pbs2).unwrap();
//! assert!((table.get(1, 3).unwrap().probability - 0.125).abs() < 1e-12);
//! assert!((threshold_probability(&pbs2, 1.0).unwrap() - 0.5).abs() < 1e-12);
//! ```
//!
//! Runnable walkthroughs live in `examples/`.

pub mod classify;
pub mod cli;
pub mod entangle;
pub mod error;
pub mod fusion;
pub mod matrix;
pub mod optimize;
pub mod oracle;
pub mod report;
pub mod verify;

pub use classify::{classify, NeighborArity, StateClass, StateLabel};
pub use entangle::{EntanglementReport, EntropyBase, EntropyValue};
pub use error::{FusionError, Result};
pub use fusion::{
    derive_invariants, outcome_coefficients, outcome_probability, outcome_table,
    total_relevant_probability, ChannelIndex, OutcomeCoefficients, OutcomeTable,
};
pub use matrix::{builtin, from_params, haar_sample_seeded, FusionMatrix, RngSeed, UnitaryParams};
pub use optimize::{
    expectation_entropy, optimize, sweep, threshold_probability, ObjectiveSpec, OptResult,
    OptimizerConfig,
};
