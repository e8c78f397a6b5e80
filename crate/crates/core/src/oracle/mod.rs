//! Brute-force reference implementations: dense graph states, the fusion
//! projector acting on them, stabilizer checks, cut entropies and the
//! two-photon Fock expansion.

pub mod bosonic;
pub mod graph;
pub mod scenario;
pub mod state;

pub use bosonic::{bosonic_outcome_table, table_deviation};
pub use graph::{build_graph_state, check_stabilizers, GraphSpec};
pub use scenario::{
    check_te_stabilizer, check_weighted_graph_equivalence, find_weighted_graph, fit_weighted_graph,
    run_scenario, te_fails_on_grid, FusionScenario, ScenarioReport, WeightedGraphFit,
};
pub use state::{apply_fusion_projector, merge_logical, StateVector, MAX_QUBITS};
