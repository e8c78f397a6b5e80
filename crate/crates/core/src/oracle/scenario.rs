//! Two clusters fused on their marked qubits, simulated densely.
//!
//! The left cluster's marked qubit L is first encoded into the logical pair
//! (e, a) via `|x>_L -> |x>_e |x>_a`; photon a is then fused with the right
//! cluster's marked qubit b. After the fusion e carries the link between the
//! two clusters.
//!
//! Register layout before fusion: left vertices `0..nl` (e sits in L's slot),
//! right vertices `nl..nl+nr`, then a. After fusion a and b are gone and right
//! vertices above b shift down by one.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::classify::{classify, NeighborArity, StateLabel, TOL_CLASSIFY};
use crate::entangle::entropy_from_det;
use crate::error::{FusionError, Result};
use crate::fusion::{outcome_table, OutcomeCoefficients};
use crate::matrix::{FusionMatrix, C64};
use crate::oracle::graph::{
    apply_graph_stabilizer, build_graph_state, eigen_residual, GraphSpec, TOL_STABILIZER,
};
use crate::oracle::state::{apply_fusion_projector, check_qubits, StateVector};

/// States equal up to global phase when `|<x|y>| >= 1 - FIDELITY_TOL`.
pub const FIDELITY_TOL: f64 = 1e-10;

/// Grid size of the exhaustive phase searches.
pub const PHASE_GRID: usize = 360;

#[derive(Debug, Clone, PartialEq)]
pub struct FusionScenario {
    pub left: GraphSpec,
    pub right: GraphSpec,
    pub arity: NeighborArity,
}

impl FusionScenario {
    pub fn new(left: GraphSpec, right: GraphSpec) -> Result<Self> {
        left.validate()?;
        right.validate()?;
        if left.special_edge.is_some() || right.special_edge.is_some() {
            return Err(FusionError::MalformedInput(
                "fusion scenarios take plain graphs".into(),
            ));
        }
        if left.mark.is_none() {
            return Err(FusionError::MalformedInput(
                "left graph has no marked qubit".into(),
            ));
        }
        let b = right
            .mark
            .ok_or_else(|| FusionError::MalformedInput("right graph has no marked qubit".into()))?;
        let arity = NeighborArity::from_degree(right.degree(b)).ok_or_else(|| {
            FusionError::MalformedInput(format!(
                "fused qubit b must have one or two neighbours, has {}",
                right.degree(b)
            ))
        })?;
        check_qubits(left.n + right.n + 1)?;
        Ok(FusionScenario { left, right, arity })
    }

    /// Linear clusters, fused at the end of the left chain and the start of
    /// the right chain.
    pub fn chains(nl: usize, nr: usize) -> Result<Self> {
        if nl < 1 || nr < 2 {
            return Err(FusionError::MalformedInput(
                "chains need at least 1 left and 2 right qubits".into(),
            ));
        }
        FusionScenario::new(
            GraphSpec::linear(nl).with_mark(nl - 1),
            GraphSpec::linear(nr).with_mark(0),
        )
    }

    pub fn total_qubits(&self) -> usize {
        self.left.n + self.right.n + 1
    }

    fn l(&self) -> usize {
        self.left.mark.unwrap()
    }

    fn b(&self) -> usize {
        self.right.mark.unwrap()
    }

    /// Register index of e after fusion.
    pub fn e(&self) -> usize {
        self.l()
    }

    /// Register index after fusion of right vertex `v != b`.
    pub fn right_index(&self, v: usize) -> usize {
        self.left.n + if v < self.b() { v } else { v - 1 }
    }

    /// Qubits of the left cluster after fusion (including e).
    pub fn left_cut(&self) -> Vec<usize> {
        (0..self.left.n).collect()
    }

    /// Neighbours of b, as post-fusion register indices.
    pub fn b_neighbors(&self) -> Vec<usize> {
        self.right
            .neighbors(self.b())
            .into_iter()
            .map(|v| self.right_index(v))
            .collect()
    }

    pub fn l_neighbors(&self) -> Vec<usize> {
        self.left.neighbors(self.l())
    }

    fn k_l(&self) -> bool {
        self.left.k_flags[self.l()]
    }

    fn k_b(&self) -> bool {
        self.right.k_flags[self.b()]
    }

    /// Left state with L encoded into (e, a), tensored with the right state.
    pub fn initial_state(&self) -> Result<StateVector> {
        let left = build_graph_state(&self.left)?;
        let right = build_graph_state(&self.right)?;
        let nl = self.left.n;
        let mut amps = Vec::with_capacity(1 << (nl + self.right.n));
        for r in right.amplitudes() {
            for l in left.amplitudes() {
                amps.push(l * r);
            }
        }
        StateVector::from_amplitudes(nl + self.right.n, amps)?.duplicate_qubit(self.l())
    }

    /// Apply the fusion functional `A<00| + B<01| + C<10| + D<11|` on (a, b).
    /// Returns the normalized post-fusion state and the projector weight.
    pub fn fuse(&self, coeffs: [C64; 4]) -> Result<(StateVector, f64)> {
        let s = self.initial_state()?;
        let a = self.left.n + self.right.n;
        let b = self.left.n + self.b();
        apply_fusion_projector(&s, a, b, coeffs)
    }

    /// Graph of the fused cluster: both clusters without b, plus edges from e
    /// to every former neighbour of b.
    pub fn fused_graph(&self) -> GraphSpec {
        let nl = self.left.n;
        let mut g = GraphSpec::empty(nl + self.right.n - 1);
        g.edges.extend(self.left.edges.iter().copied());
        g.k_flags[..nl].copy_from_slice(&self.left.k_flags);
        let b = self.b();
        for &(u, v) in &self.right.edges {
            if u != b && v != b {
                let (x, y) = (self.right_index(u), self.right_index(v));
                g.edges.insert((x.min(y), x.max(y)));
            }
        }
        for v in (0..self.right.n).filter(|&v| v != b) {
            g.k_flags[self.right_index(v)] = self.right.k_flags[v];
        }
        for w in self.b_neighbors() {
            g.edges.insert((self.e().min(w), self.e().max(w)));
        }
        g
    }
}

fn te(phi: f64) -> [[C64; 2]; 2] {
    let zero = C64::new(0.0, 0.0);
    [
        [zero, C64::from_polar(1.0, -phi)],
        [C64::from_polar(1.0, phi), zero],
    ]
}

/// `K_e = T_e prod_{c in n(L) u n(b)} Z_c` stabilizes the fused state with
/// eigenvalue `(-1)^{k_L + k_b}`, the stabilizers of untouched vertices keep
/// their eigenvalues and those of b's former neighbours (now attached to e)
/// have eigenvalue +-1.
pub fn check_te_stabilizer(s: &StateVector, scenario: &FusionScenario, phi: f64) -> bool {
    let g = scenario.fused_graph();
    if s.n_qubits() != g.n {
        return false;
    }
    let s = match s.clone().normalized() {
        Ok(s) => s,
        Err(_) => return false,
    };
    let mut k = s.clone();
    for c in scenario
        .l_neighbors()
        .into_iter()
        .chain(scenario.b_neighbors())
    {
        k.apply_z(c);
    }
    k.apply_single(scenario.e(), te(phi));
    let sign = if scenario.k_l() ^ scenario.k_b() {
        -1.0
    } else {
        1.0
    };
    if eigen_residual(&s, &k, sign) > TOL_STABILIZER {
        return false;
    }
    let attached = scenario.b_neighbors();
    (0..g.n).filter(|&v| v != scenario.e()).all(|v| {
        let ks = apply_graph_stabilizer(&s, &g, v);
        let sign = if g.k_flags[v] { -1.0 } else { 1.0 };
        if attached.contains(&v) {
            eigen_residual(&s, &ks, 1.0) <= TOL_STABILIZER
                || eigen_residual(&s, &ks, -1.0) <= TOL_STABILIZER
        } else {
            eigen_residual(&s, &ks, sign) <= TOL_STABILIZER
        }
    })
}

/// True when no `Phi` on the grid passes `check_te_stabilizer`.
pub fn te_fails_on_grid(s: &StateVector, scenario: &FusionScenario) -> bool {
    (0..PHASE_GRID).all(|k| !check_te_stabilizer(s, scenario, TAU * k as f64 / PHASE_GRID as f64))
}

/// Weighted-graph description of a fused state: controlled phase `chi` on
/// the (e, d) edge and single-qubit phases on e and d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedGraphFit {
    pub chi: f64,
    pub phase_e: f64,
    pub phase_d: f64,
}

/// Diagonal two-qubit gate on (e, d) taking the fused graph without the
/// (e, d) edge to the fused state, for `d` the single neighbour of b.
pub fn link_gate(scenario: &FusionScenario, coeffs: [C64; 4]) -> Result<[C64; 4]> {
    if scenario.arity != NeighborArity::One {
        return Err(FusionError::InvalidConfig(
            "weighted-graph equivalence needs b with a single neighbour".into(),
        ));
    }
    let sb = if scenario.k_b() { -1.0 } else { 1.0 };
    let [a, b, c, d] = coeffs;
    Ok([a + b * sb, a - b * sb, c + d * sb, c - d * sb])
}

/// Phases of the link gate; `None` unless its four moduli agree.
pub fn fit_weighted_graph(
    scenario: &FusionScenario,
    coeffs: [C64; 4],
) -> Result<Option<WeightedGraphFit>> {
    let t = link_gate(scenario, coeffs)?;
    let scale = t.iter().map(|z| z.norm()).sum::<f64>() / 4.0;
    if scale == 0.0
        || t.iter()
            .any(|z| (z.norm() - scale).abs() > 1e-9 * scale.max(1.0))
    {
        return Ok(None);
    }
    let arg: Vec<f64> = t.iter().map(|z| z.arg()).collect();
    Ok(Some(WeightedGraphFit {
        chi: (arg[3] - arg[2] - arg[1] + arg[0]).rem_euclid(TAU),
        phase_e: arg[2] - arg[0],
        phase_d: arg[1] - arg[0],
    }))
}

/// Fused graph with (e, d) turned into the controlled-phase edge and the
/// fitted single-qubit phases applied.
pub fn weighted_graph_state(
    scenario: &FusionScenario,
    fit: &WeightedGraphFit,
) -> Result<StateVector> {
    let d = *scenario
        .b_neighbors()
        .first()
        .ok_or_else(|| FusionError::InvalidConfig("b has no neighbour".into()))?;
    let e = scenario.e();
    let mut g = scenario.fused_graph();
    g.edges.remove(&(e.min(d), e.max(d)));
    g.special_edge = Some(((e.min(d), e.max(d)), fit.chi));
    let mut s = build_graph_state(&g)?;
    s.apply_phase(e, fit.phase_e);
    s.apply_phase(d, fit.phase_d);
    Ok(s)
}

pub fn check_weighted_graph_equivalence(
    s: &StateVector,
    scenario: &FusionScenario,
    fit: &WeightedGraphFit,
) -> Result<bool> {
    let target = weighted_graph_state(scenario, fit)?;
    Ok(s.fidelity(&target) >= 1.0 - FIDELITY_TOL)
}

/// Solve for the weighted-graph parameters; if the direct fit fails, try
/// every `chi` on the grid with the fitted single-qubit phases.
pub fn find_weighted_graph(
    s: &StateVector,
    scenario: &FusionScenario,
    coeffs: [C64; 4],
) -> Result<Option<WeightedGraphFit>> {
    if let Some(fit) = fit_weighted_graph(scenario, coeffs)? {
        if check_weighted_graph_equivalence(s, scenario, &fit)? {
            return Ok(Some(fit));
        }
    }
    let t = link_gate(scenario, coeffs)?;
    let (phase_e, phase_d) = (t[2].arg() - t[0].arg(), t[1].arg() - t[0].arg());
    for k in 0..PHASE_GRID {
        let fit = WeightedGraphFit {
            chi: TAU * k as f64 / PHASE_GRID as f64,
            phase_e,
            phase_d,
        };
        if check_weighted_graph_equivalence(s, scenario, &fit)? {
            return Ok(Some(fit));
        }
    }
    Ok(None)
}

/// Per-outcome comparison of the dense simulation against the closed forms.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeCheck {
    pub i: u8,
    pub j: u8,
    pub probability: f64,
    /// Expected projector weight: `p` for distinct channels, `p / 2` for a
    /// doubly occupied channel.
    pub expected_weight: f64,
    pub projector_weight: f64,
    pub weight_ok: bool,
    pub formula_entropy_bits: Option<f64>,
    pub cut_entropy_bits: Option<f64>,
    pub entropy_ok: bool,
    pub labels: Vec<&'static str>,
    pub stabilizer_ok: Option<bool>,
    pub weighted_graph_ok: Option<bool>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub qubits: usize,
    pub arity: NeighborArity,
    pub outcomes: Vec<OutcomeCheck>,
    pub pass: bool,
}

/// Only outcomes above this probability enter the entropy comparison.
pub const ENTROPY_CHECK_MIN_P: f64 = 1e-6;

pub fn check_outcome(
    scenario: &FusionScenario,
    o: &OutcomeCoefficients,
    tol: f64,
) -> Result<OutcomeCheck> {
    let expected_weight = if o.relevant {
        o.probability
    } else {
        o.probability / 2.0
    };
    let fused = match scenario.fuse(o.raw) {
        Ok(r) => Some(r),
        Err(FusionError::ZeroOverlap) => None,
        Err(e) => return Err(e),
    };
    let projector_weight = fused.as_ref().map_or(0.0, |(_, w)| *w);
    let weight_ok = (projector_weight - expected_weight).abs() <= tol;

    let mut formula = None;
    let mut cut = None;
    let mut entropy_ok = true;
    let mut labels = Vec::new();
    let mut stabilizer_ok = None;
    let mut weighted_graph_ok = None;
    if let (Some((s, _)), true) = (&fused, o.probability > ENTROPY_CHECK_MIN_P) {
        let [a, b, c, d] = o.coeffs;
        let f = entropy_from_det((a * d - b * c).norm_sqr())?.bits;
        let x = s.bipartite_entropy(&scenario.left_cut())?.bits;
        entropy_ok = (f - x).abs() <= tol;
        formula = Some(f);
        cut = Some(x);

        let class = classify(o, scenario.arity, TOL_CLASSIFY);
        labels = class.names();
        for label in &class.labels {
            match label {
                StateLabel::Stabilizer { phi } => {
                    stabilizer_ok = Some(check_te_stabilizer(s, scenario, *phi));
                }
                StateLabel::WeightedGraph(p) if scenario.arity == NeighborArity::One => {
                    weighted_graph_ok = Some(match fit_weighted_graph(scenario, o.coeffs)? {
                        Some(mut fit) => {
                            if !scenario.k_b() {
                                fit.chi = p.chi;
                            }
                            check_weighted_graph_equivalence(s, scenario, &fit)?
                        }
                        None => false,
                    });
                }
                _ => {}
            }
        }
    }
    let pass = weight_ok
        && entropy_ok
        && stabilizer_ok.unwrap_or(true)
        && weighted_graph_ok.unwrap_or(true);
    Ok(OutcomeCheck {
        i: o.i.value(),
        j: o.j.value(),
        probability: o.probability,
        expected_weight,
        projector_weight,
        weight_ok,
        formula_entropy_bits: formula,
        cut_entropy_bits: cut,
        entropy_ok,
        labels,
        stabilizer_ok,
        weighted_graph_ok,
        pass,
    })
}

/// Fuse with every outcome of `u` and compare against the outcome table.
pub fn run_scenario(
    scenario: &FusionScenario,
    u: &FusionMatrix,
    tol: f64,
) -> Result<ScenarioReport> {
    let table = outcome_table(u)?;
    let outcomes = table
        .entries
        .iter()
        .map(|o| check_outcome(scenario, o, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioReport {
        qubits: scenario.total_qubits(),
        arity: scenario.arity,
        pass: outcomes.iter().all(|o| o.pass),
        outcomes,
    })
}
