//! Property suites over random and constructed fusion matrices, each an
//! identity or theorem that must hold for every unitary.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classify::{classify, NeighborArity, TOL_CLASSIFY};
use crate::entangle::{
    determinant, entropy_from_det, entropy_from_schmidt, factored_determinant,
    is_maximally_entangled, reduced_density, schmidt,
};
use crate::error::Result;
use crate::fusion::{derive_invariants, outcome_table, total_relevant_probability};
use crate::matrix::{
    builtin, haar_sample, matmul, FusionMatrix, Grid, Provenance, RngSeed, BUILTIN_NAMES, C64,
};
use crate::optimize::threshold_probability;
use crate::oracle::{
    bosonic_outcome_table, build_graph_state, check_stabilizers, run_scenario, table_deviation,
    FusionScenario, GraphSpec,
};

/// Exact algebraic identities are checked at this tolerance.
pub const TOL_IDENTITY: f64 = 1e-12;

/// Outcomes below this probability are skipped where a closed form divides by p.
pub const MIN_P: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: RngSeed,
    /// Tolerance of the oracle and entropy comparisons.
    pub tol: f64,
    /// Corrupt the probability formula to prove the suites can fail.
    pub negative_control: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            trials: 1000,
            seed: RngSeed(1),
            tol: 1e-9,
            negative_control: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: usize,
    pub failures: usize,
    /// Largest deviation seen (suite-specific units).
    pub worst: f64,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        SuiteResult {
            name,
            checks: 0,
            failures: 0,
            worst: 0.0,
        }
    }

    fn check(&mut self, ok: bool) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
        }
    }

    fn within(&mut self, deviation: f64, tol: f64) {
        self.worst = self.worst.max(deviation);
        self.check(deviation <= tol);
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub suites: Vec<SuiteResult>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

fn random_2x2<R: Rng + ?Sized>(rng: &mut R) -> [[C64; 2]; 2] {
    let u = haar_sample(rng).expect("Haar sampling");
    let (a, b) = (u.at(0, 0), u.at(1, 0));
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let (a, b) = (a / norm, b / norm);
    let phase = C64::from_polar(1.0, rng.random_range(-PI..PI));
    [[a, -b.conj() * phase], [b, a.conj() * phase]]
}

fn block_diag(v: [[C64; 2]; 2], w: [[C64; 2]; 2]) -> Grid {
    let z = C64::new(0.0, 0.0);
    [
        [v[0][0], v[0][1], z, z],
        [v[1][0], v[1][1], z, z],
        [z, z, w[0][0], w[0][1]],
        [z, z, w[1][0], w[1][1]],
    ]
}

/// Random unitary with `m_i = 1/2` in every column:
/// `(V + W) M (R + S)` with `M` the 50:50 mix of the two halves.
pub fn random_balanced<R: Rng + ?Sized>(rng: &mut R) -> FusionMatrix {
    let mix = *builtin("theorem7").expect("builtin").entries();
    let left = block_diag(random_2x2(rng), random_2x2(rng));
    let right = block_diag(random_2x2(rng), random_2x2(rng));
    FusionMatrix::from_grid(matmul(&matmul(&left, &mix), &right), Provenance::Derived)
}

/// Random unitary whose first two rows live on two output channels, so that
/// the two photons always leave in different channels.
pub fn random_block_pair<R: Rng + ?Sized>(rng: &mut R) -> FusionMatrix {
    let g = block_diag(random_2x2(rng), random_2x2(rng));
    let mut cols = [0usize, 1, 2, 3];
    for k in (1..4).rev() {
        cols.swap(k, rng.random_range(0..=k));
    }
    let mut out = g;
    for r in 0..4 {
        for c in 0..4 {
            out[r][cols[c]] = g[r][c];
        }
    }
    FusionMatrix::from_grid(out, Provenance::Derived)
}

fn sum_rules(us: &[FusionMatrix]) -> SuiteResult {
    let mut s = SuiteResult::new("sum rules of m, n, t, k");
    for u in us {
        let inv = derive_invariants(u);
        s.within((inv.m.iter().sum::<f64>() - 2.0).abs(), TOL_IDENTITY);
        s.within(inv.n.iter().sum::<f64>().abs(), TOL_IDENTITY);
        s.within(inv.t.iter().sum::<C64>().norm(), TOL_IDENTITY);
        s.within(inv.k.iter().sum::<f64>().abs(), TOL_IDENTITY);
        for i in 0..4 {
            let (m, t, k) = (inv.m[i], inv.t[i], inv.k[i]);
            s.check((-TOL_IDENTITY..=1.0 + TOL_IDENTITY).contains(&m));
            s.check(t.norm() <= m / 2.0 + TOL_IDENTITY && k.abs() <= m + TOL_IDENTITY);
            s.within((m * m - 4.0 * t.norm_sqr() - k * k).abs(), TOL_IDENTITY);
        }
    }
    s
}

fn corrupted_probability(u: &FusionMatrix, i: usize, j: usize) -> f64 {
    let inv = derive_invariants(u);
    if i == j {
        0.5 * inv.m[i] * (1.0 - inv.m[i])
    } else {
        let overlap = u.at(0, i) * u.at(0, j).conj() + u.at(1, i) * u.at(1, j).conj();
        0.125 - 0.5 * inv.n[i] * inv.n[j] + 0.5 * overlap.norm_sqr()
    }
}

fn probability_sum(us: &[FusionMatrix], negative_control: bool) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("outcome probabilities sum to one");
    for u in us {
        let table = outcome_table(u)?;
        let total = if negative_control {
            table
                .entries
                .iter()
                .map(|o| corrupted_probability(u, o.i.col(), o.j.col()))
                .sum()
        } else {
            table.total_probability()
        };
        s.within((total - 1.0).abs(), TOL_IDENTITY);
        let same_port: f64 = table
            .entries
            .iter()
            .filter(|o| !o.relevant)
            .map(|o| o.probability)
            .sum();
        let p_total = total_relevant_probability(u);
        s.within((p_total - (1.0 - same_port)).abs(), TOL_IDENTITY);
        s.check((0.5 - TOL_IDENTITY..=1.0 + TOL_IDENTITY).contains(&p_total));
    }
    Ok(s)
}

fn probability_bounds(us: &[FusionMatrix]) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("probability bounds and N^2 = 4p");
    for u in us {
        for o in &outcome_table(u)?.entries {
            let cap = if o.relevant { 0.25 } else { 0.125 };
            s.check(o.probability >= 0.0 && o.probability <= cap + TOL_IDENTITY);
            let n2 = o.raw.iter().map(|z| z.norm_sqr()).sum::<f64>();
            let expected = if o.relevant { 4.0 } else { 2.0 } * o.probability;
            s.within((n2 - expected).abs(), TOL_IDENTITY);
        }
    }
    Ok(s)
}

fn determinant_forms(us: &[FusionMatrix]) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("determinant forms agree");
    for u in us {
        for o in outcome_table(u)?.entries.iter().filter(|o| !o.zero) {
            let det = determinant(o)?;
            s.within((det - reduced_density(o)?.det()).abs(), TOL_IDENTITY);
            s.check((-TOL_IDENTITY..=0.25 + TOL_IDENTITY).contains(&det));
            if o.relevant && o.probability > MIN_P {
                let f = factored_determinant(u, o.i, o.j, o.probability)?;
                s.within((f - det).abs(), TOL_IDENTITY);
            }
        }
    }
    Ok(s)
}

fn schmidt_paths(us: &[FusionMatrix], tol: f64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("Schmidt and determinant entropies agree");
    for u in us {
        for o in outcome_table(u)?.entries.iter().filter(|o| !o.zero) {
            let det = determinant(o)?;
            let pair = schmidt(o)?;
            s.within(
                (pair.alpha.powi(2) + pair.beta.powi(2) - 1.0).abs(),
                TOL_IDENTITY,
            );
            s.within((pair.alpha * pair.beta - det.sqrt()).abs(), tol);
            let via_det = entropy_from_det(det)?.bits;
            s.within((entropy_from_schmidt(&pair).bits - via_det).abs(), tol);
        }
    }
    Ok(s)
}

fn max_entangled_conditions(us: &[FusionMatrix], balanced: &[FusionMatrix]) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("maximal-entanglement conditions match det = 1/4");
    let tol = TOL_CLASSIFY;
    for u in us.iter().chain(balanced) {
        for o in outcome_table(u)?.relevant() {
            if o.probability <= MIN_P {
                continue;
            }
            let by_conditions = is_maximally_entangled(u, o.i, o.j, tol)?;
            let det = determinant(o)?;
            s.check(by_conditions == ((det - 0.25).abs() <= 10.0 * tol));
        }
    }
    Ok(s)
}

fn phase_invariance(us: &[FusionMatrix], rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("phase invariance of probabilities and entropies");
    for u in us {
        let mut left = [0.0; 4];
        let mut right = [0.0; 4];
        for x in left.iter_mut().chain(right.iter_mut()) {
            *x = rng.random_range(-PI..PI);
        }
        let v = crate::matrix::phase_multiply(u, &left, &right);
        let (a, b) = (outcome_table(u)?, outcome_table(&v)?);
        for (x, y) in a.entries.iter().zip(&b.entries) {
            s.within((x.probability - y.probability).abs(), TOL_IDENTITY);
            for (p, q) in x.coeffs.iter().zip(&y.coeffs) {
                s.within((p.norm() - q.norm()).abs(), TOL_IDENTITY);
            }
            if !x.zero && !y.zero {
                let sx = entropy_from_det(determinant(x)?)?.bits;
                let sy = entropy_from_det(determinant(y)?)?.bits;
                s.within((sx - sy).abs(), TOL_IDENTITY);
            }
        }
    }
    Ok(s)
}

/// Haar moments: `E|U_11|^2 = 1/4` and `E m_1 = 1/2` within 3 sigma, every
/// `E|U_ij|^2` within 4 sigma.
pub fn haar_moments(n: usize, seed: RngSeed) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("Haar moments");
    let mut rng = seed.rng();
    let mut sums = [[0.0; 4]; 4];
    let mut m1 = 0.0;
    for _ in 0..n {
        let u = haar_sample(&mut rng)?;
        for (r, row) in sums.iter_mut().enumerate() {
            for (c, acc) in row.iter_mut().enumerate() {
                *acc += u.at(r, c).norm_sqr();
            }
        }
        m1 += u.at(0, 0).norm_sqr() + u.at(1, 0).norm_sqr();
    }
    let nf = n as f64;
    // |U_ij|^2 ~ Beta(1, 3), m_1 ~ Beta(2, 2)
    let sigma_entry = (3.0 / 80.0 / nf).sqrt();
    let sigma_m = (1.0 / 20.0 / nf).sqrt();
    let z11 = (sums[0][0] / nf - 0.25).abs() / sigma_entry;
    let zm = (m1 / nf - 0.5).abs() / sigma_m;
    s.within(z11, 3.0);
    s.within(zm, 3.0);
    for row in &sums {
        for acc in row {
            s.within((acc / nf - 0.25).abs() / sigma_entry, 4.0);
        }
    }
    Ok(s)
}

fn threshold_bound(us: &[FusionMatrix]) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("P(S = 1) never exceeds 1/2");
    for u in us {
        let p = threshold_probability(u, 1.0)?;
        s.within((p - 0.5).max(0.0), 1e-9);
    }
    Ok(s)
}

fn balanced_saturation(balanced: &[FusionMatrix]) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("balanced matrices reach P(S = 1) = 1/2");
    let named = ["pbs2", "theorem7"].map(|n| builtin(n).expect("builtin"));
    for u in named.iter().chain(balanced) {
        s.within((threshold_probability(u, 1.0)? - 0.5).abs(), TOL_IDENTITY);
    }
    Ok(s)
}

fn certain_success(blocks: &[FusionMatrix]) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("certain success leaves only product states");
    let named = builtin("blockpair").expect("builtin");
    for u in std::iter::once(&named).chain(blocks) {
        s.within((total_relevant_probability(u) - 1.0).abs(), 1e-9);
        for o in outcome_table(u)?
            .relevant()
            .filter(|o| o.probability > 1e-9)
        {
            s.within(entropy_from_det(determinant(o)?)?.bits, 1e-9);
        }
    }
    Ok(s)
}

fn bosonic(us: &[FusionMatrix], tol: f64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("Fock-space expansion matches outcome table");
    for u in us {
        s.within(
            table_deviation(&bosonic_outcome_table(u)?, &outcome_table(u)?),
            tol,
        );
    }
    Ok(s)
}

/// Random connected graph on `n` vertices: a random tree plus extra edges.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, n: usize) -> GraphSpec {
    let mut g = GraphSpec::empty(n);
    for v in 1..n {
        let parent = rng.random_range(0..v);
        let _ = g.add_edge(parent, v);
    }
    for _ in 0..rng.random_range(0..=n) {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v {
            let _ = g.add_edge(u, v);
        }
    }
    for k in g.k_flags.iter_mut() {
        *k = rng.random_bool(0.25);
    }
    g
}

/// Random pair of clusters with at most `max_left` and `max_right` qubits,
/// marked so that the fused right qubit has one or two neighbours.
pub fn random_scenario<R: Rng + ?Sized>(
    rng: &mut R,
    max_left: usize,
    max_right: usize,
) -> Result<FusionScenario> {
    loop {
        let nl = rng.random_range(1..=max_left);
        let nr = rng.random_range(2..=max_right);
        let left = random_graph(rng, nl);
        let right = random_graph(rng, nr);
        let candidates: Vec<usize> = (0..nr)
            .filter(|&v| matches!(right.degree(v), 1 | 2))
            .collect();
        if candidates.is_empty() {
            continue;
        }
        let l = rng.random_range(0..nl);
        let b = candidates[rng.random_range(0..candidates.len())];
        return FusionScenario::new(left.with_mark(l), right.with_mark(b));
    }
}

fn graph_stabilizers(count: usize, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("graph states satisfy their stabilizers");
    for _ in 0..count {
        let n = rng.random_range(1..=8);
        let g = random_graph(rng, n);
        let state = build_graph_state(&g)?;
        s.check(check_stabilizers(&state, &g));
        let mut flipped = g.clone();
        let v = rng.random_range(0..n);
        flipped.k_flags[v] = !flipped.k_flags[v];
        s.check(!check_stabilizers(&state, &flipped));
    }
    Ok(s)
}

fn scenarios(count: usize, rng: &mut ChaCha8Rng, tol: f64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("dense fusion matches weights and entropies");
    for _ in 0..count {
        let sc = random_scenario(rng, 3, 3)?;
        let u = haar_sample(rng)?;
        s.check(run_scenario(&sc, &u, tol)?.pass);
    }
    Ok(s)
}

fn classification_hierarchy(us: &[FusionMatrix], balanced: &[FusionMatrix]) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("classification hierarchy");
    let named = BUILTIN_NAMES
        .iter()
        .filter_map(|n| builtin(n))
        .collect::<Vec<_>>();
    for u in us.iter().chain(balanced).chain(&named) {
        for o in outcome_table(u)?.entries.iter().filter(|o| !o.zero) {
            let c = classify(o, NeighborArity::One, TOL_CLASSIFY);
            let det = determinant(o)?;
            if c.has("Product") {
                s.within(det, 1e-9);
            }
            if c.has("MaxEntangledGeneric") {
                s.within((det - 0.25).abs(), 1e-7);
            }
            if c.has("Stabilizer") {
                s.check(c.has("MaxEntangledGeneric"));
                s.within((det - 0.25).abs(), 1e-9);
            }
            if let Some(p) = c.weighted_graph() {
                s.within((det - (1.0 - p.chi.cos()) / 8.0).abs(), 1e-9);
            }
        }
    }
    Ok(s)
}

/// Run every suite. Sample counts follow `trials`; the Haar moment check uses
/// at least 1000 draws and the dense suites are capped to stay fast.
pub fn run_all(opts: &VerifyOptions) -> Result<VerifySummary> {
    let trials = opts.trials.max(1);
    let mut rng = opts.seed.rng();
    let us = (0..trials)
        .map(|_| haar_sample(&mut rng))
        .collect::<Result<Vec<_>>>()?;
    let balanced: Vec<FusionMatrix> = (0..trials.min(200))
        .map(|_| random_balanced(&mut rng))
        .collect();
    let blocks: Vec<FusionMatrix> = (0..trials.min(200))
        .map(|_| random_block_pair(&mut rng))
        .collect();

    let suites = vec![
        sum_rules(&us),
        probability_sum(&us, opts.negative_control)?,
        probability_bounds(&us)?,
        determinant_forms(&us)?,
        schmidt_paths(&us, opts.tol)?,
        max_entangled_conditions(&us, &balanced)?,
        phase_invariance(&us, &mut rng)?,
        haar_moments(trials.max(1000), opts.seed.derive(1))?,
        threshold_bound(&us)?,
        balanced_saturation(&balanced)?,
        certain_success(&blocks)?,
        classification_hierarchy(&us, &balanced)?,
        bosonic(&us, opts.tol)?,
        graph_stabilizers(trials.min(100), &mut rng)?,
        scenarios(trials.min(30), &mut rng, opts.tol)?,
    ];
    Ok(VerifySummary { suites })
}
