//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.
//!
//! cargo test --release --test acceptance -- --nocapture

mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use fusionlab::classify::{WeightedGraphParams, TOL_CLASSIFY};
use fusionlab::entangle::determinant;
use fusionlab::fusion::OUTCOME_ORDER;
use fusionlab::matrix::{haar_sample, parse_matrix_json, TOL_UNITARY};
use fusionlab::optimize::target_grid;
use fusionlab::oracle::{
    bosonic_outcome_table, check_te_stabilizer, run_scenario, table_deviation, te_fails_on_grid,
};
use fusionlab::verify::random_balanced;
use fusionlab::{
    builtin, classify, derive_invariants, optimize, outcome_table, sweep, threshold_probability,
    EntanglementReport, NeighborArity, ObjectiveSpec, OptimizerConfig, OutcomeCoefficients,
    RngSeed,
};
use rand::Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_time(started: Instant, limit: Duration) -> Result<(), String> {
    let t = started.elapsed();
    ensure(t < limit, format!("took {t:.1?}, limit {limit:?}"))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fusionlab"))
}

fn max_abs_n(u: &fusionlab::FusionMatrix) -> f64 {
    derive_invariants(u)
        .n
        .iter()
        .fold(0.0, |m, x| m.max(x.abs()))
}

/// `analyze --matrix pbs2` reproduces the two-PBS outcome table.
fn pbs2_reproduction() -> Outcome {
    let started = Instant::now();
    let out = bin()
        .args(["analyze", "--matrix", "pbs2"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(
        out.status.success(),
        format!("exit {:?}", out.status.code()),
    )?;
    let report: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let tol = 1e-9;
    let num = |v: &Value| v.as_f64().unwrap_or(f64::NAN);
    let mut same_port = 0.0;
    for o in report["outcomes"].as_array().ok_or("no outcomes")? {
        let (i, j) = (o["i"].as_u64().unwrap(), o["j"].as_u64().unwrap());
        let p = num(&o["probability"]);
        let s = num(&o["entropy_bits"]);
        match (i, j) {
            _ if i == j => {
                same_port += p;
                ensure(s.abs() <= tol, format!("({i},{j}) S = {s}"))?;
            }
            (1, 3) | (1, 4) | (2, 3) | (2, 4) => {
                ensure((p - 0.125).abs() <= tol, format!("({i},{j}) p = {p}"))?;
                ensure((s - 1.0).abs() <= tol, format!("({i},{j}) S = {s}"))?;
            }
            (1, 2) | (3, 4) => ensure(p.abs() <= tol, format!("({i},{j}) p = {p}"))?,
            _ => return Err(format!("unexpected outcome ({i},{j})")),
        }
    }
    ensure(
        (same_port - 0.5).abs() <= tol,
        format!("same-port total {same_port}"),
    )?;
    within_time(started, Duration::from_secs(1))?;
    Ok(format!(
        "same-port total {same_port:.6}, cross-port p = 0.125 and S = 1"
    ))
}

/// No Haar matrix beats P(S = 1) = 1/2.
fn threshold_bound() -> Outcome {
    let started = Instant::now();
    let mut rng = RngSeed(2).rng();
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let u = haar_sample(&mut rng).map_err(|e| e.to_string())?;
        worst = worst.max(threshold_probability(&u, 1.0).map_err(|e| e.to_string())?);
    }
    ensure(worst <= 0.5 + 1e-9, format!("max P(S=1) = {worst}"))?;
    within_time(started, Duration::from_secs(60))?;
    // Haar samples essentially never produce S = 1 exactly; balanced
    // constructions sit on the bound
    let mut balanced = 0.0f64;
    for _ in 0..10_000 {
        let u = random_balanced(&mut rng);
        balanced = balanced.max(threshold_probability(&u, 1.0).map_err(|e| e.to_string())?);
    }
    ensure(
        balanced <= 0.5 + 1e-9,
        format!("balanced max P(S=1) = {balanced}"),
    )?;
    Ok(format!(
        "max P(S = 1): Haar {worst:.6}, balanced constructions {balanced:.12}"
    ))
}

/// Balanced matrices saturate the bound and the optimizer finds one.
fn saturation() -> Outcome {
    let started = Instant::now();
    for name in ["pbs2", "theorem7"] {
        let u = builtin(name).unwrap();
        ensure(max_abs_n(&u) <= 1e-12, format!("{name} has nonzero n"))?;
        let p = threshold_probability(&u, 1.0).map_err(|e| e.to_string())?;
        ensure((p - 0.5).abs() <= 1e-12, format!("{name}: P = {p}"))?;
    }
    let r = optimize(
        &ObjectiveSpec::ThresholdProbability { s_target_bits: 1.0 },
        &OptimizerConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let n = max_abs_n(&r.best_matrix);
    ensure(
        r.hard_value >= 0.499,
        format!("optimizer P = {}", r.hard_value),
    )?;
    ensure(n <= 1e-3, format!("max |n_i| = {n:e}"))?;
    within_time(started, Duration::from_secs(120))?;
    Ok(format!(
        "optimizer P = {:.9}, max |n_i| = {n:.2e}",
        r.hard_value
    ))
}

/// Certain success forces product states, and the optimizer never reaches
/// P = 1 for a nonzero threshold.
fn certain_success() -> Outcome {
    let u = builtin("blockpair").unwrap();
    let table = outcome_table(&u).map_err(|e| e.to_string())?;
    let p_total: f64 = table.relevant().map(|o| o.probability).sum();
    ensure(
        (p_total - 1.0).abs() <= 1e-9,
        format!("blockpair p_total = {p_total}"),
    )?;
    for o in table.relevant().filter(|o| o.probability > 1e-9) {
        let s = EntanglementReport::of(o)
            .map_err(|e| e.to_string())?
            .entropy_bits;
        ensure(s <= 1e-9, format!("({},{}) S = {s}", o.i, o.j))?;
    }
    let r = optimize(
        &ObjectiveSpec::ThresholdProbability { s_target_bits: 0.1 },
        &OptimizerConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    ensure(r.restarts.len() == 20, "expected 20 restarts")?;
    let best = r
        .restarts
        .iter()
        .map(|s| s.hard_value)
        .fold(r.hard_value, f64::max);
    ensure(best < 1.0 - 1e-6, format!("P(S >= 0.1) = {best}"))?;
    Ok(format!(
        "blockpair outcomes are products; best P(S >= 0.1) = {best:.6}"
    ))
}

/// Optimized expectation entropy across p_target in [0.5, 1].
fn expectation_sweep() -> Outcome {
    let started = Instant::now();
    let targets = target_grid(0.5, 1.0, 0.01);
    let rs = sweep(
        &ObjectiveSpec::ExpectationEntropy {
            p_target: 0.5,
            alpha: 1000.0,
        },
        &targets,
        &OptimizerConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let s: Vec<f64> = rs.iter().map(|r| r.hard_value).collect();
    let (first, last) = (s[0], s[s.len() - 1]);
    ensure(first >= 0.49, format!("<S>(0.5) = {first}"))?;
    ensure(last <= 0.01, format!("<S>(1.0) = {last}"))?;
    for k in 1..s.len() {
        ensure(
            s[k] <= s[k - 1] + 0.02,
            format!("rises from {} to {} at p = {}", s[k - 1], s[k], targets[k]),
        )?;
    }
    let mut band = 0.0f64;
    for p in [0.6, 0.7, 0.8, 0.9] {
        let k = targets.iter().position(|&t| (t - p).abs() < 1e-9).unwrap();
        band = band.max((s[k] - (1.0 - p)).abs());
    }
    ensure(band <= 0.08, format!("|<S> - (1 - p)| reaches {band}"))?;
    within_time(started, Duration::from_secs(15 * 60))?;
    Ok(format!(
        "<S>(0.5) = {first:.4}, <S>(1.0) = {last:.4}, band deviation {band:.3}, {:.0?}",
        started.elapsed()
    ))
}

/// Optimized P(S >= s) across s in [0, 1].
fn threshold_sweep() -> Outcome {
    let targets = target_grid(0.0, 1.0, 0.1);
    let rs = sweep(
        &ObjectiveSpec::ThresholdProbability { s_target_bits: 0.0 },
        &targets,
        &OptimizerConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let p: Vec<f64> = rs.iter().map(|r| r.hard_value).collect();
    for k in 1..p.len() {
        ensure(
            p[k] <= p[k - 1] + 1e-3,
            format!("P rises at s = {}", targets[k]),
        )?;
    }
    ensure((p[0] - 1.0).abs() <= 1e-12, format!("P(0) = {}", p[0]))?;
    let p1 = p[p.len() - 1];
    ensure((0.499..=0.5 + 1e-9).contains(&p1), format!("P(1) = {p1}"))?;
    let interior = &rs[1..rs.len() - 1];
    let six = interior.iter().filter(|r| r.states_used == 6).count();
    ensure(
        six as f64 >= 0.8 * interior.len() as f64,
        format!(
            "states_used = 6 at {six} of {} interior targets",
            interior.len()
        ),
    )?;
    Ok(format!(
        "P(0) = {}, P(1) = {p1:.6}, six states at {six}/{} interior targets",
        p[0],
        interior.len()
    ))
}

/// Fock-space and dense-fusion oracles agree with the closed forms.
fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let mut rng = RngSeed(7).rng();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let u = haar_sample(&mut rng).map_err(|e| e.to_string())?;
        let a = outcome_table(&u).map_err(|e| e.to_string())?;
        let b = bosonic_outcome_table(&u).map_err(|e| e.to_string())?;
        worst = worst.max(table_deviation(&a, &b));
    }
    ensure(worst <= 1e-9, format!("bosonic deviation {worst:e}"))?;
    let mut qubits = 0;
    for k in 0..50 {
        let sc = common::random_scenario(&mut rng, 4, 4);
        let u = haar_sample(&mut rng).map_err(|e| e.to_string())?;
        let r = run_scenario(&sc, &u, 1e-9).map_err(|e| e.to_string())?;
        qubits = qubits.max(r.qubits);
        for o in &r.outcomes {
            ensure(
                o.weight_ok && o.entropy_ok,
                format!("scenario {k} outcome ({},{}) disagrees", o.i, o.j),
            )?;
        }
    }
    within_time(started, Duration::from_secs(300))?;
    Ok(format!(
        "bosonic deviation {worst:.1e}; 50 scenarios up to {qubits} qubits agree"
    ))
}

fn wg_quadruple<R: Rng>(rng: &mut R, near_cluster: bool) -> WeightedGraphParams {
    let phi1 = rng.random_range(-PI..PI);
    let phi2 = if near_cluster {
        // log-uniform offset straddling the det = 1/4 boundary, plus a
        // multiple of pi that describes the same state
        let delta = 10f64.powf(rng.random_range(-7.0..-2.0))
            * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let shift = PI * rng.random_range(-2..=2) as f64;
        phi1 + delta + shift
    } else {
        rng.random_range(-PI..PI)
    };
    WeightedGraphParams {
        theta1: rng.random_range(-PI..PI),
        phi1,
        theta2: rng.random_range(-PI..PI),
        phi2,
        chi: 2.0 * (phi1 - phi2) + PI,
    }
}

/// Weighted-graph determinant and the cluster criterion agree.
fn classification_coherence() -> Outcome {
    let mut rng = RngSeed(8).rng();
    let (mut worst, mut clusters, mut disagreements) = (0.0f64, 0, 0);
    for k in 0..10_000 {
        let w = wg_quadruple(&mut rng, k % 2 == 1);
        let o = OutcomeCoefficients::from_state(w.reconstruct()).map_err(|e| e.to_string())?;
        let det = determinant(&o).map_err(|e| e.to_string())?;
        worst = worst.max((det - (1.0 - w.chi.cos()) / 8.0).abs());
        let cluster = classify(&o, NeighborArity::One, TOL_CLASSIFY).has("ClusterUpToRotation");
        let quarter = (det - 0.25).abs() <= TOL_CLASSIFY;
        clusters += usize::from(cluster);
        disagreements += usize::from(cluster != quarter);
    }
    ensure(worst <= 1e-9, format!("det deviates by {worst:e}"))?;
    ensure(disagreements == 0, format!("{disagreements} disagreements"))?;
    Ok(format!(
        "det error {worst:.1e}, {clusters} clusters, 0 disagreements"
    ))
}

fn stabilizer_quadruple<R: Rng>(rng: &mut R) -> [fusionlab::matrix::C64; 4] {
    let zero = fusionlab::matrix::C64::new(0.0, 0.0);
    let r = rng.random_range(0.1..1.0);
    let (x, y) = (common::phase(rng) * r, common::phase(rng) * r);
    if rng.random_bool(0.5) {
        [x, zero, zero, y]
    } else {
        [zero, x, y, zero]
    }
}

fn violating_quadruple<R: Rng>(rng: &mut R, k: usize) -> [fusionlab::matrix::C64; 4] {
    let zero = fusionlab::matrix::C64::new(0.0, 0.0);
    match k % 3 {
        0 => common::gaussian_quadruple(rng),
        // right pattern, unequal magnitudes
        1 => {
            let a = rng.random_range(0.2..0.6);
            [
                common::phase(rng) * a,
                zero,
                zero,
                common::phase(rng) * (1.0 - a * a).sqrt(),
            ]
        }
        // maximally entangled but off the pattern
        _ => {
            let w = wg_quadruple(rng, false);
            WeightedGraphParams { phi2: w.phi1, ..w }.reconstruct()
        }
    }
}

/// K_e stabilizes exactly the fusions with stabilizer coefficients.
fn stabilizer_oracle() -> Outcome {
    let mut rng = RngSeed(9).rng();
    for k in 0..100 {
        let sc = common::random_scenario(&mut rng, 4, 4);
        let q = stabilizer_quadruple(&mut rng);
        let o = OutcomeCoefficients::from_state(q).map_err(|e| e.to_string())?;
        let phi = classify(&o, sc.arity, TOL_CLASSIFY)
            .stabilizer_phi()
            .ok_or(format!("sample {k} not classified Stabilizer"))?;
        let (s, _) = sc.fuse(q).map_err(|e| e.to_string())?;
        ensure(
            check_te_stabilizer(&s, &sc, phi),
            format!("sample {k} fails K_e"),
        )?;
    }
    for k in 0..100 {
        let sc = common::random_scenario(&mut rng, 4, 4);
        let q = violating_quadruple(&mut rng, k);
        let o = OutcomeCoefficients::from_state(q).map_err(|e| e.to_string())?;
        ensure(
            classify(&o, sc.arity, TOL_CLASSIFY)
                .stabilizer_phi()
                .is_none(),
            format!("violating sample {k} classified Stabilizer"),
        )?;
        let (s, _) = sc.fuse(q).map_err(|e| e.to_string())?;
        ensure(
            te_fails_on_grid(&s, &sc),
            format!("violating sample {k} passes K_e"),
        )?;
    }
    Ok("100 stabilizer fusions pass, 100 violating fusions fail on all 360 phases".into())
}

/// `verify --trials 1000` exits 0.
fn verify_suites() -> Outcome {
    let started = Instant::now();
    let out = bin()
        .args(["verify", "--trials", "1000", "--seed", "1"])
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout);
    ensure(
        out.status.success(),
        format!("exit {:?}\n{text}", out.status.code()),
    )?;
    let suites = text.lines().filter(|l| l.starts_with("PASS")).count();
    within_time(started, Duration::from_secs(120))?;
    Ok(format!("{suites} suites pass in {:.1?}", started.elapsed()))
}

#[test]
fn acceptance() {
    // sanity of the shared fixtures before the long runs
    assert_eq!(OUTCOME_ORDER.len(), 10);
    assert!(parse_matrix_json(
        &fusionlab::matrix::matrix_to_json(&builtin("pbs2").unwrap()),
        TOL_UNITARY
    )
    .is_ok());

    let criteria: [Criterion; 10] = [
        ("1 two-PBS outcome table", pbs2_reproduction),
        ("2 P(S = 1) <= 1/2 over Haar samples", threshold_bound),
        ("3 balanced matrices saturate 1/2", saturation),
        ("4 certain success means no entanglement", certain_success),
        ("5 expectation sweep endpoints and shape", expectation_sweep),
        ("6 threshold sweep shape", threshold_sweep),
        ("7 oracle equivalence", oracle_equivalence),
        ("8 classification coherence", classification_coherence),
        ("9 stabilizer oracle", stabilizer_oracle),
        ("10 invariant suites", verify_suites),
    ];
    // written to the raw stdout handle so the lines survive output capture
    let mut stdout = std::io::stdout();
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let line = match check() {
            Ok(detail) => format!("PASS criterion {name}: {detail}\n"),
            Err(why) => {
                failed.push(name);
                format!("FAIL criterion {name}: {why}\n")
            }
        };
        let _ = stdout.write_all(line.as_bytes());
        let _ = stdout.flush();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
