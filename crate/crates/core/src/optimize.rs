//! Objectives over fusion matrices and their finite-difference optimization.
//!
//! Two experiments are supported: the expected link entropy at a fixed total
//! success probability, and the probability `P(S_target)` of producing a link
//! at least as entangled as a target.

use rayon::prelude::*;
use serde::Serialize;

use crate::entangle::{eigenvalues_from_det, entropy, entropy_from_det, EntropyBase};
use crate::error::{FusionError, Result};
use crate::fusion::{outcome_table, total_relevant_probability, OutcomeTable};
use crate::matrix::{from_params, haar_sample, FusionMatrix, RngSeed, UnitaryParams};

/// Constant added to the expectation cost to keep it positive.
pub const COST_BASELINE: f64 = 2.0;

/// Outcomes above this probability count towards `states_used`.
pub const STATES_USED_MIN_P: f64 = 1e-6;

const STATES_USED_SLACK: f64 = 1e-9;

/// Probability and entropy (bits) of each of the ten outcomes.
fn outcome_entropies(table: &OutcomeTable, snap: bool) -> Result<Vec<(f64, f64, bool)>> {
    table
        .entries
        .iter()
        .map(|o| {
            if o.zero || !o.relevant {
                return Ok((o.probability, 0.0, o.relevant));
            }
            let [a, b, c, d] = o.coeffs;
            let det = (a * d - b * c).norm_sqr();
            let s = if snap {
                entropy_from_det(det)?.bits
            } else {
                entropy(eigenvalues_from_det(det)?.0, EntropyBase::Bits)
            };
            Ok((o.probability, s, true))
        })
        .collect()
}

/// `sum_{i<j} p_ij S_ij` in bits.
pub fn expectation_entropy(u: &FusionMatrix) -> Result<f64> {
    let table = outcome_table(u)?;
    Ok(outcome_entropies(&table, true)?
        .iter()
        .filter(|(_, _, relevant)| *relevant)
        .fold(0.0, |acc, (p, s, _)| acc + p * s))
}

/// Total probability of outcomes whose entropy is at least `s_target_bits`.
pub fn threshold_probability(u: &FusionMatrix, s_target_bits: f64) -> Result<f64> {
    check_s_target(s_target_bits)?;
    let table = outcome_table(u)?;
    Ok(outcome_entropies(&table, true)?
        .iter()
        .filter(|(_, s, _)| *s >= s_target_bits)
        .fold(0.0, |acc, (p, _, _)| acc + p))
}

/// Relevant outcomes with non-negligible probability and entropy at or above
/// the target (or any entanglement at all when `s_target_bits` is `None`).
pub fn states_used(u: &FusionMatrix, s_target_bits: Option<f64>) -> Result<usize> {
    let table = outcome_table(u)?;
    Ok(outcome_entropies(&table, true)?
        .iter()
        .filter(|(p, s, relevant)| {
            *relevant
                && *p > STATES_USED_MIN_P
                && match s_target_bits {
                    Some(t) => *s >= t - STATES_USED_SLACK,
                    None => *s > STATES_USED_SLACK,
                }
        })
        .count())
}

pub fn cost_expectation(u: &FusionMatrix, p_target: f64, alpha: f64) -> Result<f64> {
    let gap = total_relevant_probability(u) - p_target;
    Ok(COST_BASELINE + alpha * gap * gap - expectation_entropy(u)?)
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-sum p * sigma((S - s_target) / tau)`, a smooth stand-in for `-P(s_target)`.
pub fn cost_threshold(u: &FusionMatrix, s_target_bits: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(FusionError::InvalidConfig(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let table = outcome_table(u)?;
    Ok(-outcome_entropies(&table, false)?
        .iter()
        .map(|(p, s, _)| p * logistic((s - s_target_bits) / tau))
        .sum::<f64>())
}

fn check_s_target(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(FusionError::InvalidConfig(format!(
            "s_target {s} outside [0, 1] bits"
        )))
    }
}

fn check_p_target(p: f64) -> Result<()> {
    if (0.5..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(FusionError::InvalidConfig(format!(
            "p_target {p} outside [0.5, 1]"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveSpec {
    ExpectationEntropy { p_target: f64, alpha: f64 },
    ThresholdProbability { s_target_bits: f64 },
}

impl ObjectiveSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ObjectiveSpec::ExpectationEntropy { p_target, alpha } => {
                check_p_target(p_target)?;
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(FusionError::InvalidConfig(format!(
                        "alpha must be positive and finite, got {alpha}"
                    )));
                }
                Ok(())
            }
            ObjectiveSpec::ThresholdProbability { s_target_bits } => check_s_target(s_target_bits),
        }
    }

    pub fn target(&self) -> f64 {
        match *self {
            ObjectiveSpec::ExpectationEntropy { p_target, .. } => p_target,
            ObjectiveSpec::ThresholdProbability { s_target_bits } => s_target_bits,
        }
    }

    fn with_target(&self, target: f64) -> Self {
        match *self {
            ObjectiveSpec::ExpectationEntropy { alpha, .. } => ObjectiveSpec::ExpectationEntropy {
                p_target: target,
                alpha,
            },
            ObjectiveSpec::ThresholdProbability { .. } => ObjectiveSpec::ThresholdProbability {
                s_target_bits: target,
            },
        }
    }

    /// Smoothed cost minimized by the descent (`tau` ignored for expectation).
    pub fn cost(&self, u: &FusionMatrix, tau: f64) -> Result<f64> {
        match *self {
            ObjectiveSpec::ExpectationEntropy { p_target, alpha } => {
                cost_expectation(u, p_target, alpha)
            }
            ObjectiveSpec::ThresholdProbability { s_target_bits } => {
                cost_threshold(u, s_target_bits, tau)
            }
        }
    }

    /// Unsmoothed objective, larger is better.
    pub fn hard(&self, u: &FusionMatrix) -> Result<f64> {
        match *self {
            ObjectiveSpec::ExpectationEntropy { .. } => expectation_entropy(u),
            ObjectiveSpec::ThresholdProbability { s_target_bits } => {
                threshold_probability(u, s_target_bits)
            }
        }
    }

    /// Ranking key, larger is better. The expectation experiment ranks by its
    /// cost so that the probability constraint is respected.
    fn score(&self, u: &FusionMatrix, tau: f64) -> Result<(f64, f64)> {
        let cost = self.cost(u, tau)?;
        match self {
            ObjectiveSpec::ExpectationEntropy { .. } => Ok((-cost, -cost)),
            ObjectiveSpec::ThresholdProbability { .. } => Ok((self.hard(u)?, -cost)),
        }
    }

    fn states_used(&self, u: &FusionMatrix) -> Result<usize> {
        match *self {
            ObjectiveSpec::ExpectationEntropy { .. } => states_used(u, None),
            ObjectiveSpec::ThresholdProbability { s_target_bits } => {
                states_used(u, Some(s_target_bits))
            }
        }
    }

    fn uses_anneal(&self) -> bool {
        matches!(self, ObjectiveSpec::ThresholdProbability { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub init_samples: usize,
    pub iterations: usize,
    pub step: f64,
    pub fd_epsilon: f64,
    pub master_seed: RngSeed,
    pub anneal_schedule: Vec<f64>,
    /// The learning rate decays geometrically to `step * final_step_ratio`
    /// over the last `decay_fraction` of the iterations.
    pub decay_fraction: f64,
    pub final_step_ratio: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 20,
            init_samples: 100,
            iterations: 1000,
            step: 1e-3,
            fd_epsilon: 1e-5,
            master_seed: RngSeed(0),
            anneal_schedule: vec![0.1, 0.01, 0.001],
            decay_fraction: 0.3,
            final_step_ratio: 1e-3,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(FusionError::InvalidConfig(msg.to_string()));
        if self.restarts == 0 || self.init_samples == 0 || self.iterations == 0 {
            return bad("restarts, init_samples and iterations must be at least 1");
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step must be positive");
        }
        if !(self.fd_epsilon > 0.0 && self.fd_epsilon.is_finite()) {
            return bad("fd_epsilon must be positive");
        }
        if self.anneal_schedule.is_empty() || self.anneal_schedule.iter().any(|t| !(*t > 0.0)) {
            return bad("anneal schedule needs at least one positive tau");
        }
        if !(0.0..=1.0).contains(&self.decay_fraction)
            || !(self.final_step_ratio > 0.0 && self.final_step_ratio <= 1.0)
        {
            return bad("decay_fraction must lie in [0, 1] and final_step_ratio in (0, 1]");
        }
        Ok(())
    }

    fn learning_rate(&self, t: usize) -> f64 {
        let n = self.iterations as f64;
        let start = n * (1.0 - self.decay_fraction);
        let t = t as f64;
        if t < start || self.decay_fraction == 0.0 {
            self.step
        } else {
            let frac = (t - start) / (n - 1.0 - start).max(1.0);
            self.step * self.final_step_ratio.powf(frac)
        }
    }

    /// Tau in force at iteration `t`; iterations are split evenly over the stages.
    fn tau_at(&self, t: usize) -> f64 {
        let stages = self.anneal_schedule.len();
        let idx = (t * stages / self.iterations).min(stages - 1);
        self.anneal_schedule[idx]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub seed: u64,
    pub hard_value: f64,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct OptResult {
    pub objective: ObjectiveSpec,
    pub best_matrix: FusionMatrix,
    pub best_params: UnitaryParams,
    /// Smoothed cost at the best point (final tau for the threshold experiment).
    pub objective_value: f64,
    /// Unsmoothed objective recomputed from `best_matrix`.
    pub hard_value: f64,
    pub p_total: f64,
    /// Cost per iteration of the winning restart.
    pub trace: Vec<f64>,
    pub states_used: usize,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
    pub seed: RngSeed,
    pub iterations: usize,
}

impl OptResult {
    pub fn mean_hard_value(&self) -> f64 {
        self.restarts.iter().map(|r| r.hard_value).sum::<f64>() / self.restarts.len() as f64
    }
}

struct RestartRun {
    params: UnitaryParams,
    key: (f64, f64),
    trace: Vec<f64>,
}

fn better(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 > b.1)
}

fn eval_cost(obj: &ObjectiveSpec, p: &UnitaryParams, tau: f64) -> Result<f64> {
    obj.cost(&from_params(p)?, tau)
}

fn gradient(obj: &ObjectiveSpec, p: &UnitaryParams, tau: f64, eps: f64) -> Result<[f64; 16]> {
    let mut g = [0.0; 16];
    for k in 0..UnitaryParams::LEN {
        let mut plus = *p;
        let mut minus = *p;
        plus.0[k] += eps;
        minus.0[k] -= eps;
        g[k] = (eval_cost(obj, &plus, tau)? - eval_cost(obj, &minus, tau)?) / (2.0 * eps);
    }
    Ok(g)
}

fn run_restart(obj: &ObjectiveSpec, cfg: &OptimizerConfig, seed: RngSeed) -> Result<RestartRun> {
    let mut rng = seed.rng();
    let tau0 = cfg.anneal_schedule[0];

    let mut params = UnitaryParams::random(&mut rng);
    let mut key = obj.score(&from_params(&params)?, tau0)?;
    for _ in 1..cfg.init_samples {
        let candidate = UnitaryParams::random(&mut rng);
        let k = obj.score(&from_params(&candidate)?, tau0)?;
        if better(k, key) {
            params = candidate;
            key = k;
        }
    }

    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;
    let mut m = [0.0; 16];
    let mut v = [0.0; 16];
    let mut trace = Vec::with_capacity(cfg.iterations);
    let final_tau = *cfg.anneal_schedule.last().unwrap();
    let mut best = params;
    let mut best_key = obj.score(&from_params(&params)?, final_tau)?;

    for t in 0..cfg.iterations {
        let tau = if obj.uses_anneal() {
            cfg.tau_at(t)
        } else {
            tau0
        };
        let g = gradient(obj, &params, tau, cfg.fd_epsilon)?;
        let lr = cfg.learning_rate(t);
        let step = (t + 1) as i32;
        for k in 0..UnitaryParams::LEN {
            m[k] = B1 * m[k] + (1.0 - B1) * g[k];
            v[k] = B2 * v[k] + (1.0 - B2) * g[k] * g[k];
            let m_hat = m[k] / (1.0 - B1.powi(step));
            let v_hat = v[k] / (1.0 - B2.powi(step));
            params.0[k] -= lr * m_hat / (v_hat.sqrt() + EPS);
        }
        let u = from_params(&params)?;
        trace.push(obj.cost(&u, tau)?);
        let k = obj.score(&u, final_tau)?;
        if better(k, best_key) {
            best = params;
            best_key = k;
        }
    }
    Ok(RestartRun {
        params: best,
        key: best_key,
        trace,
    })
}

/// Number of worker threads, capped by `FUSIONLAB_THREADS` when set.
pub fn worker_threads() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    std::env::var("FUSIONLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(available)
}

/// Run `f` on a pool honouring `FUSIONLAB_THREADS`.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads())
        .build()
    {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Best of `cfg.restarts` descents from the best of `cfg.init_samples`
/// random starts each. Deterministic per `cfg.master_seed`.
pub fn optimize(obj: &ObjectiveSpec, cfg: &OptimizerConfig) -> Result<OptResult> {
    obj.validate()?;
    cfg.validate()?;
    let runs: Vec<Result<RestartRun>> = with_pool(|| {
        (0..cfg.restarts)
            .into_par_iter()
            .map(|r| run_restart(obj, cfg, cfg.master_seed.derive(r as u64)))
            .collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let mut best_idx = 0;
    for (idx, run) in runs.iter().enumerate() {
        if better(run.key, runs[best_idx].key) {
            best_idx = idx;
        }
    }
    let final_tau = *cfg.anneal_schedule.last().unwrap();
    let mut restarts = Vec::with_capacity(runs.len());
    for (idx, run) in runs.iter().enumerate() {
        let u = from_params(&run.params)?;
        restarts.push(RestartSummary {
            restart: idx,
            seed: cfg.master_seed.derive(idx as u64).0,
            hard_value: obj.hard(&u)?,
            cost: obj.cost(&u, final_tau)?,
        });
    }
    let best = &runs[best_idx];
    finish(
        obj,
        cfg,
        best.params,
        best.trace.clone(),
        best_idx,
        restarts,
    )
}

fn finish(
    obj: &ObjectiveSpec,
    cfg: &OptimizerConfig,
    params: UnitaryParams,
    trace: Vec<f64>,
    best_restart: usize,
    restarts: Vec<RestartSummary>,
) -> Result<OptResult> {
    let u = from_params(&params)?;
    let final_tau = *cfg.anneal_schedule.last().unwrap();
    Ok(OptResult {
        objective: *obj,
        objective_value: obj.cost(&u, final_tau)?,
        hard_value: obj.hard(&u)?,
        p_total: total_relevant_probability(&u),
        states_used: obj.states_used(&u)?,
        best_matrix: u,
        best_params: params,
        trace,
        best_restart,
        restarts,
        seed: cfg.master_seed,
        iterations: cfg.iterations,
    })
}

/// One optimization per target, each with its own derived seed. For the
/// threshold experiment every target's winner is also scored against the
/// other targets, so a matrix found for one target can serve another.
pub fn sweep(
    kind: &ObjectiveSpec,
    targets: &[f64],
    cfg: &OptimizerConfig,
) -> Result<Vec<OptResult>> {
    let objectives: Vec<ObjectiveSpec> = targets.iter().map(|&t| kind.with_target(t)).collect();
    for o in &objectives {
        o.validate()?;
    }
    cfg.validate()?;
    let mut results = Vec::with_capacity(targets.len());
    for (idx, obj) in objectives.iter().enumerate() {
        let mut c = cfg.clone();
        c.master_seed = cfg.master_seed.derive(idx as u64);
        results.push(optimize(obj, &c)?);
    }
    if !kind.uses_anneal() {
        return Ok(results);
    }

    let candidates: Vec<UnitaryParams> = results.iter().map(|r| r.best_params).collect();
    for (idx, obj) in objectives.iter().enumerate() {
        let final_tau = *cfg.anneal_schedule.last().unwrap();
        let mut best_key = obj.score(&results[idx].best_matrix, final_tau)?;
        let mut best_params = None;
        for (other, p) in candidates.iter().enumerate() {
            if other == idx {
                continue;
            }
            let key = obj.score(&from_params(p)?, final_tau)?;
            if better(key, best_key) {
                best_key = key;
                best_params = Some(*p);
            }
        }
        if let Some(p) = best_params {
            let r = &results[idx];
            let mut c = cfg.clone();
            c.master_seed = r.seed;
            results[idx] = finish(
                obj,
                &c,
                p,
                r.trace.clone(),
                r.best_restart,
                r.restarts.clone(),
            )?;
        }
    }
    Ok(results)
}

/// Targets `start, start + step, ...` up to and including `end`.
pub fn target_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step).round() as usize;
    (0..=n)
        .map(|k| start + step * k as f64)
        .map(|x| (x * 1e12).round() / 1e12)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScatterMode {
    Expectation,
    Threshold(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatterRow {
    pub sample: usize,
    /// `p_total` (expectation) or `s_target` (threshold).
    pub x: f64,
    /// `<S>` (expectation) or `P(s_target)` (threshold).
    pub y: f64,
    pub running_mean: f64,
    pub running_std: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn std(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).sqrt()
        }
    }
}

/// Objective values of `n` Haar-random matrices.
pub fn random_scatter(n: usize, seed: RngSeed, mode: &ScatterMode) -> Result<Vec<ScatterRow>> {
    if n == 0 {
        return Err(FusionError::InvalidConfig(
            "sample count must be at least 1".into(),
        ));
    }
    if let ScatterMode::Threshold(targets) = mode {
        if targets.is_empty() {
            return Err(FusionError::InvalidConfig("no s_targets given".into()));
        }
        for &s in targets {
            check_s_target(s)?;
        }
    }
    let mut rng = seed.rng();
    let mut rows = Vec::new();
    let mut stats = vec![
        Welford::default();
        match mode {
            ScatterMode::Expectation => 1,
            ScatterMode::Threshold(t) => t.len(),
        }
    ];
    for sample in 0..n {
        let u = haar_sample(&mut rng)?;
        match mode {
            ScatterMode::Expectation => {
                let s = expectation_entropy(&u)?;
                stats[0].push(s);
                rows.push(ScatterRow {
                    sample,
                    x: total_relevant_probability(&u),
                    y: s,
                    running_mean: stats[0].mean,
                    running_std: stats[0].std(),
                });
            }
            ScatterMode::Threshold(targets) => {
                for (k, &s) in targets.iter().enumerate() {
                    let p = threshold_probability(&u, s)?;
                    stats[k].push(p);
                    rows.push(ScatterRow {
                        sample,
                        x: s,
                        y: p,
                        running_mean: stats[k].mean,
                        running_std: stats[k].std(),
                    });
                }
            }
        }
    }
    Ok(rows)
}
