//! Command-line front end. Every command writes CSV or JSON to `--out` (or
//! stdout) and maps errors to exit codes: 0 success, 1 a failed check,
//! 2 bad usage or input.

use std::f64::consts::LN_2;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::classify::{NeighborArity, TOL_CLASSIFY};
use crate::error::{FusionError, Result};
use crate::matrix::{matrix_to_json, resolve_matrix, RngSeed, TOL_UNITARY};
use crate::optimize::{
    optimize, random_scatter, sweep, target_grid, ObjectiveSpec, OptResult, OptimizerConfig,
    ScatterMode,
};
use crate::oracle::{run_scenario, FusionScenario, GraphSpec};
use crate::report::{analyze, fmt_num, render_csv, write_atomic};
use crate::verify::{run_all, VerifyOptions};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "fusionlab",
    version,
    about = "Generalized type-II fusion toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Outcome table, entanglement and classification of one matrix.
    Analyze(AnalyzeArgs),
    /// Objective values of Haar-random matrices.
    Sample(SampleArgs),
    /// Optimize a fusion matrix for one target or a sweep of targets.
    Optimize(OptimizeArgs),
    /// Run the invariant suites.
    Verify(VerifyArgs),
    /// Compare the closed forms against a dense simulation of a fusion.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Arity {
    One,
    Two,
}

impl From<Arity> for NeighborArity {
    fn from(a: Arity) -> Self {
        match a {
            Arity::One => NeighborArity::One,
            Arity::Two => NeighborArity::Two,
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Builtin name (identity, pbs2, theorem7, blockpair), haar:<seed> or a JSON file.
    #[arg(long)]
    pub matrix: String,
    /// Neighbours of the fused right qubit.
    #[arg(long, value_enum, default_value = "one")]
    pub arity: Arity,
    /// Unitarity tolerance for matrix files.
    #[arg(long, default_value_t = TOL_UNITARY)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleMode {
    Expectation,
    Threshold,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "expectation")]
    pub mode: SampleMode,
    /// Entropy thresholds in bits for the threshold mode.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1"
    )]
    pub s_targets: Vec<f64>,
    /// Report entropies in nats.
    #[arg(long)]
    pub nats: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Expectation,
    Threshold,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(value_enum)]
    pub experiment: Experiment,
    /// Target relevant probability (expectation experiment).
    #[arg(long)]
    pub p_target: Option<f64>,
    /// Entropy threshold in bits (threshold experiment).
    #[arg(long)]
    pub s_target: Option<f64>,
    /// Sweep the full target range instead of a single target.
    #[arg(long, conflicts_with_all = ["p_target", "s_target"])]
    pub sweep: bool,
    /// Sweep spacing; 0.01 for expectation and 0.1 for threshold by default.
    #[arg(long, requires = "sweep")]
    pub sweep_step: Option<f64>,
    /// Weight of the probability penalty.
    #[arg(long, default_value_t = 1000.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 100)]
    pub init_samples: usize,
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    /// Learning rate of the descent.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Report entropies in nats.
    #[arg(long)]
    pub nats: bool,
    /// Output directory for the sweep CSV and the best matrices.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Tolerance of the oracle and entropy comparisons.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Write the per-suite summary as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub negative_control: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Graph file of the left cluster; its marked vertex is fused.
    #[arg(long, requires = "right", conflicts_with = "chains")]
    pub left: Option<PathBuf>,
    /// Graph file of the right cluster; its marked vertex is fused.
    #[arg(long, requires = "left")]
    pub right: Option<PathBuf>,
    /// Two linear clusters, e.g. `3+3`.
    #[arg(long)]
    pub chains: Option<String>,
    #[arg(long, default_value = "pbs2")]
    pub matrix: String,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Sample(a) => cmd_sample(&a),
        Command::Optimize(a) => cmd_optimize(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Oracle(a) => cmd_oracle(&a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn unit(nats: bool) -> (&'static str, f64) {
    if nats {
        ("nats", LN_2)
    } else {
        ("bits", 1.0)
    }
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<u8> {
    let u = resolve_matrix(&a.matrix, a.tol)?;
    let report = analyze(&u, a.arity.into(), TOL_CLASSIFY)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    emit(a.out.as_deref(), &json)?;
    Ok(EXIT_OK)
}

fn cmd_sample(a: &SampleArgs) -> Result<u8> {
    let mode = match a.mode {
        SampleMode::Expectation => ScatterMode::Expectation,
        SampleMode::Threshold => ScatterMode::Threshold(a.s_targets.clone()),
    };
    let rows = random_scatter(a.n, RngSeed(a.seed), &mode)?;
    let (unit, scale) = unit(a.nats);
    // entropy-valued columns: y in expectation mode, x in threshold mode
    let (header, sx, sy) = match a.mode {
        SampleMode::Expectation => (
            [
                "sample",
                "p_total",
                "S_exp",
                "running_mean",
                "running_std",
                "unit",
            ],
            1.0,
            scale,
        ),
        SampleMode::Threshold => (
            [
                "sample",
                "s_target",
                "P",
                "running_mean",
                "running_std",
                "unit",
            ],
            scale,
            1.0,
        ),
    };
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.sample.to_string(),
                fmt_num(r.x * sx),
                fmt_num(r.y * sy),
                fmt_num(r.running_mean * sy),
                fmt_num(r.running_std * sy),
                unit.to_string(),
            ]
        })
        .collect();
    emit(a.out.as_deref(), &render_csv(&header, &body)?)?;
    Ok(EXIT_OK)
}

fn optimizer_config(a: &OptimizeArgs) -> OptimizerConfig {
    OptimizerConfig {
        restarts: a.restarts,
        init_samples: a.init_samples,
        iterations: a.iterations,
        step: a.step,
        master_seed: RngSeed(a.seed),
        ..OptimizerConfig::default()
    }
}

fn cmd_optimize(a: &OptimizeArgs) -> Result<u8> {
    let cfg = optimizer_config(a);
    let (kind, targets) = match a.experiment {
        Experiment::Expectation => {
            if a.s_target.is_some() {
                return Err(FusionError::InvalidConfig(
                    "--s-target belongs to the threshold experiment".into(),
                ));
            }
            let kind = ObjectiveSpec::ExpectationEntropy {
                p_target: 0.5,
                alpha: a.alpha,
            };
            let targets = if a.sweep {
                target_grid(0.5, 1.0, a.sweep_step.unwrap_or(0.01))
            } else {
                vec![a.p_target.ok_or_else(|| {
                    FusionError::InvalidConfig("--p-target or --sweep is required".into())
                })?]
            };
            (kind, targets)
        }
        Experiment::Threshold => {
            if a.p_target.is_some() {
                return Err(FusionError::InvalidConfig(
                    "--p-target belongs to the expectation experiment".into(),
                ));
            }
            let kind = ObjectiveSpec::ThresholdProbability { s_target_bits: 0.0 };
            let targets = if a.sweep {
                target_grid(0.0, 1.0, a.sweep_step.unwrap_or(0.1))
            } else {
                vec![a.s_target.ok_or_else(|| {
                    FusionError::InvalidConfig("--s-target or --sweep is required".into())
                })?]
            };
            (kind, targets)
        }
    };
    if let Some(step) = a.sweep_step {
        if !(step > 0.0 && step.is_finite()) {
            return Err(FusionError::InvalidConfig(format!(
                "sweep step must be positive, got {step}"
            )));
        }
    }

    let started = Instant::now();
    let results = if targets.len() == 1 {
        let obj = match kind {
            ObjectiveSpec::ExpectationEntropy { alpha, .. } => ObjectiveSpec::ExpectationEntropy {
                p_target: targets[0],
                alpha,
            },
            ObjectiveSpec::ThresholdProbability { .. } => ObjectiveSpec::ThresholdProbability {
                s_target_bits: targets[0],
            },
        };
        vec![optimize(&obj, &cfg)?]
    } else {
        sweep(&kind, &targets, &cfg)?
    };
    eprintln!(
        "optimized {} target(s) in {:.1?}",
        results.len(),
        started.elapsed()
    );

    let csv = sweep_csv(a.experiment, &results, a.nats)?;
    match &a.out {
        Some(dir) => {
            let name = match a.experiment {
                Experiment::Expectation => "sweep_expectation.csv",
                Experiment::Threshold => "sweep_threshold.csv",
            };
            write_atomic(&dir.join(name), csv.as_bytes())?;
            for r in &results {
                let mut json = matrix_to_json(&r.best_matrix);
                json.push('\n');
                write_atomic(&dir.join(best_matrix_name(&r.objective)), json.as_bytes())?;
            }
            print!("{csv}");
        }
        None => print!("{csv}"),
    }
    Ok(EXIT_OK)
}

/// File name of the best matrix for one target, e.g. `best_threshold_s0.5.json`.
pub fn best_matrix_name(obj: &ObjectiveSpec) -> String {
    match obj {
        ObjectiveSpec::ExpectationEntropy { p_target, .. } => {
            format!("best_expectation_p{}.json", fmt_num(*p_target))
        }
        ObjectiveSpec::ThresholdProbability { s_target_bits } => {
            format!("best_threshold_s{}.json", fmt_num(*s_target_bits))
        }
    }
}

fn sweep_csv(experiment: Experiment, results: &[OptResult], nats: bool) -> Result<String> {
    let (unit, scale) = unit(nats);
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| match experiment {
            Experiment::Expectation => vec![
                fmt_num(r.objective.target()),
                fmt_num(r.hard_value * scale),
                fmt_num(r.mean_hard_value() * scale),
                fmt_num(r.p_total),
                r.seed.0.to_string(),
                r.iterations.to_string(),
                unit.to_string(),
            ],
            Experiment::Threshold => vec![
                fmt_num(r.objective.target() * scale),
                fmt_num(r.hard_value),
                fmt_num(r.mean_hard_value()),
                r.states_used.to_string(),
                r.seed.0.to_string(),
                r.iterations.to_string(),
                unit.to_string(),
            ],
        })
        .collect();
    let header: &[&str] = match (experiment, nats) {
        (Experiment::Expectation, _) => &[
            "p_target",
            "S_exp_max",
            "S_exp_mean",
            "p_total_at_best",
            "seed",
            "iterations",
            "unit",
        ],
        (Experiment::Threshold, false) => &[
            "s_target_bits",
            "P_max",
            "P_mean",
            "states_used",
            "seed",
            "iterations",
            "unit",
        ],
        (Experiment::Threshold, true) => &[
            "s_target_nats",
            "P_max",
            "P_mean",
            "states_used",
            "seed",
            "iterations",
            "unit",
        ],
    };
    render_csv(header, &rows)
}

fn cmd_verify(a: &VerifyArgs) -> Result<u8> {
    if a.trials == 0 {
        return Err(FusionError::InvalidConfig(
            "--trials must be at least 1".into(),
        ));
    }
    let started = Instant::now();
    let summary = run_all(&VerifyOptions {
        trials: a.trials,
        seed: RngSeed(a.seed),
        tol: a.tol,
        negative_control: a.negative_control,
    })?;
    for s in &summary.suites {
        println!(
            "{} {:<52} {:>7} checks {:>5} failures  worst {}",
            if s.passed() { "PASS" } else { "FAIL" },
            s.name,
            s.checks,
            s.failures,
            fmt_num(s.worst)
        );
    }
    println!(
        "{} suites in {:.1?}",
        summary.suites.len(),
        started.elapsed()
    );
    if let Some(path) = &a.out {
        let mut json = serde_json::to_string_pretty(&summary.suites)?;
        json.push('\n');
        write_atomic(path, json.as_bytes())?;
    }
    Ok(if summary.passed() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

/// `"3+3"` into `(3, 3)`.
pub fn parse_chains(text: &str) -> Result<(usize, usize)> {
    let bad = || FusionError::Parse(format!("expected NL+NR, got '{text}'"));
    let (l, r) = text.split_once('+').ok_or_else(bad)?;
    Ok((
        l.trim().parse().map_err(|_| bad())?,
        r.trim().parse().map_err(|_| bad())?,
    ))
}

fn cmd_oracle(a: &OracleArgs) -> Result<u8> {
    let scenario = match (&a.left, &a.right, &a.chains) {
        (Some(l), Some(r), None) => FusionScenario::new(
            GraphSpec::parse(&std::fs::read_to_string(l)?)?,
            GraphSpec::parse(&std::fs::read_to_string(r)?)?,
        )?,
        (None, None, Some(c)) => {
            let (nl, nr) = parse_chains(c)?;
            FusionScenario::chains(nl, nr)?
        }
        _ => {
            return Err(FusionError::InvalidConfig(
                "give either --left and --right or --chains".into(),
            ))
        }
    };
    let u = resolve_matrix(&a.matrix, TOL_UNITARY)?;
    let report = run_scenario(&scenario, &u, a.tol)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    emit(a.out.as_deref(), &json)?;
    if a.out.is_some() {
        println!(
            "{} qubits, {}",
            report.qubits,
            if report.pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(if report.pass {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}
