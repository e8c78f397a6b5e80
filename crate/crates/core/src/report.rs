//! Output helpers: 12-significant-digit numbers, atomic file writes and the
//! per-matrix analysis report.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::classify::{classify, NeighborArity, StateClass};
use crate::entangle::EntanglementReport;
use crate::error::{FusionError, Result};
use crate::fusion::{outcome_table, total_relevant_probability};
use crate::matrix::{FusionMatrix, Provenance, C64};
use crate::optimize::expectation_entropy;

/// Round to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// CSV/console representation of a number at 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    let r = sig12(x);
    let a = r.abs();
    if r != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{r:e}")
    } else if r == 0.0 {
        "0".to_string()
    } else {
        format!("{r}")
    }
}

pub fn complex_pair(z: C64) -> [f64; 2] {
    [sig12(z.re), sig12(z.im)]
}

/// Write through a temporary sibling file and rename it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{file_name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Comma-separated table with a header row.
pub fn render_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(std::io::Error::other)?;
    for row in rows {
        w.write_record(row).map_err(std::io::Error::other)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| FusionError::Consistency(e.to_string()))
}

pub fn provenance_label(p: &Provenance) -> String {
    match p {
        Provenance::Builtin(name) => (*name).to_string(),
        Provenance::File(path) => format!("file:{path}"),
        Provenance::Sampled(seed) => format!("haar:{}", seed.0),
        Provenance::Parameterized(_) => "parameterized".to_string(),
        Provenance::Derived => "derived".to_string(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeReport {
    pub i: u8,
    pub j: u8,
    #[serde(rename = "A")]
    pub a: [f64; 2],
    #[serde(rename = "B")]
    pub b: [f64; 2],
    #[serde(rename = "C")]
    pub c: [f64; 2],
    #[serde(rename = "D")]
    pub d: [f64; 2],
    pub probability: f64,
    pub relevant: bool,
    pub zero_probability: bool,
    pub det: f64,
    pub lambda: f64,
    pub entropy_bits: f64,
    pub schmidt: [f64; 2],
    pub max_entangled: bool,
    pub classification: StateClass,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub matrix: String,
    pub arity: NeighborArity,
    pub total_probability: f64,
    pub total_relevant_probability: f64,
    pub expectation_entropy_bits: f64,
    pub outcomes: Vec<OutcomeReport>,
}

fn round_class(mut class: StateClass) -> StateClass {
    use crate::classify::StateLabel::*;
    for label in &mut class.labels {
        match label {
            Stabilizer { phi } => *phi = sig12(*phi),
            WeightedGraph(p) => {
                p.theta1 = sig12(p.theta1);
                p.phi1 = sig12(p.phi1);
                p.theta2 = sig12(p.theta2);
                p.phi2 = sig12(p.phi2);
                p.chi = sig12(p.chi);
            }
            ClusterUpToRotation(p) => {
                p.theta1 = sig12(p.theta1);
                p.theta2 = sig12(p.theta2);
                p.phi = sig12(p.phi);
            }
            MaxEntangledGeneric(p) => {
                p.theta_a = sig12(p.theta_a);
                p.theta_b = sig12(p.theta_b);
                p.theta_d = sig12(p.theta_d);
                p.phi = sig12(p.phi);
            }
            Product | Generic => {}
        }
    }
    class
}

/// Outcome table, entanglement and classification of every outcome.
pub fn analyze(u: &FusionMatrix, arity: NeighborArity, tol: f64) -> Result<AnalysisReport> {
    let table = outcome_table(u)?;
    let mut outcomes = Vec::with_capacity(table.entries.len());
    for o in &table.entries {
        let e = EntanglementReport::of(o)?;
        outcomes.push(OutcomeReport {
            i: o.i.value(),
            j: o.j.value(),
            a: complex_pair(o.a()),
            b: complex_pair(o.b()),
            c: complex_pair(o.c()),
            d: complex_pair(o.d()),
            probability: sig12(o.probability),
            relevant: o.relevant,
            zero_probability: o.zero,
            det: sig12(e.det),
            lambda: sig12(e.lambda),
            entropy_bits: sig12(e.entropy_bits),
            schmidt: [sig12(e.schmidt[0]), sig12(e.schmidt[1])],
            max_entangled: e.max_entangled,
            classification: round_class(classify(o, arity, tol)),
        });
    }
    Ok(AnalysisReport {
        matrix: provenance_label(u.provenance()),
        arity,
        total_probability: sig12(table.total_probability()),
        total_relevant_probability: sig12(total_relevant_probability(u)),
        expectation_entropy_bits: sig12(expectation_entropy(u)?),
        outcomes,
    })
}
