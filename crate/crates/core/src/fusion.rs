//! Outcome table of a generalized type-II fusion.
//!
//! Two photons enter in modes a and b carrying the qubits to be fused. After the
//! linear-optical network `U` both photons are detected in the four output
//! channels 1..4 = (c_H, c_V, d_H, d_V). Each of the ten detection patterns
//! `(i, j)`, `i <= j`, leaves the rest of the two clusters in the conditional
//! state `A f1 f3 + B f1 f4 + C f2 f3 + D f2 f4`.

use std::fmt;

use serde::Serialize;

use crate::error::{FusionError, Result};
use crate::matrix::{FusionMatrix, C64};

/// Probabilities this close to a bound are clamped onto it.
pub const CLAMP_TOL: f64 = 1e-12;

/// Outcomes at or below this probability carry raw (unnormalized) coefficients.
pub const ZERO_PROB: f64 = 1e-14;

/// Detection channel, 1..=4 for (c_H, c_V, d_H, d_V).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ChannelIndex(u8);

impl ChannelIndex {
    pub fn new(value: u8) -> Result<Self> {
        if (1..=4).contains(&value) {
            Ok(ChannelIndex(value))
        } else {
            Err(FusionError::MalformedInput(format!(
                "channel index {value} outside 1..=4"
            )))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Zero-based column index into the fusion matrix.
    #[inline]
    pub fn col(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn all() -> [ChannelIndex; 4] {
        [
            ChannelIndex(1),
            ChannelIndex(2),
            ChannelIndex(3),
            ChannelIndex(4),
        ]
    }
}

impl fmt::Display for ChannelIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Fixed outcome order used by tables and file output.
pub const OUTCOME_ORDER: [(u8, u8); 10] = [
    (1, 1),
    (2, 2),
    (3, 3),
    (4, 4),
    (1, 2),
    (1, 3),
    (1, 4),
    (2, 3),
    (2, 4),
    (3, 4),
];

/// Column-wise quadratic invariants of the first two rows of `U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedInvariants {
    pub m: [f64; 4],
    pub n: [f64; 4],
    pub t: [C64; 4],
    pub k: [f64; 4],
}

pub fn derive_invariants(u: &FusionMatrix) -> DerivedInvariants {
    let mut m = [0.0; 4];
    let mut n = [0.0; 4];
    let mut t = [C64::new(0.0, 0.0); 4];
    let mut k = [0.0; 4];
    for i in 0..4 {
        let a = u.at(0, i);
        let b = u.at(1, i);
        m[i] = a.norm_sqr() + b.norm_sqr();
        n[i] = 0.5 - m[i];
        t[i] = a * b.conj();
        k[i] = a.norm_sqr() - b.norm_sqr();
    }
    DerivedInvariants { m, n, t, k }
}

/// Conditional state of one detection outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeCoefficients {
    pub i: ChannelIndex,
    pub j: ChannelIndex,
    /// (A, B, C, D), normalized unless `zero` is set.
    pub coeffs: [C64; 4],
    /// (A, B, C, D) before normalization.
    pub raw: [C64; 4],
    /// `sqrt(|A|^2 + |B|^2 + |C|^2 + |D|^2)` of the raw coefficients.
    pub norm: f64,
    pub probability: f64,
    pub relevant: bool,
    /// Probability vanishes; `coeffs` hold the raw values.
    pub zero: bool,
}

impl OutcomeCoefficients {
    pub fn a(&self) -> C64 {
        self.coeffs[0]
    }
    pub fn b(&self) -> C64 {
        self.coeffs[1]
    }
    pub fn c(&self) -> C64 {
        self.coeffs[2]
    }
    pub fn d(&self) -> C64 {
        self.coeffs[3]
    }

    /// Wrap an arbitrary quadruple (normalized here) as a stand-alone state,
    /// for classification and entanglement of states not tied to a matrix.
    pub fn from_state(coeffs: [C64; 4]) -> Result<Self> {
        let norm = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(FusionError::MalformedInput(
                "coefficient quadruple must have positive finite norm".into(),
            ));
        }
        let one = ChannelIndex(1);
        let two = ChannelIndex(2);
        Ok(OutcomeCoefficients {
            i: one,
            j: two,
            coeffs: coeffs.map(|z| z / norm),
            raw: coeffs,
            norm,
            probability: 1.0,
            relevant: true,
            zero: false,
        })
    }
}

fn clamp_probability(p: f64, upper: f64, i: ChannelIndex, j: ChannelIndex) -> Result<f64> {
    if p < -CLAMP_TOL || p > upper + CLAMP_TOL || !p.is_finite() {
        return Err(FusionError::Consistency(format!(
            "probability of outcome ({i},{j}) = {p:e} outside [0, {upper}]"
        )));
    }
    Ok(p.clamp(0.0, upper))
}

/// Probability of detecting the photons in channels `i` and `j`.
pub fn outcome_probability(u: &FusionMatrix, i: ChannelIndex, j: ChannelIndex) -> Result<f64> {
    let (ci, cj) = (i.col(), j.col());
    if ci == cj {
        let m = u.at(0, ci).norm_sqr() + u.at(1, ci).norm_sqr();
        clamp_probability(0.5 * m * (1.0 - m), 0.125, i, j)
    } else {
        let inv = derive_invariants(u);
        let overlap = u.at(0, ci) * u.at(0, cj).conj() + u.at(1, ci) * u.at(1, cj).conj();
        let p = 0.125 - 0.5 * inv.n[ci] * inv.n[cj] - 0.5 * overlap.norm_sqr();
        clamp_probability(p, 0.25, i, j)
    }
}

/// Raw conditional-state coefficients (A, B, C, D) of outcome (i, j).
pub fn raw_coefficients(u: &FusionMatrix, i: ChannelIndex, j: ChannelIndex) -> [C64; 4] {
    let (ci, cj) = (i.col(), j.col());
    if ci == cj {
        [
            u.at(0, ci) * u.at(2, ci),
            u.at(0, ci) * u.at(3, ci),
            u.at(1, ci) * u.at(2, ci),
            u.at(1, ci) * u.at(3, ci),
        ]
    } else {
        let sym = |r: usize, s: usize| u.at(r, ci) * u.at(s, cj) + u.at(r, cj) * u.at(s, ci);
        [sym(0, 2), sym(0, 3), sym(1, 2), sym(1, 3)]
    }
}

pub fn outcome_coefficients(
    u: &FusionMatrix,
    i: ChannelIndex,
    j: ChannelIndex,
) -> Result<OutcomeCoefficients> {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    let raw = raw_coefficients(u, i, j);
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let probability = outcome_probability(u, i, j)?;
    let zero = probability <= ZERO_PROB || norm == 0.0;
    let coeffs = if zero { raw } else { raw.map(|z| z / norm) };
    Ok(OutcomeCoefficients {
        i,
        j,
        coeffs,
        raw,
        norm,
        probability: if zero { 0.0 } else { probability },
        relevant: i != j,
        zero,
    })
}

/// All ten outcomes in `OUTCOME_ORDER`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTable {
    pub entries: Vec<OutcomeCoefficients>,
}

impl OutcomeTable {
    pub fn get(&self, i: u8, j: u8) -> Option<&OutcomeCoefficients> {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.entries
            .iter()
            .find(|o| o.i.value() == i && o.j.value() == j)
    }

    pub fn relevant(&self) -> impl Iterator<Item = &OutcomeCoefficients> {
        self.entries.iter().filter(|o| o.relevant)
    }

    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|o| o.probability).sum()
    }
}

pub fn outcome_table(u: &FusionMatrix) -> Result<OutcomeTable> {
    let entries = OUTCOME_ORDER
        .iter()
        .map(|&(i, j)| outcome_coefficients(u, ChannelIndex(i), ChannelIndex(j)))
        .collect::<Result<Vec<_>>>()?;
    Ok(OutcomeTable { entries })
}

/// Probability that the two photons leave in different channels: `(1 + sum n_i^2) / 2`.
pub fn total_relevant_probability(u: &FusionMatrix) -> f64 {
    let inv = derive_invariants(u);
    0.5 * (1.0 + inv.n.iter().map(|x| x * x).sum::<f64>())
}
