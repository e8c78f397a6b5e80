//! Two-photon Fock-space expansion of the fusion, independent of the closed
//! forms in `fusion`.
//!
//! The input `(1/2) sum_{x,y} f_x f_y a_x^dagger b_y^dagger |0>` is pushed through
//! `a_r^dagger = sum_k U_rk c_k^dagger` and collected on the ten two-photon
//! Fock states, with `c_k^dagger c_k^dagger |0> = sqrt(2) |2_k>`.

use crate::error::Result;
use crate::fusion::{ChannelIndex, OutcomeCoefficients, OutcomeTable, OUTCOME_ORDER, ZERO_PROB};
use crate::matrix::{FusionMatrix, C64};

/// Amplitudes indexed by Fock state (k, l), k <= l, and f-pair (x, y).
fn fock_amplitudes(u: &FusionMatrix) -> [[[C64; 4]; 4]; 4] {
    let mut amp = [[[C64::new(0.0, 0.0); 4]; 4]; 4];
    for x in 0..2 {
        for y in 0..2 {
            let pair = 2 * x + y;
            for k in 0..4 {
                for l in 0..4 {
                    // a_x^dagger -> c_k^dagger, b_y^dagger -> c_l^dagger
                    let z = 0.5 * u.at(x, k) * u.at(2 + y, l);
                    let (lo, hi) = (k.min(l), k.max(l));
                    if lo == hi {
                        amp[lo][hi][pair] += z * std::f64::consts::SQRT_2;
                    } else {
                        amp[lo][hi][pair] += z;
                    }
                }
            }
        }
    }
    amp
}

/// Outcome table read off the Fock expansion.
pub fn bosonic_outcome_table(u: &FusionMatrix) -> Result<OutcomeTable> {
    let amp = fock_amplitudes(u);
    let entries = OUTCOME_ORDER
        .iter()
        .map(|&(i, j)| {
            let raw = amp[(i - 1) as usize][(j - 1) as usize];
            let probability: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
            let norm = probability.sqrt();
            let zero = probability <= ZERO_PROB;
            Ok(OutcomeCoefficients {
                i: ChannelIndex::new(i)?,
                j: ChannelIndex::new(j)?,
                coeffs: if zero { raw } else { raw.map(|z| z / norm) },
                raw,
                norm,
                probability: if zero { 0.0 } else { probability },
                relevant: i != j,
                zero,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OutcomeTable { entries })
}

/// Largest elementwise disagreement between two tables: probabilities, and
/// normalized coefficients after removing a per-outcome global phase.
pub fn table_deviation(a: &OutcomeTable, b: &OutcomeTable) -> f64 {
    let mut worst = 0.0f64;
    for (x, y) in a.entries.iter().zip(&b.entries) {
        if x.i != y.i || x.j != y.j {
            return f64::INFINITY;
        }
        worst = worst.max((x.probability - y.probability).abs());
        if x.zero || y.zero {
            continue;
        }
        let overlap: C64 = x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(p, q)| p.conj() * q)
            .sum();
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for (p, q) in x.coeffs.iter().zip(&y.coeffs) {
            worst = worst.max((p * phase - q).norm());
        }
    }
    worst
}
