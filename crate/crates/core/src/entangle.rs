//! Entanglement of an outcome's conditional two-qubit state across the cut
//! between the two fused clusters.

use serde::Serialize;

use crate::error::{FusionError, Result};
use crate::fusion::{derive_invariants, ChannelIndex, OutcomeCoefficients};
use crate::matrix::{FusionMatrix, C64};

/// Determinants within this distance of 0 or 1/4 are treated as exactly
/// product or exactly maximal.
pub const DET_SNAP: f64 = 1e-9;

/// Default tolerance of the maximal-entanglement conditions.
pub const TOL_MAX_ENTANGLED: f64 = 1e-8;

const DET_RANGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntropyBase {
    #[default]
    Bits,
    Nats,
}

/// Von Neumann entropy, stored in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct EntropyValue {
    pub bits: f64,
}

impl EntropyValue {
    pub fn nats(self) -> f64 {
        self.bits * std::f64::consts::LN_2
    }

    pub fn in_base(self, base: EntropyBase) -> f64 {
        match base {
            EntropyBase::Bits => self.bits,
            EntropyBase::Nats => self.nats(),
        }
    }
}

/// 2×2 reduced density matrix of the e-side of the cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDensity(pub [[C64; 2]; 2]);

impl ReducedDensity {
    pub fn trace(&self) -> f64 {
        self.0[0][0].re + self.0[1][1].re
    }

    pub fn det(&self) -> f64 {
        (self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]).re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchmidtPair {
    pub alpha: f64,
    pub beta: f64,
}

fn require_nonzero(c: &OutcomeCoefficients) -> Result<()> {
    if c.zero {
        Err(FusionError::ZeroProbabilityOutcome {
            i: c.i.value(),
            j: c.j.value(),
        })
    } else {
        Ok(())
    }
}

pub fn reduced_density(c: &OutcomeCoefficients) -> Result<ReducedDensity> {
    require_nonzero(c)?;
    let [a, b, cc, d] = c.coeffs;
    Ok(ReducedDensity([
        [
            C64::new(a.norm_sqr() + b.norm_sqr(), 0.0),
            a.conj() * cc + b.conj() * d,
        ],
        [
            a * cc.conj() + b * d.conj(),
            C64::new(cc.norm_sqr() + d.norm_sqr(), 0.0),
        ],
    ]))
}

/// `|AD - BC|^2` of the normalized coefficients, i.e. det of the reduced density matrix.
pub fn determinant(c: &OutcomeCoefficients) -> Result<f64> {
    require_nonzero(c)?;
    let [a, b, cc, d] = c.coeffs;
    Ok((a * d - b * cc).norm_sqr())
}

/// The same determinant written through the matrix entries of a relevant
/// outcome: `|(U1i U2j - U1j U2i)(U3j U4i - U3i U4j) / (4 p_ij)|^2`.
pub fn factored_determinant(
    u: &FusionMatrix,
    i: ChannelIndex,
    j: ChannelIndex,
    p: f64,
) -> Result<f64> {
    if p <= 0.0 {
        return Err(FusionError::ZeroProbabilityOutcome {
            i: i.value(),
            j: j.value(),
        });
    }
    let (ci, cj) = (i.col(), j.col());
    let upper = u.at(0, ci) * u.at(1, cj) - u.at(0, cj) * u.at(1, ci);
    let lower = u.at(2, cj) * u.at(3, ci) - u.at(2, ci) * u.at(3, cj);
    Ok((upper * lower / (4.0 * p)).norm_sqr())
}

/// Reduced-density eigenvalues `(lambda, 1 - lambda)` with `lambda >= 1/2`.
pub fn eigenvalues_from_det(d: f64) -> Result<(f64, f64)> {
    if !(-DET_RANGE_TOL..=0.25 + DET_RANGE_TOL).contains(&d) {
        return Err(FusionError::OutOfRange(d));
    }
    let root = (1.0 - 4.0 * d.clamp(0.0, 0.25)).max(0.0).sqrt();
    Ok(((1.0 + root) / 2.0, (1.0 - root) / 2.0))
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Binary entropy of the eigenvalue pair (lambda, 1 - lambda).
pub fn entropy(lambda: f64, base: EntropyBase) -> f64 {
    let nats = -xlogx(lambda) - xlogx(1.0 - lambda);
    match base {
        EntropyBase::Nats => nats,
        EntropyBase::Bits => nats / std::f64::consts::LN_2,
    }
}

fn snapped(d: f64) -> Option<EntropyValue> {
    if d <= DET_SNAP {
        Some(EntropyValue { bits: 0.0 })
    } else if d >= 0.25 - DET_SNAP {
        Some(EntropyValue { bits: 1.0 })
    } else {
        None
    }
}

/// Entropy from the reduced-density determinant.
pub fn entropy_from_det(d: f64) -> Result<EntropyValue> {
    let (lambda, _) = eigenvalues_from_det(d)?;
    Ok(snapped(d).unwrap_or(EntropyValue {
        bits: entropy(lambda, EntropyBase::Bits),
    }))
}

/// Singular values of [[A, B], [C, D]] via the eigenvalues of M M^dagger.
pub fn schmidt(c: &OutcomeCoefficients) -> Result<SchmidtPair> {
    let rho = reduced_density(c)?.0;
    let p = rho[0][0].re;
    let q = rho[1][1].re;
    let half_gap = ((p - q) / 2.0).hypot(rho[0][1].norm());
    let mean = (p + q) / 2.0;
    let hi = (mean + half_gap).clamp(0.0, 1.0);
    // lo from the product of eigenvalues; mean - half_gap cancels badly near 0
    let lo = if hi > 0.0 {
        (determinant(c)? / hi).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(SchmidtPair {
        alpha: hi.sqrt(),
        beta: lo.sqrt(),
    })
}

pub fn entropy_from_schmidt(pair: &SchmidtPair) -> EntropyValue {
    let d = (pair.alpha * pair.beta).powi(2);
    snapped(d).unwrap_or(EntropyValue {
        bits: entropy(pair.alpha * pair.alpha, EntropyBase::Bits),
    })
}

/// Outcome (i, j), i != j, is maximally entangled iff
/// `n_i t_j + n_j t_i = 0` and `n_i k_j + n_j k_i = 0`.
pub fn is_maximally_entangled(
    u: &FusionMatrix,
    i: ChannelIndex,
    j: ChannelIndex,
    tol: f64,
) -> Result<bool> {
    if i == j {
        return Ok(false);
    }
    let p = crate::fusion::outcome_probability(u, i, j)?;
    if p <= tol {
        return Err(FusionError::ZeroProbabilityOutcome {
            i: i.value(),
            j: j.value(),
        });
    }
    let inv = derive_invariants(u);
    let (ci, cj) = (i.col(), j.col());
    let off_diagonal = inv.t[cj] * inv.n[ci] + inv.t[ci] * inv.n[cj];
    let imbalance = inv.n[ci] * inv.k[cj] + inv.n[cj] * inv.k[ci];
    Ok(off_diagonal.norm() <= tol && imbalance.abs() <= tol)
}

/// Per-outcome entanglement summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub det: f64,
    pub lambda: f64,
    pub entropy_bits: f64,
    pub schmidt: [f64; 2],
    pub max_entangled: bool,
}

impl EntanglementReport {
    /// Zero-probability outcomes report a product state.
    pub fn of(c: &OutcomeCoefficients) -> Result<Self> {
        if c.zero {
            return Ok(EntanglementReport {
                det: 0.0,
                lambda: 1.0,
                entropy_bits: 0.0,
                schmidt: [1.0, 0.0],
                max_entangled: false,
            });
        }
        let det = determinant(c)?;
        let (lambda, _) = eigenvalues_from_det(det)?;
        let s = schmidt(c)?;
        Ok(EntanglementReport {
            det,
            lambda,
            entropy_bits: entropy_from_det(det)?.bits,
            schmidt: [s.alpha, s.beta],
            max_entangled: c.relevant && (det - 0.25).abs() <= DET_SNAP,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{outcome_coefficients, outcome_table};
    use crate::matrix::builtin;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn state(v: [(f64, f64); 4]) -> OutcomeCoefficients {
        OutcomeCoefficients::from_state(v.map(|(re, im)| C64::new(re, im))).unwrap()
    }

    fn ch(v: u8) -> ChannelIndex {
        ChannelIndex::new(v).unwrap()
    }

    #[test]
    fn reduced_density_examples() {
        let rho =
            reduced_density(&state([(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)])).unwrap();
        assert_eq!(rho.0[0][0], C64::new(1.0, 0.0));
        assert_eq!(rho.0[1][1], C64::new(0.0, 0.0));

        let rho = reduced_density(&state([(H, 0.0), (0.0, 0.0), (0.0, 0.0), (H, 0.0)])).unwrap();
        assert!((rho.0[0][0].re - 0.5).abs() < 1e-15 && rho.0[0][1].norm() < 1e-15);

        let rho = reduced_density(&state([(0.5, 0.0), (0.0, 0.5), (0.0, 0.0), (H, 0.0)])).unwrap();
        // off-diagonal A* C + B* D = (-i/2)(1/sqrt 2)
        let expected = C64::new(0.0, -1.0 / (2.0 * 2f64.sqrt()));
        assert!((rho.0[0][1] - expected).norm() < 1e-15);
        assert!((rho.0[1][0] - expected.conj()).norm() < 1e-15);
        assert!((rho.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn determinant_examples() {
        let bell = state([(H, 0.0), (0.0, 0.0), (0.0, 0.0), (H, 0.0)]);
        assert!((determinant(&bell).unwrap() - 0.25).abs() < 1e-15);
        let prod = state([(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        assert_eq!(determinant(&prod).unwrap(), 0.0);

        let pbs2 = builtin("pbs2").unwrap();
        let o = outcome_coefficients(&pbs2, ch(1), ch(3)).unwrap();
        assert!((determinant(&o).unwrap() - 0.25).abs() < 1e-15);
        assert!(
            (factored_determinant(&pbs2, ch(1), ch(3), o.probability).unwrap() - 0.25).abs()
                < 1e-15
        );
    }

    #[test]
    fn zero_outcome_is_an_error() {
        let o = outcome_coefficients(&builtin("pbs2").unwrap(), ch(1), ch(2)).unwrap();
        assert!(matches!(
            determinant(&o),
            Err(FusionError::ZeroProbabilityOutcome { i: 1, j: 2 })
        ));
        assert!(reduced_density(&o).is_err());
        assert!(schmidt(&o).is_err());
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(eigenvalues_from_det(0.25).unwrap(), (0.5, 0.5));
        assert_eq!(eigenvalues_from_det(0.0).unwrap(), (1.0, 0.0));
        let (l, r) = eigenvalues_from_det(0.125).unwrap();
        assert!((l - (1.0 + H) / 2.0).abs() < 1e-15);
        assert!((r - (1.0 - H) / 2.0).abs() < 1e-15);
        assert!((l - 0.853_553_390_593).abs() < 1e-11);
        assert!(matches!(
            eigenvalues_from_det(0.3),
            Err(FusionError::OutOfRange(_))
        ));
        assert!(eigenvalues_from_det(-1e-6).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(0.5, EntropyBase::Bits), 1.0);
        assert_eq!(entropy(1.0, EntropyBase::Bits), 0.0);
        // -l log2 l - (1-l) log2(1-l) at l = (1 + 1/sqrt 2)/2
        let l = (1.0 + H) / 2.0;
        let expected = -(l * l.log2()) - ((1.0 - l) * (1.0 - l).log2());
        let s = entropy(l, EntropyBase::Bits);
        assert!((s - expected).abs() < 1e-15);
        assert!((s - 0.600_876_036_69).abs() < 1e-9);
        assert!((entropy(0.5, EntropyBase::Nats) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn schmidt_examples() {
        let bell = schmidt(&state([(H, 0.0), (0.0, 0.0), (0.0, 0.0), (H, 0.0)])).unwrap();
        assert!((bell.alpha - H).abs() < 1e-15 && (bell.beta - H).abs() < 1e-15);
        let prod = schmidt(&state([(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)])).unwrap();
        assert_eq!((prod.alpha, prod.beta), (1.0, 0.0));
        let wg = schmidt(&state([(0.5, 0.0), (0.0, 0.5), (0.0, 0.0), (H, 0.0)])).unwrap();
        // alpha^2 = (1 + 1/sqrt2)/2 -> alpha = cos(pi/8)
        assert!((wg.alpha - (std::f64::consts::PI / 8.0).cos()).abs() < 1e-15);
        assert!((wg.beta - (std::f64::consts::PI / 8.0).sin()).abs() < 1e-15);
        assert!((wg.alpha - 0.923_88).abs() < 1e-5 && (wg.beta - 0.382_68).abs() < 1e-5);
    }

    #[test]
    fn maximal_entanglement_predicate() {
        let pbs2 = builtin("pbs2").unwrap();
        assert!(is_maximally_entangled(&pbs2, ch(1), ch(3), 1e-8).unwrap());
        let id = builtin("identity").unwrap();
        assert!(!is_maximally_entangled(&id, ch(1), ch(3), 1e-8).unwrap());
        let t7 = builtin("theorem7").unwrap();
        assert!(is_maximally_entangled(&t7, ch(1), ch(2), 1e-8).unwrap());
        assert!(is_maximally_entangled(&pbs2, ch(1), ch(2), 1e-8).is_err());
    }

    #[test]
    fn snapping_at_the_ends() {
        assert_eq!(entropy_from_det(0.25 - 5e-10).unwrap().bits, 1.0);
        assert_eq!(entropy_from_det(5e-10).unwrap().bits, 0.0);
        let mid = entropy_from_det(0.125).unwrap().bits;
        assert!((mid - 0.600_876_036_69).abs() < 1e-9);
    }

    #[test]
    fn pbs2_report() {
        let table = outcome_table(&builtin("pbs2").unwrap()).unwrap();
        for o in &table.entries {
            let r = EntanglementReport::of(o).unwrap();
            let cross = o.relevant && !o.zero;
            assert_eq!(r.entropy_bits, if cross { 1.0 } else { 0.0 });
            assert_eq!(r.max_entangled, cross);
        }
    }
}
