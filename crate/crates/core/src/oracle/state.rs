//! Dense qubit registers. Qubit `q` is bit `q` of the basis index.

use nalgebra::DMatrix;

use crate::entangle::EntropyValue;
use crate::error::{FusionError, Result};
use crate::matrix::C64;

/// Largest register the dense oracle accepts.
pub const MAX_QUBITS: usize = 14;

const ZERO_NORM: f64 = 1e-28;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        Err(FusionError::TooManyQubits {
            requested: n,
            cap: MAX_QUBITS,
        })
    } else {
        Ok(())
    }
}

fn bit(index: usize, q: usize) -> usize {
    (index >> q) & 1
}

/// Drop the listed (sorted, distinct) bit positions from `index`.
fn squeeze(index: usize, removed: &[usize]) -> usize {
    let mut out = 0;
    let mut pos = 0;
    let mut q = 0;
    let mut rest = index;
    while rest != 0 {
        if !removed.contains(&q) {
            out |= (rest & 1) << pos;
            pos += 1;
        }
        rest >>= 1;
        q += 1;
    }
    out
}

impl StateVector {
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(FusionError::MalformedInput(format!(
                "{} amplitudes for {n_qubits} qubits",
                amplitudes.len()
            )));
        }
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    /// |+>^n
    pub fn plus(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        let a = C64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(StateVector {
            n_qubits,
            amplitudes: vec![a; dim],
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n * n <= ZERO_NORM {
            return Err(FusionError::ZeroOverlap);
        }
        for z in &mut self.amplitudes {
            *z /= n;
        }
        Ok(self)
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| x.conj() * y)
            .sum()
    }

    /// `|<self|other>|` for unit vectors; 1 means equal up to a global phase.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        if self.n_qubits != other.n_qubits {
            return 0.0;
        }
        self.inner(other).norm() / (self.norm() * other.norm())
    }

    pub fn apply_x(&mut self, q: usize) {
        let mask = 1 << q;
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                self.amplitudes.swap(i, i | mask);
            }
        }
    }

    pub fn apply_z(&mut self, q: usize) {
        for (i, z) in self.amplitudes.iter_mut().enumerate() {
            if bit(i, q) == 1 {
                *z = -*z;
            }
        }
    }

    pub fn apply_cz(&mut self, p: usize, q: usize) {
        self.apply_controlled_phase(p, q, std::f64::consts::PI);
    }

    /// `e^{i chi |11><11|}` on (p, q).
    pub fn apply_controlled_phase(&mut self, p: usize, q: usize, chi: f64) {
        let phase = C64::from_polar(1.0, chi);
        for (i, z) in self.amplitudes.iter_mut().enumerate() {
            if bit(i, p) == 1 && bit(i, q) == 1 {
                *z *= phase;
            }
        }
    }

    /// `diag(1, e^{i theta})` on q.
    pub fn apply_phase(&mut self, q: usize, theta: f64) {
        let phase = C64::from_polar(1.0, theta);
        for (i, z) in self.amplitudes.iter_mut().enumerate() {
            if bit(i, q) == 1 {
                *z *= phase;
            }
        }
    }

    /// Arbitrary single-qubit gate `[[g00, g01], [g10, g11]]` on q.
    pub fn apply_single(&mut self, q: usize, g: [[C64; 2]; 2]) {
        let mask = 1 << q;
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | mask];
                self.amplitudes[i] = g[0][0] * a0 + g[0][1] * a1;
                self.amplitudes[i | mask] = g[1][0] * a0 + g[1][1] * a1;
            }
        }
    }

    /// Append a qubit `q_new` (the new highest index) copying qubit `q`:
    /// `|x>_q -> |x>_q |x>_new`.
    pub fn duplicate_qubit(&self, q: usize) -> Result<StateVector> {
        check_qubits(self.n_qubits + 1)?;
        let n = self.n_qubits;
        let mut out = vec![C64::new(0.0, 0.0); 1 << (n + 1)];
        for (i, z) in self.amplitudes.iter().enumerate() {
            out[i | (bit(i, q) << n)] = *z;
        }
        Ok(StateVector {
            n_qubits: n + 1,
            amplitudes: out,
        })
    }

    /// Contract qubits `(p, q)` with the functional
    /// `w[0] <00| + w[1] <01| + w[2] <10| + w[3] <11|` (first bit p, second q)
    /// and drop both. Returns the unnormalized remainder.
    pub fn contract_pair(&self, p: usize, q: usize, w: [C64; 4]) -> Result<StateVector> {
        if p == q || p >= self.n_qubits || q >= self.n_qubits {
            return Err(FusionError::MalformedInput(format!(
                "invalid qubit pair ({p}, {q}) on {} qubits",
                self.n_qubits
            )));
        }
        let mut removed = [p, q];
        removed.sort_unstable();
        let n = self.n_qubits - 2;
        let mut out = vec![C64::new(0.0, 0.0); 1 << n];
        for (i, z) in self.amplitudes.iter().enumerate() {
            let k = 2 * bit(i, p) + bit(i, q);
            out[squeeze(i, &removed)] += w[k] * z;
        }
        Ok(StateVector {
            n_qubits: n,
            amplitudes: out,
        })
    }

    /// Von Neumann entropy (bits) of the qubits in `left` against the rest.
    pub fn bipartite_entropy(&self, left: &[usize]) -> Result<EntropyValue> {
        let n = self.n_qubits;
        if left.is_empty() || left.len() >= n || left.iter().any(|&q| q >= n) {
            return Err(FusionError::MalformedInput(
                "bipartition must split the register into two non-empty parts".into(),
            ));
        }
        let right: Vec<usize> = (0..n).filter(|q| !left.contains(q)).collect();
        let rows = 1 << left.len();
        let cols = 1 << right.len();
        let mut m = DMatrix::<C64>::zeros(rows, cols);
        for (i, z) in self.amplitudes.iter().enumerate() {
            let r = left
                .iter()
                .enumerate()
                .fold(0, |acc, (k, &q)| acc | (bit(i, q) << k));
            let c = right
                .iter()
                .enumerate()
                .fold(0, |acc, (k, &q)| acc | (bit(i, q) << k));
            m[(r, c)] = *z;
        }
        let norm2 = self.norm().powi(2);
        let bits = m
            .singular_values()
            .iter()
            .map(|s| s * s / norm2)
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.log2())
            .sum::<f64>();
        Ok(EntropyValue {
            bits: bits.max(0.0),
        })
    }
}

/// Project qubits `(a, e)` onto span{|00>, |11>} and keep one logical qubit
/// in slot `a`, dropping `e`. Returns the normalized state and the norm of the
/// projection.
pub fn merge_logical(s: &StateVector, a: usize, e: usize) -> Result<(StateVector, f64)> {
    let n = s.n_qubits;
    if a == e || a >= n || e >= n {
        return Err(FusionError::MalformedInput(format!(
            "invalid logical pair ({a}, {e}) on {n} qubits"
        )));
    }
    let mut out = vec![C64::new(0.0, 0.0); 1 << (n - 1)];
    for (i, z) in s.amplitudes.iter().enumerate() {
        if bit(i, a) == bit(i, e) {
            out[squeeze(i, &[e])] = *z;
        }
    }
    let merged = StateVector {
        n_qubits: n - 1,
        amplitudes: out,
    };
    let weight = merged.norm() / s.norm();
    Ok((merged.normalized()?, weight))
}

/// `c * <a b|` on qubits (a, b), normalized remainder and its squared norm.
pub fn apply_fusion_projector(
    s: &StateVector,
    a: usize,
    b: usize,
    coeffs: [C64; 4],
) -> Result<(StateVector, f64)> {
    let rest = s.contract_pair(a, b, coeffs)?;
    let weight = rest.norm().powi(2);
    Ok((rest.normalized()?, weight))
}
