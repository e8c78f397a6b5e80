//! 4×4 complex fusion matrices: validation, Haar sampling, the exponential
//! parameterization used by the optimizer, phase multiplication, named
//! builtins and the JSON matrix file format.
//!
//! Row `r` of a fusion matrix expresses the input creation operator
//! (a_H, a_V, b_H, b_V)[r] in terms of the measured output modes
//! (c_H, c_V, d_H, d_V). Indices are zero-based in code.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};

pub type C64 = Complex64;

/// Row-major 4×4 complex grid.
pub type Grid = [[C64; 4]; 4];

/// Default max-abs tolerance on `U^dagger U - I`.
pub const TOL_UNITARY: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

const HAAR_MAX_ATTEMPTS: usize = 8;

/// Seed for every random stream in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent sub-seed for worker `stream` (splitmix64 finalizer).
    pub fn derive(self, stream: u64) -> RngSeed {
        let mut z = self
            .0
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream.wrapping_add(1)));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}

impl fmt::Display for RngSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Where a matrix came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Builtin(&'static str),
    File(String),
    Sampled(RngSeed),
    Parameterized(Box<UnitaryParams>),
    Derived,
}

/// A validated 4×4 unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionMatrix {
    entries: Grid,
    provenance: Provenance,
}

impl FusionMatrix {
    pub fn entries(&self) -> &Grid {
        &self.entries
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Entry at zero-based (row, col).
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> C64 {
        self.entries[row][col]
    }

    pub fn identity() -> Self {
        FusionMatrix {
            entries: identity_grid(),
            provenance: Provenance::Builtin("identity"),
        }
    }

    pub(crate) fn from_grid(entries: Grid, provenance: Provenance) -> Self {
        FusionMatrix {
            entries,
            provenance,
        }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }
}

pub fn identity_grid() -> Grid {
    let mut g = [[ZERO; 4]; 4];
    for (k, row) in g.iter_mut().enumerate() {
        row[k] = ONE;
    }
    g
}

pub fn matmul(a: &Grid, b: &Grid) -> Grid {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn adjoint(a: &Grid) -> Grid {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[j][i] = a[i][j].conj();
        }
    }
    out
}

/// max |(M^dagger M - I)_kl|
pub fn unitarity_deviation(m: &Grid) -> f64 {
    let prod = matmul(&adjoint(m), m);
    let mut worst = 0.0f64;
    for (k, row) in prod.iter().enumerate() {
        for (l, v) in row.iter().enumerate() {
            let target = if k == l { ONE } else { ZERO };
            worst = worst.max((v - target).norm());
        }
    }
    worst
}

pub fn validate_unitary(m: &Grid, tol: f64) -> Result<FusionMatrix> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(FusionError::MalformedInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if m.iter()
        .flatten()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(FusionError::MalformedInput(
            "matrix has non-finite entries".into(),
        ));
    }
    let max_deviation = unitarity_deviation(m);
    if max_deviation > tol {
        return Err(FusionError::NotUnitary { max_deviation });
    }
    Ok(FusionMatrix {
        entries: *m,
        provenance: Provenance::Derived,
    })
}

/// Validate a nested `Vec` grid (from JSON or user code) of `[re, im]` pairs.
pub fn validate_nested(rows: &[Vec<[f64; 2]>], tol: f64) -> Result<FusionMatrix> {
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        return Err(FusionError::MalformedInput(
            "expected a 4x4 grid of [re, im] pairs".into(),
        ));
    }
    let mut g = [[ZERO; 4]; 4];
    for (i, row) in rows.iter().enumerate() {
        for (j, [re, im]) in row.iter().enumerate() {
            g[i][j] = C64::new(*re, *im);
        }
    }
    validate_unitary(&g, tol)
}

/// Householder QR of a 4×4 complex matrix. The diagonal of `R` is complex in
/// general; `None` when a column is numerically dependent on earlier ones.
pub(crate) fn householder_qr(m: &Grid) -> Option<(Grid, Grid)> {
    let mut r = *m;
    let mut q = identity_grid();
    for k in 0..3 {
        let norm_x = (k..4).map(|i| r[i][k].norm_sqr()).sum::<f64>().sqrt();
        if norm_x < 1e-300 {
            return None;
        }
        let x0 = r[k][k];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * norm_x;
        let mut v = [ZERO; 4];
        for i in k..4 {
            v[i] = r[i][k];
        }
        v[k] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // R <- (I - 2 v v^dagger) R
        for j in 0..4 {
            let dot: C64 = (k..4).map(|i| v[i].conj() * r[i][j]).sum();
            for i in k..4 {
                r[i][j] -= 2.0 * v[i] * dot;
            }
        }
        // Q <- Q (I - 2 v v^dagger)
        for row in q.iter_mut() {
            let dot: C64 = (k..4).map(|i| row[i] * v[i]).sum();
            for i in k..4 {
                row[i] -= 2.0 * dot * v[i].conj();
            }
        }
    }
    if r[3][3].norm() < 1e-300 {
        return None;
    }
    for (i, row) in r.iter_mut().enumerate() {
        for v in row.iter_mut().take(i) {
            *v = ZERO;
        }
    }
    Some((q, r))
}

/// QR with the Haar sign fix applied: returns `(Q E, E^dagger R)` with
/// `E = diag(R_ii / |R_ii|)`, so the returned `R` has a positive real diagonal.
pub(crate) fn qr_positive(m: &Grid) -> Option<(Grid, Grid)> {
    let (mut q, mut r) = householder_qr(m)?;
    for k in 0..4 {
        let d = r[k][k];
        let e = d / d.norm();
        for row in q.iter_mut() {
            row[k] *= e;
        }
        for v in r[k].iter_mut() {
            *v *= e.conj();
        }
    }
    Some((q, r))
}

/// 32 standard normals arranged as a 4×4 complex matrix, row-major, (re, im).
pub(crate) fn gaussian_grid<R: Rng + ?Sized>(rng: &mut R) -> Grid {
    let mut g = [[ZERO; 4]; 4];
    for row in g.iter_mut() {
        for z in row.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z = C64::new(re, im);
        }
    }
    g
}

/// Draw one Haar-distributed unitary from `rng`.
pub fn haar_sample<R: Rng + ?Sized>(rng: &mut R) -> Result<FusionMatrix> {
    for _ in 0..HAAR_MAX_ATTEMPTS {
        let m = gaussian_grid(rng);
        if let Some((q, _)) = qr_positive(&m) {
            let u = validate_unitary(&q, TOL_UNITARY)?;
            return Ok(u);
        }
    }
    Err(FusionError::DegenerateSample {
        attempts: HAAR_MAX_ATTEMPTS,
    })
}

/// The first Haar sample of the stream seeded by `seed`.
pub fn haar_sample_seeded(seed: RngSeed) -> Result<FusionMatrix> {
    let mut rng = seed.rng();
    Ok(haar_sample(&mut rng)?.with_provenance(Provenance::Sampled(seed)))
}

/// Sixteen real generator coordinates: four diagonal entries followed by the
/// (re, im) parts of the upper off-diagonal entries (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitaryParams(pub [f64; 16]);

impl UnitaryParams {
    pub const LEN: usize = 16;

    pub fn zeros() -> Self {
        UnitaryParams([0.0; 16])
    }

    /// Uniform draw from `[-pi, pi]^16`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut p = [0.0; 16];
        for v in p.iter_mut() {
            *v = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        }
        UnitaryParams(p)
    }

    pub fn hermitian(&self) -> Grid {
        let p = &self.0;
        let mut h = [[ZERO; 4]; 4];
        for k in 0..4 {
            h[k][k] = C64::new(p[k], 0.0);
        }
        let mut idx = 4;
        for k in 0..4 {
            for l in (k + 1)..4 {
                let z = C64::new(p[idx], p[idx + 1]);
                h[k][l] = z;
                h[l][k] = z.conj();
                idx += 2;
            }
        }
        h
    }
}

/// exp(A) by scaling and squaring around a truncated Taylor series.
pub fn expm(a: &Grid) -> Grid {
    let norm1 = (0..4)
        .map(|j| (0..4).map(|i| a[i][j].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm1 * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let mut x = *a;
    for z in x.iter_mut().flatten() {
        *z *= scale;
    }
    // ||x|| <= 1/4: 14 terms put the remainder well under 1e-17.
    let mut result = identity_grid();
    let mut term = identity_grid();
    for k in 1..=14 {
        term = matmul(&term, &x);
        let inv = 1.0 / k as f64;
        for z in term.iter_mut().flatten() {
            *z *= inv;
        }
        for i in 0..4 {
            for j in 0..4 {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// exp(iH) for the Hermitian generator encoded by `p`.
pub fn from_params(p: &UnitaryParams) -> Result<FusionMatrix> {
    if p.0.iter().any(|v| !v.is_finite()) {
        return Err(FusionError::MalformedInput(
            "non-finite unitary parameter".into(),
        ));
    }
    let mut ih = p.hermitian();
    for z in ih.iter_mut().flatten() {
        *z = C64::i() * *z;
    }
    let u = expm(&ih);
    Ok(FusionMatrix {
        entries: u,
        provenance: Provenance::Parameterized(Box::new(*p)),
    })
}

/// `diag(e^{i left}) U diag(e^{i right})`
pub fn phase_multiply(u: &FusionMatrix, left: &[f64; 4], right: &[f64; 4]) -> FusionMatrix {
    let mut g = u.entries;
    for (i, row) in g.iter_mut().enumerate() {
        for (j, z) in row.iter_mut().enumerate() {
            *z *= C64::from_polar(1.0, left[i] + right[j]);
        }
    }
    FusionMatrix {
        entries: g,
        provenance: Provenance::Derived,
    }
}

pub const BUILTIN_NAMES: [&str; 4] = ["identity", "pbs2", "theorem7", "blockpair"];

fn real_grid(rows: [[f64; 4]; 4], scale: f64) -> Grid {
    let mut g = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            g[i][j] = C64::new(rows[i][j] * scale, 0.0);
        }
    }
    g
}

/// Named matrices. `pbs2` is the diagonal polarizing beam splitter of standard
/// type-II fusion, `theorem7` the two-rotation construction reaching the 1/2
/// bound, and `blockpair` = diag(H, H) which succeeds with probability one.
pub fn builtin(name: &str) -> Option<FusionMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (key, grid): (&'static str, Grid) = match name {
        "identity" => ("identity", identity_grid()),
        "pbs2" => (
            "pbs2",
            real_grid(
                [
                    [1.0, 1.0, 1.0, -1.0],
                    [1.0, 1.0, -1.0, 1.0],
                    [1.0, -1.0, 1.0, 1.0],
                    [-1.0, 1.0, 1.0, 1.0],
                ],
                0.5,
            ),
        ),
        "theorem7" => (
            "theorem7",
            real_grid(
                [
                    [1.0, 0.0, 1.0, 0.0],
                    [0.0, 1.0, 0.0, 1.0],
                    [-1.0, 0.0, 1.0, 0.0],
                    [0.0, -1.0, 0.0, 1.0],
                ],
                h,
            ),
        ),
        "blockpair" => (
            "blockpair",
            real_grid(
                [
                    [1.0, 1.0, 0.0, 0.0],
                    [1.0, -1.0, 0.0, 0.0],
                    [0.0, 0.0, 1.0, 1.0],
                    [0.0, 0.0, 1.0, -1.0],
                ],
                h,
            ),
        ),
        _ => return None,
    };
    Some(FusionMatrix {
        entries: grid,
        provenance: Provenance::Builtin(key),
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixFile {
    matrix: Vec<Vec<[f64; 2]>>,
}

pub fn parse_matrix_json(text: &str, tol: f64) -> Result<FusionMatrix> {
    let file: MatrixFile = serde_json::from_str(text)
        .map_err(|e| FusionError::MalformedInput(format!("matrix JSON: {e}")))?;
    validate_nested(&file.matrix, tol)
}

pub fn read_matrix_file(path: &Path, tol: f64) -> Result<FusionMatrix> {
    let text = std::fs::read_to_string(path)?;
    let u = parse_matrix_json(&text, tol)?;
    Ok(u.with_provenance(Provenance::File(path.display().to_string())))
}

/// `{"matrix": [[[re, im], x4], x4]}`, entries rounded to 12 significant digits.
pub fn matrix_to_json(u: &FusionMatrix) -> String {
    let file = MatrixFile {
        matrix: u
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|z| [crate::report::sig12(z.re), crate::report::sig12(z.im)])
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string(&file).expect("matrix serialization cannot fail")
}

/// Resolve a builtin name or `haar:<seed>`, falling back to a JSON file path.
pub fn resolve_matrix(source: &str, tol: f64) -> Result<FusionMatrix> {
    if let Some(u) = builtin(source) {
        return Ok(u);
    }
    if let Some(seed) = source.strip_prefix("haar:") {
        let seed = seed
            .parse()
            .map_err(|_| FusionError::MalformedInput(format!("bad seed in '{source}'")))?;
        return haar_sample_seeded(RngSeed(seed));
    }
    read_matrix_file(Path::new(source), tol)
}
