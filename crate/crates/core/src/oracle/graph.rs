//! Graph descriptions, their dense states and stabilizer checks.
//!
//! Text format, vertices zero-based, `#` starts a comment:
//!
//! ```text
//! 4 0010          # qubit count and optional k-flag bitstring (vertex 0 first)
//! 0 1             # plain CZ edge
//! 1 2
//! special 2 3 1.5708   # at most one edge carrying e^{i chi |11><11|}
//! mark 3          # vertex taking part in the fusion
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{FusionError, Result};
use crate::oracle::state::{check_qubits, StateVector};

/// Tolerance of the stabilizer eigen-equations.
pub const TOL_STABILIZER: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec {
    pub n: usize,
    /// Unordered pairs stored as `(min, max)`.
    pub edges: BTreeSet<(usize, usize)>,
    pub k_flags: Vec<bool>,
    pub special_edge: Option<((usize, usize), f64)>,
    pub mark: Option<usize>,
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

impl GraphSpec {
    pub fn empty(n: usize) -> Self {
        GraphSpec {
            n,
            edges: BTreeSet::new(),
            k_flags: vec![false; n],
            special_edge: None,
            mark: None,
        }
    }

    /// Path 0 - 1 - ... - (n-1).
    pub fn linear(n: usize) -> Self {
        let mut g = GraphSpec::empty(n);
        for v in 1..n {
            g.edges.insert((v - 1, v));
        }
        g
    }

    pub fn with_mark(mut self, v: usize) -> Self {
        self.mark = Some(v);
        self
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(FusionError::MalformedInput(format!(
                "self loop on vertex {u}"
            )));
        }
        self.edges.insert(ordered(u, v));
        Ok(())
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(FusionError::MalformedInput(format!(
                "vertex {v} outside 0..{}",
                self.n
            )))
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_flags.len() != self.n {
            return Err(FusionError::MalformedInput(
                "k_flags length differs from n".into(),
            ));
        }
        for &(u, v) in &self.edges {
            self.check_vertex(u)?;
            self.check_vertex(v)?;
            if u == v {
                return Err(FusionError::MalformedInput(format!(
                    "self loop on vertex {u}"
                )));
            }
        }
        if let Some(((u, v), chi)) = self.special_edge {
            self.check_vertex(u)?;
            self.check_vertex(v)?;
            if u == v || !chi.is_finite() {
                return Err(FusionError::MalformedInput("invalid special edge".into()));
            }
        }
        if let Some(m) = self.mark {
            self.check_vertex(m)?;
        }
        Ok(())
    }

    /// Neighbours through plain edges and the special edge.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: BTreeSet<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        if let Some(((a, b), _)) = self.special_edge {
            if a == v {
                out.insert(b);
            } else if b == v {
                out.insert(a);
            }
        }
        out.into_iter().collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }

    pub fn parse(text: &str) -> Result<GraphSpec> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .enumerate()
            .filter(|(_, l)| !l.is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| FusionError::Parse("empty graph description".into()))?;
        let mut head = header.split_whitespace();
        let n: usize = head
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| FusionError::Parse(format!("bad header line '{header}'")))?;
        let mut g = GraphSpec::empty(n);
        if let Some(flags) = head.next() {
            if flags.len() != n || !flags.chars().all(|c| c == '0' || c == '1') {
                return Err(FusionError::Parse(format!(
                    "k_flags '{flags}' must be {n} characters of 0/1"
                )));
            }
            g.k_flags = flags.chars().map(|c| c == '1').collect();
        }
        if head.next().is_some() {
            return Err(FusionError::Parse(format!("trailing tokens in '{header}'")));
        }
        for (lineno, line) in lines {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let err = || FusionError::Parse(format!("line {}: cannot parse '{line}'", lineno + 1));
            let num = |t: &str| t.parse::<usize>().map_err(|_| err());
            match tokens.as_slice() {
                ["special", u, v, chi] => {
                    if g.special_edge.is_some() {
                        return Err(FusionError::Parse("more than one special edge".into()));
                    }
                    let chi: f64 = chi.parse().map_err(|_| err())?;
                    g.special_edge = Some((ordered(num(u)?, num(v)?), chi));
                }
                ["mark", v] => g.mark = Some(num(v)?),
                [u, v] => {
                    let (u, v) = (num(u)?, num(v)?);
                    g.add_edge(u, v)?;
                }
                _ => return Err(err()),
            }
        }
        g.validate()?;
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}", self.n);
        if self.k_flags.iter().any(|&k| k) {
            out.push(' ');
            out.extend(self.k_flags.iter().map(|&k| if k { '1' } else { '0' }));
        }
        out.push('\n');
        for (u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        if let Some(((u, v), chi)) = self.special_edge {
            let _ = writeln!(out, "special {u} {v} {chi}");
        }
        if let Some(m) = self.mark {
            let _ = writeln!(out, "mark {m}");
        }
        out
    }
}

/// |+>^n, CZ on every plain edge, the controlled phase on the special edge,
/// Z on every flagged vertex.
pub fn build_graph_state(g: &GraphSpec) -> Result<StateVector> {
    g.validate()?;
    check_qubits(g.n)?;
    let mut s = StateVector::plus(g.n)?;
    for &(u, v) in &g.edges {
        s.apply_cz(u, v);
    }
    if let Some(((u, v), chi)) = g.special_edge {
        s.apply_controlled_phase(u, v, chi);
    }
    for (v, &k) in g.k_flags.iter().enumerate() {
        if k {
            s.apply_z(v);
        }
    }
    Ok(s)
}

/// `K_v = X_v prod_{w in n(v)} Z_w` applied to `s`.
pub fn apply_graph_stabilizer(s: &StateVector, g: &GraphSpec, v: usize) -> StateVector {
    let mut t = s.clone();
    for w in g.neighbors(v) {
        t.apply_z(w);
    }
    t.apply_x(v);
    t
}

/// Largest deviation `|K s - lambda s|` entry.
pub fn eigen_residual(s: &StateVector, ks: &StateVector, lambda: f64) -> f64 {
    s.amplitudes()
        .iter()
        .zip(ks.amplitudes())
        .map(|(x, y)| (y - x * lambda).norm())
        .fold(0.0, f64::max)
}

/// Every vertex satisfies `K_v s = (-1)^{k_v} s`.
pub fn check_stabilizers(s: &StateVector, g: &GraphSpec) -> bool {
    if g.special_edge.is_some() || s.n_qubits() != g.n {
        return false;
    }
    (0..g.n).all(|v| {
        let sign = if g.k_flags[v] { -1.0 } else { 1.0 };
        eigen_residual(s, &apply_graph_stabilizer(s, g, v), sign) <= TOL_STABILIZER
    })
}
