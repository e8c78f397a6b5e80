//! Classification of a conditional two-cluster state (A, B, C, D): product,
//! stabilizer, weighted graph, cluster up to local rotations, and general
//! maximally entangled.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use serde::Serialize;

use crate::fusion::OutcomeCoefficients;
use crate::matrix::C64;

pub const TOL_CLASSIFY: f64 = 1e-8;

/// Number of neighbours of the fused qubit b in its own cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NeighborArity {
    One,
    Two,
}

impl NeighborArity {
    pub fn from_degree(degree: usize) -> Option<Self> {
        match degree {
            1 => Some(NeighborArity::One),
            2 => Some(NeighborArity::Two),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedGraphParams {
    pub theta1: f64,
    pub phi1: f64,
    pub theta2: f64,
    pub phi2: f64,
    pub chi: f64,
}

impl WeightedGraphParams {
    pub fn reconstruct(&self) -> [C64; 4] {
        let p1 = C64::from_polar(FRAC_1_SQRT_2, self.theta1);
        let p2 = C64::from_polar(FRAC_1_SQRT_2, self.theta2);
        let i = C64::i();
        [
            p1 * self.phi1.cos(),
            p1 * i * self.phi1.sin(),
            p2 * i * self.phi2.sin(),
            p2 * self.phi2.cos(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterParams {
    pub theta1: f64,
    pub theta2: f64,
    pub phi: f64,
}

impl ClusterParams {
    pub fn reconstruct(&self) -> [C64; 4] {
        WeightedGraphParams {
            theta1: self.theta1,
            phi1: self.phi,
            theta2: self.theta2,
            phi2: self.phi,
            chi: PI,
        }
        .reconstruct()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxEntangledParams {
    pub theta_a: f64,
    pub theta_b: f64,
    pub theta_d: f64,
    pub phi: f64,
}

impl MaxEntangledParams {
    pub fn reconstruct(&self) -> [C64; 4] {
        let (s, c) = self.phi.sin_cos();
        let r = FRAC_1_SQRT_2;
        [
            C64::from_polar(r * c, self.theta_a),
            C64::from_polar(r * s, self.theta_b),
            C64::from_polar(r * s, self.theta_a + self.theta_d - self.theta_b),
            -C64::from_polar(r * c, self.theta_d),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "label")]
pub enum StateLabel {
    Product,
    Stabilizer { phi: f64 },
    WeightedGraph(WeightedGraphParams),
    ClusterUpToRotation(ClusterParams),
    MaxEntangledGeneric(MaxEntangledParams),
    Generic,
}

impl StateLabel {
    pub fn name(&self) -> &'static str {
        match self {
            StateLabel::Product => "Product",
            StateLabel::Stabilizer { .. } => "Stabilizer",
            StateLabel::WeightedGraph(_) => "WeightedGraph",
            StateLabel::ClusterUpToRotation(_) => "ClusterUpToRotation",
            StateLabel::MaxEntangledGeneric(_) => "MaxEntangledGeneric",
            StateLabel::Generic => "Generic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateClass {
    pub labels: Vec<StateLabel>,
    pub arity: NeighborArity,
    /// The outcome never occurs; labelled Product by convention.
    pub zero_probability: bool,
}

impl StateClass {
    pub fn has(&self, name: &str) -> bool {
        self.labels.iter().any(|l| l.name() == name)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.labels.iter().map(StateLabel::name).collect()
    }

    pub fn stabilizer_phi(&self) -> Option<f64> {
        self.labels.iter().find_map(|l| match l {
            StateLabel::Stabilizer { phi } => Some(*phi),
            _ => None,
        })
    }

    pub fn weighted_graph(&self) -> Option<WeightedGraphParams> {
        self.labels.iter().find_map(|l| match l {
            StateLabel::WeightedGraph(p) => Some(*p),
            _ => None,
        })
    }

    pub fn cluster(&self) -> Option<ClusterParams> {
        self.labels.iter().find_map(|l| match l {
            StateLabel::ClusterUpToRotation(p) => Some(*p),
            _ => None,
        })
    }
}

/// Angle wrapped into [0, 2pi).
pub fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Smallest distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

fn det_of(c: &[C64; 4]) -> f64 {
    (c[0] * c[3] - c[1] * c[2]).norm_sqr()
}

pub fn is_product(c: &OutcomeCoefficients, tol: f64) -> bool {
    (c.a() * c.d() - c.b() * c.c()).norm() <= tol
}

/// Phase `Phi` with `D = e^{i Phi} A` (or `C = e^{i Phi} B`) when the state
/// has one of the two stabilizer patterns.
pub fn is_stabilizer(c: &OutcomeCoefficients, tol: f64) -> Option<f64> {
    let [a, b, cc, d] = c.coeffs;
    if a.norm() <= tol && d.norm() <= tol && (b.norm() - cc.norm()).abs() <= tol {
        Some(wrap_angle(cc.arg() - b.arg()))
    } else if b.norm() <= tol && cc.norm() <= tol && (a.norm() - d.norm()).abs() <= tol {
        Some(wrap_angle(d.arg() - a.arg()))
    } else {
        None
    }
}

fn weighted_graph_conditions(c: &[C64; 4], tol: f64) -> bool {
    let [a, b, cc, d] = *c;
    (a.norm_sqr() + b.norm_sqr() - 0.5).abs() <= tol
        && (cc.norm_sqr() + d.norm_sqr() - 0.5).abs() <= tol
        && (a * b.conj()).re.abs() <= tol
        && (cc * d.conj()).re.abs() <= tol
}

/// Writes `z = e^{i theta} cos(phi)`, `w = e^{i theta} sin(phi)` for a pair
/// sharing a phase up to sign.
fn fit_half(z: C64, w: C64) -> (f64, f64) {
    let lead = if z.norm() >= w.norm() { z } else { w };
    let theta = if lead.norm() > 0.0 { lead.arg() } else { 0.0 };
    let rot = C64::from_polar(1.0, -theta);
    let phi = (w * rot).re.atan2((z * rot).re);
    (theta, phi)
}

fn fit_weighted_graph(c: &[C64; 4]) -> WeightedGraphParams {
    let s = std::f64::consts::SQRT_2;
    let i = C64::i();
    let (theta1, phi1) = fit_half(c[0] * s, c[1] * s / i);
    let (theta2, phi2) = fit_half(c[3] * s, c[2] * s / i);
    WeightedGraphParams {
        theta1: wrap_angle(theta1),
        phi1,
        theta2: wrap_angle(theta2),
        phi2,
        chi: wrap_angle(2.0 * (phi1 - phi2) + PI),
    }
}

/// Weighted-graph form: `|A|^2 + |B|^2 = |C|^2 + |D|^2 = 1/2` and
/// `Re(AB*) = Re(CD*) = 0`. With two neighbours of b only stabilizer states
/// qualify.
pub fn is_weighted_graph(
    c: &OutcomeCoefficients,
    arity: NeighborArity,
    tol: f64,
) -> Option<WeightedGraphParams> {
    if arity == NeighborArity::Two && is_stabilizer(c, tol).is_none() {
        return None;
    }
    if !weighted_graph_conditions(&c.coeffs, tol) {
        return None;
    }
    Some(fit_weighted_graph(&c.coeffs))
}

/// Cluster state up to single-qubit rotations: the weighted-graph form with
/// `phi1 = phi2`. Accepted when the squared distance to the fitted form is
/// within `tol`.
pub fn is_cluster_up_to_rotation(c: &OutcomeCoefficients, tol: f64) -> Option<ClusterParams> {
    if !weighted_graph_conditions(&c.coeffs, tol) {
        return None;
    }
    let wg = fit_weighted_graph(&c.coeffs);
    // (theta, phi) and (theta + pi, phi + pi) describe the same pair
    let mut theta2 = wg.theta2;
    let mut phi2 = wg.phi2;
    let shift = ((wg.phi1 - phi2) / PI).round();
    phi2 += shift * PI;
    if shift.rem_euclid(2.0) != 0.0 {
        theta2 += PI;
    }
    let params = ClusterParams {
        theta1: wg.theta1,
        theta2: wrap_angle(theta2),
        phi: 0.5 * (wg.phi1 + phi2),
    };
    let fitted = params.reconstruct();
    let distance: f64 = fitted
        .iter()
        .zip(c.coeffs.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    (distance <= tol).then_some(params)
}

fn fit_max_entangled(c: &[C64; 4]) -> MaxEntangledParams {
    let [a, b, cc, d] = *c;
    let phi = b.norm().atan2(a.norm());
    let theta_a = if a.norm() > 0.0 { a.arg() } else { 0.0 };
    let theta_b = if b.norm() > 0.0 { b.arg() } else { 0.0 };
    let theta_d = if d.norm() >= cc.norm() {
        (-d).arg()
    } else {
        cc.arg() - theta_a + theta_b
    };
    MaxEntangledParams {
        theta_a: wrap_angle(theta_a),
        theta_b: wrap_angle(theta_b),
        theta_d: wrap_angle(theta_d),
        phi,
    }
}

/// Parameters of the general maximally entangled two-qubit form when
/// `|det - 1/4| <= tol`.
pub fn max_entangled_params(c: &OutcomeCoefficients, tol: f64) -> Option<MaxEntangledParams> {
    ((det_of(&c.coeffs) - 0.25).abs() <= tol).then(|| fit_max_entangled(&c.coeffs))
}

pub fn classify(c: &OutcomeCoefficients, arity: NeighborArity, tol: f64) -> StateClass {
    if c.zero {
        return StateClass {
            labels: vec![StateLabel::Product],
            arity,
            zero_probability: true,
        };
    }
    let mut labels = Vec::new();
    if is_product(c, tol) {
        labels.push(StateLabel::Product);
    }
    let stabilizer = is_stabilizer(c, tol);
    if let Some(phi) = stabilizer {
        labels.push(StateLabel::Stabilizer { phi });
    }
    if let Some(p) = is_weighted_graph(c, arity, tol) {
        labels.push(StateLabel::WeightedGraph(p));
    }
    if let Some(p) = is_cluster_up_to_rotation(c, tol) {
        labels.push(StateLabel::ClusterUpToRotation(p));
    }
    let max_ent =
        max_entangled_params(c, tol).or_else(|| stabilizer.map(|_| fit_max_entangled(&c.coeffs)));
    if let Some(p) = max_ent {
        labels.push(StateLabel::MaxEntangledGeneric(p));
    }
    if labels.is_empty() {
        labels.push(StateLabel::Generic);
    }
    StateClass {
        labels,
        arity,
        zero_probability: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{outcome_coefficients, ChannelIndex};
    use crate::matrix::builtin;

    const H: f64 = FRAC_1_SQRT_2;

    fn st(v: [C64; 4]) -> OutcomeCoefficients {
        OutcomeCoefficients::from_state(v).unwrap()
    }

    fn re(v: [f64; 4]) -> OutcomeCoefficients {
        st(v.map(|x| C64::new(x, 0.0)))
    }

    fn bell() -> OutcomeCoefficients {
        re([H, 0.0, 0.0, H])
    }

    fn wg_example() -> OutcomeCoefficients {
        st([
            C64::new(0.5, 0.0),
            C64::new(0.0, 0.5),
            C64::new(0.0, 0.0),
            C64::new(H, 0.0),
        ])
    }

    fn close(a: &[C64; 4], b: &[C64; 4], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn product_predicate() {
        assert!(is_product(&re([1.0, 0.0, 0.0, 0.0]), 1e-8));
        assert!(!is_product(&bell(), 1e-8));
        let id = builtin("identity").unwrap();
        let o = outcome_coefficients(
            &id,
            ChannelIndex::new(1).unwrap(),
            ChannelIndex::new(3).unwrap(),
        )
        .unwrap();
        assert!(is_product(&o, 1e-8));
    }

    #[test]
    fn stabilizer_phase() {
        let c = st([
            C64::new(H, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::from_polar(H, PI / 3.0),
        ]);
        assert!((is_stabilizer(&c, 1e-8).unwrap() - PI / 3.0).abs() < 1e-12);
        assert_eq!(is_stabilizer(&re([0.0, H, H, 0.0]), 1e-8), Some(0.0));
        assert_eq!(is_stabilizer(&re([0.5, 0.5, 0.5, 0.5]), 1e-8), None);
    }

    #[test]
    fn weighted_graph_examples() {
        let p = is_weighted_graph(&bell(), NeighborArity::One, 1e-8).unwrap();
        assert!(p.phi1.abs() < 1e-12 && p.phi2.abs() < 1e-12);
        assert!((p.chi - PI).abs() < 1e-12);

        let p = is_weighted_graph(&wg_example(), NeighborArity::One, 1e-8).unwrap();
        assert!((p.phi1 - PI / 4.0).abs() < 1e-12);
        assert!(p.phi2.abs() < 1e-12);
        assert!((p.chi - 1.5 * PI).abs() < 1e-12);
        assert!(close(&p.reconstruct(), &wg_example().coeffs, 1e-12));
        let det = det_of(&wg_example().coeffs);
        assert!((det - 0.125).abs() < 1e-15);
        assert!((det - (1.0 - p.chi.cos()) / 8.0).abs() < 1e-12);

        assert!(is_weighted_graph(&re([0.9, 0.1, 0.1, 0.4]), NeighborArity::One, 1e-8).is_none());
    }

    #[test]
    fn arity_two_defers_to_stabilizer() {
        assert!(is_weighted_graph(&wg_example(), NeighborArity::Two, 1e-8).is_none());
        assert!(is_weighted_graph(&bell(), NeighborArity::Two, 1e-8).is_some());
    }

    #[test]
    fn cluster_examples() {
        let p = is_cluster_up_to_rotation(&bell(), 1e-8).unwrap();
        assert!(p.phi.abs() < 1e-12 && p.theta1.abs() < 1e-12 && p.theta2.abs() < 1e-12);

        let (s, c) = (PI / 6.0).sin_cos();
        let v = st([
            C64::new(c * H, 0.0),
            C64::new(0.0, s * H),
            C64::new(0.0, s * H),
            C64::new(c * H, 0.0),
        ]);
        let p = is_cluster_up_to_rotation(&v, 1e-8).unwrap();
        assert!((p.phi - PI / 6.0).abs() < 1e-12);
        assert!(close(&p.reconstruct(), &v.coeffs, 1e-12));

        assert!(is_cluster_up_to_rotation(&wg_example(), 1e-8).is_none());
    }

    #[test]
    fn cluster_with_sign_flipped_half() {
        // same pair written with (theta2 + pi, phi + pi)
        let params = ClusterParams {
            theta1: 0.4,
            theta2: 1.1,
            phi: 2.9,
        };
        let v = st(params.reconstruct());
        let fit = is_cluster_up_to_rotation(&v, 1e-8).unwrap();
        assert!(close(&fit.reconstruct(), &v.coeffs, 1e-12));
    }

    #[test]
    fn max_entangled_examples() {
        let p = max_entangled_params(&bell(), 1e-8).unwrap();
        assert!(p.theta_a.abs() < 1e-12 && p.phi.abs() < 1e-12);
        assert!((p.theta_d - PI).abs() < 1e-12);
        assert!(close(&p.reconstruct(), &bell().coeffs, 1e-12));
        assert!(max_entangled_params(&re([1.0, 0.0, 0.0, 0.0]), 1e-8).is_none());

        let t7 = builtin("theorem7").unwrap();
        let o = outcome_coefficients(
            &t7,
            ChannelIndex::new(1).unwrap(),
            ChannelIndex::new(2).unwrap(),
        )
        .unwrap();
        let p = max_entangled_params(&o, 1e-8).unwrap();
        assert!(close(&p.reconstruct(), &o.coeffs, 1e-9));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify(&bell(), NeighborArity::One, 1e-8).names(),
            vec![
                "Stabilizer",
                "WeightedGraph",
                "ClusterUpToRotation",
                "MaxEntangledGeneric"
            ]
        );
        let bell_class = classify(&bell(), NeighborArity::One, 1e-8);
        assert!((bell_class.weighted_graph().unwrap().chi - PI).abs() < 1e-12);

        let c = classify(&wg_example(), NeighborArity::One, 1e-8);
        assert_eq!(c.names(), vec!["WeightedGraph"]);
        assert!((c.weighted_graph().unwrap().chi - 1.5 * PI).abs() < 1e-12);

        assert_eq!(
            classify(&re([1.0, 0.0, 0.0, 0.0]), NeighborArity::One, 1e-8).names(),
            vec!["Product"]
        );
        assert_eq!(
            classify(&re([0.9, 0.1, 0.1, 0.4]), NeighborArity::One, 1e-8).names(),
            vec!["Generic"]
        );
    }

    #[test]
    fn zero_outcome_is_product() {
        let o = outcome_coefficients(
            &builtin("pbs2").unwrap(),
            ChannelIndex::new(1).unwrap(),
            ChannelIndex::new(2).unwrap(),
        )
        .unwrap();
        let c = classify(&o, NeighborArity::One, 1e-8);
        assert!(c.zero_probability);
        assert_eq!(c.names(), vec!["Product"]);
    }

    #[test]
    fn angle_helpers() {
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(TAU + 0.5) - 0.5).abs() < 1e-15);
        assert!((angle_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
    }
}
