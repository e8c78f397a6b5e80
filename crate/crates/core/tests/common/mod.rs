#![allow(dead_code)]

use std::f64::consts::PI;

use fusionlab::matrix::C64;
use fusionlab::oracle::FusionScenario;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn random_scenario<R: Rng>(rng: &mut R, max_left: usize, max_right: usize) -> FusionScenario {
    fusionlab::verify::random_scenario(rng, max_left, max_right)
        .expect("scenario within the qubit cap")
}

pub fn phase<R: Rng>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.random_range(-PI..PI))
}

pub fn gaussian_quadruple<R: Rng>(rng: &mut R) -> [C64; 4] {
    std::array::from_fn(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
}
