#![allow(dead_code)]

use cavsim::{CavityParams, JointState};
use num_complex::Complex64;
use rand::Rng;

/// Uniform (Haar) random qubit: normalized complex Gaussian vector.
pub fn random_qubit<R: Rng>(rng: &mut R) -> [Complex64; 2] {
    let mut v = [Complex64::new(0.0, 0.0); 2];
    loop {
        for c in v.iter_mut() {
            let re: f64 = rng.sample(rand_distr::StandardNormal);
            let im: f64 = rng.sample(rand_distr::StandardNormal);
            *c = Complex64::new(re, im);
        }
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if n > 1e-6 {
            return [v[0] / n, v[1] / n];
        }
    }
}

pub fn random_state<R: Rng>(rng: &mut R) -> JointState {
    let p = random_qubit(rng);
    let a = random_qubit(rng);
    JointState::new(p[0], p[1], a[0], a[1]).expect("normalized")
}

pub fn random_params<R: Rng>(rng: &mut R) -> CavityParams {
    CavityParams::new(
        rng.random_range(0.0..12.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(0.0..=1.0),
        rng.random_range(0.0..=1.0),
    )
    .expect("in range")
}
