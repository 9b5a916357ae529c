//! Seeded random matrices shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use perceptron_core::numerics::{hermitian_eig, Operator, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_matrix(rng: &mut TestRng, n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn hermitian(rng: &mut TestRng, n: usize) -> DMatrix<C64> {
    let a = complex_matrix(rng, n);
    (&a + a.adjoint()) * C64::from(0.5)
}

/// `exp(−iH)` for a random Hermitian `H` with entries of order 3.
pub fn unitary(rng: &mut TestRng, n: usize) -> DMatrix<C64> {
    let h = hermitian(rng, n) * C64::from(3.0);
    let es = hermitian_eig(&Operator::from_matrix(h).unwrap()).unwrap();
    let v = es.vectors.entries();
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::from_polar(1.0, -es.values[i])
        } else {
            C64::from(0.0)
        }
    });
    v * phases * v.adjoint()
}

pub fn density(rng: &mut TestRng, n: usize) -> DMatrix<C64> {
    let a = complex_matrix(rng, n);
    let m = &a * a.adjoint();
    let tr = m.trace();
    m / tr
}

pub fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
}
