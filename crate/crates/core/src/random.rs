//! Seeded random generators for states, channels, measurements, and priors.
//!
//! Everything is driven by an explicit [`ChaCha8Rng`] so experiments and
//! tests are reproducible; see the simulation module for the per-trial
//! stream convention.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::operator::{
    ComplexMatrix, ComplexVector, DensityOperator, HermitianOperator, PureState,
};

pub fn test_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal via Box-Muller.
pub fn normal(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| Complex64::new(normal(rng), normal(rng)))
}

pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> HermitianOperator {
    let g = ginibre(rng, dim, dim);
    HermitianOperator::new((&g + g.adjoint()) * Complex64::new(0.5, 0.0))
        .expect("symmetrized Ginibre is Hermitian")
}

/// Ginibre-induced random density operator `GG^dagger / Tr`.
pub fn random_density(rng: &mut impl Rng, dim: usize) -> DensityOperator {
    let g = ginibre(rng, dim, dim);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(HermitianOperator::new(m / Complex64::new(tr, 0.0)).expect("Hermitian"))
        .expect("normalized Gram matrix is a state")
}

/// Haar-ish random pure state (normalized complex Gaussian vector).
pub fn random_pure(rng: &mut impl Rng, dim: usize) -> PureState {
    loop {
        let v = ComplexVector::from_fn(dim, |_, _| Complex64::new(normal(rng), normal(rng)));
        let n = v.norm();
        if n > 1e-6 {
            return PureState::new(v / Complex64::new(n, 0.0)).expect("normalized");
        }
    }
}

/// Unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    g.qr().q()
}

/// Random probability vector (normalized exponentials, i.e. flat Dirichlet).
pub fn random_prior_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n)
        .map(|_| -(rng.random::<f64>().max(f64::MIN_POSITIVE)).ln())
        .collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

/// Random POVM with `outcomes` elements: random PSD operators `A_j`
/// conjugated by `T^{-1/2}` with `T = sum A_j`, so completeness is exact
/// up to roundoff.
pub fn random_povm_elements(
    rng: &mut impl Rng,
    dim: usize,
    outcomes: usize,
) -> Vec<HermitianOperator> {
    let parts: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let g = ginibre(rng, dim, dim);
            &g * g.adjoint()
        })
        .collect();
    let mut total = ComplexMatrix::zeros(dim, dim);
    for p in &parts {
        total += p;
    }
    let t = HermitianOperator::new(total).expect("sum of PSD is Hermitian");
    let tinv = crate::operator::pinv_sqrt(&t, None).expect("sum of Ginibre Grams is PSD");
    parts
        .into_iter()
        .map(|p| {
            HermitianOperator::new(tinv.matrix() * p * tinv.matrix()).expect("congruence of PSD")
        })
        .collect()
}
