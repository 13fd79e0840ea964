//! Seeded random states and operators for test corpora and synthetic models.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::ComplexMatrix;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Complex Gaussian vector (unnormalised).
pub fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    (0..dim)
        .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
        .collect()
}

pub fn normalize(v: &mut [Complex64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= n;
    }
}

/// Haar-random pure state vector.
pub fn random_state_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    let mut v = gaussian_vector(dim, rng);
    normalize(&mut v);
    v
}

/// Random full-rank density matrix `G G^dagger / Tr(G G^dagger)` (Ginibre).
pub fn random_density_matrix_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
    let m = &g * &g.dagger();
    let t = m.trace().re;
    m.scale_real(1.0 / t)
}

pub fn random_density_matrix(dim: usize, seed: u64) -> ComplexMatrix {
    random_density_matrix_with(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ComplexMatrix::from_fn(dim, |_, _| {
        Complex64::new(gaussian(&mut rng), gaussian(&mut rng))
    });
    (&g + &g.dagger()).scale_real(0.5)
}

/// Haar-random unitary via Gram-Schmidt on a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v = gaussian_vector(dim, rng);
        for c in &cols {
            let overlap: Complex64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= overlap * ci;
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-8 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= n;
        }
        cols.push(v);
    }
    ComplexMatrix::from_fn(dim, |r, c| cols[c][r])
}
