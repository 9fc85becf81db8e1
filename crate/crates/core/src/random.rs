//! Seeded random test matrices.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operators::matrix::I;
use crate::operators::CMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex Gaussian entries, unit variance per component.
pub fn gaussian_matrix(n: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(n, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Gaussian matrix scaled to spectral norm `norm`.
pub fn random_matrix(n: usize, norm: f64, seed: u64) -> CMatrix {
    let g = gaussian_matrix(n, &mut rng(seed));
    let s = g.spectral_norm();
    if s == 0.0 {
        g
    } else {
        g.scale_real(norm / s)
    }
}

/// Hermitian with spectral norm `norm`.
pub fn random_hermitian(n: usize, norm: f64, seed: u64) -> CMatrix {
    let h = gaussian_matrix(n, &mut rng(seed)).hermitian_part();
    let s = h.spectral_norm();
    if s == 0.0 {
        h
    } else {
        h.scale_real(norm / s)
    }
}

/// Hermitian PSD with largest eigenvalue `norm`.
pub fn random_psd(n: usize, norm: f64, seed: u64) -> CMatrix {
    let g = gaussian_matrix(n, &mut rng(seed));
    let p = g.adjoint().matmul(&g).hermitian_part();
    let s = p.hermitian_eigen().max();
    if s == 0.0 {
        p
    } else {
        p.scale_real(norm / s)
    }
}

/// `A1 + i A2` with `A1` PSD of norm `a1` and `A2` Hermitian of norm `a2`.
pub fn random_dissipative(n: usize, a1: f64, a2: f64, seed: u64) -> CMatrix {
    let p = random_psd(n, a1, seed.wrapping_mul(2).wrapping_add(1));
    let h = random_hermitian(n, a2, seed.wrapping_mul(2).wrapping_add(2));
    &p + &h.scale(I)
}
