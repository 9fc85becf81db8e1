//! Helpers shared by the integration tests.
#![allow(dead_code)]

use apskit::operators::CMatrix;
use apskit::random::{random_dissipative, random_matrix, random_psd};
use apskit::Generator;
use num_complex::Complex64 as C64;

/// `S_k` by listing every strictly increasing tuple `m_1 < ... < m_k`.
pub fn enumerate_ordered_sums(samples: &[CMatrix], h: f64, order: usize) -> Vec<CMatrix> {
    let dim = samples[0].dim();
    let n = samples.len();
    let mut out = vec![CMatrix::zeros(dim); order + 1];
    out[0] = CMatrix::identity(dim);
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        let mut idx: Vec<usize> = (0..k).collect();
        if k > n {
            continue;
        }
        loop {
            // Later grid points to the left.
            let mut p = CMatrix::identity(dim);
            for &m in &idx {
                p = samples[m].matmul(&p);
            }
            *slot += &p.scale_real(h.powi(k as i32));
            // Next combination in lexicographic order.
            let mut i = k;
            while i > 0 && idx[i - 1] == n - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

/// `A(s) = P0 + s P1 + i (H0 + s H1)` with PSD `P0, P1`, so `A1(s)` is PSD
/// for `s >= 0`, and `||A(s)|| <= a1 + a2` on `[0, 1]`.
pub fn dissipative_polynomial(dim: usize, a1: f64, a2: f64, seed: u64) -> Generator {
    let c0 = random_dissipative(dim, 0.6 * a1, 0.6 * a2, seed);
    let c1 = random_dissipative(dim, 0.4 * a1, 0.4 * a2, seed ^ 0x9e37_79b9);
    Generator::polynomial(vec![c0, c1], 1.0).unwrap()
}

/// Quadratic generator with indefinite, non-normal coefficients.
pub fn generic_polynomial(dim: usize, seed: u64) -> Generator {
    let c0 = &random_psd(dim, 1.0, seed) + &random_matrix(dim, 0.3, seed + 1);
    let c1 = random_matrix(dim, 0.4, seed + 2);
    let c2 = random_matrix(dim, 0.3, seed + 3);
    Generator::polynomial(vec![c0, c1, c2], 1.0).unwrap()
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
