//! Matrix exponential.

use num_complex::Complex64 as C64;

use super::matrix::{CMatrix, I};
use crate::error::Result;

/// Structure tolerance used to select the eigen path.
const STRUCTURE_TOL: f64 = 1e-14;

/// `exp(M)`. Hermitian and anti-Hermitian inputs go through an
/// eigendecomposition; anything else through scaling and squaring.
pub fn expm(m: &CMatrix) -> Result<CMatrix> {
    m.ensure_finite("expm input")?;
    let scale = m.max_abs().max(1.0);
    if m.is_hermitian(STRUCTURE_TOL * scale) {
        let e = m.hermitian_eigen();
        return Ok(e.apply(|x| C64::new(x.exp(), 0.0)));
    }
    if m.is_anti_hermitian(STRUCTURE_TOL * scale) {
        // M = i H with H Hermitian.
        let h = m.scale(-I);
        let e = h.hermitian_eigen();
        return Ok(e.apply(|x| C64::from_polar(1.0, x)));
    }
    Ok(expm_taylor(m))
}

/// Scaling and squaring with a truncated Taylor series. No structure checks;
/// the caller guarantees finite input.
pub fn expm_taylor(m: &CMatrix) -> CMatrix {
    let n = m.dim();
    let norm = m.norm_1();
    if norm == 0.0 {
        return CMatrix::identity(n);
    }
    // ||X||_1 <= 1/2 after scaling.
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let x = m.scale_real(0.5f64.powi(s));
    let xn = x.norm_1();

    let mut sum = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    let mut bound = 1.0;
    for k in 1..=30 {
        term = term.matmul(&x).scale_real(1.0 / k as f64);
        sum += &term;
        bound *= xn / k as f64;
        if bound < 1e-17 {
            break;
        }
    }
    for _ in 0..s {
        sum = sum.matmul(&sum);
    }
    sum
}
