//! Ordered sums `S_k = h^k sum_{m_1 < ... < m_k < N} L(m_k h) ... L(m_1 h)`.

use num_complex::Complex64 as C64;

use crate::error::{ApsError, Result};
use crate::operators::CMatrix;

/// Largest asymmetry tolerated in a sampled Hermitian operator.
pub const HERMITIAN_TOL: f64 = 1e-8;

/// Dynamic program over the grid: for each `m`, `S_k += h L(mh) S_{k-1}` for
/// `k = M..1`. Returns `S_0..S_M`. Cost `O(N M)` products.
pub fn ordered_sums(
    mut sample: impl FnMut(u64) -> Result<CMatrix>,
    dim: usize,
    n_grid: u64,
    h: f64,
    order: usize,
) -> Result<Vec<CMatrix>> {
    let mut s = vec![CMatrix::zeros(dim); order + 1];
    s[0] = CMatrix::identity(dim);
    for m in 0..n_grid {
        let l = sample(m)?.scale_real(h);
        for k in (1..=order.min(m as usize + 1)).rev() {
            let add = l.matmul(&s[k - 1]);
            s[k] += &add;
        }
    }
    Ok(s)
}

/// Same sums with a Hermiticity check on every sample.
pub fn ordered_sums_hermitian(
    sampler: &dyn Fn(f64) -> CMatrix,
    dim: usize,
    n_grid: u64,
    h: f64,
    order: usize,
) -> Result<Vec<CMatrix>> {
    ordered_sums(
        |m| {
            let t = m as f64 * h;
            let l = sampler(t);
            l.ensure_dim(dim)?;
            l.ensure_finite("series sample")?;
            let asym = l.asymmetry();
            if asym > HERMITIAN_TOL {
                return Err(ApsError::NotHermitian { at: format!("grid point {m} (t = {t})"), asymmetry: asym });
            }
            Ok(l)
        },
        dim,
        n_grid,
        h,
        order,
    )
}

/// Matrix polynomial in a formal variable `z`, truncated at a fixed degree.
#[derive(Clone, Debug)]
pub struct MatPoly {
    pub coeffs: Vec<CMatrix>,
}

impl MatPoly {
    pub fn degree_cap(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn identity(dim: usize, order: usize) -> Self {
        let mut coeffs = vec![CMatrix::zeros(dim); order + 1];
        coeffs[0] = CMatrix::identity(dim);
        Self { coeffs }
    }

    /// Product truncated at the common degree cap.
    pub fn mul(&self, rhs: &MatPoly) -> MatPoly {
        let order = self.degree_cap();
        let dim = self.coeffs[0].dim();
        let mut out = vec![CMatrix::zeros(dim); order + 1];
        let nonzero = |p: &MatPoly| -> Vec<bool> { p.coeffs.iter().map(|c| c.max_abs() > 0.0).collect() };
        let (nl, nr) = (nonzero(self), nonzero(rhs));
        for i in 0..=order {
            if !nl[i] {
                continue;
            }
            for j in 0..=(order - i) {
                if nr[j] {
                    let p = self.coeffs[i].matmul(&rhs.coeffs[j]);
                    out[i + j] += &p;
                }
            }
        }
        MatPoly { coeffs: out }
    }

    pub fn pow(&self, mut n: u64) -> MatPoly {
        let mut acc = MatPoly::identity(self.coeffs[0].dim(), self.degree_cap());
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn eval(&self, z: C64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.coeffs[0].dim());
        for c in self.coeffs.iter().rev() {
            acc = acc.scale(z);
            acc += c;
        }
        acc
    }
}

/// Ordered sums for samples of the rotating form
/// `L(mh) = Phi^m B Phi^{-m}` with `Phi` diagonal, given `phi_inv = Phi^{-1}`.
///
/// With `Y_{m+1} = Phi^{-1}(I + h z B) Y_m`, `Y_0 = I`, the generating
/// polynomial of the sums after `N` grid points is `Phi^N Y_N`. The returned
/// polynomial is `Y_N = G^N`, so the caller applies `Phi^N`, which often
/// cancels against a prefactor. Cost `O(M^2 log N)` products.
pub fn rotating_sums(phi_inv: &[C64], b: &CMatrix, h: f64, n_grid: u64, order: usize) -> MatPoly {
    let dim = b.dim();
    let mut g = MatPoly { coeffs: vec![CMatrix::zeros(dim); order + 1] };
    g.coeffs[0] = CMatrix::from_diag(phi_inv);
    if order >= 1 {
        g.coeffs[1] = b.mul_diag_left(phi_inv).scale_real(h);
    }
    g.pow(n_grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(samples: &[CMatrix], h: f64, k: usize) -> CMatrix {
        let n = samples.len();
        let dim = samples[0].dim();
        let mut total = CMatrix::zeros(dim);
        let mut idx: Vec<usize> = (0..k).collect();
        if k == 0 {
            return CMatrix::identity(dim);
        }
        if k > n {
            return total;
        }
        loop {
            let mut p = CMatrix::identity(dim);
            for &i in &idx {
                p = samples[i].matmul(&p);
            }
            total += &p.scale_real(h.powi(k as i32));
            let mut j = k;
            loop {
                if j == 0 {
                    return total;
                }
                j -= 1;
                if idx[j] < n - k + j {
                    idx[j] += 1;
                    for r in j + 1..k {
                        idx[r] = idx[r - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    fn samples(n: usize) -> Vec<CMatrix> {
        (0..n)
            .map(|m| {
                let x = m as f64;
                CMatrix::from_rows(&[
                    vec![C64::new(x.sin(), 0.0), C64::new(0.3 * x, 0.1)],
                    vec![C64::new(-0.2, x.cos()), C64::new(1.0 - x, 0.0)],
                ])
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn dp_matches_enumeration() {
        let smp = samples(5);
        let s = ordered_sums(|m| Ok(smp[m as usize].clone()), 2, 5, 0.3, 3).unwrap();
        for k in 0..=3 {
            let want = brute_force(&smp, 0.3, k);
            assert!((&s[k] - &want).max_abs() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn rotating_form_matches_dp() {
        let b = CMatrix::from_real_rows(&[vec![0.5, 0.2], vec![0.2, -0.3]]).unwrap();
        let phi: Vec<C64> = vec![C64::from_polar(1.0, 0.3), C64::from_polar(1.0, -0.1)];
        let phi_inv: Vec<C64> = phi.iter().map(|p| p.inv()).collect();
        let (h, n, order) = (0.1, 23u64, 4);
        let dp = ordered_sums(
            |m| {
                let pm: Vec<C64> = phi.iter().map(|p| p.powi(m as i32)).collect();
                let pim: Vec<C64> = pm.iter().map(|p| p.inv()).collect();
                Ok(b.mul_diag_left(&pm).mul_diag_right(&pim))
            },
            2,
            n,
            h,
            order,
        )
        .unwrap();
        let y = rotating_sums(&phi_inv, &b, h, n, order);
        let phin: Vec<C64> = phi.iter().map(|p| p.powi(n as i32)).collect();
        for k in 0..=order {
            let got = y.coeffs[k].mul_diag_left(&phin);
            assert!((&got - &dp[k]).max_abs() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn non_hermitian_sample_named() {
        let bad = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let err = ordered_sums_hermitian(&|_| bad.clone(), 2, 4, 0.1, 2).unwrap_err();
        assert!(matches!(err, ApsError::NotHermitian { .. }));
        assert!(err.to_string().contains("grid point 0"));
    }
}
