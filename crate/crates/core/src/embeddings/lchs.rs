//! Linear combination of Hamiltonian simulations:
//! `T exp(-int A) = int gamma(eta) T exp(-i int (eta A1 + A2)) d eta`
//! for PSD `A1`, with the Cauchy kernel `gamma(eta) = 1 / (pi (1 + eta^2))`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{ApsError, Result};
use crate::operators::audit::require_psd;
use crate::operators::matrix::I;
use crate::operators::oracle::{ordered_exponential, time_ordered_exp, DEFAULT_MAX_STEPS};
use crate::operators::{CMatrix, Generator};
use crate::report::{EvolutionReport, Evolved};

/// Node budget before the quadrature gives up.
pub const MAX_NODES: usize = 1 << 22;

/// Even probability density on the real line.
pub trait LchsKernel: Send + Sync {
    fn name(&self) -> &str;
    fn weight(&self, eta: f64) -> f64;
    /// Mass outside `[-m, m]`.
    fn tail_mass(&self, m: f64) -> f64;
    /// Smallest `m` with tail mass at most `eps`.
    fn cutoff(&self, eps: f64) -> f64;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CauchyKernel;

impl LchsKernel for CauchyKernel {
    fn name(&self) -> &str {
        "cauchy"
    }

    fn weight(&self, eta: f64) -> f64 {
        1.0 / (PI * (1.0 + eta * eta))
    }

    fn tail_mass(&self, m: f64) -> f64 {
        2.0 / PI * (1.0 / m).atan()
    }

    fn cutoff(&self, eps: f64) -> f64 {
        if eps >= 1.0 {
            0.0
        } else {
            1.0 / (PI * eps / 2.0).tan()
        }
    }
}

/// Trapezoid nodes `eta_j = j delta`, `|j| <= J`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LchsQuadrature {
    pub m_cut: f64,
    pub step: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LchsQuadrature {
    /// Rule with total error at most `eps` when `||A1|| t <= x_max`: half from
    /// the truncated tail, half from aliasing.
    pub fn new(kernel: &dyn LchsKernel, eps: f64, x_max: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(ApsError::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
        }
        if !(x_max >= 0.0) || !x_max.is_finite() {
            return Err(ApsError::InvalidParameter(format!("invalid x_max {x_max}")));
        }
        // Aliasing images sit at distance 2 pi / delta - x_max.
        let x_design = x_max.max(2.0);
        let step = 2.0 * PI / (x_design + (4.0 / eps).ln());
        let m_cut = kernel.cutoff(eps / 2.0) + step;
        let half = (m_cut / step).ceil();
        if !half.is_finite() || 2.0 * half + 1.0 > MAX_NODES as f64 {
            return Err(ApsError::QuadratureNotConverged { nodes: MAX_NODES });
        }
        let half = half as i64;
        let nodes: Vec<f64> = (-half..=half).map(|j| j as f64 * step).collect();
        let weights = nodes.iter().map(|&eta| step * kernel.weight(eta)).collect();
        let q = Self { m_cut, step, nodes, weights };
        for x in [0.0, 1.0, 2.0] {
            let err = (q.scalar(x) - (-x).exp()).abs();
            if err > eps {
                return Err(ApsError::QuadratureNotConverged { nodes: q.nodes.len() });
            }
        }
        Ok(q)
    }

    pub fn normalization(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Approximates `e^{-x}` for `x >= 0`.
    pub fn scalar(&self, x: f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&eta, &w)| w * (eta * x).cos()).sum()
    }
}

/// `(eps, M_cut(eps))` for the Cauchy kernel.
pub fn lchs_truncation_probe(eps_list: &[f64]) -> Vec<(f64, f64)> {
    eps_list.iter().map(|&e| (e, CauchyKernel.cutoff(e))).collect()
}

/// LCHS with the Cauchy kernel.
pub fn lchs_evolve(gen: &Generator, t: f64, eps: f64) -> Result<EvolutionReport> {
    lchs_evolve_with(gen, t, eps, &CauchyKernel)
}

/// LCHS with a caller-supplied kernel.
pub fn lchs_evolve_with(gen: &Generator, t: f64, eps: f64, kernel: &dyn LchsKernel) -> Result<EvolutionReport> {
    let start = std::time::Instant::now();
    gen.check_time(t)?;
    require_psd(gen, 129, 1e-8)?;
    let x_max = gen.bounds().a1_max * t;
    let quad = LchsQuadrature::new(kernel, eps, x_max)?;
    let n = gen.dim();
    let mut approx = CMatrix::zeros(n);
    match gen.as_constant() {
        Some(a) => {
            let a1 = a.hermitian_part();
            let a2 = a.anti_hermitian_part();
            for (&eta, &w) in quad.nodes.iter().zip(&quad.weights) {
                let h = &a1.scale_real(eta) + &a2;
                let u = h.hermitian_eigen().apply(|x| C64::from_polar(1.0, -x * t));
                approx.axpy(C64::new(w, 0.0), &u);
            }
        }
        None => {
            let inner = eps / 10.0;
            let bps = gen.breakpoints();
            for (&eta, &w) in quad.nodes.iter().zip(&quad.weights) {
                let u = ordered_exponential(
                    |s| (&gen.hermitian_at(s).scale_real(eta) + &gen.anti_hermitian_at(s)).scale(I),
                    &bps,
                    0.0,
                    t,
                    inner,
                    DEFAULT_MAX_STEPS,
                )?
                .propagator;
                approx.axpy(C64::new(w, 0.0), &u);
            }
        }
    }
    let reference = time_ordered_exp(gen, t, eps / 100.0)?.propagator;
    let mut r = EvolutionReport::new("lchs", Evolved::Matrix(approx), Evolved::Matrix(reference), Some(eps));
    r.notes.push(format!("kernel={} m_cut={} nodes={}", kernel.name(), quad.m_cut, quad.nodes.len()));
    r.wall_time = start.elapsed().as_secs_f64();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_inverts_tail_mass() {
        for &e in &[1e-1, 1e-3, 1e-6] {
            let m = CauchyKernel.cutoff(e);
            assert!((CauchyKernel.tail_mass(m) - e).abs() < 1e-12 * e.max(1e-3));
        }
    }

    #[test]
    fn normalization_within_eps() {
        for &e in &[1e-2, 1e-4] {
            let q = LchsQuadrature::new(&CauchyKernel, e, 1.0).unwrap();
            assert!((q.normalization() - 1.0).abs() <= e, "eps {e}");
        }
    }

    #[test]
    fn probe_increases() {
        let p = lchs_truncation_probe(&[1e-2, 1e-4, 1e-6, 1e-8]);
        assert!(p.windows(2).all(|w| w[1].1 > w[0].1));
    }

    #[test]
    fn constant_generator_within_eps() {
        let a = CMatrix::from_rows(&[
            vec![C64::new(1.0, 0.3), C64::new(0.2, 0.1)],
            vec![C64::new(0.2, 0.1), C64::new(0.5, -0.2)],
        ])
        .unwrap();
        let r = lchs_evolve(&Generator::constant(a).unwrap(), 1.0, 1e-3).unwrap();
        assert!(r.within_bound(), "error {}", r.error_2norm);
    }

    #[test]
    fn polynomial_generator_within_eps() {
        let c0 = CMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 0.5]]).unwrap();
        let c1 = CMatrix::from_rows(&[
            vec![C64::new(0.0, 0.2), C64::new(0.1, 0.0)],
            vec![C64::new(0.1, 0.0), C64::new(0.0, -0.1)],
        ])
        .unwrap();
        let g = Generator::polynomial(vec![c0, c1], 0.5).unwrap();
        let r = lchs_evolve(&g, 0.5, 1e-2).unwrap();
        assert!(r.within_bound(), "error {}", r.error_2norm);
    }
}
