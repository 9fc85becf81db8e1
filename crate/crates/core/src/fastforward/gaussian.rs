//! `e^{-L t} = (1 / (2 sqrt(pi))) int e^{-eta^2 / 4} e^{-i eta sqrt(L t)} d eta`
//! for Hermitian PSD `L`, by truncated trapezoid quadrature.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{ApsError, Result};
use crate::operators::{expm, CMatrix};
use crate::report::{EvolutionReport, Evolved};

/// Asymmetry tolerated in a Hermitian input, relative to its largest entry.
const HERMITIAN_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted as PSD.
const PSD_TOL: f64 = 1e-8;

/// Symmetric trapezoid rule on `[-M, M]` for the Gaussian weight.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaussianQuadrature {
    pub m_cut: f64,
    pub step: f64,
    pub nodes: Vec<f64>,
    /// Include the `1 / (2 sqrt(pi))` prefactor and the Gaussian.
    pub weights: Vec<f64>,
}

/// `M = 2 sqrt(ln(1 / eps))`: the Gaussian mass beyond it is at most `eps`.
pub fn gaussian_cutoff(eps: f64) -> f64 {
    2.0 * (1.0 / eps).ln().sqrt()
}

impl GaussianQuadrature {
    /// Rule accurate to `eps` for frequencies `x` in `[0, max_frequency]`.
    pub fn new(eps: f64, max_frequency: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(ApsError::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
        }
        if !(max_frequency >= 0.0) || !max_frequency.is_finite() {
            return Err(ApsError::InvalidParameter(format!("invalid frequency bound {max_frequency}")));
        }
        let m_cut = gaussian_cutoff(eps);
        let mut step_cap = 0.5;
        if max_frequency > 0.0 {
            step_cap = f64::min(step_cap, PI / (4.0 * max_frequency));
        }
        let intervals = (2.0 * m_cut / step_cap).ceil().max(2.0) as usize;
        let step = 2.0 * m_cut / intervals as f64;
        let pre = 1.0 / (2.0 * PI.sqrt());
        let mut nodes = Vec::with_capacity(intervals + 1);
        let mut weights = Vec::with_capacity(intervals + 1);
        for j in 0..=intervals {
            let eta = -m_cut + j as f64 * step;
            let end = if j == 0 || j == intervals { 0.5 } else { 1.0 };
            nodes.push(eta);
            weights.push(end * step * pre * (-eta * eta / 4.0).exp());
        }
        Ok(Self { m_cut, step, nodes, weights })
    }

    /// Quadrature of the weight alone; ideally 1.
    pub fn normalization(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Approximates `e^{-x^2}`. The rule is symmetric, so the sum is real.
    pub fn eval(&self, x: f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&eta, &w)| w * (eta * x).cos()).sum()
    }
}

/// Eigenvalues of a Hermitian PSD input, clamped at zero.
pub(crate) fn psd_eigen(l: &CMatrix, what: &str) -> Result<crate::operators::HermitianEigen> {
    l.ensure_finite(what)?;
    let asym = l.asymmetry();
    if asym > HERMITIAN_TOL * l.max_abs().max(1.0) {
        return Err(ApsError::NotHermitian { at: what.to_string(), asymmetry: asym });
    }
    let mut eig = l.hermitian_eigen();
    if eig.min() < -PSD_TOL {
        return Err(ApsError::NotPsd { at: what.to_string(), min_eigenvalue: eig.min() });
    }
    for v in eig.values.iter_mut() {
        *v = v.max(0.0);
    }
    Ok(eig)
}

/// Approximates `e^{-L t}` for Hermitian PSD `L`.
pub fn gaussian_ff(l: &CMatrix, t: f64, eps: f64) -> Result<EvolutionReport> {
    let start = std::time::Instant::now();
    if !(t >= 0.0) || !t.is_finite() {
        return Err(ApsError::InvalidParameter(format!("time must be non-negative and finite, got {t}")));
    }
    let eig = psd_eigen(l, "fast-forward input")?;
    let quad = GaussianQuadrature::new(eps, (eig.max() * t).sqrt())?;
    let approx = eig.apply(|lam| C64::new(quad.eval((lam * t).sqrt()), 0.0));
    let reference = expm(&l.scale_real(-t))?;
    let mut r = EvolutionReport::new("gaussian-ff", Evolved::Matrix(approx), Evolved::Matrix(reference), Some(eps));
    r.notes.push(format!("m_cut={} nodes={}", quad.m_cut, quad.nodes.len()));
    r.wall_time = start.elapsed().as_secs_f64();
    Ok(r)
}
