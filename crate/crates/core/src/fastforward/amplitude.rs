//! Amplitude-driven composite for constant `A = A1 + i A2`.
//!
//! Per segment of length `t'`, `e^{-A t'} = U_a(t') T exp(-i int A_a)` with
//! `A_a(s) = e^{A1 s} A2 e^{-A1 s}`. In the eigenbasis of `A1` the unitary
//! series is a rotating sum with step factor `e^{-D h}`, which supplies the
//! `U_a` blocks; those are evaluated by the Gaussian fast-forward rule.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::gaussian::{psd_eigen, GaussianQuadrature};
use crate::dyson::ordered_sum::rotating_sums;
use crate::dyson::phase::refine;
use crate::dyson::plan::{plan_unitary_segments, PlanMode, SeriesPlan};
use crate::error::{ApsError, Result};
use crate::operators::{cartesian_split, expm, CMatrix};
use crate::report::{EvolutionReport, Evolved};

/// Target `tau_2` per segment, inside the `ln 2` limit with headroom.
pub const SEGMENT_TAU: f64 = 0.5 * std::f64::consts::LN_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockEvaluation {
    /// `e^{-lambda h}` by Gaussian quadrature.
    GaussianFf,
    /// `e^{-lambda h}` directly.
    Exact,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AmplitudeOptions {
    pub mode: PlanMode,
    pub max_grid: u64,
    /// Segment count; defaults to `max(1, ceil(A2_max t / (ln 2 / 2)))`.
    pub segments: Option<u64>,
    pub blocks: BlockEvaluation,
    /// Accuracy of each quadrature-evaluated block.
    pub block_eps: f64,
}

impl Default for AmplitudeOptions {
    fn default() -> Self {
        Self {
            mode: PlanMode::Adaptive,
            max_grid: 1 << 40,
            segments: None,
            blocks: BlockEvaluation::GaussianFf,
            block_eps: 1e-15,
        }
    }
}

/// One segment `V G^N(-i) V^dagger` at a fixed plan.
fn segment(a1_eig: &crate::operators::HermitianEigen, b: &CMatrix, plan: &SeriesPlan, opts: &AmplitudeOptions) -> Result<CMatrix> {
    let h = plan.h;
    let phi_inv: Vec<C64> = match opts.blocks {
        BlockEvaluation::Exact => a1_eig.values.iter().map(|&d| C64::new((-d * h).exp(), 0.0)).collect(),
        BlockEvaluation::GaussianFf => {
            let quad = GaussianQuadrature::new(opts.block_eps, (a1_eig.max() * h).sqrt())?;
            a1_eig.values.iter().map(|&d| C64::new(quad.eval((d * h).sqrt()), 0.0)).collect()
        }
    };
    let y = rotating_sums(&phi_inv, b, h, plan.n_m, plan.m);
    Ok(a1_eig.from_eigenbasis(&y.eval(C64::new(0.0, -1.0))))
}

fn power(m: &CMatrix, mut n: u64) -> CMatrix {
    let mut acc = CMatrix::identity(m.dim());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            acc = acc.matmul(&base);
        }
        n >>= 1;
        if n > 0 {
            base = base.matmul(&base);
        }
    }
    acc
}

/// Composite approximation at a fixed plan: the segment raised to `n_t`.
pub fn amplitude_composite(a: &CMatrix, plan: &SeriesPlan, opts: &AmplitudeOptions) -> Result<CMatrix> {
    let (a1, a2) = cartesian_split(a);
    let eig = psd_eigen(&a1, "Hermitian part")?;
    let b = eig.to_eigenbasis(&a2);
    Ok(power(&segment(&eig, &b, plan, opts)?, plan.n_t))
}

/// Approximates `e^{-A t}` for constant `A` with PSD Hermitian part.
pub fn approximate_exp_at_amplitude(a: &CMatrix, t: f64, eps: f64, opts: &AmplitudeOptions) -> Result<EvolutionReport> {
    let start = std::time::Instant::now();
    if !(t >= 0.0) || !t.is_finite() {
        return Err(ApsError::InvalidParameter(format!("time must be non-negative and finite, got {t}")));
    }
    a.ensure_finite("generator")?;
    let (a1, a2) = cartesian_split(a);
    let eig = psd_eigen(&a1, "Hermitian part")?;
    let b = eig.to_eigenbasis(&a2);
    let a1_max = eig.max();
    let a2_max = a2.spectral_norm();
    let n_t = opts.segments.unwrap_or_else(|| (a2_max * t / SEGMENT_TAU).ceil().max(1.0) as u64);
    let plan = plan_unitary_segments(a1_max, a2_max, t, eps, n_t, opts.mode)?;
    let seg_t = t / n_t as f64;
    let (approx, plan) = refine(&plan, seg_t, eps / 4.0, opts.max_grid, |p| {
        Ok(power(&segment(&eig, &b, p, opts)?, p.n_t))
    })?;
    let reference = expm(&a.scale_real(-t))?;
    let mut r = EvolutionReport::new("amp-aps-ff", Evolved::Matrix(approx), Evolved::Matrix(reference), Some(eps))
        .with_plan(plan);
    r.wall_time = start.elapsed().as_secs_f64();
    Ok(r)
}
