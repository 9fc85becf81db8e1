//! Phase-driven Dyson evaluation of `T exp(-int A)`.
//!
//! The sampled operator is `A_p(s) - A_max I` with `A_p = U_p^dagger A1 U_p`,
//! which is Hermitian with norm at most `A_max` when `A1` is PSD.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::ordered_sum::{ordered_sums_hermitian, rotating_sums};
use super::plan::{plan_series, PlanMode, SeriesPlan, ADAPTIVE_START};
use crate::error::{ApsError, Result};
use crate::operators::audit::require_psd;
use crate::operators::matrix::I;
use crate::operators::oracle::time_ordered_exp;
use crate::operators::propagator::magnus4_propagate;
use crate::operators::{cartesian_split, commutator, expm, CMatrix, Generator};
use crate::report::{EvolutionReport, Evolved};

/// Smallest Hermitian eigenvalue accepted as PSD.
pub const PSD_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SeriesOptions {
    pub mode: PlanMode,
    /// Adaptive refinement gives up beyond this grid size.
    pub max_grid: u64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { mode: PlanMode::Adaptive, max_grid: 1 << 40 }
    }
}

impl SeriesOptions {
    pub fn bound() -> Self {
        Self { mode: PlanMode::Bound, ..Self::default() }
    }
}

/// Runs `eval` at the plan's grid (bound mode) or doubles the grid until two
/// successive results differ by less than `stop` (adaptive mode). `grid_time`
/// is the time span one grid covers.
pub(crate) fn refine(
    plan: &SeriesPlan,
    grid_time: f64,
    stop: f64,
    max_grid: u64,
    eval: impl Fn(&SeriesPlan) -> Result<CMatrix>,
) -> Result<(CMatrix, SeriesPlan)> {
    if plan.mode == PlanMode::Bound || plan.tau == 0.0 {
        return Ok((eval(plan)?, plan.clone()));
    }
    let mut n = ADAPTIVE_START;
    let mut current = plan.with_grid(n, grid_time);
    let mut prev = eval(&current)?;
    loop {
        n = n.saturating_mul(2);
        if n > max_grid {
            return Err(ApsError::GridNotConverged { change: f64::NAN, grid: current.n_m });
        }
        current = plan.with_grid(n, grid_time);
        let next = eval(&current)?;
        let change = (&next - &prev).spectral_norm();
        if change < stop {
            return Ok((next, current));
        }
        if !change.is_finite() {
            return Err(ApsError::GridNotConverged { change, grid: n });
        }
        prev = next;
    }
}

fn validate(t: f64, eps: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(ApsError::InvalidParameter(format!("time must be non-negative and finite, got {t}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ApsError::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Terms `Q_0..Q_M` of the discretized shifted series for a constant `A`, so
/// that the approximation is `sum_k (-1)^k Q_k`. The sampled operator is
/// `e^{i A2 s} (A1 - shift I) e^{-i A2 s}`; `plan.tau` must equal `shift t`.
pub fn phase_series_terms(a: &CMatrix, plan: &SeriesPlan) -> Vec<CMatrix> {
    let (a1, a2) = cartesian_split(a);
    let eig = a2.hermitian_eigen();
    let b = eig.to_eigenbasis(&a1.shifted(-plan.shift));
    let phi_inv: Vec<C64> = eig.values.iter().map(|&d| C64::from_polar(1.0, -d * plan.h)).collect();
    let y = rotating_sums(&phi_inv, &b, plan.h, plan.n_m, plan.m);
    let pre = (-plan.tau).exp();
    y.coeffs.iter().map(|c| eig.from_eigenbasis(c).scale_real(pre)).collect()
}

/// `sum_k (-1)^k Q_k` at a fixed plan.
pub fn phase_series_constant(a: &CMatrix, plan: &SeriesPlan) -> CMatrix {
    alternating_sum(&phase_series_terms(a, plan))
}

pub(crate) fn alternating_sum(terms: &[CMatrix]) -> CMatrix {
    let mut acc = CMatrix::zeros(terms[0].dim());
    for (k, q) in terms.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc.axpy(C64::new(sign, 0.0), q);
    }
    acc
}

/// Shifted series `e^{-tau} sum_k (-1)^k S_k` for a Hermitian sampler with
/// `||L(s)|| <= l_max`, evaluated at `plan`. Every sample is checked for
/// Hermiticity.
pub fn eval_shifted_series(sampler: &dyn Fn(f64) -> CMatrix, l_max: f64, plan: &SeriesPlan) -> Result<CMatrix> {
    let dim = sampler(0.0).dim();
    let shifted = |s: f64| sampler(s).shifted(-l_max);
    let s = ordered_sums_hermitian(&shifted, dim, plan.n_m, plan.h, plan.m)?;
    Ok(alternating_sum(&s).scale_real((-plan.tau).exp()))
}

/// Approximates `e^{-A t}` for constant `A` with PSD Hermitian part.
pub fn approximate_exp_at_phase(a: &CMatrix, t: f64, eps: f64, opts: &SeriesOptions) -> Result<EvolutionReport> {
    let start = std::time::Instant::now();
    validate(t, eps)?;
    a.ensure_finite("generator")?;
    let (a1, a2) = cartesian_split(a);
    let lmin = a1.hermitian_eigen().min();
    if lmin < -PSD_TOL {
        return Err(ApsError::NotPsd { at: "constant generator".into(), min_eigenvalue: lmin });
    }
    // The sampled operator is a unitary conjugate of A1.
    let l_max = a1.spectral_norm();
    let lhat = commutator(&a1, &a2).spectral_norm();
    let plan = plan_series(l_max, lhat, t, eps, opts.mode)?;
    let (approx, plan) = refine(&plan, t, eps / 4.0, opts.max_grid, |p| Ok(phase_series_constant(a, p)))?;
    let reference = expm(&a.scale_real(-t))?;
    let mut r = EvolutionReport::new("phase-aps-dyson", Evolved::Matrix(approx), Evolved::Matrix(reference), Some(eps))
        .with_plan(plan);
    r.wall_time = start.elapsed().as_secs_f64();
    Ok(r)
}

/// Time-dependent phase series at a fixed plan:
/// `T_k <- U_p(mh, (m+1)h) [T_k + h Ltilde(mh) T_{k-1}]`, result
/// `e^{-tau} sum_k (-1)^k T_k`, where `Ltilde = A1 - shift I` and `T_0` ends
/// as `U_p(t)`.
pub fn phase_series_time_dependent(gen: &Generator, plan: &SeriesPlan) -> Result<CMatrix> {
    let dim = gen.dim();
    let h = plan.h;
    let order = plan.m;
    let constant_step = gen.is_constant().then(|| {
        let eig = gen.anti_hermitian_at(0.0).hermitian_eigen();
        eig.apply(|d| C64::from_polar(1.0, -d * h))
    });
    let breakpoints = gen.breakpoints();
    let phase = |s: f64| gen.anti_hermitian_at(s).scale(I);
    let mut terms = vec![CMatrix::zeros(dim); order + 1];
    terms[0] = CMatrix::identity(dim);
    for m in 0..plan.n_m {
        let s = m as f64 * h;
        let l = gen.hermitian_at(s).shifted(-plan.shift).scale_real(h);
        let live = order.min(m as usize + 1);
        for k in (1..=live).rev() {
            let add = l.matmul(&terms[k - 1]);
            terms[k] += &add;
        }
        let step = match &constant_step {
            Some(u) => u.clone(),
            None => magnus4_propagate(&phase, &breakpoints, s, s + h, h, CMatrix::identity(dim)),
        };
        for term in terms.iter_mut().take(live + 1) {
            *term = step.matmul(term);
        }
    }
    Ok(alternating_sum(&terms).scale_real((-plan.tau).exp()))
}

/// Approximates `T exp(-int_0^t A)` for a generator whose Hermitian part is
/// PSD on the audit grid. The reference is the oracle at `eps / 100`.
pub fn approximate_time_dependent(
    gen: &Generator,
    t: f64,
    eps: f64,
    opts: &SeriesOptions,
) -> Result<EvolutionReport> {
    let start = std::time::Instant::now();
    validate(t, eps)?;
    gen.check_time(t)?;
    require_psd(gen, 257, PSD_TOL)?;
    let b = gen.bounds();
    let lhat = b.lhat_max + 2.0 * b.a1_max * b.a2_max;
    let plan = plan_series(b.a1_max, lhat, t, eps, opts.mode)?;
    let (approx, plan) = refine(&plan, t, eps / 4.0, opts.max_grid, |p| phase_series_time_dependent(gen, p))?;
    let reference = time_ordered_exp(gen, t, eps / 100.0)?.propagator;
    let mut r = EvolutionReport::new(
        "phase-aps-dyson-time-dependent",
        Evolved::Matrix(approx),
        Evolved::Matrix(reference),
        Some(eps),
    )
    .with_plan(plan);
    r.wall_time = start.elapsed().as_secs_f64();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn dissipative() -> CMatrix {
        // A1 = [[1, .2], [.2, .5]] (PSD), A2 = [[.3, .4i], [-.4i, -.1]].
        let a1 = CMatrix::from_real_rows(&[vec![1.0, 0.2], vec![0.2, 0.5]]).unwrap();
        let a2 = CMatrix::from_rows(&[vec![c(0.3, 0.0), c(0.0, 0.4)], vec![c(0.0, -0.4), c(-0.1, 0.0)]]).unwrap();
        &a1 + &a2.scale(I)
    }

    #[test]
    fn scalar_shift_is_exact() {
        // L = lambda: the discretized shifted series is the binomial sum.
        let lam = 0.7;
        let a = CMatrix::from_real_diag(&[lam]);
        let plan = plan_series(lam, 0.0, 1.0, 1e-12, PlanMode::Adaptive).unwrap().with_grid(1, 1.0);
        let plan = SeriesPlan { m: 1, ..plan };
        let v = phase_series_constant(&a, &plan);
        assert!((v[(0, 0)] - c((-lam).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn constant_phase_within_eps() {
        let r = approximate_exp_at_phase(&dissipative(), 1.0, 1e-6, &SeriesOptions::default()).unwrap();
        assert!(r.within_bound(), "error {}", r.error_2norm);
        let p = r.plan.unwrap();
        assert!((p.h * p.n_m as f64 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bound_mode_within_eps() {
        let r = approximate_exp_at_phase(&dissipative(), 0.5, 1e-4, &SeriesOptions::bound()).unwrap();
        assert!(r.within_bound(), "error {}", r.error_2norm);
        assert_eq!(r.plan.as_ref().unwrap().mode, PlanMode::Bound);
    }

    #[test]
    fn zero_time_is_identity() {
        let r = approximate_exp_at_phase(&dissipative(), 0.0, 1e-6, &SeriesOptions::default()).unwrap();
        assert!((r.approx.as_matrix().unwrap() - &CMatrix::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn indefinite_hermitian_part_rejected() {
        let a = CMatrix::from_real_diag(&[-0.5, 1.0]);
        let err = approximate_exp_at_phase(&a, 1.0, 1e-6, &SeriesOptions::default()).unwrap_err();
        assert!(matches!(err, ApsError::NotPsd { .. }));
    }

    #[test]
    fn time_dependent_agrees_with_constant_path() {
        let a = dissipative();
        let gen = Generator::constant(a.clone()).unwrap();
        let plan = plan_series(a.spectral_norm(), 1.0, 1.0, 1e-6, PlanMode::Adaptive)
            .unwrap()
            .with_grid(4096, 1.0);
        let x = phase_series_constant(&a, &plan);
        let y = phase_series_time_dependent(&gen, &plan).unwrap();
        assert!((&x - &y).spectral_norm() < 1e-10);
    }

    #[test]
    fn generic_dp_agrees_with_rotating_form() {
        let a = dissipative();
        let (a1, a2) = cartesian_split(&a);
        let a_max = a.spectral_norm();
        let plan = plan_series(a_max, 1.0, 0.8, 1e-8, PlanMode::Adaptive).unwrap().with_grid(200, 0.8);
        let sampler = |s: f64| {
            let u = expm(&a2.scale(-I * s)).unwrap();
            u.adjoint().matmul(&a1).matmul(&u)
        };
        // The generic evaluator returns the interaction-picture factor only.
        let x = expm(&a2.scale(-I * 0.8)).unwrap().matmul(&eval_shifted_series(&sampler, a_max, &plan).unwrap());
        let y = phase_series_constant(&a, &plan);
        assert!((&x - &y).spectral_norm() < 1e-12, "{}", (&x - &y).spectral_norm());
    }

    #[test]
    fn polynomial_generator_within_eps() {
        let c0 = dissipative();
        let c1 = CMatrix::from_rows(&[vec![c(0.2, 0.1), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.1, -0.2)]]).unwrap();
        let gen = Generator::polynomial(vec![c0, c1], 1.0).unwrap();
        let r = approximate_time_dependent(&gen, 1.0, 1e-5, &SeriesOptions::default()).unwrap();
        assert!(r.within_bound(), "error {}", r.error_2norm);
    }
}
