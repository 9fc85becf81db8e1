//! Truncation order and grid size for the shifted Dyson series.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{ApsError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanMode {
    /// Grid size from the a-priori discretization bound.
    Bound,
    /// Grid doubled from 64 until successive results agree to `eps / 4`.
    Adaptive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanConstant {
    pub name: String,
    pub value: f64,
    /// "stated" for the published explicit constants, "chosen" for ours.
    pub origin: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPlan {
    pub epsilon: f64,
    /// Series parameter: `L_max t` for the shifted series.
    pub tau: f64,
    /// Truncation order used.
    pub m: usize,
    /// Truncation order from the closed-form rule alone.
    pub m_formula: usize,
    /// Grid size used.
    pub n_m: u64,
    /// A-priori grid size; `None` when the derivative bound is unavailable.
    pub n_m_bound: Option<u64>,
    pub h: f64,
    /// Diagonal shift subtracted from the sampled operator.
    pub shift: f64,
    pub mode: PlanMode,
    /// Segments composed in series (1 for a single series).
    pub n_t: u64,
    pub constants: Vec<PlanConstant>,
}

impl SeriesPlan {
    pub fn with_grid(&self, n: u64, t: f64) -> SeriesPlan {
        let mut p = self.clone();
        p.n_m = n;
        p.h = if n == 0 { 0.0 } else { t / n as f64 };
        p
    }

    /// `e^{-tau} sum_k C(N, k) h^k L^k`, which dominates the norm of every
    /// partial sum of the discretized shifted series.
    pub fn weight(&self, l_max: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=self.m.min(self.n_m as usize) {
            term *= (self.n_m as f64 - k as f64 + 1.0) / k as f64 * self.h * l_max;
            sum += term;
        }
        (-self.tau).exp() * sum
    }
}

fn stated(name: &str, value: f64) -> PlanConstant {
    PlanConstant { name: name.into(), value, origin: "stated".into() }
}

fn chosen(name: &str, value: f64) -> PlanConstant {
    PlanConstant { name: name.into(), value, origin: "chosen".into() }
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// `sum_{k > m} lambda^k / k!` scaled by `e^{-lambda}` when `poisson`.
fn tail(lambda: f64, m: usize, poisson: bool) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let offset = if poisson { -lambda } else { 0.0 };
    let k0 = m + 1;
    let mut term = (offset + k0 as f64 * lambda.ln() - ln_factorial(k0)).exp();
    let mut sum = 0.0;
    let mut k = k0;
    loop {
        sum += term;
        k += 1;
        term *= lambda / k as f64;
        if (k as f64 > lambda && term < sum * 1e-17) || term == 0.0 || k > k0 + 100_000 {
            break;
        }
    }
    sum
}

/// Poisson upper tail `e^{-lambda} sum_{k > m} lambda^k / k!`.
pub fn poisson_tail(lambda: f64, m: usize) -> f64 {
    tail(lambda, m, true)
}

/// Exponential-series tail `sum_{k > m} lambda^k / k!`.
pub fn exp_tail(lambda: f64, m: usize) -> f64 {
    tail(lambda, m, false)
}

pub(crate) fn lnln(eps: f64) -> f64 {
    // Floor at 1 keeps the rule finite for eps near 1.
    (1.0 / eps).ln().ln().max(1.0)
}

/// `(formula, used)` truncation orders for the shifted series at `tau`.
/// `used` also guarantees a Poisson tail of at most `eps / 2`.
pub fn shifted_truncation_order(tau: f64, eps: f64) -> (usize, usize) {
    if tau == 0.0 {
        return (0, 0);
    }
    let l = (1.0 / eps).ln();
    let formula = if tau >= l / (E + 1.0) {
        ((E * E * tau).ceil()).max(l.ceil()) as usize
    } else {
        ((2.0 * tau).ceil()).max((2.0 * l / lnln(eps)).ceil()) as usize
    };
    let mut m = 0;
    while poisson_tail(tau, m) > eps / 2.0 {
        m += 1;
    }
    (formula, formula.max(m))
}

/// `(formula, used)` truncation orders for the unshifted unitary series with
/// parameter `tau` at per-segment tolerance `eps`.
pub fn unitary_truncation_order(tau: f64, eps: f64) -> (usize, usize) {
    if tau == 0.0 {
        return (0, 0);
    }
    let l = (1.0 / eps).ln();
    let formula = ((2.0 * tau).ceil()).max((2.0 * l / (1.0 + lnln(eps))).ceil()) as usize;
    let mut m = 0;
    while exp_tail(tau, m) > eps / 2.0 {
        m += 1;
    }
    (formula, formula.max(m))
}

fn check_inputs(l_max: f64, t: f64, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ApsError::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(ApsError::InvalidParameter(format!("time must be non-negative and finite, got {t}")));
    }
    if !(l_max >= 0.0) || !l_max.is_finite() {
        return Err(ApsError::InvalidParameter(format!("L_max must be non-negative and finite, got {l_max}")));
    }
    Ok(())
}

/// Initial grid of adaptive mode.
pub const ADAPTIVE_START: u64 = 64;

fn bound_grid(m: usize, weight: f64, eps: f64) -> Option<u64> {
    let n = (m as f64 * weight / eps).ceil();
    (n.is_finite() && n < 9.0e18).then(|| (n as u64).max(1))
}

/// Plan for `e^{-tau} sum_k (-1)^k Q_k` with `tau = l_max t`.
///
/// `lhat_max` bounds `||dL/dt||`; pass infinity when it does not exist, which
/// forces adaptive mode.
pub fn plan_series(l_max: f64, lhat_max: f64, t: f64, eps: f64, mode: PlanMode) -> Result<SeriesPlan> {
    check_inputs(l_max, t, eps)?;
    let tau = l_max * t;
    let (m_formula, m) = shifted_truncation_order(tau, eps);
    let n_m_bound = if lhat_max.is_finite() {
        bound_grid(m, lhat_max * t + l_max * (tau + 1.0), eps)
    } else {
        None
    };
    let mode = if n_m_bound.is_none() { PlanMode::Adaptive } else { mode };
    let n_m = if tau == 0.0 {
        1
    } else {
        match mode {
            PlanMode::Bound => n_m_bound.expect("bound mode has a bound"),
            PlanMode::Adaptive => ADAPTIVE_START,
        }
    };
    Ok(SeriesPlan {
        epsilon: eps,
        tau,
        m,
        m_formula,
        n_m,
        n_m_bound,
        h: t / n_m as f64,
        shift: l_max,
        mode,
        n_t: 1,
        constants: vec![
            stated("order_large_tau_factor", E * E),
            stated("order_small_tau_factor", 2.0),
            chosen("tail_fraction_of_eps", 0.5),
            chosen("adaptive_start_grid", ADAPTIVE_START as f64),
            chosen("adaptive_stop_fraction_of_eps", 0.25),
        ],
    })
}

/// Plan for the unitary series of one of `n_t` segments of length `t / n_t`,
/// `tau = a2_max t / n_t`, per-segment tolerance `eps / n_t`.
pub fn plan_unitary_segments(
    a1_max: f64,
    a2_max: f64,
    t: f64,
    eps: f64,
    n_t: u64,
    mode: PlanMode,
) -> Result<SeriesPlan> {
    check_inputs(a2_max, t, eps)?;
    if n_t == 0 {
        return Err(ApsError::InvalidParameter("segment count must be positive".into()));
    }
    let seg_t = t / n_t as f64;
    let seg_eps = eps / n_t as f64;
    let tau = a2_max * seg_t;
    let (m_formula, m) = unitary_truncation_order(tau, seg_eps);
    let n_m_bound = bound_grid(m, tau.exp() * (a1_max * a2_max * seg_t + a2_max * (tau + 1.0)), seg_eps);
    let n_m = if tau == 0.0 {
        1
    } else {
        match mode {
            PlanMode::Bound => n_m_bound.unwrap_or(u64::MAX),
            PlanMode::Adaptive => ADAPTIVE_START,
        }
    };
    Ok(SeriesPlan {
        epsilon: eps,
        tau,
        m,
        m_formula,
        n_m,
        n_m_bound,
        h: seg_t / n_m as f64,
        shift: 0.0,
        mode,
        n_t,
        constants: vec![
            stated("order_small_tau_factor", 2.0),
            chosen("tail_fraction_of_eps", 0.5),
            chosen("adaptive_start_grid", ADAPTIVE_START as f64),
            chosen("adaptive_stop_fraction_of_eps", 0.25),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_orders() {
        assert_eq!(shifted_truncation_order(1.0, 1e-6).1, 11);
        assert_eq!(shifted_truncation_order(10.0, 1e-6).1, 74);
        assert_eq!(shifted_truncation_order(0.0, 1e-6), (0, 0));
    }

    #[test]
    fn tail_safeguard_raises_formula_when_needed() {
        let (formula, used) = shifted_truncation_order(3.7, 1e-6);
        assert!(used > formula);
        assert!(poisson_tail(3.7, used) <= 0.5e-6);
    }

    #[test]
    fn poisson_tail_small_cases() {
        // e^{-1} sum_{k>1} 1/k! = 1 - 2/e.
        assert!((poisson_tail(1.0, 1) - (1.0 - 2.0 / E)).abs() < 1e-15);
        assert!((exp_tail(1.0, 0) - (E - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn zero_time_plan() {
        let p = plan_series(2.0, 1.0, 0.0, 1e-6, PlanMode::Bound).unwrap();
        assert_eq!(p.m, 0);
        assert_eq!(p.n_m, 1);
    }

    #[test]
    fn infinite_derivative_forces_adaptive() {
        let p = plan_series(1.0, f64::INFINITY, 1.0, 1e-4, PlanMode::Bound).unwrap();
        assert_eq!(p.mode, PlanMode::Adaptive);
        assert!(p.n_m_bound.is_none());
    }

    #[test]
    fn bad_epsilon_rejected() {
        assert!(plan_series(1.0, 0.0, 1.0, 0.0, PlanMode::Bound).is_err());
        assert!(plan_series(1.0, 0.0, 1.0, 1.5, PlanMode::Bound).is_err());
        assert!(plan_series(1.0, 0.0, -1.0, 0.1, PlanMode::Bound).is_err());
    }
}
