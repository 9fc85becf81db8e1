//! Reference time-ordered exponentials.
//!
//! Midpoint product with step halving. Each factor is an exact matrix
//! exponential, so piecewise-constant generators split at their breakpoints
//! are integrated exactly; smooth ones are extrapolated across levels.

use serde::{Deserialize, Serialize};

use super::expm::expm_taylor;
use super::generator::Generator;
use super::matrix::CMatrix;
use crate::error::{ApsError, Result};

pub const DEFAULT_MAX_STEPS: usize = 1 << 20;

/// Extrapolation depth; the last column cancels errors through `h^10`.
const MAX_COLUMNS: usize = 6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrderedExp {
    pub propagator: CMatrix,
    /// Spectral norm of the last refinement change.
    pub defect: f64,
    /// Midpoint factors per smooth segment at the accepted level.
    pub steps: usize,
}

/// `T exp(-int_a^b F(s) ds)` with later times to the left.
///
/// Refinement stops once two successive extrapolated levels differ by less
/// than `tol / 10`.
/// `breakpoints` lists discontinuities of `F`; those inside `(a, b)` split the
/// interval so no factor straddles a jump.
pub fn ordered_exponential<F>(
    f: F,
    breakpoints: &[f64],
    a: f64,
    b: f64,
    tol: f64,
    max_steps: usize,
) -> Result<OrderedExp>
where
    F: Fn(f64) -> CMatrix,
{
    if !(tol > 0.0) {
        return Err(ApsError::InvalidParameter(format!("oracle tolerance must be positive, got {tol}")));
    }
    if !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(ApsError::InvalidParameter(format!("invalid interval [{a}, {b}]")));
    }
    let n = f(a).dim();
    if b == a {
        return Ok(OrderedExp { propagator: CMatrix::identity(n), defect: 0.0, steps: 0 });
    }
    let product = |steps: usize| midpoint_product(&f, breakpoints, a, b, steps);

    // The midpoint product is symmetric, so its error expands in even powers
    // of the step and Romberg extrapolation across halvings applies.
    let mut steps = 1;
    let mut row = vec![product(steps)?];
    loop {
        let next_steps = steps * 2;
        if next_steps > max_steps {
            let defect = if row.len() > 1 { (&row[row.len() - 1] - &row[row.len() - 2]).spectral_norm() } else { f64::INFINITY };
            return Err(ApsError::OracleNotConverged { defect, steps });
        }
        steps = next_steps;
        let mut next = Vec::with_capacity((row.len() + 1).min(MAX_COLUMNS));
        next.push(product(steps)?);
        let mut factor = 1.0;
        for j in 1..(row.len() + 1).min(MAX_COLUMNS) {
            factor *= 4.0;
            let d = &next[j - 1] - &row[j - 1];
            let r = &next[j - 1] + &d.scale_real(1.0 / (factor - 1.0));
            next.push(r);
        }
        let best = next.len() - 1;
        let defect = (&next[best] - &row[best.min(row.len() - 1)]).spectral_norm();
        if defect < tol / 10.0 {
            return Ok(OrderedExp { propagator: next.swap_remove(best), defect, steps });
        }
        row = next;
    }
}

/// Unextrapolated midpoint product with `steps` factors per smooth segment.
/// Second order in the step on smooth stretches.
pub fn midpoint_product<F>(f: F, breakpoints: &[f64], a: f64, b: f64, steps: usize) -> Result<CMatrix>
where
    F: Fn(f64) -> CMatrix,
{
    let n = f(a).dim();
    let mut edges = vec![a];
    edges.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    edges.push(b);
    let mut p = CMatrix::identity(n);
    for w in edges.windows(2) {
        let h = (w[1] - w[0]) / steps as f64;
        for j in 0..steps {
            let s = w[0] + (j as f64 + 0.5) * h;
            let g = f(s);
            g.ensure_finite("oracle sample")?;
            p = expm_taylor(&g.scale_real(-h)).matmul(&p);
        }
    }
    Ok(p)
}

/// `T exp(-int_0^t A(s) ds)` for a generator.
pub fn time_ordered_exp(gen: &Generator, t: f64, tol: f64) -> Result<OrderedExp> {
    time_ordered_exp_with(gen, t, tol, DEFAULT_MAX_STEPS)
}

pub fn time_ordered_exp_with(gen: &Generator, t: f64, tol: f64, max_steps: usize) -> Result<OrderedExp> {
    gen.check_time(t)?;
    if let Some(a) = gen.as_constant() {
        // Exact in one factor.
        let p = super::expm::expm(&a.scale_real(-t))?;
        return Ok(OrderedExp { propagator: p, defect: 0.0, steps: 1 });
    }
    ordered_exponential(|s| gen.at(s), &gen.breakpoints(), 0.0, t, tol, max_steps)
}
