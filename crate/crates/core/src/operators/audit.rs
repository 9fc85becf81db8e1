//! Grid audit of cached generator bounds.

use serde::{Deserialize, Serialize};

use super::generator::Generator;
use crate::error::{ApsError, Result};

/// Relative slack before an audited value counts as a violation.
const SLACK: f64 = 1e-10;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditReport {
    pub grid_points: usize,
    pub a_max: f64,
    pub a1_max: f64,
    pub a2_max: f64,
    /// Largest chord slope `||A1(t_{j+1}) - A1(t_j)|| / dt`.
    pub lhat_max: f64,
    pub lambda_min: f64,
    /// Time of the smallest Hermitian eigenvalue.
    pub lambda_min_at: f64,
    /// One entry per cached bound the grid contradicts.
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn is_psd(&self, tol: f64) -> bool {
        self.lambda_min >= -tol
    }
}

/// Samples the generator on `grid_points` uniform points of `[0, T]` (of
/// `[0, 1]` for unbounded constant generators) and compares with the cached
/// bounds.
pub fn audit_bounds(gen: &Generator, grid_points: usize) -> Result<AuditReport> {
    if grid_points < 2 {
        return Err(ApsError::InvalidParameter("audit needs at least two grid points".into()));
    }
    let horizon = if gen.horizon().is_finite() { gen.horizon() } else { 1.0 };
    let dt = horizon / (grid_points - 1) as f64;
    let mut r = AuditReport {
        grid_points,
        a_max: 0.0,
        a1_max: 0.0,
        a2_max: 0.0,
        lhat_max: 0.0,
        lambda_min: f64::INFINITY,
        lambda_min_at: 0.0,
        violations: Vec::new(),
    };
    let mut prev_a1 = None;
    for j in 0..grid_points {
        let t = (j as f64 * dt).min(horizon);
        let a = gen.at(t);
        let a1 = gen.hermitian_at(t);
        let a2 = gen.anti_hermitian_at(t);
        r.a_max = r.a_max.max(a.spectral_norm());
        r.a1_max = r.a1_max.max(a1.spectral_norm());
        r.a2_max = r.a2_max.max(a2.spectral_norm());
        let lmin = a1.hermitian_eigen().min();
        if lmin < r.lambda_min {
            r.lambda_min = lmin;
            r.lambda_min_at = t;
        }
        if let Some(p) = prev_a1.as_ref() {
            r.lhat_max = r.lhat_max.max((&a1 - p).spectral_norm() / dt);
        }
        prev_a1 = Some(a1);
    }

    let b = gen.bounds();
    let exceeds = |audited: f64, cached: f64| audited > cached * (1.0 + SLACK) + SLACK;
    for (name, audited, cached) in [
        ("a_max", r.a_max, b.a_max),
        ("a1_max", r.a1_max, b.a1_max),
        ("a2_max", r.a2_max, b.a2_max),
    ] {
        if exceeds(audited, cached) {
            r.violations.push(format!("{name}: audited {audited:.6e} > cached {cached:.6e}"));
        }
    }
    if b.lhat_applicable && exceeds(r.lhat_max, b.lhat_max) {
        r.violations.push(format!("lhat_max: audited {:.6e} > cached {:.6e}", r.lhat_max, b.lhat_max));
    }
    if r.lambda_min < b.lambda_min - SLACK * (1.0 + b.lambda_min.abs()) {
        r.violations.push(format!(
            "lambda_min: audited {:.6e} < cached {:.6e}",
            r.lambda_min, b.lambda_min
        ));
    }
    Ok(r)
}

/// Errors unless `A1` is PSD (to `tol`) on the audit grid.
pub fn require_psd(gen: &Generator, grid_points: usize, tol: f64) -> Result<AuditReport> {
    let r = audit_bounds(gen, grid_points)?;
    if !r.is_psd(tol) {
        return Err(ApsError::NotPsd { at: format!("t = {}", r.lambda_min_at), min_eigenvalue: r.lambda_min });
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::matrix::CMatrix;

    #[test]
    fn audit_agrees_with_constant_bounds() {
        let a = CMatrix::from_real_rows(&[vec![2.0, 1.0], vec![-1.0, 0.5]]).unwrap();
        let g = Generator::constant(a).unwrap();
        let r = audit_bounds(&g, 5).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert!((r.a_max - g.bounds().a_max).abs() < 1e-14);
        assert_eq!(r.lhat_max, 0.0);
    }

    #[test]
    fn polynomial_bounds_hold_on_grid() {
        let c0 = CMatrix::from_real_diag(&[1.0, 3.0]);
        let c1 = CMatrix::from_real_rows(&[vec![0.0, 2.0], vec![2.0, -1.0]]).unwrap();
        let g = Generator::polynomial(vec![c0, c1], 1.0).unwrap();
        let r = audit_bounds(&g, 101).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert!(r.lhat_max <= g.bounds().lhat_max + 1e-12);
    }

    #[test]
    fn indefinite_part_is_reported() {
        let g = Generator::constant(CMatrix::from_real_diag(&[-0.5, 1.0])).unwrap();
        assert!(matches!(require_psd(&g, 3, 1e-8), Err(ApsError::NotPsd { .. })));
    }
}
