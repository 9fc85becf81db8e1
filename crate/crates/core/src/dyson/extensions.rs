//! Indefinite Hermitian parts and inhomogeneous forcing.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::phase::{approximate_exp_at_phase, phase_series_terms, refine, SeriesOptions, PSD_TOL};
use super::plan::plan_series;
use crate::error::{ApsError, Result};
use crate::operators::{cartesian_split, commutator, expm, CMatrix, Generator, GeneratorKind};
use crate::report::{EvolutionReport, Evolved};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IllPosedOptions {
    pub series: SeriesOptions,
    /// Largest admissible `|lambda_min| t`.
    pub c_ill: f64,
}

impl Default for IllPosedOptions {
    fn default() -> Self {
        Self { series: SeriesOptions::default(), c_ill: 4.0 }
    }
}

/// Output of [`ill_posed_variant`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IllPosedReport {
    pub report: EvolutionReport,
    pub lambda_min: f64,
    /// `sum_k ||Q_k||`; at most `e^{|lambda_min| t}`.
    pub series_one_norm: f64,
}

/// Approximates `e^{-A t}` when `A1` has a negative eigenvalue `lambda`.
///
/// The shift is the midpoint `c = (lambda_max + lambda) / 2` of the spectrum
/// of `A1`, so the sampled operator has norm at most `(lambda_max - lambda) / 2`. The error target grows
/// to `eps e^{|lambda| t}`.
pub fn ill_posed_variant(a: &CMatrix, t: f64, eps: f64, opts: &IllPosedOptions) -> Result<IllPosedReport> {
    let start = std::time::Instant::now();
    a.ensure_finite("generator")?;
    let (a1, a2) = cartesian_split(a);
    let eig = a1.hermitian_eigen();
    let lambda = eig.min();
    if lambda >= -PSD_TOL {
        let report = approximate_exp_at_phase(a, t, eps, &opts.series)?;
        let plan = report.plan.clone().expect("phase runs carry a plan");
        let one_norm = phase_series_terms(a, &plan).iter().map(CMatrix::spectral_norm).sum();
        return Ok(IllPosedReport { report, lambda_min: lambda, series_one_norm: one_norm });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(ApsError::InvalidParameter(format!("time must be non-negative and finite, got {t}")));
    }
    let product = lambda.abs() * t;
    if product > opts.c_ill {
        return Err(ApsError::HorizonExceeded { product, limit: opts.c_ill });
    }
    let top = eig.max();
    let shift = 0.5 * (top + lambda);
    let spread = 0.5 * (top - lambda);
    let growth = product.exp();
    let lhat = commutator(&a1, &a2).spectral_norm();
    let mut plan = plan_series(spread, lhat, t, eps, opts.series.mode)?;
    plan.shift = shift;
    plan.tau = shift * t;
    let (approx, plan) = refine(&plan, t, eps * growth / 4.0, opts.series.max_grid, |p| {
        Ok(super::phase::alternating_sum(&phase_series_terms(a, p)))
    })?;
    let one_norm = phase_series_terms(a, &plan).iter().map(CMatrix::spectral_norm).sum();
    let reference = expm(&a.scale_real(-t))?;
    let mut report = EvolutionReport::new(
        "phase-aps-dyson-ill-posed",
        Evolved::Matrix(approx),
        Evolved::Matrix(reference),
        Some(eps * growth),
    )
    .with_plan(plan);
    report.wall_time = start.elapsed().as_secs_f64();
    Ok(IllPosedReport { report, lambda_min: lambda, series_one_norm: one_norm })
}

/// Source term `b(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Forcing {
    Constant {
        #[serde(with = "crate::operators::matrix::cvec_serde")]
        values: Vec<C64>,
    },
    /// `b(t) = sum_k coefficients[k] t^k`
    Polynomial { coefficients: Vec<Vec<[f64; 2]>> },
}

impl Forcing {
    fn coefficient_vectors(&self) -> Vec<Vec<C64>> {
        match self {
            Forcing::Constant { values } => vec![values.clone()],
            Forcing::Polynomial { coefficients } => coefficients
                .iter()
                .map(|c| c.iter().map(|&[re, im]| C64::new(re, im)).collect())
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coefficient_vectors().first().map(Vec::len).unwrap_or(0)
    }

    pub fn at(&self, t: f64) -> Vec<C64> {
        let cs = self.coefficient_vectors();
        let mut acc = vec![C64::new(0.0, 0.0); cs[0].len()];
        for c in cs.iter().rev() {
            for (a, &x) in acc.iter_mut().zip(c) {
                *a = *a * t + x;
            }
        }
        acc
    }

    /// `sup_{[0, T]} max_i |b_i|` bounded by the triangle inequality.
    pub fn sup_bound(&self, horizon: f64) -> f64 {
        self.coefficient_vectors()
            .iter()
            .enumerate()
            .map(|(k, c)| c.iter().map(|z| z.norm()).fold(0.0, f64::max) * horizon.powi(k as i32))
            .sum()
    }
}

/// Homogeneous system equivalent to `du/dt = -A u + b` on `[0, t]`.
#[derive(Clone, Debug)]
pub struct ExpandedSystem {
    /// `[[A, -diag(b)/K], [0, 0]]`
    pub generator: Generator,
    /// `[u0; K 1]`
    pub initial: Vec<C64>,
    pub scale_k: f64,
}

impl ExpandedSystem {
    /// First half of an expanded state.
    pub fn readout(&self, state: &[C64]) -> Vec<C64> {
        state[..state.len() / 2].to_vec()
    }
}

fn expanded(a: &CMatrix, b: &[C64], k: f64) -> CMatrix {
    let n = a.dim();
    let mut m = CMatrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = a[(i, j)];
        }
        m[(i, n + i)] = -b[i] / k;
    }
    m
}

/// Doubles the dimension so the source becomes part of the generator. The
/// auxiliary block holds the constant `K = t sup max_i |b_i|`.
pub fn inhomogeneous_expand(gen: &Generator, forcing: &Forcing, u0: &[C64], t: f64) -> Result<ExpandedSystem> {
    let n = gen.dim();
    if forcing.dim() != n {
        return Err(ApsError::DimensionMismatch { expected: n, found: forcing.dim() });
    }
    if u0.len() != n {
        return Err(ApsError::DimensionMismatch { expected: n, found: u0.len() });
    }
    gen.check_time(t)?;
    let mut k = t * forcing.sup_bound(t);
    if !(k > 0.0) || !k.is_finite() {
        log::warn!("forcing vanishes on [0, {t}]; using K = 1");
        k = 1.0;
    }
    let bs = forcing.coefficient_vectors();
    let zero_b = vec![C64::new(0.0, 0.0); n];
    let generator = match gen.kind() {
        GeneratorKind::Constant(a) if bs.len() == 1 => {
            Generator::constant_with_horizon(expanded(a, &bs[0], k), gen.horizon())?
        }
        GeneratorKind::Piecewise { breakpoints, pieces } if bs.len() == 1 => {
            Generator::piecewise(breakpoints.clone(), pieces.iter().map(|p| expanded(p, &bs[0], k)).collect())?
        }
        GeneratorKind::Piecewise { .. } => {
            return Err(ApsError::Unsupported("piecewise generators take constant forcing only".into()))
        }
        kind => {
            let acoef: Vec<CMatrix> = match kind {
                GeneratorKind::Constant(a) => vec![a.clone()],
                GeneratorKind::Polynomial { coefficients } => coefficients.clone(),
                GeneratorKind::Piecewise { .. } => unreachable!(),
            };
            let horizon = if gen.horizon().is_finite() { gen.horizon() } else { t.max(f64::MIN_POSITIVE) };
            let degree = acoef.len().max(bs.len());
            let coefficients = (0..degree)
                .map(|d| {
                    let a = acoef.get(d).cloned().unwrap_or_else(|| CMatrix::zeros(n));
                    expanded(&a, bs.get(d).unwrap_or(&zero_b), k)
                })
                .collect();
            Generator::polynomial(coefficients, horizon)?
        }
    };
    let mut initial = u0.to_vec();
    initial.extend(std::iter::repeat_n(C64::new(k, 0.0), n));
    Ok(ExpandedSystem { generator, initial, scale_k: k })
}
