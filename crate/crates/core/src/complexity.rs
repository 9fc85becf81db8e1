//! Query-count formulas with explicit constants, and a comparison table that
//! sets them beside measured errors of the desk-scale evaluators.
//!
//! With `l = ln(1/eps)` and `ll = max(1, ln l)`:
//!
//! * phase APS: `g (c1 A_max t + c2 l / ll)`
//! * amplitude APS: `g (c3 sqrt(A1_max t l) + c4 A2_max t l / ll)`
//! * LCHS baseline: `g c5 A_max t / eps`
//!
//! where `g = ||u0|| / ||u(t)||`.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dyson::plan::{lnln, plan_series, plan_unitary_segments, PlanMode};
use crate::dyson::{approximate_exp_at_phase, SeriesOptions};
use crate::embeddings::lchs_evolve;
use crate::error::{ApsError, Result};
use crate::fastforward::amplitude::SEGMENT_TAU;
use crate::fastforward::{approximate_exp_at_amplitude, AmplitudeOptions};
use crate::operators::matrix::vec_norm;
use crate::operators::{cartesian_split, commutator, time_ordered_exp, Generator};
use crate::report::EvolutionReport;

/// Constants of the query formulas. All are overridable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormulaConstants {
    /// Linear-in-`tau` factor of the phase count.
    pub c1: f64,
    /// Factor of the additive `l / ll` term of the phase count.
    pub c2: f64,
    /// Square-root factor of the amplitude count.
    pub c3: f64,
    /// Factor of the `A2_max t l / ll` term of the amplitude count.
    pub c4: f64,
    /// Factor of the LCHS baseline.
    pub c5: f64,
}

impl Default for FormulaConstants {
    fn default() -> Self {
        Self {
            c1: E * E,
            c2: 2.0,
            // Node count of the Gaussian rule: 2 M_cut / (pi / (4 sqrt(x))).
            c3: 16.0 / PI,
            // Segments per unit A2_max t times the small-tau order factor.
            c4: 2.0 / SEGMENT_TAU,
            c5: 2.0 / PI,
        }
    }
}

impl FormulaConstants {
    fn labeled(&self, names: &[&str]) -> BTreeMap<String, f64> {
        names
            .iter()
            .map(|&n| {
                let v = match n {
                    "c1" => self.c1,
                    "c2" => self.c2,
                    "c3" => self.c3,
                    "c4" => self.c4,
                    _ => self.c5,
                };
                (n.to_string(), v)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryEstimate {
    pub method: String,
    /// Truncation order of the planned series (0 when none applies).
    #[serde(rename = "M")]
    pub m: usize,
    /// Bound-mode grid size (0 when none applies).
    #[serde(rename = "N_m")]
    pub n_m: u64,
    /// Repetition factor `||u0|| / ||u(t)||`.
    pub g: f64,
    pub queries_total: f64,
    pub constants_used: BTreeMap<String, f64>,
}

fn log_terms(eps: f64) -> (f64, f64) {
    let l = (1.0 / eps).ln();
    (l, l / lnln(eps))
}

fn check(name: &str, v: f64, allow_zero: bool) -> Result<()> {
    let ok = v.is_finite() && if allow_zero { v >= 0.0 } else { v > 0.0 };
    if ok {
        Ok(())
    } else {
        Err(ApsError::InvalidParameter(format!("{name} must be {}finite, got {v}", if allow_zero { "non-negative and " } else { "positive and " })))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(ApsError::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")))
    }
}

/// Phase-APS count with default constants, `||A1|| <= A_max`, and the
/// worst-case commutator bound `2 A_max^2` for the grid size.
pub fn estimate_phase_aps(a_max: f64, t: f64, eps: f64, norm_ratio: f64) -> Result<QueryEstimate> {
    estimate_phase_aps_with(a_max, a_max, 2.0 * a_max * a_max, t, eps, norm_ratio, &FormulaConstants::default())
}

/// Phase-APS count. The query total depends on `a_max`; the plan (`M`,
/// `N_m`) uses the sampled-operator bound `a1_max <= a_max` and `lhat`, a
/// bound on `||[A1, A2]||`, exactly as the evaluator does.
pub fn estimate_phase_aps_with(
    a_max: f64,
    a1_max: f64,
    lhat: f64,
    t: f64,
    eps: f64,
    norm_ratio: f64,
    c: &FormulaConstants,
) -> Result<QueryEstimate> {
    check("A_max", a_max, true)?;
    check("A1_max", a1_max, true)?;
    check("t", t, true)?;
    check("norm_ratio", norm_ratio, false)?;
    check_eps(eps)?;
    let plan = plan_series(a1_max, lhat, t, eps, PlanMode::Bound)?;
    let (_, ratio) = log_terms(eps);
    Ok(QueryEstimate {
        method: "phase-aps-dyson".into(),
        m: plan.m,
        n_m: plan.n_m,
        g: norm_ratio,
        queries_total: norm_ratio * (c.c1 * a_max * t + c.c2 * ratio),
        constants_used: c.labeled(&["c1", "c2"]),
    })
}

/// Amplitude-APS count with default constants.
pub fn estimate_amplitude_aps(a1_max: f64, a2_max: f64, t: f64, eps: f64, norm_ratio: f64) -> Result<QueryEstimate> {
    estimate_amplitude_aps_with(a1_max, a2_max, t, eps, norm_ratio, &FormulaConstants::default())
}

pub fn estimate_amplitude_aps_with(
    a1_max: f64,
    a2_max: f64,
    t: f64,
    eps: f64,
    norm_ratio: f64,
    c: &FormulaConstants,
) -> Result<QueryEstimate> {
    check("A1_max", a1_max, true)?;
    check("A2_max", a2_max, true)?;
    check("t", t, true)?;
    check("norm_ratio", norm_ratio, false)?;
    check_eps(eps)?;
    let n_t = (a2_max * t / SEGMENT_TAU).ceil().max(1.0) as u64;
    let plan = plan_unitary_segments(a1_max, a2_max, t, eps, n_t, PlanMode::Bound)?;
    let (l, ratio) = log_terms(eps);
    Ok(QueryEstimate {
        method: "amp-aps-ff".into(),
        m: plan.m,
        n_m: plan.n_m,
        g: norm_ratio,
        queries_total: norm_ratio * (c.c3 * (a1_max * t * l).sqrt() + c.c4 * a2_max * t * ratio),
        constants_used: c.labeled(&["c3", "c4"]),
    })
}

/// LCHS baseline `g c5 A_max t / eps`.
pub fn estimate_lchs_baseline(a_max: f64, t: f64, eps: f64, norm_ratio: f64, c: &FormulaConstants) -> Result<QueryEstimate> {
    check("A_max", a_max, true)?;
    check("t", t, true)?;
    check("norm_ratio", norm_ratio, false)?;
    check_eps(eps)?;
    Ok(QueryEstimate {
        method: "lchs".into(),
        m: 0,
        n_m: 0,
        g: norm_ratio,
        queries_total: norm_ratio * c.c5 * a_max * t / eps,
        constants_used: c.labeled(&["c5"]),
    })
}

/// `||u0|| / ||u(t)||` from the oracle solution.
pub fn norm_ratio(gen: &Generator, u0: &[C64], t: f64) -> Result<f64> {
    if u0.len() != gen.dim() {
        return Err(ApsError::DimensionMismatch { expected: gen.dim(), found: u0.len() });
    }
    let u = time_ordered_exp(gen, t, 1e-10)?.propagator.mul_vec(u0);
    let (a, b) = (vec_norm(u0), vec_norm(&u));
    if a == 0.0 || b == 0.0 {
        return Err(ApsError::InvalidParameter("norm ratio undefined for a zero state".into()));
    }
    Ok(a / b)
}

/// `A1_max t` above which amplitude APS stays cheaper than phase APS when
/// `A2 = 0`. Zero when it is cheaper for every `A1_max t`.
///
/// Solves `c1 y^2 - c3 sqrt(l) y + c2 l / ll = 0` for `y = sqrt(A1_max t)`,
/// taking `A_max = A1_max`.
pub fn sqrt_regime_threshold(eps: f64, c: &FormulaConstants) -> Result<f64> {
    check_eps(eps)?;
    let (l, ratio) = log_terms(eps);
    let b = c.c3 * l.sqrt();
    let disc = b * b - 4.0 * c.c1 * c.c2 * ratio;
    if disc < 0.0 {
        return Ok(0.0);
    }
    let y = (b + disc.sqrt()) / (2.0 * c.c1);
    Ok(y * y)
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Bounds; taken from the attached generator when omitted.
    #[serde(default)]
    pub a_max: Option<f64>,
    #[serde(default)]
    pub a1_max: Option<f64>,
    #[serde(default)]
    pub a2_max: Option<f64>,
    pub t: f64,
    pub eps: f64,
    /// `||u0|| / ||u(t)||`; computed from `u0` when omitted, else 1.
    #[serde(default)]
    pub norm_ratio: Option<f64>,
    /// Constant generator to run the evaluators on.
    #[serde(default)]
    pub generator: Option<Generator>,
    #[serde(default, with = "opt_cvec")]
    pub u0: Option<Vec<C64>>,
}

mod opt_cvec {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<C64>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|v| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<C64>>, D::Error> {
        let raw = Option::<Vec<[f64; 2]>>::deserialize(d)?;
        Ok(raw.map(|v| v.into_iter().map(|[re, im]| C64::new(re, im)).collect()))
    }
}

/// One method on one scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub scenario: String,
    pub method: String,
    /// 0 when no generator is attached.
    pub dim: usize,
    pub t: f64,
    pub eps: f64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N_m")]
    pub n_m: u64,
    pub g: f64,
    pub queries_total: f64,
    /// Measured error of the evaluator run, if one ran.
    pub error: Option<f64>,
    /// Target the measured error is held to.
    pub bound: Option<f64>,
    pub wall_ms: Option<f64>,
    /// Why no measurement is reported, when one was attempted.
    pub note: Option<String>,
}

/// Per-scenario summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    /// Largest `eps` in `[1e-16, 0.5]` at which the cheaper of the two APS
    /// counts switches; only computed when `A1_max > A2_max`.
    pub crossover_eps: Option<f64>,
    /// `sqrt_regime_threshold` at the scenario's `eps`.
    pub sqrt_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<TableRow>,
    pub summaries: Vec<ScenarioSummary>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CompareOptions {
    pub constants: FormulaConstants,
    /// Fill `wall_ms`; off keeps rows reproducible.
    pub timing: bool,
    /// Skip running the evaluators even when a generator is attached.
    pub formulas_only: bool,
}

struct Bounds {
    a_max: f64,
    a1_max: f64,
    a2_max: f64,
    lhat: f64,
}

fn scenario_bounds(s: &Scenario) -> Result<Bounds> {
    let from_gen = s.generator.as_ref().map(|g| {
        let b = g.bounds();
        let lhat = g.as_constant().map(|a| {
            let (a1, a2) = cartesian_split(a);
            commutator(&a1, &a2).spectral_norm()
        });
        (b.a_max, b.a1_max, b.a2_max, lhat)
    });
    let pick = |v: Option<f64>, g: Option<f64>, name: &str| {
        v.or(g).ok_or_else(|| ApsError::InvalidParameter(format!("scenario {}: {name} missing", s.name)))
    };
    let a_max = pick(s.a_max, from_gen.map(|f| f.0), "a_max")?;
    let a1_max = pick(s.a1_max, from_gen.map(|f| f.1), "a1_max")?;
    let a2_max = pick(s.a2_max, from_gen.map(|f| f.2), "a2_max")?;
    let lhat = from_gen.and_then(|f| f.3).unwrap_or(2.0 * a1_max * a2_max);
    Ok(Bounds { a_max, a1_max, a2_max, lhat })
}

/// Checks ranges so a bad scenario fails before any work is done.
pub fn validate_scenario(s: &Scenario) -> Result<()> {
    check("t", s.t, true)?;
    check_eps(s.eps)?;
    if let Some(r) = s.norm_ratio {
        check("norm_ratio", r, false)?;
    }
    let b = scenario_bounds(s)?;
    check("a_max", b.a_max, true)?;
    check("a1_max", b.a1_max, true)?;
    check("a2_max", b.a2_max, true)?;
    // ||A1||, ||A2|| <= ||A|| for every matrix.
    if b.a1_max.max(b.a2_max) > b.a_max * (1.0 + 1e-12) {
        return Err(ApsError::InvalidParameter(format!("scenario {}: a1_max and a2_max cannot exceed a_max", s.name)));
    }
    if let Some(g) = &s.generator {
        g.check_time(s.t)?;
        if !g.is_constant() {
            return Err(ApsError::Unsupported(format!("scenario {}: only constant generators can be attached", s.name)));
        }
        if let Some(u0) = &s.u0 {
            if u0.len() != g.dim() {
                return Err(ApsError::DimensionMismatch { expected: g.dim(), found: u0.len() });
            }
        }
    } else if s.u0.is_some() {
        return Err(ApsError::InvalidParameter(format!("scenario {}: u0 given without a generator", s.name)));
    }
    Ok(())
}

fn crossover(b: &Bounds, t: f64, g: f64, c: &FormulaConstants) -> Result<Option<f64>> {
    if b.a1_max <= b.a2_max {
        return Ok(None);
    }
    // Positive where amplitude is cheaper.
    let gap = |log_eps: f64| -> Result<f64> {
        let e = log_eps.exp();
        let p = estimate_phase_aps_with(b.a_max, b.a1_max, b.lhat, t, e, g, c)?.queries_total;
        let a = estimate_amplitude_aps_with(b.a1_max, b.a2_max, t, e, g, c)?.queries_total;
        Ok(p - a)
    };
    let (lo, hi) = ((1e-16f64).ln(), (0.5f64).ln());
    let steps = 256;
    // Scan from loose to tight tolerances for the first change of sign.
    let grid: Vec<f64> = (0..=steps).map(|k| hi + (lo - hi) * k as f64 / steps as f64).collect();
    let vals = grid.iter().map(|&x| gap(x)).collect::<Result<Vec<_>>>()?;
    let first = vals[0] > 0.0;
    let Some(k) = vals.iter().position(|&v| (v > 0.0) != first) else {
        return Ok(None);
    };
    let (mut a, mut z) = (grid[k - 1], grid[k]);
    for _ in 0..60 {
        let mid = 0.5 * (a + z);
        if (gap(mid)? > 0.0) == first {
            a = mid;
        } else {
            z = mid;
        }
    }
    Ok(Some(a.exp()))
}

fn measured(
    scenario: &Scenario,
    method: &str,
    opts: &CompareOptions,
    run: impl FnOnce() -> Result<EvolutionReport>,
) -> (Option<f64>, Option<f64>, Option<f64>, Option<String>) {
    if scenario.generator.is_none() || opts.formulas_only {
        return (None, None, None, None);
    }
    let start = std::time::Instant::now();
    let out = run();
    let ms = opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    match out {
        Ok(r) => (Some(r.error_2norm), r.bound, ms, None),
        Err(e) => {
            log::warn!("scenario {} method {method}: {e}", scenario.name);
            (None, None, ms, Some(e.to_string()))
        }
    }
}

/// Rows for phase APS, amplitude APS, and the LCHS baseline per scenario.
/// Attached generators are run in bound mode.
pub fn compare_table(scenarios: &[Scenario], opts: &CompareOptions) -> Result<ComparisonTable> {
    for s in scenarios {
        validate_scenario(s)?;
    }
    let c = &opts.constants;
    let mut rows = Vec::with_capacity(3 * scenarios.len());
    let mut summaries = Vec::with_capacity(scenarios.len());
    for s in scenarios {
        let b = scenario_bounds(s)?;
        let g = match (s.norm_ratio, &s.generator, &s.u0) {
            (Some(r), _, _) => r,
            (None, Some(gen), Some(u0)) => norm_ratio(gen, u0, s.t)?,
            _ => 1.0,
        };
        let dim = s.generator.as_ref().map_or(0, |g| g.dim());
        let a = s.generator.as_ref().and_then(|g| g.as_constant()).cloned();
        let estimates = [
            estimate_phase_aps_with(b.a_max, b.a1_max, b.lhat, s.t, s.eps, g, c)?,
            estimate_amplitude_aps_with(b.a1_max, b.a2_max, s.t, s.eps, g, c)?,
            estimate_lchs_baseline(b.a_max, s.t, s.eps, g, c)?,
        ];
        for est in estimates {
            let (error, bound, wall_ms, note) = match est.method.as_str() {
                "phase-aps-dyson" => measured(s, &est.method, opts, || {
                    approximate_exp_at_phase(a.as_ref().expect("validated"), s.t, s.eps, &SeriesOptions::bound())
                }),
                "amp-aps-ff" => measured(s, &est.method, opts, || {
                    let o = AmplitudeOptions { mode: PlanMode::Bound, ..Default::default() };
                    approximate_exp_at_amplitude(a.as_ref().expect("validated"), s.t, s.eps, &o)
                }),
                _ => measured(s, &est.method, opts, || lchs_evolve(s.generator.as_ref().expect("validated"), s.t, s.eps)),
            };
            rows.push(TableRow {
                scenario: s.name.clone(),
                method: est.method,
                dim,
                t: s.t,
                eps: s.eps,
                m: est.m,
                n_m: est.n_m,
                g: est.g,
                queries_total: est.queries_total,
                error,
                bound,
                wall_ms,
                note,
            });
        }
        summaries.push(ScenarioSummary {
            scenario: s.name.clone(),
            crossover_eps: crossover(&b, s.t, g, c)?,
            sqrt_threshold: sqrt_regime_threshold(s.eps, c)?,
        });
    }
    Ok(ComparisonTable { rows, summaries })
}
