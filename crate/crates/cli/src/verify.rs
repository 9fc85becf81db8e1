//! Invariant suites over a set of fixture generators.

use std::f64::consts::E;
use std::path::Path;

use anyhow::Context;
use apskit::aps::{amplitude_factorize, phase_factorize, verify_identity};
use apskit::dyson::{
    approximate_exp_at_phase, approximate_time_dependent, eval_shifted_series, phase_series_constant, plan_series,
    PlanMode, SeriesOptions,
};
use apskit::embeddings::lchs_evolve;
use apskit::fastforward::{approximate_exp_at_amplitude, gaussian_ff, piecewise_stochastic_ff, AmplitudeOptions, StochasticOptions};
use apskit::operators::{expm, time_ordered_exp, GeneratorKind};
use apskit::{CMatrix, Generator};
use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

use crate::run::{ndme_propagator, REFERENCE_TOL, STDERR_MULTIPLE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    ApsIdentities,
    DysonTail,
    Ff,
    Embeddings,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::ApsIdentities => "aps-identities",
            Suite::DysonTail => "dyson-tail",
            Suite::Ff => "ff",
            Suite::Embeddings => "embeddings",
            Suite::All => "all",
        }
    }

    fn parts(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::ApsIdentities, Suite::DysonTail, Suite::Ff, Suite::Embeddings],
            s => vec![s],
        }
    }
}

/// Generators shipped with the binary.
const SHIPPED: [(&str, &str); 5] = [
    ("constant_dissipative.json", include_str!("../fixtures/constant_dissipative.json")),
    ("constant_normal.json", include_str!("../fixtures/constant_normal.json")),
    ("hermitian_psd.json", include_str!("../fixtures/hermitian_psd.json")),
    ("piecewise.json", include_str!("../fixtures/piecewise.json")),
    ("polynomial.json", include_str!("../fixtures/polynomial.json")),
];

/// A fixture that failed to load stays in the list; every suite reports it
/// as a failed check.
pub struct Fixture {
    pub name: String,
    pub generator: Result<Generator, String>,
}

pub fn shipped_fixtures() -> Vec<Fixture> {
    SHIPPED
        .iter()
        .map(|(name, text)| Fixture {
            name: name.to_string(),
            generator: Generator::from_json(text).map_err(|e| e.to_string()),
        })
        .collect()
}

/// Every `*.json` file in `dir`, sorted by name.
pub fn fixtures_from_dir(dir: &Path) -> anyhow::Result<Vec<Fixture>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("reading fixture directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        anyhow::bail!("no .json fixtures in {}", dir.display());
    }
    Ok(paths
        .into_iter()
        .map(|p| Fixture {
            name: p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            generator: std::fs::read_to_string(&p)
                .map_err(|e| e.to_string())
                .and_then(|s| Generator::from_json(&s).map_err(|e| e.to_string())),
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub fixture: String,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
}

struct Ctx<'a> {
    suite: &'static str,
    fixture: &'a str,
    out: Vec<Check>,
}

impl Ctx<'_> {
    fn push(&mut self, name: &'static str, outcome: apskit::Result<(bool, String)>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, e.to_string()));
        self.out.push(Check { suite: self.suite, fixture: self.fixture.to_string(), name, passed, detail });
    }

    /// `error <= bound`, reported as both numbers.
    fn within(&mut self, name: &'static str, outcome: apskit::Result<(f64, f64)>) {
        self.push(name, outcome.map(|(err, bound)| (err <= bound, format!("error {err:.3e}, bound {bound:.3e}"))));
    }
}

/// Evaluation time for a fixture.
fn horizon_time(g: &Generator) -> f64 {
    g.horizon().min(1.0)
}

fn aps_identities(g: &Generator, cx: &mut Ctx) {
    const TOL: f64 = 1e-8;
    let t = horizon_time(g);
    cx.within("phase identity", phase_factorize(g, TOL).and_then(|f| verify_identity(&f, t, TOL)).map(|r| (r.error_2norm, 10.0 * TOL)));
    cx.within(
        "amplitude identity",
        amplitude_factorize(g, TOL).and_then(|f| verify_identity(&f, t, TOL)).map(|r| (r.error_2norm, 10.0 * TOL)),
    );
    cx.within(
        "phase rotation isospectral",
        phase_factorize(g, TOL).and_then(|f| f.rotated(t)).map(|ap| {
            let got = ap.hermitian_eigen().values;
            let want = g.hermitian_at(t).hermitian_eigen().values;
            let dev = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            (dev, 1e-10 * (1.0 + g.bounds().a1_max))
        }),
    );
}

fn dyson_tail(g: &Generator, cx: &mut Ctx) {
    let t = horizon_time(g);
    // Shifted tail on the Hermitian part at s = 0.
    let l = g.hermitian_at(0.0);
    let l_max = l.spectral_norm();
    let tau = l_max * t;
    let m = ((E * E * tau).ceil() as usize).max(1);
    cx.within(
        "shifted tail bound",
        plan_series(l_max, 0.0, t, 1e-6, PlanMode::Bound).and_then(|mut plan| {
            plan.m = m;
            let plan = plan.with_grid(1 << 42, t);
            let err = (&phase_series_constant(&l, &plan) - &expm(&l.scale_real(-t))?).spectral_norm();
            Ok((err, (-(tau + m as f64)).exp() + 1e-10))
        }),
    );
    // A scalar sample annihilated by its own shift.
    let lam = l.hermitian_eigen().max();
    cx.within(
        "scalar shift exact",
        plan_series(lam, 0.0, t, 1e-10, PlanMode::Bound).and_then(|plan| {
            let out = eval_shifted_series(&|_| CMatrix::from_real_diag(&[lam]), lam, &plan.with_grid(1, t))?;
            Ok(((out[(0, 0)].re - (-lam * t).exp()).abs(), 1e-14))
        }),
    );
    let run = match g.as_constant() {
        Some(a) => approximate_exp_at_phase(a, t, 1e-6, &SeriesOptions::default()),
        None => approximate_time_dependent(g, t, 1e-5, &SeriesOptions::default()),
    };
    cx.within("phase series end to end", run.map(|r| (r.error_2norm, r.bound.unwrap_or(0.0))));
}

fn fast_forward(g: &Generator, cx: &mut Ctx) {
    let t = horizon_time(g);
    cx.within("gaussian quadrature", gaussian_ff(&g.hermitian_at(0.0), t, 1e-8).map(|r| (r.error_2norm, 1e-8)));
    if let Some(a) = g.as_constant() {
        cx.within(
            "amplitude composite",
            approximate_exp_at_amplitude(a, t, 1e-5, &AmplitudeOptions::default()).map(|r| (r.error_2norm, 1e-5)),
        );
    }
    if !matches!(g.kind(), GeneratorKind::Polynomial { .. }) {
        let l = g.hermitian_generator();
        let opts = StochasticOptions { samples: 20_000, seed: 0, ..StochasticOptions::default() };
        cx.within(
            "stochastic estimator",
            piecewise_stochastic_ff(&l, t, &opts).and_then(|est| {
                let exact = time_ordered_exp(&l, t, REFERENCE_TOL)?.propagator;
                Ok(((&est.mean - &exact).frobenius_norm(), STDERR_MULTIPLE * est.stderr + est.truncation_bias))
            }),
        );
    }
}

fn embeddings(g: &Generator, cx: &mut Ctx) {
    let t = horizon_time(g);
    if g.dim() <= 4 {
        cx.within("ndme block", ndme_propagator(g, t, 4096, 1e-6).map(|r| (r.error_2norm, 1e-6)));
    }
    cx.within("lchs", lchs_evolve(g, t, 1e-3).map(|r| (r.error_2norm, 1e-3)));
}

fn fixture_checks(suite: Suite, fx: &Fixture) -> Vec<Check> {
    let mut cx = Ctx { suite: suite.name(), fixture: &fx.name, out: Vec::new() };
    match &fx.generator {
        Err(e) => cx.push("load", Ok((false, e.clone()))),
        Ok(g) => match suite {
            Suite::ApsIdentities => aps_identities(g, &mut cx),
            Suite::DysonTail => dyson_tail(g, &mut cx),
            Suite::Ff => fast_forward(g, &mut cx),
            Suite::Embeddings => embeddings(g, &mut cx),
            Suite::All => unreachable!("expanded by parts"),
        },
    }
    cx.out
}

/// Runs `suite` over `fixtures`, in parallel across fixtures; checks come
/// back in a fixed order.
pub fn run_suite(suite: Suite, fixtures: &[Fixture]) -> SuiteReport {
    let jobs: Vec<(Suite, &Fixture)> = suite.parts().into_iter().flat_map(|s| fixtures.iter().map(move |f| (s, f))).collect();
    let checks: Vec<Check> = jobs.par_iter().flat_map_iter(|&(s, f)| fixture_checks(s, f)).collect();
    let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
    SuiteReport { suite: suite.name(), passed, checks }
}
