//! Dispatch from a [`RunConfig`] to the library evaluators.

use apskit::dyson::{approximate_exp_at_phase, approximate_time_dependent, ill_posed_variant, IllPosedOptions, SeriesOptions};
use apskit::embeddings::{lchs_evolve, lindblad_evolve, ndme_embed};
use apskit::fastforward::{approximate_exp_at_amplitude, gaussian_ff, piecewise_stochastic_ff, AmplitudeOptions, StochasticOptions};
use apskit::operators::time_ordered_exp;
use apskit::{ApsError, CMatrix, EvolutionReport, Evolved, Generator};
use num_complex::Complex64 as C64;

use crate::config::{Method, RunConfig};

/// Oracle tolerance used for references that the library does not supply.
pub const REFERENCE_TOL: f64 = 1e-11;

/// Standard errors allowed between a Monte Carlo mean and the oracle.
pub const STDERR_MULTIPLE: f64 = 5.0;

fn constant(gen: &Generator, method: Method) -> apskit::Result<&CMatrix> {
    gen.as_constant()
        .ok_or_else(|| ApsError::Unsupported(format!("{method} needs a constant generator")))
}

fn series(cfg: &RunConfig) -> SeriesOptions {
    SeriesOptions { mode: cfg.mode.into(), ..SeriesOptions::default() }
}

pub fn run(gen: &Generator, cfg: &RunConfig) -> apskit::Result<EvolutionReport> {
    let start = std::time::Instant::now();
    let mut report = match cfg.method {
        Method::Oracle => {
            let p = time_ordered_exp(gen, cfg.t, cfg.eps)?;
            let mut r = EvolutionReport::new("oracle", Evolved::Matrix(p.propagator.clone()), Evolved::Matrix(p.propagator), None);
            r.notes.push(format!("steps={} defect={:e}", p.steps, p.defect));
            r
        }
        Method::PhaseApsDyson => match gen.as_constant() {
            Some(a) => match approximate_exp_at_phase(a, cfg.t, cfg.eps, &series(cfg)) {
                Err(ApsError::NotPsd { .. }) => {
                    log::info!("Hermitian part is indefinite; using the shifted ill-posed series");
                    let opts = IllPosedOptions { series: series(cfg), ..IllPosedOptions::default() };
                    let mut r = ill_posed_variant(a, cfg.t, cfg.eps, &opts)?;
                    r.report.notes.push(format!("lambda_min={:e}", r.lambda_min));
                    r.report
                }
                other => other?,
            },
            None => approximate_time_dependent(gen, cfg.t, cfg.eps, &series(cfg))?,
        },
        Method::AmpApsFf => {
            let opts = AmplitudeOptions { mode: cfg.mode.into(), ..AmplitudeOptions::default() };
            approximate_exp_at_amplitude(constant(gen, cfg.method)?, cfg.t, cfg.eps, &opts)?
        }
        Method::Lchs => lchs_evolve(gen, cfg.t, cfg.eps)?,
        Method::GaussianFf => {
            let a = constant(gen, cfg.method)?;
            if !a.is_hermitian(1e-12) {
                return Err(ApsError::Unsupported("gaussian-ff needs a Hermitian generator".into()));
            }
            gaussian_ff(&a.hermitian_part(), cfg.t, cfg.eps)?
        }
        Method::StochasticFf => {
            let opts = StochasticOptions { samples: cfg.samples, seed: cfg.seed, ..StochasticOptions::default() };
            let est = piecewise_stochastic_ff(gen, cfg.t, &opts)?;
            let reference = time_ordered_exp(gen, cfg.t, REFERENCE_TOL)?.propagator;
            let bound = STDERR_MULTIPLE * est.stderr + est.truncation_bias;
            let mut r = EvolutionReport::new("stochastic-ff", Evolved::Matrix(est.mean), Evolved::Matrix(reference), Some(bound));
            r.notes.push(format!("samples={} seed={} stderr={:e} cutoff={}", est.samples, est.seed, est.stderr, est.cutoff));
            r
        }
        Method::Ndme => ndme_propagator(gen, cfg.t, cfg.steps, cfg.eps)?,
    };
    report.wall_time = start.elapsed().as_secs_f64();
    Ok(report)
}

/// NDME with an `n`-dimensional auxiliary register and `X = I`, so the
/// top-right block carries the whole propagator. The report is held to `eps`.
pub fn ndme_propagator(gen: &Generator, t: f64, steps: usize, eps: f64) -> apskit::Result<EvolutionReport> {
    let n = gen.dim();
    let emb = ndme_embed(gen, n)?;
    let x: Vec<C64> = CMatrix::identity(n).as_slice().to_vec();
    let rho0 = emb.initial_state(&x)?;
    // One integration per segment between breakpoints; a stage landing on a
    // segment's right end must still see that segment's piece.
    let mut edges: Vec<f64> = vec![0.0];
    edges.extend(gen.breakpoints().into_iter().filter(|&b| b > 0.0 && b < t));
    edges.push(t);
    let mut out = rho0.clone();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let at = |s: f64| (lo + s).min(hi.next_down()).max(lo);
        let n = ((steps as f64 * (hi - lo) / t).round() as usize).max(1);
        let jump = |s: f64| emb.jump(at(s));
        out = lindblad_evolve(&|s| emb.hamiltonian(at(s)), &[&jump], &out, hi - lo, n)?;
    }
    let approx = CMatrix::from_vec(n, emb.readout(&out))?;
    let reference = time_ordered_exp(gen, t, REFERENCE_TOL)?.propagator;
    let mut r = EvolutionReport::new("ndme", Evolved::Matrix(approx), Evolved::Matrix(reference), Some(eps));
    r.notes.push(format!("steps={steps} trace_drift={:e}", (out.trace() - rho0.trace()).abs()));
    Ok(r)
}
