//! `apskit` command-line front end.
//!
//! Exit codes: 0 success, 1 a method failed or missed its bound, 2 invalid
//! input (flags, config, generator, scenario file, environment).

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod run;
mod table;
mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use config::{Format, GeneratorSource, Method, Mode, RunConfig, DEFAULT_SAMPLES, DEFAULT_STEPS};
use output::{evolve_csv, meta_path, pretty_json, sibling, table_csv, write_file, Meta};
use verify::Suite;

#[derive(Parser)]
#[command(name = "apskit", version, about = "Amplitude-phase separation toolkit for non-unitary linear dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method on one generator and compare against the oracle.
    Evolve(EvolveArgs),
    /// Run an invariant suite over the fixture generators.
    Verify(VerifyArgs),
    /// Query-count comparison table over a scenario file.
    Table(TableArgs),
}

#[derive(Args)]
struct EvolveArgs {
    /// JSON run config; flags given alongside override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Generator JSON file.
    #[arg(long)]
    generator: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    /// Target error [default: 1e-6].
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo samples for stochastic-ff.
    #[arg(long)]
    samples: Option<usize>,
    /// Integrator steps for ndme.
    #[arg(long)]
    steps: Option<usize>,
    /// Report path; the other format is written beside it. Without it the
    /// report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Fill the CSV `wall_ms` column (makes the CSV run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Directory of generator JSON files replacing the shipped fixtures.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// JSON list of scenarios, or `{"scenarios": [...], "constants": {...}}`.
    file: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Record wall time per measured row.
    #[arg(long)]
    timing: bool,
    /// Skip running the evaluators on attached generators.
    #[arg(long)]
    formulas_only: bool,
}

/// A failed command and its exit code.
enum Failure {
    Invalid(anyhow::Error),
    Failed(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Failed(_) => 1,
            Failure::Invalid(_) => 2,
        }
    }
}

type Outcome = Result<bool, Failure>;

fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Invalid(e.into())
}

fn failed(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Failed(e.into())
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("APSKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| anyhow!("APSKIT_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = init_threads().map_err(invalid).and_then(|()| match cli.command {
        Command::Evolve(a) => evolve(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Table(a) => table_cmd(a),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            let (Failure::Invalid(e) | Failure::Failed(e)) = &f;
            eprintln!("error: {e:#}");
            ExitCode::from(f.code())
        }
    }
}

fn resolve_config(a: &EvolveArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = match &a.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig {
            generator: GeneratorSource::Path(a.generator.clone().context("--generator or --config is required")?),
            method: a.method.context("--method or --config is required")?,
            t: a.t.context("--t or --config is required")?,
            eps: a.eps.unwrap_or(1e-6),
            mode: Mode::default(),
            seed: 0,
            samples: DEFAULT_SAMPLES,
            steps: DEFAULT_STEPS,
            output: None,
            format: Format::default(),
        },
    };
    if let Some(g) = &a.generator {
        cfg.generator = GeneratorSource::Path(g.clone());
    }
    cfg.method = a.method.unwrap_or(cfg.method);
    cfg.t = a.t.unwrap_or(cfg.t);
    cfg.eps = a.eps.unwrap_or(cfg.eps);
    cfg.mode = a.mode.unwrap_or(cfg.mode);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.samples = a.samples.unwrap_or(cfg.samples);
    cfg.steps = a.steps.unwrap_or(cfg.steps);
    cfg.format = a.format.unwrap_or(cfg.format);
    if a.out.is_some() {
        cfg.output = a.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn evolve(a: EvolveArgs) -> Outcome {
    // Everything that can be rejected as input is checked before any file is written.
    let cfg = resolve_config(&a).map_err(invalid)?;
    let gen = cfg.generator.load().map_err(invalid)?;
    gen.check_time(cfg.t).map_err(invalid)?;

    let start = Instant::now();
    let report = run::run(&gen, &cfg).map_err(failed)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;

    let json = pretty_json(&report).map_err(failed)?;
    let csv = evolve_csv(&report, cfg.t, cfg.eps, a.timing.then_some(wall_ms)).map_err(failed)?;
    let ok = report.within_bound();
    let summary = format!(
        "{}: dim {} t {} eps {:e} error {:.3e} bound {} -> {}",
        report.method,
        report.approx.dim(),
        cfg.t,
        cfg.eps,
        report.error_2norm,
        report.bound.map_or("none".to_string(), |b| format!("{b:.3e}")),
        if ok { "ok" } else { "exceeded" },
    );
    match &cfg.output {
        Some(path) => {
            let (main, other, other_ext) = match cfg.format {
                Format::Json => (&json, &csv, "csv"),
                Format::Csv => (&csv, &json, "json"),
            };
            write_file(path, main).map_err(failed)?;
            write_file(&sibling(path, other_ext), other).map_err(failed)?;
            write_meta(path, "evolve", wall_ms).map_err(failed)?;
            println!("{summary}");
        }
        None => {
            let main = if cfg.format == Format::Json { &json } else { &csv };
            std::io::stdout().write_all(main).map_err(failed)?;
            eprintln!("{summary}");
        }
    }
    Ok(ok)
}

fn write_meta(path: &Path, command: &str, wall_ms: f64) -> anyhow::Result<()> {
    write_file(&meta_path(path), &pretty_json(&Meta::new(command, wall_ms))?)
}

fn verify_cmd(a: VerifyArgs) -> Outcome {
    let fixtures = match &a.fixtures {
        Some(dir) => verify::fixtures_from_dir(dir).map_err(invalid)?,
        None => verify::shipped_fixtures(),
    };
    let start = Instant::now();
    let report = verify::run_suite(a.suite, &fixtures);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let json = pretty_json(&report).map_err(failed)?;
    let lines: Vec<String> = report
        .checks
        .iter()
        .map(|c| format!("{} {:<14} {:<22} {:<28} {}", if c.passed { "PASS" } else { "FAIL" }, c.suite, c.fixture, c.name, c.detail))
        .collect();
    let passed = report.checks.iter().filter(|c| c.passed).count();
    let tally = format!("{}: {passed}/{} checks passed", report.suite, report.checks.len());
    match &a.out {
        Some(path) => {
            write_file(path, &json).map_err(failed)?;
            write_meta(path, "verify", wall_ms).map_err(failed)?;
            lines.iter().for_each(|l| println!("{l}"));
            println!("{tally}");
        }
        None => {
            std::io::stdout().write_all(&json).map_err(failed)?;
            lines.iter().for_each(|l| eprintln!("{l}"));
            eprintln!("{tally}");
        }
    }
    Ok(report.passed)
}

fn table_cmd(a: TableArgs) -> Outcome {
    let input = table::load(&a.file).map_err(invalid)?;
    let start = Instant::now();
    let table = table::build(&input, a.timing, a.formulas_only).map_err(failed)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let bytes = match a.format {
        Format::Csv => table_csv(&table),
        Format::Json => pretty_json(&table),
    }
    .map_err(failed)?;
    let summary = format!("{} scenarios, {} rows", input.scenarios.len(), table.rows.len());
    match &a.out {
        Some(path) => {
            write_file(path, &bytes).map_err(failed)?;
            write_meta(path, "table", wall_ms).map_err(failed)?;
            println!("{summary}");
        }
        None => {
            std::io::stdout().write_all(&bytes).map_err(failed)?;
            eprintln!("{summary}");
        }
    }
    Ok(true)
}
