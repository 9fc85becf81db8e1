//! Report files. Machine output is deterministic; timings and timestamps go
//! to a `.meta.json` sidecar.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use apskit::complexity::{ComparisonTable, TableRow};
use apskit::EvolutionReport;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

pub const EVOLVE_COLUMNS: [&str; 10] = ["method", "dim", "t", "eps", "M", "N_m", "g", "error", "bound", "wall_ms"];

pub const TABLE_COLUMNS: [&str; 13] =
    ["scenario", "method", "dim", "t", "eps", "M", "N_m", "g", "queries_total", "error", "bound", "wall_ms", "note"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Header plus one row. `wall_ms` stays empty unless timing was asked for.
pub fn evolve_csv(report: &EvolutionReport, t: f64, eps: f64, wall_ms: Option<f64>) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(EVOLVE_COLUMNS)?;
    let plan = report.plan.as_ref();
    w.write_record([
        report.method.clone(),
        report.approx.dim().to_string(),
        t.to_string(),
        eps.to_string(),
        plan.map(|p| p.m.to_string()).unwrap_or_default(),
        plan.map(|p| p.n_m.to_string()).unwrap_or_default(),
        String::new(),
        report.error_2norm.to_string(),
        opt(report.bound),
        opt(wall_ms),
    ])?;
    Ok(w.into_inner()?)
}

fn table_record(r: &TableRow) -> [String; 13] {
    [
        r.scenario.clone(),
        r.method.clone(),
        r.dim.to_string(),
        r.t.to_string(),
        r.eps.to_string(),
        r.m.to_string(),
        r.n_m.to_string(),
        r.g.to_string(),
        r.queries_total.to_string(),
        opt(r.error),
        opt(r.bound),
        opt(r.wall_ms),
        r.note.clone().unwrap_or_default(),
    ]
}

pub fn table_csv(table: &ComparisonTable) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TABLE_COLUMNS)?;
    for r in &table.rows {
        w.write_record(table_record(r))?;
    }
    Ok(w.into_inner()?)
}

pub fn pretty_json<T: Serialize>(v: &T) -> anyhow::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v)?;
    out.push(b'\n');
    Ok(out)
}

/// `path` with its extension replaced by `ext`, or `ext` appended when that
/// would give `path` back.
pub fn sibling(path: &Path, ext: &str) -> PathBuf {
    let p = path.with_extension(ext);
    if p == path {
        let mut s = path.as_os_str().to_owned();
        s.push(".");
        s.push(ext);
        PathBuf::from(s)
    } else {
        p
    }
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Serialize)]
pub struct Meta<'a> {
    pub schema_version: u32,
    pub tool_version: &'a str,
    pub command: &'a str,
    pub wall_ms: f64,
    pub finished_unix_s: u64,
    pub threads: usize,
}

impl<'a> Meta<'a> {
    pub fn new(command: &'a str, wall_ms: f64) -> Self {
        let finished_unix_s =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            wall_ms,
            finished_unix_s,
            threads: rayon::current_num_threads(),
        }
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
