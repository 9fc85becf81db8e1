//! Comparison tables over a scenario file.

use std::path::Path;

use anyhow::Context;
use apskit::complexity::{compare_table, validate_scenario, CompareOptions, ComparisonTable, FormulaConstants, Scenario};
use rayon::prelude::*;
use serde::Deserialize;

/// A bare list of scenarios, or the list plus overridden constants.
#[derive(Deserialize)]
#[serde(untagged)]
enum ScenarioFile {
    List(Vec<Scenario>),
    WithConstants {
        scenarios: Vec<Scenario>,
        #[serde(default)]
        constants: FormulaConstants,
    },
}

pub struct TableInput {
    pub scenarios: Vec<Scenario>,
    pub constants: FormulaConstants,
}

/// Parses and validates every scenario; nothing runs unless all pass.
pub fn load(path: &Path) -> anyhow::Result<TableInput> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading scenarios {}", path.display()))?;
    let parsed: ScenarioFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing scenarios {}: expected a list or {{\"scenarios\", \"constants\"}}", path.display()))?;
    let input = match parsed {
        ScenarioFile::List(scenarios) => TableInput { scenarios, constants: FormulaConstants::default() },
        ScenarioFile::WithConstants { scenarios, constants } => TableInput { scenarios, constants },
    };
    for s in &input.scenarios {
        validate_scenario(s).with_context(|| format!("scenario {}", s.name))?;
    }
    Ok(input)
}

/// One scenario per rayon task; rows keep the input order.
pub fn build(input: &TableInput, timing: bool, formulas_only: bool) -> apskit::Result<ComparisonTable> {
    let opts = CompareOptions { constants: input.constants, timing, formulas_only };
    let parts = input
        .scenarios
        .par_iter()
        .map(|s| compare_table(std::slice::from_ref(s), &opts))
        .collect::<apskit::Result<Vec<_>>>()?;
    let mut out = ComparisonTable { rows: Vec::new(), summaries: Vec::new() };
    for p in parts {
        out.rows.extend(p.rows);
        out.summaries.extend(p.summaries);
    }
    Ok(out)
}
