//! Run configuration: a JSON file, command-line flags, or both.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use apskit::dyson::PlanMode;
use apskit::Generator;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    PhaseApsDyson,
    AmpApsFf,
    Lchs,
    Ndme,
    GaussianFf,
    StochasticFf,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bound,
    #[default]
    Adaptive,
}

impl From<Mode> for PlanMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Bound => PlanMode::Bound,
            Mode::Adaptive => PlanMode::Adaptive,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// `{"path": "gen.json"}` or `{"inline": { ...generator... }}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum GeneratorSource {
    Path(PathBuf),
    Inline(Generator),
}

impl GeneratorSource {
    pub fn load(&self) -> anyhow::Result<Generator> {
        match self {
            GeneratorSource::Inline(g) => Ok(g.clone()),
            GeneratorSource::Path(p) => load_generator(p),
        }
    }
}

pub fn load_generator(path: &Path) -> anyhow::Result<Generator> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading generator {}", path.display()))?;
    Generator::from_json(&text).with_context(|| format!("parsing generator {}", path.display()))
}

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_STEPS: usize = 4096;

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub generator: GeneratorSource,
    pub method: Method,
    pub t: f64,
    pub eps: f64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    /// Monte Carlo samples (stochastic-ff).
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Integrator steps (ndme).
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

impl RunConfig {
    /// Reads a config; relative generator and output paths are taken
    /// relative to the config file.
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        if let GeneratorSource::Path(p) = &mut cfg.generator {
            rebase(p);
        }
        if let Some(p) = &mut cfg.output {
            rebase(p);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.t >= 0.0) || !self.t.is_finite() {
            bail!("t must be non-negative and finite, got {}", self.t);
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            bail!("eps must lie in (0, 1), got {}", self.eps);
        }
        if self.samples == 0 {
            bail!("samples must be positive");
        }
        if self.steps == 0 {
            bail!("steps must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use apskit::CMatrix;

    fn sample() -> RunConfig {
        let g = Generator::constant(CMatrix::from_real_diag(&[1.0, 0.25])).unwrap();
        RunConfig {
            generator: GeneratorSource::Inline(g),
            method: Method::PhaseApsDyson,
            t: 1.5,
            eps: 1e-6,
            mode: Mode::Bound,
            seed: 7,
            samples: 123,
            steps: 64,
            output: Some("out/report.json".into()),
            format: Format::Csv,
        }
    }

    #[test]
    fn round_trips() {
        let cfg = sample();
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        let path = RunConfig { generator: GeneratorSource::Path("g.json".into()), output: None, ..cfg };
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&path).unwrap()).unwrap();
        assert_eq!(back, path);
    }

    #[test]
    fn defaults_fill_optional_fields() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"generator": {"path": "g.json"}, "method": "oracle", "t": 1, "eps": 0.001}"#)
                .unwrap();
        assert_eq!((cfg.mode, cfg.seed, cfg.samples, cfg.steps), (Mode::Adaptive, 0, DEFAULT_SAMPLES, DEFAULT_STEPS));
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn unknown_fields_and_bad_values_rejected() {
        assert!(serde_json::from_str::<RunConfig>(
            r#"{"generator": {"path": "g"}, "method": "oracle", "t": 1, "eps": 0.1, "epsilon": 2}"#
        )
        .is_err());
        let bad = RunConfig { t: -1.0, ..sample() };
        assert!(bad.validate().is_err());
        let bad = RunConfig { eps: 1.0, ..sample() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn method_names_match_serde() {
        for m in Method::value_variants() {
            let json = serde_json::to_string(m).unwrap();
            assert_eq!(json.trim_matches('"'), m.to_string());
        }
    }
}
