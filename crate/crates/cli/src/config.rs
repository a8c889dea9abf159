//! Run configuration: one TOML file, with a few fields overridable by flags.

use std::path::{Path, PathBuf};

use capkaya_core::ingest::DEFAULT_REFERENCE_YEAR;
use capkaya_core::integrator::DEFAULT_STEP;
use capkaya_core::simplex::SimplexOptions;
use serde::Deserialize;

use crate::failure::Failure;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    inputs: RawInputs,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    scenarios: RawScenarios,
    #[serde(default)]
    baseline: RawBaseline,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInputs {
    sectors: PathBuf,
    #[serde(rename = "macro")]
    macro_series: PathBuf,
    cement: Option<PathBuf>,
    mapping: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    output: Option<PathBuf>,
    reference_year: Option<i32>,
    step: Option<f64>,
    seed: Option<u64>,
    beta_on_emissions: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenarios {
    #[serde(default)]
    plans: Vec<String>,
    #[serde(default)]
    files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBaseline {
    year: Option<i32>,
    emissions: Option<f64>,
}

/// Values given on the command line; each one replaces the config entry.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub reference_year: Option<i32>,
    pub step: Option<f64>,
    pub baseline_year: Option<i32>,
    pub baseline_emissions: Option<f64>,
    pub seed: Option<u64>,
    pub beta_on_emissions: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sectors: PathBuf,
    pub macro_series: PathBuf,
    pub cement: Option<PathBuf>,
    /// `None` selects the built-in mapping.
    pub mapping: Option<PathBuf>,
    pub scenario_files: Vec<PathBuf>,
    pub plans: Vec<String>,
    pub output: PathBuf,
    pub reference_year: i32,
    pub step: f64,
    pub seed: u64,
    pub beta_on_emissions: bool,
    pub baseline_year: i32,
    pub baseline_emissions: Option<f64>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    /// Reads `path`, applies `overrides` and checks every referenced input exists.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
        let raw: RawConfig = toml::from_str(&text)
            .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));

        let config = RunConfig {
            sectors: resolve(base, &raw.inputs.sectors),
            macro_series: resolve(base, &raw.inputs.macro_series),
            cement: raw.inputs.cement.as_deref().map(|p| resolve(base, p)),
            mapping: raw.inputs.mapping.as_deref().map(|p| resolve(base, p)),
            scenario_files: raw.scenarios.files.iter().map(|p| resolve(base, p)).collect(),
            plans: raw.scenarios.plans,
            output: resolve(base, raw.run.output.as_deref().unwrap_or(Path::new("out"))),
            reference_year: overrides
                .reference_year
                .or(raw.run.reference_year)
                .unwrap_or(DEFAULT_REFERENCE_YEAR),
            step: overrides.step.or(raw.run.step).unwrap_or(DEFAULT_STEP),
            seed: overrides
                .seed
                .or(raw.run.seed)
                .unwrap_or(SimplexOptions::default().seed),
            beta_on_emissions: overrides.beta_on_emissions
                || raw.run.beta_on_emissions.unwrap_or(false),
            baseline_year: overrides.baseline_year.or(raw.baseline.year).unwrap_or(1990),
            baseline_emissions: overrides.baseline_emissions.or(raw.baseline.emissions),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), Failure> {
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Failure::config(format!("step {} must lie in (0, 1] years", self.step)));
        }
        if let Some(b) = self.baseline_emissions {
            if !(b.is_finite() && b > 0.0) {
                return Err(Failure::config(format!("baseline emissions {b} must be positive")));
            }
        }
        let inputs = [Some(&self.sectors), Some(&self.macro_series), self.cement.as_ref(), self.mapping.as_ref()];
        for p in inputs.into_iter().flatten().chain(&self.scenario_files) {
            if !p.is_file() {
                return Err(Failure::config(format!("input not found: {}", p.display())));
            }
        }
        Ok(())
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.output.join("dataset.csv")
    }

    pub fn fit_report_path(&self) -> PathBuf {
        self.output.join("fit_report.txt")
    }
}
