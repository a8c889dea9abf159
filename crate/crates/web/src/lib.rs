//! WebAssembly bindings for the scenario explorer page in `www/`.
//!
//! Three operations are exposed: projecting the bundled plans, projecting a
//! plan written in the page's editor, and splitting operating-capital emissions
//! into the legacy stock and capital installed after the reference year.

use capkaya_core::model::{ebar_k_closed, ParameterSet};
use capkaya_core::scenario::{self, RegimeSeed, ScenarioDefinition, Trajectory, PLAN_NAMES};
use wasm_bindgen::prelude::*;

/// Values per year in a projection: year, Y, E_K, E_C, E_I, E_total.
pub const FIELDS: usize = 6;

fn flatten(t: &Trajectory) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.records.len() * FIELDS);
    for r in &t.records {
        let e = r.emissions;
        out.extend_from_slice(&[r.year as f64, r.gdp, e.capital, e.consumption, e.investment, e.total]);
    }
    out
}

/// Fitted values the projections start from. Rates are fractions per year.
#[wasm_bindgen]
#[derive(Debug, Clone, Copy)]
pub struct Explorer {
    seed: RegimeSeed,
}

#[wasm_bindgen]
impl Explorer {
    /// `total` is the reference-year emissions total, split by the given
    /// capital and investment shares (percent); the rest is consumption.
    #[wasm_bindgen(constructor)]
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        growth_rate: f64,
        depreciation: f64,
        savings: f64,
        alpha: f64,
        beta: f64,
        gamma: f64,
        new_capital_intensity: f64,
        total: f64,
        capital_share: f64,
        investment_share: f64,
    ) -> Explorer {
        let capital = total * capital_share / 100.0;
        let investment = total * investment_share / 100.0;
        Explorer {
            seed: RegimeSeed {
                reference_year: 2005,
                growth_rate,
                depreciation,
                savings,
                new_capital_decline: alpha,
                consumption_decline: beta,
                investment_decline: gamma,
                new_capital_intensity,
                levels: [capital, total - capital - investment, investment],
            },
        }
    }

    #[wasm_bindgen(js_name = planNames)]
    pub fn plan_names() -> Vec<String> {
        PLAN_NAMES.iter().map(|s| s.to_string()).collect()
    }

    /// Bundled definition text, for seeding the editor.
    pub fn definition(name: &str) -> Option<String> {
        scenario::bundled_definition(name).map(str::to_string)
    }

    /// A bundled plan, flattened `FIELDS` values per year.
    pub fn project(&self, name: &str) -> Result<Vec<f64>, JsError> {
        self.project_named(name).map_err(|e| JsError::new(&e))
    }

    /// A plan from TOML source, flattened like [`Explorer::project`].
    #[wasm_bindgen(js_name = projectSource)]
    pub fn project_source(&self, source: &str) -> Result<Vec<f64>, JsError> {
        self.project_text(source).map_err(|e| JsError::new(&e))
    }
}

impl Explorer {
    pub fn project_named(&self, name: &str) -> Result<Vec<f64>, String> {
        let plan = scenario::named_plan(name, &self.seed).map_err(|e| e.to_string())?;
        scenario::project(&plan).map(|t| flatten(&t)).map_err(|e| e.to_string())
    }

    pub fn project_text(&self, source: &str) -> Result<Vec<f64>, String> {
        let plan = ScenarioDefinition::from_toml_str(source)
            .and_then(|d| d.resolve(&self.seed))
            .map_err(|e| e.to_string())?;
        scenario::project(&plan).map(|t| flatten(&t)).map_err(|e| e.to_string())
    }
}

/// Operating-capital intensity over `years` under constant rates, split into
/// what remains of the initial stock and what was installed since.
/// Returns `[t, legacy, installed]` per year.
#[wasm_bindgen(js_name = legacySplit)]
pub fn legacy_split(
    growth_rate: f64,
    depreciation: f64,
    savings: f64,
    alpha: f64,
    operating_intensity: f64,
    new_capital_intensity: f64,
    years: u32,
) -> Vec<f64> {
    let p = ParameterSet {
        growth_rate,
        depreciation,
        savings,
        k_infty: None,
        new_capital_decline: alpha,
        consumption_decline: 0.0,
        investment_decline: 0.0,
        operating_intensity,
        new_capital_intensity,
        consumption_intensity: 0.0,
        investment_intensity: 0.0,
    };
    let mut out = Vec::with_capacity(3 * (years as usize + 1));
    for i in 0..=years {
        let t = i as f64;
        let legacy = operating_intensity * (-(growth_rate + depreciation) * t).exp();
        out.extend_from_slice(&[t, legacy, ebar_k_closed(t, &p) - legacy]);
    }
    out
}
