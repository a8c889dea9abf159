//! Multi-regime projections from a calibrated starting point.
//!
//! A plan is a list of constant-parameter regimes. Each regime is evaluated with
//! the closed forms in [`crate::model`]; GDP and all intensities carry over
//! unchanged from one regime to the next while the rates switch.
//!
//! Plans are written as TOML:
//!
//! ```toml
//! name = "accelerated-retirement"
//! horizon = 2050
//! baseline_year = 1990
//!
//! [[regime]]
//! start = 2005            # all rates historical
//!
//! [[regime]]
//! start = 2010
//! delta = 10.0            # percent per year
//! k_infty = "present"     # or a multiple of the present value, e.g. 1.5
//! alpha = "factor 10 by 2030"
//! beta = "factor 10 by 2030"
//! ```
//!
//! Omitted rates are historical. The savings rate follows from `k_infty`, `r`
//! and `delta` unless `s` is given directly.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::calibrate::FitReport;
use crate::error::{Error, Result};
use crate::model::{factor_rate, total_emissions, EmissionsBreakdown, ParameterSet, StockState};

/// Names of the bundled plans, in order of decreasing 2050 emissions.
pub const PLAN_NAMES: [&str; 5] = [
    "extrapolation",
    "accelerated-reductions",
    "aggressive-reductions",
    "accelerated-retirement",
    "steady-state-high-tech",
];

const BUNDLED: [&str; 5] = [
    include_str!("../scenarios/extrapolation.toml"),
    include_str!("../scenarios/accelerated-reductions.toml"),
    include_str!("../scenarios/aggressive-reductions.toml"),
    include_str!("../scenarios/accelerated-retirement.toml"),
    include_str!("../scenarios/steady-state-high-tech.toml"),
];

/// Source text of a bundled plan.
pub fn bundled_definition(name: &str) -> Option<&'static str> {
    PLAN_NAMES.iter().position(|n| *n == name).map(|i| BUNDLED[i])
}

/// Historical rates and reference-year levels that every plan starts from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeSeed {
    pub reference_year: i32,
    pub growth_rate: f64,
    pub depreciation: f64,
    pub savings: f64,
    pub new_capital_decline: f64,
    pub consumption_decline: f64,
    pub investment_decline: f64,
    /// New-capital emissions intensity at the reference year.
    pub new_capital_intensity: f64,
    /// Capital, consumption and investment emissions at the reference year, MtCO2/yr.
    pub levels: [f64; 3],
}

impl RegimeSeed {
    pub fn from_report(report: &FitReport) -> Self {
        Self {
            reference_year: report.reference_year,
            growth_rate: report.growth_rate,
            depreciation: report.capital.depreciation,
            savings: report.savings,
            new_capital_decline: report.capital.decline,
            consumption_decline: report.consumption.rate,
            investment_decline: report.investment.rate,
            new_capital_intensity: report.capital.new_capital_intensity,
            levels: report.reference_emissions,
        }
    }

    /// Capital intensity `s / (r + delta)` of the historical economy.
    pub fn present_k_infty(&self) -> Result<f64> {
        crate::model::k_infinity(self.savings, self.growth_rate, self.depreciation)
    }

    pub fn historical_rates(&self) -> Result<RegimeRates> {
        Ok(RegimeRates {
            growth_rate: self.growth_rate,
            depreciation: self.depreciation,
            savings: self.savings,
            k_infty: self.present_k_infty()?,
            new_capital_decline: self.new_capital_decline,
            consumption_decline: self.consumption_decline,
            investment_decline: self.investment_decline,
        })
    }

    /// State at the reference year with GDP index 1, chosen so that the
    /// historical regime reproduces the observed component levels.
    pub fn initial_state(&self) -> Result<StockState> {
        if !(self.savings > 0.0 && self.savings < 1.0) {
            return Err(Error::InvalidInput(format!(
                "historical savings rate {} outside (0, 1)",
                self.savings
            )));
        }
        if self.levels.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "reference-year emissions {:?} must be finite and non-negative",
                self.levels
            )));
        }
        let [capital, consumption, investment] = self.levels;
        Ok(StockState {
            year: self.reference_year as f64,
            gdp: 1.0,
            operating_intensity: capital,
            new_capital_intensity: self.new_capital_intensity,
            consumption_intensity: consumption / (1.0 - self.savings),
            investment_intensity: investment / self.savings,
        })
    }
}

/// Rates that hold for the length of one regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeRates {
    pub growth_rate: f64,
    pub depreciation: f64,
    pub savings: f64,
    /// Long-run capital intensity, years.
    pub k_infty: f64,
    pub new_capital_decline: f64,
    pub consumption_decline: f64,
    pub investment_decline: f64,
}

impl RegimeRates {
    pub fn parameters(&self, state: &StockState) -> ParameterSet {
        ParameterSet {
            growth_rate: self.growth_rate,
            depreciation: self.depreciation,
            savings: self.savings,
            k_infty: None,
            new_capital_decline: self.new_capital_decline,
            consumption_decline: self.consumption_decline,
            investment_decline: self.investment_decline,
            operating_intensity: state.operating_intensity,
            new_capital_intensity: state.new_capital_intensity,
            consumption_intensity: state.consumption_intensity,
            investment_intensity: state.investment_intensity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub start: i32,
    pub rates: RegimeRates,
    /// `k_infty` relative to the historical value.
    pub k_infty_ratio: f64,
}

impl Regime {
    /// Rates in table units: r, delta, k_infty ratio, alpha, beta, gamma, s,
    /// with rates in percent.
    pub fn table_row(&self) -> [f64; 7] {
        let r = &self.rates;
        [
            100.0 * r.growth_rate,
            100.0 * r.depreciation,
            self.k_infty_ratio,
            100.0 * r.new_capital_decline,
            100.0 * r.consumption_decline,
            100.0 * r.investment_decline,
            100.0 * r.savings,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPlan {
    pub name: String,
    pub description: String,
    pub regimes: Vec<Regime>,
    pub horizon: i32,
    pub baseline_year: Option<i32>,
    pub initial: StockState,
}

/// A value in a scenario file: a number or a keyword phrase.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Setting {
    Number(f64),
    Phrase(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeDefinition {
    pub start: i32,
    pub r: Option<Setting>,
    pub delta: Option<Setting>,
    pub k_infty: Option<Setting>,
    pub alpha: Option<Setting>,
    pub beta: Option<Setting>,
    pub gamma: Option<Setting>,
    pub s: Option<Setting>,
}

/// Parsed scenario file, not yet tied to fitted values.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDefinition {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub horizon: i32,
    pub baseline_year: Option<i32>,
    #[serde(rename = "regime")]
    pub regimes: Vec<RegimeDefinition>,
}

fn definition_error(msg: impl Into<String>) -> Error {
    Error::ScenarioDefinition(msg.into())
}

fn is_historical(phrase: &str) -> bool {
    matches!(phrase.trim().to_ascii_lowercase().as_str(), "historical" | "-")
}

/// Parses `factor F by YEAR` into `(F, YEAR)`.
fn parse_factor(phrase: &str) -> Option<(f64, i32)> {
    let lower = phrase.to_ascii_lowercase();
    let words: Vec<&str> = lower.split_whitespace().collect();
    match words.as_slice() {
        ["factor", f, "by", y] => Some((f.parse().ok()?, y.parse().ok()?)),
        _ => None,
    }
}

impl RegimeDefinition {
    fn percent(&self, key: &str, setting: &Option<Setting>, historical: f64) -> Result<f64> {
        match setting {
            None => Ok(historical),
            Some(Setting::Number(v)) if v.is_finite() => Ok(v / 100.0),
            Some(Setting::Phrase(p)) if is_historical(p) => Ok(historical),
            Some(other) => Err(definition_error(format!(
                "regime {}: `{key}` must be a percentage or \"historical\", got {other:?}",
                self.start
            ))),
        }
    }

    fn decline(&self, key: &str, setting: &Option<Setting>, historical: f64) -> Result<f64> {
        if let Some(Setting::Phrase(p)) = setting {
            if let Some((factor, by)) = parse_factor(p) {
                if by <= self.start {
                    return Err(definition_error(format!(
                        "regime {}: `{key}` target year {by} is not after the regime start",
                        self.start
                    )));
                }
                return factor_rate(factor, (by - self.start) as f64);
            }
        }
        self.percent(key, setting, historical)
    }

    fn k_ratio(&self) -> Result<f64> {
        match &self.k_infty {
            None => Ok(1.0),
            Some(Setting::Phrase(p)) if is_historical(p) || p.trim() == "present" => Ok(1.0),
            Some(Setting::Number(v)) if v.is_finite() && *v >= 0.0 => Ok(*v),
            Some(other) => Err(definition_error(format!(
                "regime {}: `k_infty` must be a non-negative multiple or \"present\", got {other:?}",
                self.start
            ))),
        }
    }

    fn resolve(&self, seed: &RegimeSeed) -> Result<Regime> {
        let growth_rate = self.percent("r", &self.r, seed.growth_rate)?;
        let depreciation = self.percent("delta", &self.delta, seed.depreciation)?;
        let drain = growth_rate + depreciation;
        if !(drain > 0.0) {
            return Err(Error::DegenerateEconomy(drain));
        }
        let present = seed.present_k_infty()?;
        let historical_drain = seed.growth_rate + seed.depreciation;

        let (savings, k_infty, k_infty_ratio) = match &self.s {
            Some(s) => {
                if self.k_infty.is_some() {
                    return Err(definition_error(format!(
                        "regime {}: give `s` or `k_infty`, not both",
                        self.start
                    )));
                }
                let savings = self.percent("s", &Some(s.clone()), seed.savings)?;
                let k = savings / drain;
                (savings, k, k / present)
            }
            None => {
                let ratio = self.k_ratio()?;
                let k = ratio * present;
                // Written this way so an unchanged regime keeps the historical s exactly.
                let savings = seed.savings * ratio * (drain / historical_drain);
                if savings >= 1.0 {
                    return Err(Error::InfeasibleSavings {
                        savings,
                        k_infty: k,
                        growth_rate,
                        depreciation,
                    });
                }
                (savings, k, ratio)
            }
        };
        if !(0.0..1.0).contains(&savings) {
            return Err(definition_error(format!(
                "regime {}: savings rate {savings} outside [0, 1)",
                self.start
            )));
        }

        Ok(Regime {
            start: self.start,
            rates: RegimeRates {
                growth_rate,
                depreciation,
                savings,
                k_infty,
                new_capital_decline: self.decline("alpha", &self.alpha, seed.new_capital_decline)?,
                consumption_decline: self.decline("beta", &self.beta, seed.consumption_decline)?,
                investment_decline: self.decline("gamma", &self.gamma, seed.investment_decline)?,
            },
            k_infty_ratio,
        })
    }
}

impl ScenarioDefinition {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Toml(t) => definition_error(format!("{}: {t}", path.display())),
            other => other,
        })
    }

    /// Binds the definition to fitted values.
    pub fn resolve(&self, seed: &RegimeSeed) -> Result<ScenarioPlan> {
        if self.name.trim().is_empty() {
            return Err(definition_error("empty plan name"));
        }
        let first = self
            .regimes
            .first()
            .ok_or_else(|| definition_error(format!("{}: no regimes", self.name)))?;
        if first.start != seed.reference_year {
            return Err(definition_error(format!(
                "{}: first regime starts in {} but the reference year is {}",
                self.name, first.start, seed.reference_year
            )));
        }
        for pair in self.regimes.windows(2) {
            if pair[1].start <= pair[0].start {
                return Err(definition_error(format!(
                    "{}: regime starts {} and {} are not increasing",
                    self.name, pair[0].start, pair[1].start
                )));
            }
        }
        let last = self.regimes.last().map(|r| r.start).unwrap_or(first.start);
        if self.horizon <= last {
            return Err(definition_error(format!(
                "{}: horizon {} must follow the last regime start {last}",
                self.name, self.horizon
            )));
        }
        let regimes = self
            .regimes
            .iter()
            .map(|r| r.resolve(seed))
            .collect::<Result<Vec<_>>>()?;
        Ok(ScenarioPlan {
            name: self.name.clone(),
            description: self.description.clone(),
            regimes,
            horizon: self.horizon,
            baseline_year: self.baseline_year,
            initial: seed.initial_state()?,
        })
    }
}

/// One of the bundled plans bound to fitted values.
pub fn named_plan(name: &str, seed: &RegimeSeed) -> Result<ScenarioPlan> {
    let text = bundled_definition(name).ok_or_else(|| Error::UnknownScenario(name.to_string()))?;
    ScenarioDefinition::from_toml_str(text)?.resolve(seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YearRecord {
    pub year: i32,
    /// GDP index, 1 at the reference year.
    pub gdp: f64,
    pub emissions: EmissionsBreakdown,
}

/// Emissions on either side of a regime switch, with the carried state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub year: i32,
    pub before: EmissionsBreakdown,
    pub after: EmissionsBreakdown,
    pub state: StockState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub plan: String,
    /// Sampling interval, years.
    pub step: f64,
    pub records: Vec<YearRecord>,
    pub boundaries: Vec<Boundary>,
}

fn advance(p: &ParameterSet, state: &StockState, years: f64) -> StockState {
    let next = p.advanced(years);
    StockState {
        year: state.year + years,
        gdp: state.gdp * (p.growth_rate * years).exp(),
        operating_intensity: next.operating_intensity,
        new_capital_intensity: next.new_capital_intensity,
        consumption_intensity: next.consumption_intensity,
        investment_intensity: next.investment_intensity,
    }
}

/// Annual trajectory from the first regime start to the horizon.
pub fn project(plan: &ScenarioPlan) -> Result<Trajectory> {
    let mut state = plan.initial;
    let mut records = Vec::new();
    let mut boundaries = Vec::new();
    let mut previous: Option<EmissionsBreakdown> = None;

    for (i, regime) in plan.regimes.iter().enumerate() {
        let end = plan.regimes.get(i + 1).map_or(plan.horizon, |r| r.start);
        let p = regime.rates.parameters(&state);
        p.validate()?;
        if let Some(before) = previous {
            boundaries.push(Boundary {
                year: regime.start,
                before,
                after: total_emissions(0.0, &p, state.gdp),
                state,
            });
        }
        let first = if i == 0 { regime.start } else { regime.start + 1 };
        for year in first..=end {
            let t = (year - regime.start) as f64;
            let emissions = total_emissions(t, &p, state.gdp);
            let values = [emissions.capital, emissions.consumption, emissions.investment];
            if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidInput(format!(
                    "{}: emissions {values:?} in {year} are not finite and non-negative",
                    plan.name
                )));
            }
            records.push(YearRecord {
                year,
                gdp: state.gdp * (p.growth_rate * t).exp(),
                emissions,
            });
        }
        previous = records.last().map(|r| r.emissions);
        state = advance(&p, &state, (end - regime.start) as f64);
    }

    Ok(Trajectory {
        plan: plan.name.clone(),
        step: 1.0,
        records,
        boundaries,
    })
}

impl Trajectory {
    pub fn at(&self, year: i32) -> Option<&YearRecord> {
        let first = self.records.first()?.year;
        self.records.get(usize::try_from(year - first).ok()?)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("year,Y,E_K,E_C,E_I,E_total\n");
        for r in &self.records {
            let e = &r.emissions;
            let _ = writeln!(
                out,
                "{},{:.6},{:.3},{:.3},{:.3},{:.3}",
                r.year, r.gdp, e.capital, e.consumption, e.investment, e.total
            );
        }
        out
    }
}

/// Total emissions as a percentage of a baseline value.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeReport {
    pub baseline_year: i32,
    pub baseline: f64,
    pub rows: Vec<(i32, f64)>,
}

pub fn relative_report(
    trajectory: &Trajectory,
    baseline: f64,
    baseline_year: i32,
) -> Result<RelativeReport> {
    if !(baseline.is_finite() && baseline > 0.0) {
        return Err(Error::InvalidInput(format!(
            "baseline emissions for {baseline_year} must be positive, got {baseline}"
        )));
    }
    Ok(RelativeReport {
        baseline_year,
        baseline,
        rows: trajectory
            .records
            .iter()
            .map(|r| (r.year, 100.0 * r.emissions.total / baseline))
            .collect(),
    })
}

impl RelativeReport {
    pub fn percent_at(&self, year: i32) -> Option<f64> {
        self.rows.iter().find(|(y, _)| *y == year).map(|(_, p)| *p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{integrate_ebar_k_ode, NewCapitalPath, RateFunction};
    use proptest::prelude::*;

    /// Fitted US values with 2005 levels split 58.2 / 40.4 / 1.4 %.
    fn us_seed() -> RegimeSeed {
        RegimeSeed {
            reference_year: 2005,
            growth_rate: 0.031,
            depreciation: 0.037,
            savings: 0.14,
            new_capital_decline: 0.009,
            consumption_decline: 0.028,
            investment_decline: 0.020,
            new_capital_intensity: 1029.0,
            levels: [3059.0, 2123.0, 74.0],
        }
    }

    fn all_plans(seed: &RegimeSeed) -> Vec<Trajectory> {
        PLAN_NAMES
            .iter()
            .map(|n| project(&named_plan(n, seed).unwrap()).unwrap())
            .collect()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn bundled_plans_parse() {
        for name in PLAN_NAMES {
            let def = ScenarioDefinition::from_toml_str(bundled_definition(name).unwrap()).unwrap();
            assert_eq!(def.name, name);
            assert_eq!(def.regimes.len(), 2);
            assert_eq!(def.horizon, 2050);
        }
    }

    #[test]
    fn accelerated_retirement_rates() {
        let plan = named_plan("accelerated-retirement", &us_seed()).unwrap();
        let r = plan.regimes[1].rates;
        assert_eq!(r.growth_rate, 0.031);
        assert!((r.depreciation - 0.10).abs() < 1e-15);
        assert!((r.new_capital_decline - 0.109).abs() < 5e-4);
        assert_eq!(r.new_capital_decline, r.consumption_decline);
        assert_eq!(r.investment_decline, 0.020);
        assert!((r.savings - 0.27).abs() < 5e-3, "s = {}", r.savings);
    }

    #[test]
    fn extrapolation_keeps_historical_rates() {
        let plan = named_plan("extrapolation", &us_seed()).unwrap();
        assert_eq!(plan.regimes[0].rates, plan.regimes[1].rates);
        assert_eq!(plan.regimes[1].rates.savings, 0.14);
    }

    #[test]
    fn steady_state_savings() {
        let plan = named_plan("steady-state-high-tech", &us_seed()).unwrap();
        let r = plan.regimes[1].rates;
        assert_eq!(r.growth_rate, 0.0);
        assert!((r.savings - 0.31).abs() < 5e-3, "s = {}", r.savings);
        assert_eq!(plan.regimes[1].k_infty_ratio, 1.5);
    }

    #[test]
    fn table_rows_round_to_printed_values() {
        let expected = [
            [3.1, 3.7, 1.0, 0.9, 2.8, 2.0, 14.0],
            [3.1, 3.7, 1.0, 5.6, 5.6, 2.0, 14.0],
            [3.1, 3.7, 1.0, 10.9, 10.9, 2.0, 14.0],
            [3.1, 10.0, 1.0, 10.9, 10.9, 2.0, 27.0],
            [0.0, 10.0, 1.5, 10.9, 10.9, 2.0, 31.0],
        ];
        for (name, row) in PLAN_NAMES.iter().zip(expected) {
            let got = named_plan(name, &us_seed()).unwrap().regimes[1].table_row();
            for (i, (g, e)) in got.iter().zip(row).enumerate() {
                // Savings is printed to whole percent, the rest to one decimal.
                let rounded = if i == 6 { g.round() } else { (g * 10.0).round() / 10.0 };
                assert_eq!(rounded, e, "{name} column {i}: {g}");
            }
        }
    }

    #[test]
    fn reference_year_matches_observed_total() {
        for t in all_plans(&us_seed()) {
            let first = t.records[0];
            assert_eq!(first.year, 2005);
            assert!(rel(first.emissions.total, 5256.0) < 1e-12);
            assert!(rel(first.emissions.capital, 3059.0) < 1e-12);
            assert!(rel(first.emissions.consumption, 2123.0) < 1e-12);
            assert!(rel(first.emissions.investment, 74.0) < 1e-12);
        }
    }

    #[test]
    fn extrapolation_endpoint() {
        let t = project(&named_plan("extrapolation", &us_seed()).unwrap()).unwrap();
        let e = t.at(2050).unwrap().emissions.total;
        assert!((8500.0..10000.0).contains(&e), "2050 total {e}");
        assert_eq!(t.records.len(), 46);
    }

    #[test]
    fn ordering_at_horizon() {
        let totals: Vec<f64> = all_plans(&us_seed())
            .iter()
            .map(|t| t.at(2050).unwrap().emissions.total)
            .collect();
        for pair in totals.windows(2) {
            assert!(pair[0] > pair[1], "{totals:?}");
        }
    }

    #[test]
    fn state_carries_across_switch() {
        for t in all_plans(&us_seed()) {
            let b = t.boundaries[0];
            assert_eq!(b.year, 2010);
            let rec = t.at(2010).unwrap();
            assert_eq!(rec.emissions, b.before);
            assert!(rel(rec.gdp, b.state.gdp) < 1e-15);
            // Capital emissions depend only on state, so they never jump.
            assert!(rel(b.after.capital, b.before.capital) < 1e-12);
        }
    }

    #[test]
    fn total_continuous_when_savings_unchanged() {
        for name in &PLAN_NAMES[..3] {
            let t = project(&named_plan(name, &us_seed()).unwrap()).unwrap();
            let b = t.boundaries[0];
            assert!(rel(b.after.total, b.before.total) < 1e-9, "{name}");
        }
    }

    #[test]
    fn legacy_capital_slows_capital_decline() {
        let t = project(&named_plan("aggressive-reductions", &us_seed()).unwrap()).unwrap();
        let ratio = t.at(2050).unwrap().emissions.capital / t.at(2010).unwrap().emissions.capital;
        assert!(ratio > (-0.109f64 * 40.0).exp(), "ratio {ratio}");
    }

    #[test]
    fn closed_forms_match_integrator_per_regime() {
        let plan = named_plan("accelerated-retirement", &us_seed()).unwrap();
        let traj = project(&plan).unwrap();
        let mut state = plan.initial;
        for (i, regime) in plan.regimes.iter().enumerate() {
            let end = plan.regimes.get(i + 1).map_or(plan.horizon, |r| r.start);
            let years = (end - regime.start) as f64;
            let r = regime.rates;
            let rates = RateFunction::constant(r.growth_rate, r.savings).unwrap();
            let path = NewCapitalPath::Exponential {
                initial: state.new_capital_intensity,
                decline: r.new_capital_decline,
            };
            let ode = integrate_ebar_k_ode(
                state.operating_intensity,
                &rates,
                &path,
                r.depreciation,
                years,
                1.0 / 12.0,
            )
            .unwrap();
            let p = r.parameters(&state);
            state = advance(&p, &state, years);
            assert!(rel(ode.last(), state.operating_intensity) < 1e-8);
            let rec = traj.at(end).unwrap();
            assert!(rel(rec.emissions.capital, state.gdp * ode.last()) < 1e-8);
        }
    }

    #[test]
    fn relative_report_of_flat_trajectory() {
        let seed = RegimeSeed {
            growth_rate: 0.0,
            new_capital_decline: 0.0,
            consumption_decline: 0.0,
            investment_decline: 0.0,
            // Operating intensity already at its steady state s eps_K / delta.
            new_capital_intensity: 3059.0 * 0.037 / 0.14,
            ..us_seed()
        };
        let t = project(&named_plan("extrapolation", &seed).unwrap()).unwrap();
        let report = relative_report(&t, 5256.0, 1990).unwrap();
        for (_, pct) in &report.rows {
            assert!((pct - 100.0).abs() < 1e-9);
        }
        assert!(relative_report(&t, 0.0, 1990).is_err());
        assert!(relative_report(&t, f64::NAN, 1990).is_err());
    }

    #[test]
    fn unknown_plan_is_rejected() {
        assert!(matches!(
            named_plan("business-as-usual", &us_seed()),
            Err(Error::UnknownScenario(_))
        ));
    }

    #[test]
    fn infeasible_savings_is_refused() {
        let text = r#"
            name = "overbuilt"
            horizon = 2050
            [[regime]]
            start = 2005
            [[regime]]
            start = 2010
            delta = 20.0
            k_infty = 5.0
        "#;
        let def = ScenarioDefinition::from_toml_str(text).unwrap();
        assert!(matches!(def.resolve(&us_seed()), Err(Error::InfeasibleSavings { .. })));
    }

    #[test]
    fn malformed_definitions() {
        let cases = [
            // First regime must start at the reference year.
            "name = \"x\"\nhorizon = 2050\n[[regime]]\nstart = 2000\n",
            // Starts must increase.
            "name = \"x\"\nhorizon = 2050\n[[regime]]\nstart = 2005\n[[regime]]\nstart = 2005\n",
            // Horizon after the last start.
            "name = \"x\"\nhorizon = 2005\n[[regime]]\nstart = 2005\n",
            // Target year before the regime.
            "name = \"x\"\nhorizon = 2050\n[[regime]]\nstart = 2005\nalpha = \"factor 10 by 2000\"\n",
            // Factor phrases only make sense for decline rates.
            "name = \"x\"\nhorizon = 2050\n[[regime]]\nstart = 2005\nr = \"factor 2 by 2020\"\n",
            "name = \"x\"\nhorizon = 2050\n[[regime]]\nstart = 2005\ns = 20.0\nk_infty = 1.0\n",
            "name = \"x\"\nhorizon = 2050\nregime = []\n",
        ];
        for text in cases {
            let def = ScenarioDefinition::from_toml_str(text).unwrap();
            assert!(def.resolve(&us_seed()).is_err(), "{text}");
        }
        let unknown_key = "name = \"x\"\nhorizon = 2050\n[[regime]]\nstart = 2005\nrho = 1.0\n";
        assert!(ScenarioDefinition::from_toml_str(unknown_key).is_err());
    }

    #[test]
    fn explicit_savings_sets_k_infty() {
        let text = "name = \"x\"\nhorizon = 2020\n[[regime]]\nstart = 2005\ns = 20\n";
        let plan = ScenarioDefinition::from_toml_str(text).unwrap().resolve(&us_seed()).unwrap();
        let r = plan.regimes[0].rates;
        assert!((r.savings - 0.2).abs() < 1e-15);
        assert!((r.k_infty - 0.2 / 0.068).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let t = project(&named_plan("extrapolation", &us_seed()).unwrap()).unwrap();
        let csv = t.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("year,Y,E_K,E_C,E_I,E_total"));
        assert!(lines.next().unwrap().starts_with("2005,1.000000,3059.000,2123.000,74.000,5256.000"));
        assert_eq!(csv.lines().count(), 47);
    }

    fn seeds() -> impl Strategy<Value = RegimeSeed> {
        (
            -0.01f64..0.06,
            0.02f64..0.12,
            0.05f64..0.3,
            0.0f64..0.05,
            0.0f64..0.05,
            0.0f64..0.05,
            100.0f64..3000.0,
            (100.0f64..5000.0, 100.0f64..5000.0, 0.0f64..500.0),
        )
            .prop_map(|(r, d, s, a, b, g, ek, (k, c, i))| RegimeSeed {
                reference_year: 2005,
                growth_rate: r,
                depreciation: d,
                savings: s,
                new_capital_decline: a,
                consumption_decline: b,
                investment_decline: g,
                new_capital_intensity: ek,
                levels: [k, c, i],
            })
    }

    proptest! {
        #[test]
        fn conservation_and_positivity(seed in seeds()) {
            for name in PLAN_NAMES {
                let Ok(plan) = named_plan(name, &seed) else { continue };
                let t = project(&plan).unwrap();
                for rec in &t.records {
                    let e = rec.emissions;
                    prop_assert!(e.capital >= 0.0 && e.consumption >= 0.0 && e.investment >= 0.0);
                    prop_assert_eq!(e.total, e.capital + e.consumption + e.investment);
                    prop_assert!(rec.gdp > 0.0);
                }
            }
        }

        #[test]
        fn baseline_scales_only_the_report(seed in seeds(), base in 100.0f64..10000.0, k in 0.1f64..10.0) {
            let t = project(&named_plan("aggressive-reductions", &seed).unwrap()).unwrap();
            let a = relative_report(&t, base, 1990).unwrap();
            let b = relative_report(&t, base * k, 1990).unwrap();
            for ((_, pa), (_, pb)) in a.rows.iter().zip(&b.rows) {
                prop_assert!((pa / pb - k).abs() < 1e-9 * k);
            }
        }

        #[test]
        fn faster_decline_never_raises_emissions(seed in seeds()) {
            let acc = project(&named_plan("accelerated-reductions", &seed).unwrap()).unwrap();
            let agg = project(&named_plan("aggressive-reductions", &seed).unwrap()).unwrap();
            for (x, y) in acc.records.iter().zip(&agg.records) {
                prop_assert!(y.emissions.total <= x.emissions.total * (1.0 + 1e-12));
            }
        }
    }
}
