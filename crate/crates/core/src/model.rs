//! Closed-form emissions mathematics for constant-parameter regimes.
//!
//! GDP is carried as an index normalized to 1 at the reference year, so every
//! intensity below is expressed in MtCO2 per unit of that index.
//!
//! Total emissions split into three terms:
//!
//! ```text
//! E(t) = Y(t) * [ ebar_K(t) + (1 - s) eps_C(t) + s eps_I(t) ]
//! ```
//!
//! where `ebar_K` is the stock-like emissions of the operating capital base per
//! unit GDP. It is fed by new investment at intensity `eps_K(t)` and drained by
//! depreciation plus dilution from growth.

use crate::error::{Error, Result};

/// Width of the `r + delta - alpha = 0` branch of [`f_of_t`], in 1/year.
pub const SINGULAR_BRANCH_TOLERANCE: f64 = 1e-8;

/// Tolerance on `s - k_infty (r + delta)` when both are specified.
pub const SAVINGS_CONSISTENCY_TOLERANCE: f64 = 1e-9;

/// Coefficients of one constant-parameter regime.
///
/// Intensities are the values at the start of the regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterSet {
    /// GDP growth rate `r`, 1/year.
    pub growth_rate: f64,
    /// Depreciation rate `delta`, 1/year.
    pub depreciation: f64,
    /// Savings rate `s` (investment share of output).
    pub savings: f64,
    /// Long-run capital intensity, years. Optional; derivable from the others.
    pub k_infty: Option<f64>,
    /// Decline rate of the emissions intensity of new capital (`alpha`), 1/year.
    pub new_capital_decline: f64,
    /// Decline rate of consumption emissions intensity (`beta`), 1/year.
    pub consumption_decline: f64,
    /// Decline rate of investment emissions intensity (`gamma`), 1/year.
    pub investment_decline: f64,
    /// Emissions from operating capital per unit GDP (`ebar_K0`).
    pub operating_intensity: f64,
    /// Emissions intensity of newly installed capital (`eps_K0`).
    pub new_capital_intensity: f64,
    /// Consumption emissions intensity (`eps_C0`).
    pub consumption_intensity: f64,
    /// Investment emissions intensity (`eps_I0`).
    pub investment_intensity: f64,
}

impl ParameterSet {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.growth_rate,
            self.depreciation,
            self.savings,
            self.new_capital_decline,
            self.consumption_decline,
            self.investment_decline,
            self.operating_intensity,
            self.new_capital_intensity,
            self.consumption_intensity,
            self.investment_intensity,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite parameter".into()));
        }
        if !(0.0..1.0).contains(&self.savings) {
            return Err(Error::InvalidInput(format!(
                "savings rate {} outside [0, 1)",
                self.savings
            )));
        }
        if self.depreciation <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "depreciation {} must be positive",
                self.depreciation
            )));
        }
        if self.growth_rate + self.depreciation <= 0.0 {
            return Err(Error::DegenerateEconomy(self.growth_rate + self.depreciation));
        }
        let intensities = [
            self.operating_intensity,
            self.new_capital_intensity,
            self.consumption_intensity,
            self.investment_intensity,
        ];
        if intensities.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInput("negative emissions intensity".into()));
        }
        if let Some(k) = self.k_infty {
            let implied = k * (self.growth_rate + self.depreciation);
            if (self.savings - implied).abs() >= SAVINGS_CONSISTENCY_TOLERANCE {
                return Err(Error::InvalidInput(format!(
                    "savings {} inconsistent with k_infty {} (implies {})",
                    self.savings, k, implied
                )));
            }
        }
        Ok(())
    }

    /// Long-run capital intensity implied by the savings, growth and depreciation rates.
    pub fn capital_intensity_limit(&self) -> Result<f64> {
        match self.k_infty {
            Some(k) => Ok(k),
            None => k_infinity(self.savings, self.growth_rate, self.depreciation),
        }
    }

    /// Intensities after `t` years under this regime. Other coefficients are unchanged.
    pub fn advanced(&self, t: f64) -> ParameterSet {
        ParameterSet {
            operating_intensity: ebar_k_closed(t, self),
            new_capital_intensity: self.new_capital_intensity * (-self.new_capital_decline * t).exp(),
            consumption_intensity: self.consumption_intensity * (-self.consumption_decline * t).exp(),
            investment_intensity: self.investment_intensity * (-self.investment_decline * t).exp(),
            ..*self
        }
    }
}

/// Instantaneous state carried across regime boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StockState {
    pub year: f64,
    /// GDP index.
    pub gdp: f64,
    pub operating_intensity: f64,
    pub new_capital_intensity: f64,
    pub consumption_intensity: f64,
    pub investment_intensity: f64,
}

/// Emissions split by source, MtCO2/year.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EmissionsBreakdown {
    pub capital: f64,
    pub consumption: f64,
    pub investment: f64,
    pub total: f64,
}

impl EmissionsBreakdown {
    pub fn new(capital: f64, consumption: f64, investment: f64) -> Self {
        Self {
            capital,
            consumption,
            investment,
            total: capital + consumption + investment,
        }
    }
}

fn require_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} is not finite")))
    }
}

/// Single-factor emissions: intensity times GDP.
pub fn kaya_baseline(intensity: f64, gdp: f64) -> Result<f64> {
    require_finite("intensity", intensity)?;
    require_finite("gdp", gdp)?;
    if intensity < 0.0 {
        return Err(Error::InvalidInput(format!("negative intensity {intensity}")));
    }
    if gdp <= 0.0 {
        return Err(Error::InvalidInput(format!("non-positive GDP {gdp}")));
    }
    Ok(intensity * gdp)
}

/// Steady-state capital intensity `s / (r + delta)`, in years.
pub fn k_infinity(savings: f64, growth_rate: f64, depreciation: f64) -> Result<f64> {
    let drain = growth_rate + depreciation;
    if !(drain > 0.0) {
        return Err(Error::DegenerateEconomy(drain));
    }
    Ok(savings / drain)
}

/// Savings rate that sustains capital intensity `k_infty` at the given rates.
pub fn implied_savings(k_infty: f64, growth_rate: f64, depreciation: f64) -> Result<f64> {
    let drain = growth_rate + depreciation;
    if !(drain > 0.0) {
        return Err(Error::DegenerateEconomy(drain));
    }
    if !(k_infty >= 0.0) {
        return Err(Error::InvalidInput(format!("negative capital intensity {k_infty}")));
    }
    let savings = k_infty * drain;
    if savings >= 1.0 {
        return Err(Error::InfeasibleSavings {
            savings,
            k_infty,
            growth_rate,
            depreciation,
        });
    }
    Ok(savings)
}

/// Constant annual decline rate that reduces an intensity by `factor` over `years`
/// steps of annual compounding: `1 - factor^(-1/years)`.
pub fn factor_rate(factor: f64, years: f64) -> Result<f64> {
    if !(factor >= 1.0) || !factor.is_finite() {
        return Err(Error::InvalidInput(format!(
            "reduction factor {factor} must be >= 1"
        )));
    }
    if !(years > 0.0) || !years.is_finite() {
        return Err(Error::InvalidInput(format!("horizon {years} must be positive")));
    }
    Ok(-(-factor.ln() / years).exp_m1())
}

/// `(e^{gt} - 1) / g` with `g = r + delta - alpha`, or `t` on the singular branch.
pub fn f_of_t(t: f64, growth_rate: f64, depreciation: f64, decline: f64) -> f64 {
    let gap = growth_rate + depreciation - decline;
    if gap.abs() < SINGULAR_BRANCH_TOLERANCE {
        t
    } else {
        (gap * t).exp_m1() / gap
    }
}

/// Operating-capital intensity `t` years into a constant-parameter regime.
///
/// Evaluates `(ebar_K0 + s eps_K0 f(t)) e^{-(r+delta)t}` without forming `f(t)` on
/// its own, which overflows for long horizons.
pub fn ebar_k_closed(t: f64, p: &ParameterSet) -> f64 {
    let drain = p.growth_rate + p.depreciation;
    let gap = drain - p.new_capital_decline;
    let discounted_f = if gap.abs() < SINGULAR_BRANCH_TOLERANCE {
        t * (-drain * t).exp()
    } else if gap > 0.0 {
        // e^{-alpha t} (1 - e^{-gap t}) / gap
        (-p.new_capital_decline * t).exp() * -(-gap * t).exp_m1() / gap
    } else {
        (-drain * t).exp() * (gap * t).exp_m1() / gap
    };
    p.operating_intensity * (-drain * t).exp()
        + p.savings * p.new_capital_intensity * discounted_f
}

/// Emissions `t` years into a regime whose GDP index was `gdp0` at its start.
pub fn total_emissions(t: f64, p: &ParameterSet, gdp0: f64) -> EmissionsBreakdown {
    let gdp = gdp0 * (p.growth_rate * t).exp();
    let capital = gdp * ebar_k_closed(t, p);
    let consumption =
        gdp * (1.0 - p.savings) * p.consumption_intensity * (-p.consumption_decline * t).exp();
    let investment = gdp * p.savings * p.investment_intensity * (-p.investment_decline * t).exp();
    EmissionsBreakdown::new(capital, consumption, investment)
}
