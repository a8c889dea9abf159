//! Parameter estimation from a [`CalibrationDataset`].
//!
//! The capital-stock parameters (new-capital decline rate, depreciation, and the
//! two reference-year intensities) are fitted by minimizing the mean squared
//! deviation between observed capital emissions and `Y(t) ebar_K(t)` from the
//! quadrature solution under historical growth and savings. Consumption and
//! investment decline rates come from log-linear OLS over chosen windows.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::CalibrationDataset;
use crate::integrator::{ebar_k_general, CapitalEmissionsParams, RateFunction, DEFAULT_STEP};
use crate::series::{TimeSeries, Unit};
use crate::simplex::{minimize_with_restarts, SimplexOptions};

/// Upper bound on fitted rates, 1/year.
pub const MAX_RATE: f64 = 0.5;
/// Lower bound on depreciation, 1/year.
pub const MIN_DEPRECIATION: f64 = 1e-4;
/// Fitted intensities are searched in `[0, INTENSITY_SPAN * guess]`.
pub const INTENSITY_SPAN: f64 = 20.0;
pub const MIN_CAPITAL_FIT_YEARS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapitalFit {
    pub decline: f64,
    pub depreciation: f64,
    /// Operating-capital intensity at the reference year.
    pub operating_intensity: f64,
    /// New-capital intensity at the reference year.
    pub new_capital_intensity: f64,
    /// Mean squared deviation, (MtCO2/yr)^2.
    pub residual: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl CapitalFit {
    pub fn params(&self) -> CapitalEmissionsParams {
        CapitalEmissionsParams {
            decline: self.decline,
            depreciation: self.depreciation,
            operating_intensity: self.operating_intensity,
            new_capital_intensity: self.new_capital_intensity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapitalFitOptions {
    pub step: f64,
    pub simplex: SimplexOptions,
}

impl Default for CapitalFitOptions {
    fn default() -> Self {
        Self {
            step: DEFAULT_STEP,
            simplex: SimplexOptions::default(),
        }
    }
}

/// Modelled capital emissions for a dataset and reference-year parameters.
struct CapitalModel<'a> {
    dataset: &'a CalibrationDataset,
    rates: RateFunction,
    /// `e^{-R(t)}` at each dataset year.
    growth_discount: Vec<f64>,
    ref_offset: usize,
    step: f64,
}

impl<'a> CapitalModel<'a> {
    fn new(dataset: &'a CalibrationDataset, step: f64) -> Result<Self> {
        let rates = dataset.rate_function()?;
        let mut growth_discount = vec![1.0];
        let mut acc = 0.0;
        for y in dataset.start() + 1..=dataset.end() {
            acc += dataset.growth.at(y)?;
            growth_discount.push((-acc).exp());
        }
        Ok(Self {
            dataset,
            rates,
            growth_discount,
            ref_offset: (dataset.reference_year - dataset.start()) as usize,
            step,
        })
    }

    /// Operating-capital intensity per dataset year.
    fn intensity_path(&self, p: &CapitalEmissionsParams) -> Result<Vec<f64>> {
        let span = (self.dataset.end() - self.dataset.start()) as f64;
        // Response to unit new-capital intensity at the first dataset year.
        let unit = ebar_k_general(
            span,
            &self.rates,
            &CapitalEmissionsParams {
                operating_intensity: 0.0,
                new_capital_intensity: 1.0,
                ..*p
            },
            self.step,
        )?;
        let response: Vec<f64> = unit.annual().into_iter().map(|(_, v)| v).collect();
        let legacy: Vec<f64> = self
            .growth_discount
            .iter()
            .enumerate()
            .map(|(i, g)| g * (-p.depreciation * i as f64).exp())
            .collect();
        let k = self.ref_offset;
        // Rewind the reference-year intensities to the first dataset year.
        let new_capital_start = p.new_capital_intensity * (p.decline * k as f64).exp();
        let operating_start =
            (p.operating_intensity - new_capital_start * response[k]) / legacy[k];
        Ok(legacy
            .iter()
            .zip(&response)
            .map(|(l, r)| operating_start * l + new_capital_start * r)
            .collect())
    }

    fn modelled(&self, p: &CapitalEmissionsParams) -> Result<Vec<f64>> {
        Ok(self
            .intensity_path(p)?
            .iter()
            .zip(self.dataset.gdp_index.values())
            .map(|(e, y)| e * y)
            .collect())
    }

    fn msd(&self, p: &CapitalEmissionsParams) -> f64 {
        match self.modelled(p) {
            Ok(m) => {
                let obs = self.dataset.capital.values();
                m.iter().zip(obs).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / obs.len() as f64
            }
            Err(_) => f64::INFINITY,
        }
    }
}

/// Observed and modelled capital emissions per year: `(year, observed, modelled)`.
pub fn capital_fit_table(
    dataset: &CalibrationDataset,
    fit: &CapitalFit,
    step: f64,
) -> Result<Vec<(i32, f64, f64)>> {
    let model = CapitalModel::new(dataset, step)?;
    let modelled = model.modelled(&fit.params())?;
    Ok(dataset
        .capital
        .iter()
        .zip(modelled)
        .map(|((y, o), m)| (y, o, m))
        .collect())
}

/// Mean squared deviation of the capital-emissions model at `params`.
pub fn capital_residual(
    dataset: &CalibrationDataset,
    params: &CapitalEmissionsParams,
    step: f64,
) -> Result<f64> {
    Ok(CapitalModel::new(dataset, step)?.msd(params))
}

pub fn fit_capital(
    dataset: &CalibrationDataset,
    guess: &CapitalEmissionsParams,
    options: &CapitalFitOptions,
) -> Result<CapitalFit> {
    if dataset.capital.len() < MIN_CAPITAL_FIT_YEARS {
        return Err(Error::InvalidInput(format!(
            "capital fit needs at least {MIN_CAPITAL_FIT_YEARS} years, dataset has {}",
            dataset.capital.len()
        )));
    }
    let rate_ok = |r: f64| r > 0.0 && r < MAX_RATE;
    if !rate_ok(guess.decline)
        || !rate_ok(guess.depreciation)
        || !(guess.operating_intensity > 0.0)
        || !(guess.new_capital_intensity > 0.0)
    {
        return Err(Error::InvalidInput(format!(
            "initial guess out of bounds: {guess:?}"
        )));
    }

    let model = CapitalModel::new(dataset, options.step)?;
    let lower = [0.0, MIN_DEPRECIATION, 0.0, 0.0];
    let upper = [
        MAX_RATE,
        MAX_RATE,
        INTENSITY_SPAN * guess.operating_intensity,
        INTENSITY_SPAN * guess.new_capital_intensity,
    ];
    let to_params = |u: &[f64]| {
        let v: Vec<f64> = (0..4).map(|i| lower[i] + u[i] * (upper[i] - lower[i])).collect();
        CapitalEmissionsParams {
            decline: v[0],
            depreciation: v[1],
            operating_intensity: v[2],
            new_capital_intensity: v[3],
        }
    };
    let g = [
        guess.decline,
        guess.depreciation,
        guess.operating_intensity,
        guess.new_capital_intensity,
    ];
    let start: Vec<f64> = (0..4).map(|i| (g[i] - lower[i]) / (upper[i] - lower[i])).collect();

    let result = minimize_with_restarts(|u| model.msd(&to_params(u)), &start, &options.simplex);
    let p = to_params(&result.point);
    Ok(CapitalFit {
        decline: p.decline,
        depreciation: p.depreciation,
        operating_intensity: p.operating_intensity,
        new_capital_intensity: p.new_capital_intensity,
        residual: result.value,
        evaluations: result.evaluations,
        converged: result.converged && result.value.is_finite(),
    })
}

/// Log-linear trend over a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeclineFit {
    /// Negated OLS slope of `ln(value)` on year, 1/year.
    pub rate: f64,
    /// Fitted `ln(value)` at the window's last year.
    pub intercept: f64,
    pub window: (i32, i32),
    /// Coefficient of determination; 1 when the data have no variance.
    pub r_squared: f64,
}

pub fn fit_log_decline(series: &TimeSeries, window: (i32, i32)) -> Result<DeclineFit> {
    let (from, to) = window;
    if to - from + 1 < 3 {
        return Err(Error::InvalidInput(format!(
            "window {from}-{to} has fewer than 3 years"
        )));
    }
    let data = series.slice(from, to).map_err(|_| {
        Error::InvalidInput(format!(
            "window {from}-{to} outside data span {}-{}",
            series.start(),
            series.end()
        ))
    })?;
    let mut xs = Vec::with_capacity(data.len());
    let mut ys = Vec::with_capacity(data.len());
    for (year, v) in data.iter() {
        if !(v > 0.0) {
            return Err(Error::NonPositiveValue { year, value: v });
        }
        xs.push((year - to) as f64);
        ys.push(v.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy <= f64::EPSILON * f64::EPSILON * n {
        1.0
    } else {
        1.0 - ss_res / syy
    };
    Ok(DeclineFit {
        rate: -slope,
        intercept,
        window,
        r_squared,
    })
}

pub fn breakpoint_report(series: &TimeSeries, windows: &[(i32, i32)]) -> Result<Vec<DeclineFit>> {
    windows.iter().map(|&w| fit_log_decline(series, w)).collect()
}

/// Consumption emissions per unit of consumption, `E_C / ((1 - s) Y)`.
pub fn consumption_intensity(ds: &CalibrationDataset) -> TimeSeries {
    TimeSeries::from_fn(ds.start(), ds.end(), Unit::MtCo2, |y| {
        let s = ds.savings.get(y).unwrap();
        ds.consumption.get(y).unwrap() / ((1.0 - s) * ds.gdp_index.get(y).unwrap())
    })
}

/// Investment emissions per unit of investment, `E_I / (s Y)`.
pub fn investment_intensity(ds: &CalibrationDataset) -> TimeSeries {
    TimeSeries::from_fn(ds.start(), ds.end(), Unit::MtCo2, |y| {
        let s = ds.savings.get(y).unwrap();
        ds.investment.get(y).unwrap() / (s * ds.gdp_index.get(y).unwrap())
    })
}

/// Which series the consumption decline rate is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeclineBasis {
    /// `E_C / ((1 - s) Y)`.
    #[default]
    Intensity,
    /// Raw `E_C`.
    Emissions,
}

impl DeclineBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            DeclineBasis::Intensity => "intensity",
            DeclineBasis::Emissions => "emissions",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOptions {
    pub capital: CapitalFitOptions,
    pub guess: CapitalEmissionsParams,
    /// Defaults to the full dataset span.
    pub consumption_window: Option<(i32, i32)>,
    pub investment_window: (i32, i32),
    pub consumption_basis: DeclineBasis,
    /// Extra windows fitted on investment intensity for inspection.
    pub breakpoint_windows: Vec<(i32, i32)>,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            capital: CapitalFitOptions::default(),
            guess: CapitalEmissionsParams {
                decline: 0.02,
                depreciation: 0.05,
                operating_intensity: 3000.0,
                new_capital_intensity: 1000.0,
            },
            consumption_window: None,
            investment_window: (1982, 2005),
            consumption_basis: DeclineBasis::Intensity,
            breakpoint_windows: vec![(1971, 1981), (1982, 2005)],
        }
    }
}

/// Full calibration output; serializes to a flat `key = value` text file.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub reference_year: i32,
    pub span: (i32, i32),
    pub capital: CapitalFit,
    pub consumption: DeclineFit,
    pub consumption_basis: DeclineBasis,
    pub investment: DeclineFit,
    pub breakpoints: Vec<DeclineFit>,
    /// Mean historical growth rate over the dataset.
    pub growth_rate: f64,
    /// Mean historical savings rate over the dataset.
    pub savings: f64,
    /// Component emissions at the reference year, MtCO2/yr.
    pub reference_emissions: [f64; 3],
    pub seed: u64,
}

/// Runs the capital fit, both decline fits and the breakpoint table.
///
/// Windows that fall outside the dataset are clipped to it; breakpoint windows
/// left with fewer than three years are dropped.
pub fn calibrate(ds: &CalibrationDataset, options: &CalibrationOptions) -> Result<FitReport> {
    let clip = |(a, b): (i32, i32)| (a.max(ds.start()), b.min(ds.end()));
    let capital = fit_capital(ds, &options.guess, &options.capital)?;

    let consumption_series = match options.consumption_basis {
        DeclineBasis::Intensity => consumption_intensity(ds),
        DeclineBasis::Emissions => ds.consumption.clone(),
    };
    let consumption_window = clip(options.consumption_window.unwrap_or((ds.start(), ds.end())));
    let consumption = fit_log_decline(&consumption_series, consumption_window)?;

    let investment_series = investment_intensity(ds);
    let investment = fit_log_decline(&investment_series, clip(options.investment_window))?;
    let windows: Vec<(i32, i32)> = options
        .breakpoint_windows
        .iter()
        .map(|&w| clip(w))
        .filter(|(a, b)| b - a + 1 >= 3)
        .collect();
    let breakpoints = breakpoint_report(&investment_series, &windows)?;

    let r = ds.reference_year;
    Ok(FitReport {
        reference_year: r,
        span: (ds.start(), ds.end()),
        capital,
        consumption,
        consumption_basis: options.consumption_basis,
        investment,
        breakpoints,
        growth_rate: ds.growth.mean(),
        savings: ds.savings.mean(),
        reference_emissions: [ds.capital.at(r)?, ds.consumption.at(r)?, ds.investment.at(r)?],
        seed: options.capital.simplex.seed,
    })
}

impl FitReport {
    pub fn to_text(&self) -> String {
        let mut out = String::from("# capital-extended Kaya fit report\n");
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("reference_year", self.reference_year.to_string());
        kv("span_start", self.span.0.to_string());
        kv("span_end", self.span.1.to_string());
        kv("alpha", self.capital.decline.to_string());
        kv("delta", self.capital.depreciation.to_string());
        kv("ebar_k0", self.capital.operating_intensity.to_string());
        kv("eps_k0", self.capital.new_capital_intensity.to_string());
        kv("residual_msd", self.capital.residual.to_string());
        kv("evaluations", self.capital.evaluations.to_string());
        kv("converged", self.capital.converged.to_string());
        kv("seed", self.seed.to_string());
        kv("beta", self.consumption.rate.to_string());
        kv("beta_basis", self.consumption_basis.as_str().to_string());
        kv("beta_window", format!("{}-{}", self.consumption.window.0, self.consumption.window.1));
        kv("beta_r2", self.consumption.r_squared.to_string());
        kv("gamma", self.investment.rate.to_string());
        kv("gamma_window", format!("{}-{}", self.investment.window.0, self.investment.window.1));
        kv("gamma_r2", self.investment.r_squared.to_string());
        kv("r", self.growth_rate.to_string());
        kv("s", self.savings.to_string());
        kv("e_capital_ref", self.reference_emissions[0].to_string());
        kv("e_consumption_ref", self.reference_emissions[1].to_string());
        kv("e_investment_ref", self.reference_emissions[2].to_string());
        for b in &self.breakpoints {
            let key = format!("window.{}-{}", b.window.0, b.window.1);
            kv(&format!("{key}.rate"), b.rate.to_string());
            kv(&format!("{key}.r2"), b.r_squared.to_string());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::FitReport(format!("line {}: expected `key = value`", i + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| {
            map.get(k)
                .ok_or_else(|| Error::FitReport(format!("missing key `{k}`")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|_| Error::FitReport(format!("`{k}` is not a number")))
        };
        let int = |k: &str| -> Result<i64> {
            get(k)?
                .parse()
                .map_err(|_| Error::FitReport(format!("`{k}` is not an integer")))
        };
        let window = |s: &str| -> Result<(i32, i32)> {
            let (a, b) = s
                .split_once('-')
                .ok_or_else(|| Error::FitReport(format!("bad window `{s}`")))?;
            let p = |x: &str| {
                x.parse::<i32>()
                    .map_err(|_| Error::FitReport(format!("bad window `{s}`")))
            };
            Ok((p(a)?, p(b)?))
        };

        let mut breakpoints = Vec::new();
        for (k, v) in &map {
            if let Some(w) = k.strip_prefix("window.").and_then(|k| k.strip_suffix(".rate")) {
                let rate = v
                    .parse()
                    .map_err(|_| Error::FitReport(format!("`{k}` is not a number")))?;
                breakpoints.push(DeclineFit {
                    rate,
                    intercept: f64::NAN,
                    window: window(w)?,
                    r_squared: num(&format!("window.{w}.r2"))?,
                });
            }
        }
        breakpoints.sort_by_key(|b| b.window);

        let basis = match get("beta_basis")?.as_str() {
            "intensity" => DeclineBasis::Intensity,
            "emissions" => DeclineBasis::Emissions,
            other => return Err(Error::FitReport(format!("unknown beta_basis `{other}`"))),
        };
        Ok(FitReport {
            reference_year: int("reference_year")? as i32,
            span: (int("span_start")? as i32, int("span_end")? as i32),
            capital: CapitalFit {
                decline: num("alpha")?,
                depreciation: num("delta")?,
                operating_intensity: num("ebar_k0")?,
                new_capital_intensity: num("eps_k0")?,
                residual: num("residual_msd")?,
                evaluations: int("evaluations")? as usize,
                converged: get("converged")? == "true",
            },
            consumption: DeclineFit {
                rate: num("beta")?,
                intercept: f64::NAN,
                window: window(get("beta_window")?)?,
                r_squared: num("beta_r2")?,
            },
            consumption_basis: basis,
            investment: DeclineFit {
                rate: num("gamma")?,
                intercept: f64::NAN,
                window: window(get("gamma_window")?)?,
                r_squared: num("gamma_r2")?,
            },
            breakpoints,
            growth_rate: num("r")?,
            savings: num("s")?,
            reference_emissions: [
                num("e_capital_ref")?,
                num("e_consumption_ref")?,
                num("e_investment_ref")?,
            ],
            seed: int("seed")? as u64,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_has_zero_rate() {
        let s = TimeSeries::new(2000, vec![7.0; 6], Unit::MtCo2);
        let f = fit_log_decline(&s, (2000, 2005)).unwrap();
        assert!(f.rate.abs() < 1e-15);
        assert_eq!(f.r_squared, 1.0);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn exact_exponential_recovers_rate() {
        let s = TimeSeries::from_fn(1971, 2005, Unit::MtCo2, |y| 900.0 * (-0.05 * (y - 1971) as f64).exp());
        let f = fit_log_decline(&s, (1971, 2005)).unwrap();
        assert!((f.rate - 0.05).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decline_fit_errors() {
        let s = TimeSeries::new(2000, vec![1.0, 2.0, 0.0, 4.0], Unit::MtCo2);
        assert!(matches!(
            fit_log_decline(&s, (2000, 2003)),
            Err(Error::NonPositiveValue { year: 2002, .. })
        ));
        assert!(fit_log_decline(&s, (2000, 2001)).is_err());
        assert!(fit_log_decline(&s, (1999, 2002)).is_err());
    }

    fn two_regime() -> TimeSeries {
        // Rate 0.08 for years 0..=10, 0.02 afterwards; continuous at the break.
        TimeSeries::from_fn(1971, 2005, Unit::MtCo2, |y| {
            let t = (y - 1971) as f64;
            let log = if t <= 10.0 { -0.08 * t } else { -0.8 - 0.02 * (t - 10.0) };
            500.0 * log.exp()
        })
    }

    #[test]
    fn breakpoint_windows_recover_each_regime() {
        let s = two_regime();
        let fits = breakpoint_report(&s, &[(1971, 1981), (1982, 2005)]).unwrap();
        assert!((fits[0].rate - 0.08).abs() < 1e-6);
        assert!((fits[1].rate - 0.02).abs() < 1e-6);
        let all = fit_log_decline(&s, (1971, 2005)).unwrap();
        assert!(all.rate > 0.02 && all.rate < 0.08);
        assert!(breakpoint_report(&s, &[]).unwrap().is_empty());
    }

    #[test]
    fn report_text_round_trips() {
        let report = FitReport {
            reference_year: 2005,
            span: (1972, 2005),
            capital: CapitalFit {
                decline: 0.009,
                depreciation: 0.037,
                operating_intensity: 3059.0,
                new_capital_intensity: 1029.0,
                residual: 123.25,
                evaluations: 4321,
                converged: true,
            },
            consumption: DeclineFit {
                rate: 0.028,
                intercept: f64::NAN,
                window: (1972, 2005),
                r_squared: 0.9,
            },
            consumption_basis: DeclineBasis::Emissions,
            investment: DeclineFit {
                rate: 0.02,
                intercept: f64::NAN,
                window: (1982, 2005),
                r_squared: 0.8,
            },
            breakpoints: vec![DeclineFit {
                rate: 0.07,
                intercept: f64::NAN,
                window: (1972, 1981),
                r_squared: 0.95,
            }],
            growth_rate: 0.031,
            savings: 0.14,
            reference_emissions: [3059.0, 2123.0, 74.0],
            seed: 7,
        };
        let text = report.to_text();
        let back = FitReport::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.capital, report.capital);
        assert!(FitReport::from_text("alpha = 1\n").is_err());
        assert!(FitReport::from_text("garbage line\n").is_err());
    }
}
