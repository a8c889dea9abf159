//! Synthetic datasets shared by the integration and acceptance tests.
#![allow(dead_code)]

use capkaya_core::ingest::{derive_macro, CalibrationDataset, Components};
use capkaya_core::integrator::{integrate_ebar_k_ode, NewCapitalPath, RateFunction, YearRates, DEFAULT_STEP};
use capkaya_core::series::{TimeSeries, Unit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FIRST_YEAR: i32 = 1971;
pub const REFERENCE_YEAR: i32 = 2005;

/// Ground truth for the capital block, at the reference year.
#[derive(Debug, Clone, Copy)]
pub struct Truth {
    pub decline: f64,
    pub depreciation: f64,
    pub operating_intensity: f64,
    pub new_capital_intensity: f64,
}

pub const TRUTH: Truth = Truth {
    decline: 0.01,
    depreciation: 0.04,
    operating_intensity: 3000.0,
    new_capital_intensity: 1000.0,
};

/// Business-cycle growth around 3.1 % and a slowly falling savings rate.
pub fn growth(year: i32) -> f64 {
    let x = (year - FIRST_YEAR) as f64;
    let recession = if matches!(year, 1974 | 1975 | 1980 | 1982 | 1991 | 2001) { -0.035 } else { 0.0 };
    0.031 + 0.012 * (x * 0.9).sin() + recession
}

pub fn savings(year: i32) -> f64 {
    let x = (year - FIRST_YEAR) as f64;
    0.19 - 0.0015 * x + 0.01 * (x * 0.5).cos()
}

/// Capital emissions by forward RK4 integration of the stock dynamics, so the
/// fixture does not share the quadrature path used by the fit.
pub fn capital_emissions(truth: &Truth, gdp_index: &TimeSeries) -> Vec<f64> {
    let first = gdp_index.start();
    let span = (REFERENCE_YEAR - first) as f64;
    let rates = RateFunction::table(
        (first + 1..=REFERENCE_YEAR)
            .map(|y| YearRates { growth_rate: growth(y), savings: savings(y) })
            .collect(),
    )
    .unwrap();
    let new_capital_start = truth.new_capital_intensity * (truth.decline * span).exp();
    let path = NewCapitalPath::Exponential { initial: new_capital_start, decline: truth.decline };
    let zero = NewCapitalPath::Exponential { initial: 0.0, decline: 0.0 };
    let d = truth.depreciation;
    let legacy = integrate_ebar_k_ode(1.0, &rates, &zero, d, span, DEFAULT_STEP).unwrap();
    let fed = integrate_ebar_k_ode(0.0, &rates, &path, d, span, DEFAULT_STEP).unwrap();
    let operating_start = (truth.operating_intensity - fed.last()) / legacy.last();
    let run = integrate_ebar_k_ode(operating_start, &rates, &path, d, span, DEFAULT_STEP).unwrap();
    run.annual()
        .into_iter()
        .zip(gdp_index.values())
        .map(|((_, e), y)| e * y)
        .collect()
}

/// 35-year dataset (1971-2005) with optional multiplicative Gaussian noise on
/// capital emissions.
pub fn synthetic_dataset(truth: &Truth, noise: f64, seed: u64) -> CalibrationDataset {
    let mut gdp = vec![1.0];
    for y in FIRST_YEAR..=REFERENCE_YEAR {
        let last = *gdp.last().unwrap();
        gdp.push(last * growth(y).exp());
    }
    // GDP from 1970 so that the growth series covers 1971.
    let gdp = TimeSeries::new(FIRST_YEAR - 1, gdp, Unit::Dimensionless);
    let sav = TimeSeries::from_fn(FIRST_YEAR - 1, REFERENCE_YEAR, Unit::Dimensionless, savings);
    let macro_series = derive_macro(&gdp, &sav, REFERENCE_YEAR).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = move || {
        let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let capital: Vec<f64> = capital_emissions(truth, &macro_series.gdp_index)
        .into_iter()
        .map(|e| e * (1.0 + noise * gauss()))
        .collect();
    let y = &macro_series.gdp_index;
    let consumption = TimeSeries::from_fn(FIRST_YEAR, REFERENCE_YEAR, Unit::MtCo2PerYear, |yr| {
        let t = (yr - REFERENCE_YEAR) as f64;
        y.get(yr).unwrap() * (1.0 - savings(yr)) * 2500.0 * (-0.028 * t).exp()
    });
    let investment = TimeSeries::from_fn(FIRST_YEAR, REFERENCE_YEAR, Unit::MtCo2PerYear, |yr| {
        // 8 %/yr decline up to 1982, 2 %/yr afterwards.
        let log = if yr < 1982 {
            0.02 * 23.0 - 0.08 * (yr - 1982) as f64
        } else {
            -0.02 * (yr - REFERENCE_YEAR) as f64
        };
        y.get(yr).unwrap() * savings(yr) * 500.0 * log.exp()
    });
    let components = Components {
        capital: TimeSeries::new(FIRST_YEAR, capital, Unit::MtCo2PerYear),
        consumption,
        investment,
        excluded: TimeSeries::new(FIRST_YEAR, vec![0.0; 35], Unit::MtCo2PerYear),
    };
    CalibrationDataset::assemble(&components, &macro_series, REFERENCE_YEAR).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
