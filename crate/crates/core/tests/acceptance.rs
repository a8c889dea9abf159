//! Acceptance checks, one line per criterion. Run with
//! `cargo test -p capkaya-core --test acceptance`.
//!
//! Criteria 7 and 9 need data that is not bundled:
//! - `CAPKAYA_BASELINE_1990`: US total emissions in 1990, MtCO2.
//! - `CAPKAYA_US_DATASET`: a dataset bundle written by `capkaya ingest` from the
//!   1971-2005 US sources.
//!
//! `CAPKAYA_TOTAL_2005` overrides the 2005 total used by criteria 6 to 8.

mod common;

use std::time::Instant;

use capkaya_core::calibrate::{calibrate, fit_capital, CalibrationOptions, CapitalFitOptions};
use capkaya_core::ingest::CalibrationDataset;
use capkaya_core::integrator::{
    ebar_k_general, integrate_ebar_k_ode, CapitalEmissionsParams, NewCapitalPath, RateFunction, DEFAULT_STEP,
};
use capkaya_core::model::{ebar_k_closed, f_of_t, factor_rate, implied_savings, k_infinity, ParameterSet};
use capkaya_core::scenario::{named_plan, project, relative_report, RegimeSeed, Trajectory, PLAN_NAMES};
use common::{rel, synthetic_dataset, TRUTH};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(pass: bool, detail: String) -> Outcome {
    if pass {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn env_f64(key: &str) -> Option<f64> {
    std::env::var(key).ok().and_then(|v| v.trim().parse().ok())
}

fn total_2005() -> f64 {
    env_f64("CAPKAYA_TOTAL_2005").unwrap_or(5256.0)
}

/// Fitted US values with the 2005 total split 58.2 / 40.4 / 1.4 %.
fn us_seed() -> RegimeSeed {
    let total = total_2005();
    RegimeSeed {
        reference_year: 2005,
        growth_rate: 0.031,
        depreciation: 0.037,
        savings: 0.14,
        new_capital_decline: 0.009,
        consumption_decline: 0.028,
        investment_decline: 0.020,
        new_capital_intensity: 1029.0,
        levels: [0.582 * total, 0.404 * total, 0.014 * total],
    }
}

fn us_trajectories() -> Vec<Trajectory> {
    let seed = us_seed();
    PLAN_NAMES
        .iter()
        .map(|n| project(&named_plan(n, &seed).expect("bundled plan")).expect("projection"))
        .collect()
}

fn implied_savings_rates() -> Outcome {
    let k = k_infinity(0.14, 0.031, 0.037).unwrap();
    let got = [
        implied_savings(k, 0.031, 0.037).unwrap(),
        implied_savings(k, 0.031, 0.10).unwrap(),
        implied_savings(1.5 * k, 0.0, 0.10).unwrap(),
    ]
    .map(|s| 100.0 * s);
    let target = [14.0, 27.0, 31.0];
    let pass = got.iter().zip(target).all(|(g, t)| (g - t).abs() <= 0.5);
    check(
        pass,
        format!("{:.2} / {:.2} / {:.2} % vs 14 / 27 / 31 +- 0.5", got[0], got[1], got[2]),
    )
}

fn factor_ten() -> Outcome {
    let a = 100.0 * factor_rate(10.0, 40.0).unwrap();
    let b = 100.0 * factor_rate(10.0, 20.0).unwrap();
    let round = |x: f64| (x * 10.0).round() / 10.0;
    check(
        round(a) == 5.6 && round(b) == 10.9,
        format!("factor 10 in 40 y = {a:.4} %, in 20 y = {b:.4} %"),
    )
}

fn closed_form_equivalence() -> Outcome {
    let start = Instant::now();
    let (r, s) = (0.031, 0.14);
    let params = CapitalEmissionsParams {
        decline: 0.009,
        depreciation: 0.037,
        operating_intensity: 3059.0,
        new_capital_intensity: 1029.0,
    };
    let set = ParameterSet {
        growth_rate: r,
        depreciation: params.depreciation,
        savings: s,
        k_infty: None,
        new_capital_decline: params.decline,
        consumption_decline: 0.0,
        investment_decline: 0.0,
        operating_intensity: params.operating_intensity,
        new_capital_intensity: params.new_capital_intensity,
        consumption_intensity: 0.0,
        investment_intensity: 0.0,
    };
    let rates = RateFunction::constant(r, s).unwrap();
    let quad = ebar_k_general(45.0, &rates, &params, DEFAULT_STEP).unwrap();
    let path = NewCapitalPath::Exponential { initial: params.new_capital_intensity, decline: params.decline };
    let ode = integrate_ebar_k_ode(params.operating_intensity, &rates, &path, params.depreciation, 45.0, DEFAULT_STEP)
        .unwrap();
    let mut worst: f64 = 0.0;
    for ((t, q), (_, o)) in quad.annual().into_iter().zip(ode.annual()) {
        let c = ebar_k_closed(t, &set);
        worst = worst.max(rel(q, c)).max(rel(o, c)).max(rel(q, o));
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        worst < 1e-5 && elapsed < 1.0,
        format!("max relative difference {worst:.2e} over 45 y at monthly steps, {elapsed:.3} s"),
    )
}

fn singular_branch() -> Outcome {
    let (r, delta) = (0.031, 0.037);
    let mut worst: f64 = 0.0;
    let mut t = 0.5;
    while t <= 100.0 {
        let reference = f_of_t(t, r, delta, r + delta);
        // Sweep through +-1e-9 and across the branch edge on both sides.
        for gap in [-1e-9, -5e-10, -1e-12, 0.0, 1e-12, 5e-10, 1e-9, -1.0001e-8, -0.9999e-8, 0.9999e-8, 1.0001e-8] {
            let v = f_of_t(t, r, delta, r + delta - gap);
            worst = worst.max((v - reference).abs() / t);
        }
        t += 0.5;
    }
    check(worst < 1e-6, format!("max |change| / t = {worst:.2e} for t <= 100"))
}

fn parameter_recovery() -> Outcome {
    let start = Instant::now();
    let guess = CalibrationOptions::default().guess;
    let opts = CapitalFitOptions::default();
    let truth = [TRUTH.decline, TRUTH.depreciation, TRUTH.operating_intensity, TRUTH.new_capital_intensity];
    let errors = |f: &capkaya_core::calibrate::CapitalFit| {
        let got = [f.decline, f.depreciation, f.operating_intensity, f.new_capital_intensity];
        got.iter().zip(truth).map(|(g, t)| rel(*g, t)).collect::<Vec<_>>()
    };

    let clean = fit_capital(&synthetic_dataset(&TRUTH, 0.0, 0), &guess, &opts).unwrap();
    let clean_err = errors(&clean).into_iter().fold(0.0, f64::max);

    let mut sums = [0.0; 4];
    let mut worst_run: f64 = 0.0;
    let runs = 20;
    for seed in 0..runs {
        let f = fit_capital(&synthetic_dataset(&TRUTH, 0.01, 100 + seed), &guess, &opts).unwrap();
        for (s, v) in sums.iter_mut().zip([f.decline, f.depreciation, f.operating_intensity, f.new_capital_intensity]) {
            *s += v;
        }
        worst_run = worst_run.max(errors(&f).into_iter().fold(0.0, f64::max));
    }
    let ensemble_err = sums
        .iter()
        .zip(truth)
        .map(|(s, t)| rel(s / runs as f64, t))
        .fold(0.0, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    check(
        clean_err < 0.05 && ensemble_err < 0.15 && elapsed < 30.0,
        format!(
            "noise-free max error {:.2} %; 1 % noise, mean of {runs} seeded fits max error {:.1} % \
             (worst single run {:.0} %); {elapsed:.1} s",
            100.0 * clean_err,
            100.0 * ensemble_err,
            100.0 * worst_run
        ),
    )
}

fn extrapolation_endpoint() -> Outcome {
    let t = project(&named_plan("extrapolation", &us_seed()).unwrap()).unwrap();
    let e = t.at(2050).unwrap().emissions.total;
    check(
        (8500.0..=10000.0).contains(&e),
        format!("2050 total {:.0} Mt from a 2005 total of {:.0} Mt", e, total_2005()),
    )
}

fn scenario_endpoints() -> Outcome {
    let Some(baseline) = env_f64("CAPKAYA_BASELINE_1990") else {
        return Outcome::Skip("CAPKAYA_BASELINE_1990 not set; criterion 8 stands in".into());
    };
    let targets = [71.0, 30.0, 14.0, 6.0];
    let trajectories = us_trajectories();
    let mut pass = true;
    let mut parts = Vec::new();
    for (t, target) in trajectories[1..].iter().zip(targets) {
        let pct = match relative_report(t, baseline, 1990) {
            Ok(r) => r.percent_at(2050).unwrap(),
            Err(e) => return Outcome::Fail(e.to_string()),
        };
        pass &= (pct - target).abs() <= 5.0;
        parts.push(format!("{pct:.1} (target {target})"));
    }
    check(pass, format!("% of {baseline} Mt: {}", parts.join(", ")))
}

fn property_fallback() -> Outcome {
    let start = Instant::now();
    let trajectories = us_trajectories();
    let at_2050: Vec<f64> = trajectories.iter().map(|t| t.at(2050).unwrap().emissions.total).collect();
    let ordered = at_2050[1..].windows(2).all(|w| w[0] > w[1]) && at_2050[0] > at_2050[1];

    let conserved = trajectories.iter().all(|t| {
        t.records.iter().all(|r| {
            let e = r.emissions;
            e.total == e.capital + e.consumption + e.investment
        })
    });

    // Total emissions at the switch for plans that keep s; the carried state and
    // capital emissions for every plan.
    let mut total_jump: f64 = 0.0;
    let mut capital_jump: f64 = 0.0;
    let seed = us_seed();
    for (name, t) in PLAN_NAMES.iter().zip(&trajectories) {
        let plan = named_plan(name, &seed).unwrap();
        let b = t.boundaries[0];
        capital_jump = capital_jump.max(rel(b.after.capital, b.before.capital));
        if plan.regimes[0].rates.savings == plan.regimes[1].rates.savings {
            total_jump = total_jump.max(rel(b.after.total, b.before.total));
        }
    }
    let continuous = total_jump < 1e-9 && capital_jump < 1e-9;

    let aggressive = &trajectories[2];
    let ratio = aggressive.at(2050).unwrap().emissions.capital / aggressive.at(2010).unwrap().emissions.capital;
    let floor = (-0.109f64 * 40.0).exp();
    let elapsed = start.elapsed().as_secs_f64();
    check(
        ordered && conserved && continuous && ratio > floor && elapsed < 5.0,
        format!(
            "2050 Gt {}; conservation {}; 2010 jump total {total_jump:.1e} (s unchanged), \
             capital {capital_jump:.1e}; E_K 2050/2010 {ratio:.3} > {floor:.3}",
            at_2050.iter().map(|e| format!("{:.2}", e / 1000.0)).collect::<Vec<_>>().join(" > "),
            if conserved { "exact" } else { "broken" },
        ),
    )
}

fn us_refit() -> Outcome {
    let Ok(path) = std::env::var("CAPKAYA_US_DATASET") else {
        return Outcome::Skip("CAPKAYA_US_DATASET not set; source vintages are not bundled".into());
    };
    let ds = match CalibrationDataset::load(&path) {
        Ok(ds) => ds,
        Err(e) => return Outcome::Fail(format!("{path}: {e}")),
    };
    let report = match calibrate(&ds, &CalibrationOptions::default()) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let c = &report.capital;
    let pairs = [
        ("alpha", c.decline, 0.009),
        ("delta", c.depreciation, 0.037),
        ("ebar_K0", c.operating_intensity, 3059.0),
        ("eps_K0", c.new_capital_intensity, 1029.0),
        ("beta", report.consumption.rate, 0.028),
        ("gamma", report.investment.rate, 0.020),
    ];
    let pass = pairs.iter().all(|(_, g, t)| rel(*g, *t) <= 0.2);
    let detail = pairs
        .iter()
        .map(|(k, g, t)| format!("{k} {:+.0}%", 100.0 * (g - t) / t))
        .collect::<Vec<_>>()
        .join(", ");
    check(pass, detail)
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("implied savings", implied_savings_rates),
        ("factor-10 conversion", factor_ten),
        ("closed form vs quadrature vs ODE", closed_form_equivalence),
        ("singular branch continuity", singular_branch),
        ("synthetic parameter recovery", parameter_recovery),
        ("extrapolation endpoint", extrapolation_endpoint),
        ("scenario endpoints vs 1990", scenario_endpoints),
        ("scenario properties", property_fallback),
        ("US re-fit within 20%", us_refit),
    ];
    let (mut passed, mut failed, mut skipped) = (0, 0, 0);
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (tag, detail) = match run() {
            Outcome::Pass(d) => {
                passed += 1;
                ("PASS", d)
            }
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => {
                skipped += 1;
                ("SKIP", d)
            }
        };
        println!("[{tag}] {}. {name}: {detail}", i + 1);
    }
    println!("acceptance: {passed} passed, {failed} failed, {skipped} skipped");
    if failed > 0 {
        std::process::exit(1);
    }
}
