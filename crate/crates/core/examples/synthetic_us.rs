//! Writes a synthetic, US-shaped input set: sectors.csv, cement.csv and macro.csv.
//!
//! The capital block is generated forward from known parameters, so a fit on
//! these files should land back near them. Nothing here is observed data.
//!
//!     cargo run -p capkaya-core --example synthetic_us -- data/synthetic

use std::fmt::Write as _;
use std::path::PathBuf;

use capkaya_core::integrator::{integrate_ebar_k_ode, NewCapitalPath, RateFunction, YearRates, DEFAULT_STEP};

const FIRST: i32 = 1971;
const REFERENCE: i32 = 2005;

const ALPHA: f64 = 0.009;
const DELTA: f64 = 0.037;
const BETA: f64 = 0.028;
const GAMMA: f64 = 0.020;
/// Component levels in the reference year, MtCO2.
const CAPITAL_2005: f64 = 3059.0;
const CONSUMPTION_2005: f64 = 2123.0;
const INVESTMENT_2005: f64 = 74.0;
const NEW_CAPITAL_2005: f64 = 1029.0;

const CAPITAL_SECTORS: [(&str, f64); 4] = [
    ("Energy sector", 0.70),
    ("Rail transport", 0.012),
    ("Pipeline transport", 0.018),
    ("Manufacturing excl. iron and steel and machinery", 0.27),
];
const CONSUMPTION_SECTORS: [(&str, f64); 5] = [
    ("Air transport", 0.09),
    ("Road transport", 0.56),
    ("Households", 0.17),
    ("Services", 0.12),
    ("Agriculture", 0.06),
];
// Cement goes to its own file.
const CEMENT_SHARE: f64 = 0.45;
const INVESTMENT_SECTORS: [(&str, f64); 2] = [("Iron and steel", 0.35), ("Machinery", 0.20)];

fn growth(year: i32) -> f64 {
    let x = (year - FIRST) as f64;
    let recession = if matches!(year, 1974 | 1975 | 1980 | 1982 | 1991 | 2001) { -0.035 } else { 0.0 };
    0.037 + 0.012 * (x * 0.9).sin() + recession
}

fn savings(year: i32) -> f64 {
    let x = (year - FIRST) as f64;
    0.14 + 0.015 * (x * 0.5).cos() - 0.0006 * (x - 17.0)
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data/synthetic".into()));
    std::fs::create_dir_all(&dir).expect("create output directory");

    // GDP in billions of 2000 dollars, from 1970 so growth covers 1971.
    let mut gdp = vec![(FIRST - 1, 4270.0)];
    for y in FIRST..=REFERENCE {
        let last = gdp.last().unwrap().1;
        gdp.push((y, last * growth(y).exp()));
    }
    let gdp_ref = gdp.last().unwrap().1;
    let index = |y: i32| gdp[(y - FIRST + 1) as usize].1 / gdp_ref;

    let span = (REFERENCE - FIRST) as f64;
    let rates = RateFunction::table(
        (FIRST + 1..=REFERENCE)
            .map(|y| YearRates { growth_rate: growth(y), savings: savings(y) })
            .collect(),
    )
    .unwrap();
    let path = NewCapitalPath::Exponential {
        initial: NEW_CAPITAL_2005 * (ALPHA * span).exp(),
        decline: ALPHA,
    };
    let none = NewCapitalPath::Exponential { initial: 0.0, decline: 0.0 };
    let legacy = integrate_ebar_k_ode(1.0, &rates, &none, DELTA, span, DEFAULT_STEP).unwrap();
    let fed = integrate_ebar_k_ode(0.0, &rates, &path, DELTA, span, DEFAULT_STEP).unwrap();
    let start = (CAPITAL_2005 - fed.last()) / legacy.last();
    let operating = integrate_ebar_k_ode(start, &rates, &path, DELTA, span, DEFAULT_STEP).unwrap();
    let operating: Vec<f64> = operating.annual().into_iter().map(|(_, v)| v).collect();

    let s_ref = savings(REFERENCE);
    let capital = |y: i32| index(y) * operating[(y - FIRST) as usize];
    let consumption = |y: i32| {
        let t = (y - REFERENCE) as f64;
        index(y) * (1.0 - savings(y)) * CONSUMPTION_2005 / (1.0 - s_ref) * (-BETA * t).exp()
    };
    let investment = |y: i32| {
        // Fast decline to 1981, historical rate afterwards.
        let log = if y < 1982 {
            GAMMA * 23.0 - 0.08 * (y - 1982) as f64
        } else {
            -GAMMA * (y - REFERENCE) as f64
        };
        index(y) * savings(y) * INVESTMENT_2005 / s_ref * log.exp()
    };

    let years: Vec<i32> = (FIRST..=REFERENCE).collect();
    let header = |out: &mut String| {
        out.push_str("sector");
        for y in &years {
            let _ = write!(out, ",{y}");
        }
        out.push('\n');
    };
    let row = |out: &mut String, name: &str, f: &dyn Fn(i32) -> f64| {
        out.push_str(&format!("\"{name}\""));
        for &y in &years {
            let _ = write!(out, ",{:.3}", f(y));
        }
        out.push('\n');
    };

    let mut sectors = String::new();
    header(&mut sectors);
    for (name, share) in CAPITAL_SECTORS {
        row(&mut sectors, name, &|y| share * capital(y));
    }
    for (name, share) in CONSUMPTION_SECTORS {
        row(&mut sectors, name, &|y| share * consumption(y));
    }
    for (name, share) in INVESTMENT_SECTORS {
        row(&mut sectors, name, &|y| share * investment(y));
    }
    let mut cement = String::new();
    header(&mut cement);
    row(&mut cement, "Cement", &|y| CEMENT_SHARE * investment(y));

    let mut macro_csv = String::from("year,gdp,savings_rate\n");
    for (y, g) in &gdp {
        let _ = writeln!(macro_csv, "{y},{g:.3},{:.5}", savings(*y));
    }

    for (name, text) in [("sectors.csv", sectors), ("cement.csv", cement), ("macro.csv", macro_csv)] {
        std::fs::write(dir.join(name), text).expect("write fixture");
    }
    let mean = |f: &dyn Fn(i32) -> f64| years.iter().map(|&y| f(y)).sum::<f64>() / years.len() as f64;
    eprintln!(
        "wrote {} (mean r {:.4}, mean s {:.4})",
        dir.display(),
        mean(&growth),
        mean(&savings)
    );
}
