use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use capkaya_core::calibrate::{calibrate, capital_fit_table, CalibrationOptions, DeclineBasis, FitReport};
use capkaya_core::ingest::{
    build_components, derive_macro, load_macro_csv, load_sector_csv, CalibrationDataset, ProxyMapping,
};
use capkaya_core::scenario::{
    bundled_definition, named_plan, project, relative_report, RegimeSeed, ScenarioDefinition,
    ScenarioPlan, Trajectory, PLAN_NAMES,
};
use capkaya_core::Error;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::failure::Failure;
use crate::manifest::Manifest;

/// Directory that relative paths in manifests are shown against.
pub struct Context {
    pub config: RunConfig,
    pub root: PathBuf,
}

impl Context {
    fn write(&self, manifest: &mut Manifest, path: &Path, text: &str) -> Result<(), Failure> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        }
        std::fs::write(path, text).map_err(|e| Failure::io(path, e))?;
        manifest.output(&self.root, path, text.as_bytes());
        Ok(())
    }

    fn load_dataset(&self) -> Result<CalibrationDataset, Failure> {
        let path = self.config.dataset_path();
        if !path.is_file() {
            return Err(Failure::data(format!(
                "no dataset bundle at {}; run `capkaya ingest` first",
                path.display()
            )));
        }
        let ds = CalibrationDataset::load(&path)?;
        if ds.reference_year != self.config.reference_year {
            return Err(Failure::config(format!(
                "dataset was ingested with reference year {}, config asks for {}; rerun ingest",
                ds.reference_year, self.config.reference_year
            )));
        }
        Ok(ds)
    }

    fn load_report(&self) -> Result<FitReport, Failure> {
        let path = self.config.fit_report_path();
        if !path.is_file() {
            return Err(Failure::data(format!(
                "no fit report at {}; run `capkaya fit` first",
                path.display()
            )));
        }
        Ok(FitReport::load(&path)?)
    }
}

pub fn ingest(ctx: &Context) -> Result<(), Failure> {
    let cfg = &ctx.config;
    let mut manifest = Manifest::new("ingest");

    let sectors = load_sector_csv(&cfg.sectors)?;
    if sectors.is_empty() {
        return Err(Failure::data(format!("{}: no sector rows", cfg.sectors.display())));
    }
    manifest.input(&ctx.root, &cfg.sectors)?;

    let cement = match &cfg.cement {
        Some(path) => {
            let mut rows = load_sector_csv(path)?;
            if rows.len() != 1 {
                return Err(Failure::data(format!(
                    "{}: expected exactly one cement row, found {}",
                    path.display(),
                    rows.len()
                )));
            }
            manifest.input(&ctx.root, path)?;
            rows.pop()
        }
        None => None,
    };

    let mapping = match &cfg.mapping {
        Some(path) => {
            manifest.input(&ctx.root, path)?;
            ProxyMapping::load(path)?
        }
        None => {
            manifest.builtin_input("builtin:default_mapping.toml", ProxyMapping::DEFAULT_US);
            ProxyMapping::default_us()
        }
    };

    let components = build_components(&sectors, &mapping, cement.as_ref())?;
    let (gdp, savings) = load_macro_csv(&cfg.macro_series)?;
    manifest.input(&ctx.root, &cfg.macro_series)?;
    let macro_series = derive_macro(&gdp, &savings, cfg.reference_year)?;
    let ds = CalibrationDataset::assemble(&components, &macro_series, cfg.reference_year)?;

    manifest.param("reference_year", cfg.reference_year);
    ctx.write(&mut manifest, &cfg.dataset_path(), &ds.to_csv_string())?;
    manifest.write(&cfg.output)?;

    let shares = components.shares(cfg.reference_year)?;
    println!(
        "dataset {}-{} written to {}",
        ds.start(),
        ds.end(),
        cfg.dataset_path().display()
    );
    println!(
        "{} shares: capital {:.1}%  consumption {:.1}%  investment {:.1}%  (total {:.1} Mt)",
        cfg.reference_year,
        shares[0],
        shares[1],
        shares[2],
        ds.total(cfg.reference_year)?
    );
    Ok(())
}

pub fn fit(ctx: &Context) -> Result<(), Failure> {
    let cfg = &ctx.config;
    let ds = ctx.load_dataset()?;
    let mut manifest = Manifest::new("fit");
    manifest.input(&ctx.root, &cfg.dataset_path())?;

    let mut options = CalibrationOptions::default();
    options.capital.step = cfg.step;
    options.capital.simplex.seed = cfg.seed;
    if cfg.beta_on_emissions {
        options.consumption_basis = DeclineBasis::Emissions;
    }
    let report = calibrate(&ds, &options)?;
    if !report.capital.converged {
        return Err(Error::NotConverged {
            evaluations: report.capital.evaluations,
            residual: report.capital.residual,
        }
        .into());
    }

    manifest.param("step", cfg.step);
    manifest.param("seed", cfg.seed);
    manifest.param("beta_basis", report.consumption_basis.as_str());
    ctx.write(&mut manifest, &cfg.fit_report_path(), &report.to_text())?;

    let mut table = String::from("year,observed,modelled\n");
    for (y, o, m) in capital_fit_table(&ds, &report.capital, cfg.step)? {
        let _ = writeln!(table, "{y},{o:.3},{m:.3}");
    }
    ctx.write(&mut manifest, &cfg.output.join("capital_fit.csv"), &table)?;
    manifest.write(&cfg.output)?;

    let c = &report.capital;
    println!(
        "alpha {:.2}%/yr  delta {:.2}%/yr  ebar_K0 {:.1}  eps_K0 {:.1}  (msd {:.3e}, {} evaluations)",
        100.0 * c.decline,
        100.0 * c.depreciation,
        c.operating_intensity,
        c.new_capital_intensity,
        c.residual,
        c.evaluations
    );
    println!(
        "beta {:.2}%/yr ({}, R2 {:.3})  gamma {:.2}%/yr (R2 {:.3})",
        100.0 * report.consumption.rate,
        report.consumption_basis.as_str(),
        report.consumption.r_squared,
        100.0 * report.investment.rate,
        report.investment.r_squared
    );
    Ok(())
}

/// Plan arguments: bundled names or paths to definition files.
fn plan_sources(ctx: &Context, args: &[String]) -> Vec<String> {
    if !args.is_empty() {
        return args.to_vec();
    }
    let cfg = &ctx.config;
    let mut sources: Vec<String> = cfg.plans.clone();
    sources.extend(cfg.scenario_files.iter().map(|p| p.to_string_lossy().into_owned()));
    if sources.is_empty() {
        sources = PLAN_NAMES.iter().map(|s| s.to_string()).collect();
    }
    sources
}

fn resolve_plans(
    ctx: &Context,
    args: &[String],
    seed: &RegimeSeed,
    manifest: &mut Manifest,
) -> Result<Vec<ScenarioPlan>, Failure> {
    let mut plans = Vec::new();
    let mut names = BTreeSet::new();
    for source in plan_sources(ctx, args) {
        let plan = if let Some(text) = bundled_definition(&source) {
            manifest.builtin_input(&format!("builtin:{source}.toml"), text);
            named_plan(&source, seed)?
        } else if Path::new(&source).is_file() {
            manifest.input(&ctx.root, Path::new(&source))?;
            ScenarioDefinition::load(&source)?.resolve(seed)?
        } else {
            return Err(Error::UnknownScenario(source).into());
        };
        if !names.insert(plan.name.clone()) {
            return Err(Failure::config(format!("plan `{}` given twice", plan.name)));
        }
        plans.push(plan);
    }
    Ok(plans)
}

/// Baseline value: the configured figure, else the observed total in the
/// dataset bundle when it covers the baseline year.
fn baseline(ctx: &Context, manifest: &mut Manifest) -> Result<Option<(f64, &'static str)>, Failure> {
    let cfg = &ctx.config;
    if let Some(b) = cfg.baseline_emissions {
        return Ok(Some((b, "config")));
    }
    let path = cfg.dataset_path();
    if !path.is_file() {
        return Ok(None);
    }
    let ds = CalibrationDataset::load(&path)?;
    match ds.total(cfg.baseline_year) {
        Ok(total) => {
            manifest.input(&ctx.root, &path)?;
            Ok(Some((total, "dataset")))
        }
        Err(_) => Ok(None),
    }
}

struct Projection {
    plans: Vec<ScenarioPlan>,
    trajectories: Vec<Trajectory>,
    baseline: Option<(f64, &'static str)>,
    report: FitReport,
}

fn run_projection(ctx: &Context, args: &[String], manifest: &mut Manifest) -> Result<Projection, Failure> {
    let report = ctx.load_report()?;
    manifest.input(&ctx.root, &ctx.config.fit_report_path())?;
    let seed = RegimeSeed::from_report(&report);
    let plans = resolve_plans(ctx, args, &seed, manifest)?;
    let trajectories = plans
        .par_iter()
        .map(project)
        .collect::<Result<Vec<_>, Error>>()?;
    let baseline = baseline(ctx, manifest)?;
    Ok(Projection { plans, trajectories, baseline, report })
}

fn relative_table(p: &Projection, baseline: f64, baseline_year: i32) -> Result<String, Failure> {
    let reports = p
        .trajectories
        .iter()
        .map(|t| relative_report(t, baseline, baseline_year))
        .collect::<Result<Vec<_>, Error>>()?;
    let first = p.trajectories.iter().filter_map(|t| t.records.first()).map(|r| r.year).min();
    let last = p.trajectories.iter().filter_map(|t| t.records.last()).map(|r| r.year).max();
    let mut out = String::from("year");
    for t in &p.trajectories {
        let _ = write!(out, ",{}", t.plan);
    }
    out.push('\n');
    if let (Some(first), Some(last)) = (first, last) {
        for year in first..=last {
            let _ = write!(out, "{year}");
            for r in &reports {
                match r.percent_at(year) {
                    Some(v) => {
                        let _ = write!(out, ",{v:.2}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
    }
    Ok(out)
}

fn endpoint_lines(p: &Projection, baseline_year: i32) -> Vec<String> {
    p.plans
        .iter()
        .zip(&p.trajectories)
        .map(|(plan, t)| {
            let end = t.records.last().expect("projection covers at least one year");
            let rel = match p.baseline {
                Some((b, _)) => format!("{:>7.1}%", 100.0 * end.emissions.total / b),
                None => "       -".to_string(),
            };
            format!(
                "{:<26} {:>5} {:>9.2} Gt  {rel} of {baseline_year}",
                plan.name,
                end.year,
                end.emissions.total / 1000.0
            )
        })
        .collect()
}

pub fn project_cmd(ctx: &Context, args: &[String]) -> Result<(), Failure> {
    let cfg = &ctx.config;
    let mut manifest = Manifest::new("project");
    let p = run_projection(ctx, args, &mut manifest)?;

    for t in &p.trajectories {
        let path = cfg.output.join("scenarios").join(format!("{}.csv", t.plan));
        ctx.write(&mut manifest, &path, &t.to_csv_string())?;
    }

    let mut summary = String::from("plan,year,E_total,percent_of_baseline\n");
    for t in &p.trajectories {
        let end = t.records.last().expect("non-empty trajectory");
        let pct = p
            .baseline
            .map(|(b, _)| format!("{:.2}", 100.0 * end.emissions.total / b))
            .unwrap_or_default();
        let _ = writeln!(summary, "{},{},{:.3},{pct}", t.plan, end.year, end.emissions.total);
    }
    ctx.write(&mut manifest, &cfg.output.join("scenario_summary.csv"), &summary)?;

    manifest.param("baseline_year", cfg.baseline_year);
    match p.baseline {
        Some((b, source)) => {
            manifest.param("baseline_emissions", b);
            manifest.param("baseline_source", source);
            let table = relative_table(&p, b, cfg.baseline_year)?;
            ctx.write(&mut manifest, &cfg.output.join("relative.csv"), &table)?;
        }
        None => eprintln!(
            "note: no {} baseline (set --baseline-emissions); relative table skipped",
            cfg.baseline_year
        ),
    }
    manifest.write(&cfg.output)?;

    for line in endpoint_lines(&p, cfg.baseline_year) {
        println!("{line}");
    }
    Ok(())
}

fn render_report(p: &Projection, cfg: &RunConfig) -> String {
    let r = &p.report;
    let c = &r.capital;
    let mut out = String::new();
    let _ = writeln!(out, "Calibration {}-{} (reference year {})", r.span.0, r.span.1, r.reference_year);
    let _ = writeln!(out, "  alpha    {:>6.2} %/yr", 100.0 * c.decline);
    let _ = writeln!(out, "  delta    {:>6.2} %/yr", 100.0 * c.depreciation);
    let _ = writeln!(out, "  ebar_K0  {:>9.1}", c.operating_intensity);
    let _ = writeln!(out, "  eps_K0   {:>9.1}", c.new_capital_intensity);
    let _ = writeln!(
        out,
        "  beta     {:>6.2} %/yr  {} {}-{}, R2 {:.3}",
        100.0 * r.consumption.rate,
        r.consumption_basis.as_str(),
        r.consumption.window.0,
        r.consumption.window.1,
        r.consumption.r_squared
    );
    let _ = writeln!(
        out,
        "  gamma    {:>6.2} %/yr  {}-{}, R2 {:.3}",
        100.0 * r.investment.rate,
        r.investment.window.0,
        r.investment.window.1,
        r.investment.r_squared
    );
    let _ = writeln!(out, "  r        {:>6.2} %/yr  s {:.1} %", 100.0 * r.growth_rate, 100.0 * r.savings);
    if !r.breakpoints.is_empty() {
        let _ = writeln!(out, "Investment intensity by window");
        for b in &r.breakpoints {
            let _ = writeln!(
                out,
                "  {}-{}  {:>6.2} %/yr  R2 {:.3}",
                b.window.0,
                b.window.1,
                100.0 * b.rate,
                b.r_squared
            );
        }
    }

    let _ = writeln!(out, "\nScenario parameters (final regime)");
    let _ = writeln!(
        out,
        "  {:<26} {:>5} {:>6} {:>5} {:>6} {:>6} {:>6} {:>4}",
        "plan", "r", "delta", "k_inf", "alpha", "beta", "gamma", "s"
    );
    for plan in &p.plans {
        let regime = plan.regimes.last().expect("resolved plans have regimes");
        let [gr, d, k, a, b, g, s] = regime.table_row();
        let _ = writeln!(
            out,
            "  {:<26} {gr:>5.1} {d:>6.1} {k:>5.1} {a:>6.1} {b:>6.1} {g:>6.1} {s:>4.0}",
            plan.name
        );
    }

    let _ = writeln!(out, "\nEmissions at horizon");
    for line in endpoint_lines(p, cfg.baseline_year) {
        let _ = writeln!(out, "  {line}");
    }
    match p.baseline {
        Some((b, source)) => {
            let _ = writeln!(out, "  baseline {} = {b:.1} Mt ({source})", cfg.baseline_year);
        }
        None => {
            let _ = writeln!(out, "  no {} baseline given", cfg.baseline_year);
        }
    }
    out
}

pub fn report_cmd(ctx: &Context, args: &[String]) -> Result<(), Failure> {
    let cfg = &ctx.config;
    let mut manifest = Manifest::new("report");
    let p = run_projection(ctx, args, &mut manifest)?;
    let text = render_report(&p, cfg);
    manifest.param("baseline_year", cfg.baseline_year);
    if let Some((b, source)) = p.baseline {
        manifest.param("baseline_emissions", b);
        manifest.param("baseline_source", source);
    }
    ctx.write(&mut manifest, &cfg.output.join("report.txt"), &text)?;
    manifest.write(&cfg.output)?;
    print!("{text}");
    Ok(())
}
