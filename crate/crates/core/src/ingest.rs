//! Loading and aligning sectoral emissions and macroeconomic series.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::integrator::{RateFunction, YearRates};
use crate::series::{intersect, TimeSeries, Unit};

pub const DEFAULT_REFERENCE_YEAR: i32 = 2005;


#[derive(Debug, Clone, PartialEq)]
pub struct SectorSeries {
    pub name: String,
    pub series: TimeSeries,
}

fn canonical(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Reads a sector table: first column `sector`, then one column per year.
pub fn load_sector_csv(path: impl AsRef<Path>) -> Result<Vec<SectorSeries>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_sector_csv(file, path)
}

pub fn parse_sector_csv(input: impl Read, path: &Path) -> Result<Vec<SectorSeries>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let header_error = |reason: String| Error::MalformedHeader {
        path: path.to_path_buf(),
        reason,
    };
    if headers.get(0).map(|h| h.eq_ignore_ascii_case("sector")) != Some(true) {
        return Err(header_error("first column must be `sector`".into()));
    }
    let mut years = Vec::with_capacity(headers.len() - 1);
    for h in headers.iter().skip(1) {
        let year: i32 = h
            .parse()
            .map_err(|_| header_error(format!("{h:?} is not a year")))?;
        if let Some(&prev) = years.last() {
            if year != prev + 1 {
                return Err(Error::NonContiguousYears(year, prev));
            }
        }
        years.push(year);
    }
    if years.is_empty() {
        return Err(header_error("no year columns".into()));
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        // Header is row 1.
        let row = i + 2;
        let name = record.get(0).unwrap_or("").to_string();
        if name.is_empty() {
            return Err(Error::MalformedCell {
                path: path.to_path_buf(),
                row,
                column: "sector".into(),
                value: String::new(),
            });
        }
        if !seen.insert(canonical(&name)) {
            return Err(Error::DuplicateSector(name));
        }
        let mut values = Vec::with_capacity(years.len());
        for (j, &year) in years.iter().enumerate() {
            let cell = record.get(j + 1).unwrap_or("");
            if cell.is_empty() {
                return Err(Error::MissingCell {
                    path: path.to_path_buf(),
                    sector: name,
                    year,
                });
            }
            let value: f64 = cell.parse().map_err(|_| Error::MalformedCell {
                path: path.to_path_buf(),
                row,
                column: year.to_string(),
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::MalformedCell {
                    path: path.to_path_buf(),
                    row,
                    column: year.to_string(),
                    value: cell.to_string(),
                });
            }
            if value < 0.0 {
                return Err(Error::NegativeValue {
                    what: name,
                    year,
                    value,
                });
            }
            values.push(value);
        }
        if record.len() > years.len() + 1 {
            return Err(Error::MalformedCell {
                path: path.to_path_buf(),
                row,
                column: format!("#{}", years.len() + 2),
                value: record.get(years.len() + 1).unwrap_or("").to_string(),
            });
        }
        out.push(SectorSeries {
            name,
            series: TimeSeries::new(years[0], values, Unit::MtCo2PerYear),
        });
    }
    Ok(out)
}

/// Assignment of sectors to the capital, consumption and investment terms.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProxyMapping {
    #[serde(default)]
    pub capital: Vec<String>,
    #[serde(default)]
    pub consumption: Vec<String>,
    #[serde(default)]
    pub investment: Vec<String>,
    #[serde(default)]
    pub exclude: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Capital,
    Consumption,
    Investment,
    Excluded,
}

impl ProxyMapping {
    /// Source text of the built-in mapping.
    pub const DEFAULT_US: &'static str = include_str!("../data/default_mapping.toml");

    /// Energy, rail, pipeline and general manufacturing to capital; cement, iron
    /// and steel and machinery to investment; transport by air and road,
    /// households, services and agriculture to consumption.
    pub fn default_us() -> Self {
        Self::from_toml_str(Self::DEFAULT_US).expect("bundled mapping is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mapping: ProxyMapping = toml::from_str(text)?;
        mapping.validate()?;
        Ok(mapping)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    fn entries(&self) -> impl Iterator<Item = (&String, Component)> {
        self.capital
            .iter()
            .map(|s| (s, Component::Capital))
            .chain(self.consumption.iter().map(|s| (s, Component::Consumption)))
            .chain(self.investment.iter().map(|s| (s, Component::Investment)))
            .chain(self.exclude.iter().map(|s| (s, Component::Excluded)))
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (name, _) in self.entries() {
            if !seen.insert(canonical(name)) {
                return Err(Error::AmbiguousMapping(name.clone()));
            }
        }
        Ok(())
    }

    pub fn classify(&self, sector: &str) -> Option<Component> {
        let key = canonical(sector);
        self.entries()
            .find(|(name, _)| canonical(name) == key)
            .map(|(_, c)| c)
    }
}

/// Component emissions, MtCO2/year.
#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    pub capital: TimeSeries,
    pub consumption: TimeSeries,
    pub investment: TimeSeries,
    pub excluded: TimeSeries,
}

impl Components {
    /// Shares of the three modelled components in `year`, in percent.
    pub fn shares(&self, year: i32) -> Result<[f64; 3]> {
        let k = self.capital.at(year)?;
        let c = self.consumption.at(year)?;
        let i = self.investment.at(year)?;
        let total = k + c + i;
        if total <= 0.0 {
            return Err(Error::InvalidInput(format!("zero total emissions in {year}")));
        }
        Ok([100.0 * k / total, 100.0 * c / total, 100.0 * i / total])
    }
}

/// Sums sectors into components. A separately sourced cement series is treated
/// as one more sector and must itself be mapped (by default to investment).
pub fn build_components(
    sectors: &[SectorSeries],
    mapping: &ProxyMapping,
    cement: Option<&SectorSeries>,
) -> Result<Components> {
    let all: Vec<&SectorSeries> = sectors.iter().chain(cement).collect();
    let mut seen = HashSet::new();
    for s in &all {
        if !seen.insert(canonical(&s.name)) {
            return Err(Error::DuplicateSector(s.name.clone()));
        }
    }
    let spans: Vec<&TimeSeries> = all.iter().map(|s| &s.series).collect();
    let (from, to) = intersect(&spans)?;

    let unmapped: Vec<String> = all
        .iter()
        .filter(|s| mapping.classify(&s.name).is_none())
        .map(|s| s.name.clone())
        .collect();
    if !unmapped.is_empty() {
        return Err(Error::UnmappedSectors(unmapped));
    }

    let n = (to - from + 1) as usize;
    let mut sums: BTreeMap<u8, Vec<f64>> = (0..4).map(|k| (k, vec![0.0; n])).collect();
    for s in &all {
        let key = match mapping.classify(&s.name).expect("checked above") {
            Component::Capital => 0,
            Component::Consumption => 1,
            Component::Investment => 2,
            Component::Excluded => 3,
        };
        let acc = sums.get_mut(&key).expect("all keys present");
        for (slot, year) in acc.iter_mut().zip(from..=to) {
            *slot += s.series.at(year)?;
        }
    }
    let mut take = |k: u8| TimeSeries::new(from, sums.remove(&k).unwrap(), Unit::MtCo2PerYear);
    Ok(Components {
        capital: take(0),
        consumption: take(1),
        investment: take(2),
        excluded: take(3),
    })
}

#[derive(Deserialize)]
struct MacroRow {
    year: i32,
    gdp: f64,
    savings_rate: f64,
}

/// Reads `year,gdp,savings_rate` rows into (GDP, savings) series.
pub fn load_macro_csv(path: impl AsRef<Path>) -> Result<(TimeSeries, TimeSeries)> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_macro_csv(file, path)
}

pub fn parse_macro_csv(input: impl Read, path: &Path) -> Result<(TimeSeries, TimeSeries)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut gdp = Vec::new();
    let mut savings = Vec::new();
    for (i, row) in reader.deserialize::<MacroRow>().enumerate() {
        let row = row.map_err(|e| match e.kind() {
            csv::ErrorKind::Deserialize { err, .. } => Error::MalformedCell {
                path: path.to_path_buf(),
                row: i + 2,
                column: err
                    .field()
                    .and_then(|f| ["year", "gdp", "savings_rate"].get(f as usize))
                    .unwrap_or(&"?")
                    .to_string(),
                value: err.to_string(),
            },
            _ => Error::Csv(e),
        })?;
        if !(row.gdp > 0.0) || !row.gdp.is_finite() {
            return Err(Error::NegativeValue {
                what: "gdp".into(),
                year: row.year,
                value: row.gdp,
            });
        }
        if !(0.0..1.0).contains(&row.savings_rate) {
            return Err(Error::InvalidInput(format!(
                "savings rate {} in {} outside [0, 1)",
                row.savings_rate, row.year
            )));
        }
        gdp.push((row.year, row.gdp));
        savings.push((row.year, row.savings_rate));
    }
    Ok((
        TimeSeries::from_pairs(&gdp, Unit::Dimensionless)?,
        TimeSeries::from_pairs(&savings, Unit::Dimensionless)?,
    ))
}

/// GDP index, growth rate and savings rate on a common span.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroSeries {
    pub gdp_index: TimeSeries,
    /// `ln(GDP_y / GDP_{y-1})`, the growth over the year ending at `y`.
    pub growth: TimeSeries,
    pub savings: TimeSeries,
}

/// Normalizes GDP to 1 at `reference_year` and derives log-difference growth.
///
/// The common span starts one year after the first GDP year, since growth in
/// year `y` needs GDP in `y - 1`.
pub fn derive_macro(gdp: &TimeSeries, savings: &TimeSeries, reference_year: i32) -> Result<MacroSeries> {
    if gdp.len() < 2 {
        return Err(Error::EmptySpan);
    }
    let from = (gdp.start() + 1).max(savings.start());
    let to = gdp.end().min(savings.end());
    if from > to {
        return Err(Error::EmptySpan);
    }
    if !(from..=to).contains(&reference_year) {
        return Err(Error::YearOutOfSpan(reference_year));
    }
    let base = gdp.at(reference_year)?;
    let gdp_index = TimeSeries::from_fn(from, to, Unit::Dimensionless, |y| {
        gdp.get(y).unwrap() / base
    });
    let growth = TimeSeries::from_fn(from, to, Unit::PerYear, |y| {
        (gdp.get(y).unwrap() / gdp.get(y - 1).unwrap()).ln()
    });
    Ok(MacroSeries {
        gdp_index,
        growth,
        savings: savings.slice(from, to)?,
    })
}

/// Aligned inputs for calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationDataset {
    pub reference_year: i32,
    pub gdp_index: TimeSeries,
    pub growth: TimeSeries,
    pub savings: TimeSeries,
    pub capital: TimeSeries,
    pub consumption: TimeSeries,
    pub investment: TimeSeries,
    pub excluded: TimeSeries,
}

const BUNDLE_COLUMNS: [&str; 8] = [
    "year",
    "gdp_index",
    "growth_rate",
    "savings_rate",
    "e_capital",
    "e_consumption",
    "e_investment",
    "e_excluded",
];

impl CalibrationDataset {
    pub fn assemble(components: &Components, macro_series: &MacroSeries, reference_year: i32) -> Result<Self> {
        let (from, to) = intersect(&[
            &components.capital,
            &macro_series.gdp_index,
            &macro_series.growth,
            &macro_series.savings,
        ])?;
        if !(from..=to).contains(&reference_year) {
            return Err(Error::YearOutOfSpan(reference_year));
        }
        let ds = Self {
            reference_year,
            gdp_index: macro_series.gdp_index.slice(from, to)?,
            growth: macro_series.growth.slice(from, to)?,
            savings: macro_series.savings.slice(from, to)?,
            capital: components.capital.slice(from, to)?,
            consumption: components.consumption.slice(from, to)?,
            investment: components.investment.slice(from, to)?,
            excluded: components.excluded.slice(from, to)?,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn start(&self) -> i32 {
        self.gdp_index.start()
    }

    pub fn end(&self) -> i32 {
        self.gdp_index.end()
    }

    fn all(&self) -> [&TimeSeries; 7] {
        [
            &self.gdp_index,
            &self.growth,
            &self.savings,
            &self.capital,
            &self.consumption,
            &self.investment,
            &self.excluded,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let (from, to) = (self.start(), self.end());
        if self.all().iter().any(|s| s.start() != from || s.end() != to) {
            return Err(Error::InvalidInput("dataset series spans differ".into()));
        }
        for (year, v) in self.gdp_index.iter() {
            if !(v > 0.0) {
                return Err(Error::NegativeValue {
                    what: "gdp index".into(),
                    year,
                    value: v,
                });
            }
        }
        for (year, v) in self.savings.iter() {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "savings rate {v} in {year} outside [0, 1)"
                )));
            }
        }
        Ok(())
    }

    /// Total of the three modelled components.
    pub fn total(&self, year: i32) -> Result<f64> {
        Ok(self.capital.at(year)? + self.consumption.at(year)? + self.investment.at(year)?)
    }

    /// Growth and savings as a rate table starting at the first dataset year.
    ///
    /// The entry for interval `[y, y + 1)` carries the growth and savings of
    /// year `y + 1`, so GDP compounds exactly from one observation to the next.
    pub fn rate_function(&self) -> Result<RateFunction> {
        RateFunction::table(
            (self.start() + 1..=self.end())
                .map(|y| YearRates {
                    growth_rate: self.growth.get(y).unwrap(),
                    savings: self.savings.get(y).unwrap(),
                })
                .collect(),
        )
    }

    /// Writes the bundle as CSV with a leading `# reference_year = ...` line.
    pub fn to_csv_string(&self) -> String {
        let mut out = format!("# reference_year = {}\n", self.reference_year);
        out.push_str(&BUNDLE_COLUMNS.join(","));
        out.push('\n');
        for y in self.start()..=self.end() {
            let row: Vec<String> = self.all().iter().map(|s| s.get(y).unwrap().to_string()).collect();
            out.push_str(&format!("{y},{}\n", row.join(",")));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text, path)
    }

    pub fn from_csv_str(text: &str, path: &Path) -> Result<Self> {
        let bad = |reason: &str| Error::MalformedHeader {
            path: PathBuf::from(path),
            reason: reason.to_string(),
        };
        let first = text.lines().next().ok_or_else(|| bad("empty bundle"))?;
        let reference_year: i32 = first
            .strip_prefix("# reference_year =")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| bad("missing `# reference_year = <year>` line"))?;
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        if reader.headers()?.iter().ne(BUNDLE_COLUMNS) {
            return Err(bad("unexpected columns"));
        }
        let mut columns: Vec<Vec<(i32, f64)>> = vec![Vec::new(); 7];
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let parse = |j: usize| -> Result<f64> {
                let cell = record.get(j).unwrap_or("");
                cell.parse().map_err(|_| Error::MalformedCell {
                    path: path.to_path_buf(),
                    row: i + 3,
                    column: BUNDLE_COLUMNS[j].to_string(),
                    value: cell.to_string(),
                })
            };
            let year = parse(0)? as i32;
            for (j, col) in columns.iter_mut().enumerate() {
                col.push((year, parse(j + 1)?));
            }
        }
        let units = [
            Unit::Dimensionless,
            Unit::PerYear,
            Unit::Dimensionless,
            Unit::MtCo2PerYear,
            Unit::MtCo2PerYear,
            Unit::MtCo2PerYear,
            Unit::MtCo2PerYear,
        ];
        let mut series = columns
            .iter()
            .zip(units)
            .map(|(c, u)| TimeSeries::from_pairs(c, u))
            .collect::<Result<Vec<_>>>()?
            .into_iter();
        let mut next = || series.next().unwrap();
        let ds = Self {
            reference_year,
            gdp_index: next(),
            growth: next(),
            savings: next(),
            capital: next(),
            consumption: next(),
            investment: next(),
            excluded: next(),
        };
        ds.validate()?;
        Ok(ds)
    }
}
