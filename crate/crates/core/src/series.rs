//! Year-indexed series with a declared unit.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    /// MtCO2 per year.
    MtCo2PerYear,
    /// Intensities in normalized-GDP units.
    MtCo2,
    PerYear,
    Dimensionless,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Unit::MtCo2PerYear => "MtCO2/yr",
            Unit::MtCo2 => "MtCO2",
            Unit::PerYear => "1/yr",
            Unit::Dimensionless => "1",
        };
        f.write_str(s)
    }
}

/// Contiguous annual series starting at `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    start: i32,
    values: Vec<f64>,
    unit: Unit,
}

impl TimeSeries {
    pub fn new(start: i32, values: Vec<f64>, unit: Unit) -> Self {
        Self {
            start,
            values,
            unit,
        }
    }

    pub fn from_fn(start: i32, end: i32, unit: Unit, f: impl FnMut(i32) -> f64) -> Self {
        Self::new(start, (start..=end).map(f).collect(), unit)
    }

    /// Builds a series from `(year, value)` pairs, which must be contiguous and ascending.
    pub fn from_pairs(pairs: &[(i32, f64)], unit: Unit) -> Result<Self> {
        let Some(&(start, _)) = pairs.first() else {
            return Err(Error::EmptySpan);
        };
        for w in pairs.windows(2) {
            if w[1].0 != w[0].0 + 1 {
                return Err(Error::NonContiguousYears(w[1].0, w[0].0));
            }
        }
        Ok(Self::new(start, pairs.iter().map(|p| p.1).collect(), unit))
    }

    pub fn start(&self) -> i32 {
        self.start
    }

    /// Last covered year. Undefined (returns `start - 1`) for an empty series.
    pub fn end(&self) -> i32 {
        self.start + self.values.len() as i32 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.values.len()).map(move |i| self.start + i as i32)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.years().zip(self.values.iter().copied())
    }

    pub fn contains(&self, year: i32) -> bool {
        year >= self.start && year <= self.end()
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        if self.contains(year) {
            Some(self.values[(year - self.start) as usize])
        } else {
            None
        }
    }

    pub fn at(&self, year: i32) -> Result<f64> {
        self.get(year).ok_or(Error::YearOutOfSpan(year))
    }

    /// Restricts the series to `[from, to]`.
    pub fn slice(&self, from: i32, to: i32) -> Result<Self> {
        if from > to || !self.contains(from) || !self.contains(to) {
            return Err(Error::EmptySpan);
        }
        let a = (from - self.start) as usize;
        let b = (to - self.start) as usize;
        Ok(Self::new(from, self.values[a..=b].to_vec(), self.unit))
    }

    pub fn map(&self, unit: Unit, f: impl Fn(f64) -> f64) -> Self {
        Self::new(self.start, self.values.iter().map(|&v| f(v)).collect(), unit)
    }

    /// Pointwise combination over the common span.
    pub fn zip_with(&self, other: &Self, unit: Unit, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let (from, to) = intersect(&[self, other])?;
        Ok(Self::from_fn(from, to, unit, |y| {
            f(self.values[(y - self.start) as usize], other.values[(y - other.start) as usize])
        }))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Common `[from, to]` span of several series.
pub fn intersect(series: &[&TimeSeries]) -> Result<(i32, i32)> {
    let from = series.iter().map(|s| s.start()).max().ok_or(Error::EmptySpan)?;
    let to = series.iter().map(|s| s.end()).min().ok_or(Error::EmptySpan)?;
    if from > to || series.iter().any(|s| s.is_empty()) {
        return Err(Error::EmptySpan);
    }
    Ok((from, to))
}
