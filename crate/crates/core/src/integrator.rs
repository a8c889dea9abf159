//! Numerical solutions for time-varying growth and savings rates.
//!
//! Time `t` is measured in years from the start of the rate table. Rates are
//! piecewise constant over each unit interval `[i, i + 1)`, and every grid built
//! here places nodes on those integer boundaries so that no quadrature panel or
//! Runge-Kutta step straddles a jump in `r` or `s`.

use crate::error::{Error, Result};

/// Default integration step: one month.
pub const DEFAULT_STEP: f64 = 1.0 / 12.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YearRates {
    pub growth_rate: f64,
    pub savings: f64,
}

impl YearRates {
    fn validate(&self) -> Result<()> {
        if !self.growth_rate.is_finite() {
            return Err(Error::InvalidInput("non-finite growth rate".into()));
        }
        if !(0.0..1.0).contains(&self.savings) {
            return Err(Error::InvalidInput(format!(
                "savings rate {} outside [0, 1)",
                self.savings
            )));
        }
        Ok(())
    }
}

/// Growth and savings rates as functions of time.
#[derive(Debug, Clone, PartialEq)]
pub enum RateFunction {
    /// Same rates for all `t >= 0`.
    Constant(YearRates),
    /// Entry `i` applies on `[i, i + 1)`.
    Table(Vec<YearRates>),
}

impl RateFunction {
    pub fn constant(growth_rate: f64, savings: f64) -> Result<Self> {
        let rates = YearRates {
            growth_rate,
            savings,
        };
        rates.validate()?;
        Ok(RateFunction::Constant(rates))
    }

    pub fn table(rates: Vec<YearRates>) -> Result<Self> {
        for r in &rates {
            r.validate()?;
        }
        Ok(RateFunction::Table(rates))
    }

    /// Covered horizon in years; infinite for constant rates.
    pub fn horizon(&self) -> f64 {
        match self {
            RateFunction::Constant(_) => f64::INFINITY,
            RateFunction::Table(v) => v.len() as f64,
        }
    }

    /// Rates on the unit interval `[index, index + 1)`.
    fn segment(&self, index: usize) -> YearRates {
        match self {
            RateFunction::Constant(r) => *r,
            RateFunction::Table(v) => v[index],
        }
    }

    /// The same rates seen from `offset` whole years later.
    pub fn window(&self, offset: usize) -> Result<Self> {
        match self {
            RateFunction::Constant(r) => Ok(RateFunction::Constant(*r)),
            RateFunction::Table(v) if offset <= v.len() => {
                Ok(RateFunction::Table(v[offset..].to_vec()))
            }
            RateFunction::Table(v) => Err(Error::UncoveredSpan {
                covered_from: 0.0,
                covered_to: v.len() as f64,
                requested_from: offset as f64,
                requested_to: offset as f64,
            }),
        }
    }

    fn check_covers(&self, t_end: f64) -> Result<()> {
        if !(t_end >= 0.0) || t_end > self.horizon() + 1e-12 {
            return Err(Error::UncoveredSpan {
                covered_from: 0.0,
                covered_to: self.horizon(),
                requested_from: 0.0,
                requested_to: t_end,
            });
        }
        Ok(())
    }
}

/// Values of an integrated quantity on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest step actually used, years.
    pub step: f64,
}

impl GridSolution {
    pub fn last(&self) -> f64 {
        *self.values.last().expect("grid has at least one point")
    }

    /// Value at a grid node within `1e-9` of `t`.
    pub fn at(&self, t: f64) -> Option<f64> {
        let i = self.times.partition_point(|&x| x < t - 1e-9);
        match self.times.get(i) {
            Some(&x) if (x - t).abs() <= 1e-9 => Some(self.values[i]),
            _ => None,
        }
    }

    /// Samples at whole years `0, 1, ..., floor(t_end)`.
    pub fn annual(&self) -> Vec<(f64, f64)> {
        let end = self.times.last().copied().unwrap_or(0.0);
        (0..=(end + 1e-9).floor() as usize)
            .filter_map(|y| self.at(y as f64).map(|v| (y as f64, v)))
            .collect()
    }
}

/// One constant-rate piece of the integration grid.
struct Segment {
    start: f64,
    intervals: usize,
    step: f64,
    rates: YearRates,
}

/// Splits `[0, t_end]` at whole years and divides each piece into an even number
/// of equal steps no longer than `step`.
fn segments(rates: &RateFunction, t_end: f64, step: f64) -> Result<Vec<Segment>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidInput(format!("step {step} must be positive")));
    }
    rates.check_covers(t_end)?;
    let mut out = Vec::new();
    let mut a = 0.0;
    let mut index = 0usize;
    while a < t_end - 1e-12 {
        let b = ((index + 1) as f64).min(t_end);
        let len = b - a;
        let mut n = ((len / step) - 1e-9).ceil().max(2.0) as usize;
        if n % 2 == 1 {
            n += 1;
        }
        out.push(Segment {
            start: a,
            intervals: n,
            step: len / n as f64,
            rates: rates.segment(index),
        });
        a = b;
        index += 1;
    }
    Ok(out)
}

/// Inputs for the operating-capital emissions intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapitalEmissionsParams {
    /// Decline rate of new-capital intensity, 1/year.
    pub decline: f64,
    pub depreciation: f64,
    /// Operating-capital intensity at `t = 0`.
    pub operating_intensity: f64,
    /// New-capital intensity at `t = 0`.
    pub new_capital_intensity: f64,
}

/// Operating-capital intensity under time-varying rates, by quadrature:
///
/// ```text
/// ebar_K(t) = e^{-delta t - R(t)} [ ebar_K0 + eps_K0 * J(t) ]
/// J(t)      = int_0^t e^{(delta - alpha) u + R(u)} s(u) du,   R(t) = int_0^t r
/// ```
///
/// `R` is exact for piecewise-constant `r`; `J` uses cumulative composite Simpson.
pub fn ebar_k_general(
    t_end: f64,
    rates: &RateFunction,
    params: &CapitalEmissionsParams,
    step: f64,
) -> Result<GridSolution> {
    let segs = segments(rates, t_end, step)?;
    let kernel_rate = params.depreciation - params.decline;

    let mut times = vec![0.0];
    let mut values = vec![params.operating_intensity];
    let mut max_step: f64 = 0.0;
    let mut growth_integral = 0.0;
    let mut quad = 0.0;
    let mut f = Vec::new();

    for seg in &segs {
        let h = seg.step;
        max_step = max_step.max(h);
        let r = seg.rates.growth_rate;
        let node = |j: usize| seg.start + j as f64 * h;
        let growth_at = |j: usize| growth_integral + r * j as f64 * h;

        f.clear();
        f.extend((0..=seg.intervals).map(|j| {
            (kernel_rate * node(j) + growth_at(j)).exp() * seg.rates.savings
        }));

        let mut even = quad;
        for j in 1..=seg.intervals {
            let value = if j % 2 == 0 {
                even += h / 3.0 * (f[j - 2] + 4.0 * f[j - 1] + f[j]);
                even
            } else {
                // Partial panel: integral over the first half of a Simpson pair.
                even + h / 12.0 * (5.0 * f[j - 1] + 8.0 * f[j] - f[j + 1])
            };
            let t = node(j);
            let decay = (-params.depreciation * t - growth_at(j)).exp();
            times.push(t);
            values.push(decay * (params.operating_intensity + params.new_capital_intensity * value));
        }
        quad = even;
        growth_integral = growth_at(seg.intervals);
    }

    Ok(GridSolution {
        times,
        values,
        step: max_step,
    })
}

/// Emissions intensity of newly installed capital over time.
#[derive(Debug, Clone, PartialEq)]
pub enum NewCapitalPath {
    /// `initial * e^{-decline t}`.
    Exponential { initial: f64, decline: f64 },
    /// Entry `i` applies on `[i, i + 1)`.
    Table(Vec<f64>),
}

impl NewCapitalPath {
    fn at(&self, t: f64, segment: usize) -> f64 {
        match self {
            NewCapitalPath::Exponential { initial, decline } => initial * (-decline * t).exp(),
            NewCapitalPath::Table(v) => v[segment],
        }
    }

    fn check_covers(&self, t_end: f64) -> Result<()> {
        match self {
            NewCapitalPath::Table(v) if t_end > v.len() as f64 + 1e-12 => {
                Err(Error::UncoveredSpan {
                    covered_from: 0.0,
                    covered_to: v.len() as f64,
                    requested_from: 0.0,
                    requested_to: t_end,
                })
            }
            _ => Ok(()),
        }
    }
}

/// Classical fourth-order Runge-Kutta over the segment grid for
/// `dy/dt = -(r + delta) y + source(t)`.
fn rk4_linear(
    segs: &[Segment],
    depreciation: f64,
    y0: f64,
    source: impl Fn(f64, usize, &YearRates) -> f64,
) -> GridSolution {
    let mut times = vec![0.0];
    let mut values = vec![y0];
    let mut max_step: f64 = 0.0;
    let mut y = y0;
    for (index, seg) in segs.iter().enumerate() {
        let h = seg.step;
        max_step = max_step.max(h);
        let drain = seg.rates.growth_rate + depreciation;
        let rhs = |t: f64, y: f64| -drain * y + source(t, index, &seg.rates);
        for j in 0..seg.intervals {
            let t = seg.start + j as f64 * h;
            let k1 = rhs(t, y);
            let k2 = rhs(t + h / 2.0, y + h / 2.0 * k1);
            let k3 = rhs(t + h / 2.0, y + h / 2.0 * k2);
            let k4 = rhs(t + h, y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            times.push(seg.start + (j + 1) as f64 * h);
            values.push(y);
        }
    }
    GridSolution {
        times,
        values,
        step: max_step,
    }
}

/// Capital intensity `k = K / Y` from `dk/dt = -(r + delta) k + s`.
pub fn integrate_capital_intensity(
    k0: f64,
    rates: &RateFunction,
    depreciation: f64,
    t_end: f64,
    step: f64,
) -> Result<GridSolution> {
    let segs = segments(rates, t_end, step)?;
    Ok(rk4_linear(&segs, depreciation, k0, |_, _, r| r.savings))
}

/// Operating-capital intensity from
/// `d ebar_K/dt = -(r + delta) ebar_K + eps_K(t) s(t)`.
pub fn integrate_ebar_k_ode(
    initial: f64,
    rates: &RateFunction,
    new_capital: &NewCapitalPath,
    depreciation: f64,
    t_end: f64,
    step: f64,
) -> Result<GridSolution> {
    new_capital.check_covers(t_end)?;
    let segs = segments(rates, t_end, step)?;
    Ok(rk4_linear(&segs, depreciation, initial, |t, index, r| {
        new_capital.at(t, index) * r.savings
    }))
}
