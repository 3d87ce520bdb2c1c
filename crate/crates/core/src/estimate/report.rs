//! Experiment reports: measured rows, log-log fits and gated checks.

use crate::error::{Error, Result};
use serde::Serialize;
use std::io::Write;

/// Largest RMS residual (log2 units) at which a slope is compared to its target.
pub const MAX_FIT_RESIDUAL: f64 = 0.15;

/// Ordinary least squares of `log2 y` against `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the residuals in log2 units.
    pub residual: f64,
    pub points: usize,
}

impl Fit {
    /// Fits `log2 y = slope·x + intercept`; needs at least four positive `y`.
    pub fn log2(x: &[f64], y: &[f64]) -> Result<Fit> {
        if x.len() != y.len() || x.len() < 4 {
            return Err(Error::Domain(format!("a slope fit needs at least 4 points, got {}", x.len().min(y.len()))));
        }
        if let Some(v) = y.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Domain(format!("cannot take log2 of {v}")));
        }
        let ly: Vec<f64> = y.iter().map(|v| v.log2()).collect();
        Ok(Self::linear(x, &ly))
    }

    fn linear(x: &[f64], y: &[f64]) -> Fit {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
        Fit { slope, intercept, residual: (ss / n).sqrt(), points: x.len() }
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// One pass/fail gate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, measured: f64, limit: f64) -> Self {
        Self { name: name.into(), measured, target: Some(limit), tolerance: None, pass: measured <= limit }
    }

    pub fn at_least(name: &str, measured: f64, limit: f64) -> Self {
        Self { name: name.into(), measured, target: Some(limit), tolerance: None, pass: measured >= limit }
    }

    pub fn within(name: &str, measured: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            target: Some(target),
            tolerance: Some(tolerance),
            pass: (measured - target).abs() <= tolerance,
        }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Self { name: name.into(), measured: f64::from(u8::from(ok)), target: None, tolerance: None, pass: ok }
    }

    /// Slope within tolerance, gated on a clean fit.
    pub fn slope(name: &str, fit: &Fit, target: f64, tolerance: f64) -> Self {
        let mut c = Self::within(name, fit.slope, target, tolerance);
        c.pass &= fit.residual < MAX_FIT_RESIDUAL;
        c
    }

    /// Decay rate `-slope` of at least `min`, gated on a clean fit.
    pub fn decay_rate(name: &str, fit: &Fit, min: f64) -> Self {
        let mut c = Self::at_least(name, -fit.slope, min);
        c.pass &= fit.residual < MAX_FIT_RESIDUAL;
        c
    }
}

/// Result of one experiment.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub experiment: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub fit: Option<Fit>,
    /// Columns of the fitted `(x, y)` pair.
    pub fit_columns: Option<(usize, usize)>,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub checks: Vec<Check>,
    pub flags: Vec<String>,
}

impl EstimateReport {
    pub fn new(experiment: &str, params: impl Serialize, seed: u64, columns: &[&str]) -> Self {
        Self {
            experiment: experiment.into(),
            params: serde_json::to_value(params).unwrap_or(serde_json::Value::Null),
            seed,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            fit: None,
            fit_columns: None,
            target: None,
            tolerance: None,
            checks: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Fits `log2(y)` against `x` over all rows and records the slope gate.
    pub fn fit_slope(&mut self, x: &str, y: &str, target: f64, tolerance: f64) -> Result<Fit> {
        let fit = self.fit_only(x, y)?;
        self.target = Some(target);
        self.tolerance = Some(tolerance);
        self.checks.push(Check::slope(&format!("slope of log2 {y} vs {x}"), &fit, target, tolerance));
        Ok(fit)
    }

    /// Fits without a gate.
    pub fn fit_only(&mut self, x: &str, y: &str) -> Result<Fit> {
        let ix = self.index(x)?;
        let iy = self.index(y)?;
        let xs: Vec<f64> = self.rows.iter().map(|r| r[ix]).collect();
        let ys: Vec<f64> = self.rows.iter().map(|r| r[iy]).collect();
        let fit = Fit::log2(&xs, &ys)?;
        self.fit = Some(fit);
        self.fit_columns = Some((ix, iy));
        Ok(fit)
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Index(format!("no column '{name}' in {}", self.experiment)))
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn flag(&mut self, msg: impl Into<String>) {
        self.flags.push(msg.into());
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Header plus one line per row; values in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Fitted points `(x, log2 y)`; empty without a fit.
    pub fn plot_points(&self) -> Vec<(f64, f64)> {
        match self.fit_columns {
            Some((ix, iy)) => self.rows.iter().map(|r| (r[ix], r[iy].log2())).collect(),
            None => Vec::new(),
        }
    }

    /// Fit line evaluated at the ends of the fitted range.
    pub fn plot_fit(&self) -> Vec<(f64, f64)> {
        let pts = self.plot_points();
        match (self.fit, pts.is_empty()) {
            (Some(fit), false) => {
                let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
                let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
                vec![(lo, fit.predict(lo)), (hi, fit.predict(hi))]
            }
            _ => Vec::new(),
        }
    }
}
