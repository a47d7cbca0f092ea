//! Phase I estimation, Shewhart individuals charts and EWMA charts.
//!
//! Time indices are 1-based; the first `m` observations form Phase I and
//! signals are only possible at `t > m`.

use std::io::Write;

use crate::error::{Error, Result};

/// `sqrt(pi) / 2`, the reciprocal of the moving-range constant `d2 = 2 / sqrt(pi)`.
const INV_D2: f64 = 0.886_226_925_452_758;

/// Default EWMA smoothing constant.
pub const DEFAULT_LAMBDA: f64 = 0.2;

/// Width of the control limits in units of sigma.
pub const LIMIT_WIDTH: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseIEstimate {
    pub mu_hat: f64,
    pub sigma_hat: f64,
    pub m: usize,
}

/// Sample mean and moving-range standard deviation of a Phase I series.
pub fn phase1_estimate(s: &[f64]) -> Result<PhaseIEstimate> {
    let m = s.len();
    if m < 2 {
        return Err(Error::PhaseTooShort(m));
    }
    let mu_hat = s.iter().sum::<f64>() / m as f64;
    let range: f64 = s.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    Ok(PhaseIEstimate {
        mu_hat,
        sigma_hat: INV_D2 * range / (m - 1) as f64,
        m,
    })
}

impl PhaseIEstimate {
    /// Shewhart limits `mu +- 3 sigma`.
    pub fn shewhart_limits(&self) -> (f64, f64) {
        let w = LIMIT_WIDTH * self.sigma_hat;
        (self.mu_hat - w, self.mu_hat + w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LimitStyle {
    /// Exact variance of `Z_t` given the start at `mu`, narrow early in Phase II.
    TimeVarying,
    /// The asymptotic limits.
    #[default]
    SteadyState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartKind {
    Shewhart,
    Ewma { lambda: f64, style: LimitStyle },
}

impl ChartKind {
    pub fn ewma(lambda: f64) -> Self {
        ChartKind::Ewma {
            lambda,
            style: LimitStyle::SteadyState,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChartKind::Shewhart => "shewhart",
            ChartKind::Ewma { .. } => "ewma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub t: usize,
    pub value: f64,
    pub lcl: f64,
    pub ucl: f64,
    pub signal: bool,
}

/// A computed chart over a whole series.
///
/// For EWMA charts the Phase I points show the raw observations against the
/// steady-state limits; from `t = m + 1` on they show the moving average.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlChart {
    pub kind: ChartKind,
    pub base: PhaseIEstimate,
    pub points: Vec<ChartPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunLength {
    Observed(usize),
    /// No signal; carries the number of observations examined.
    Censored(usize),
}

impl RunLength {
    pub fn value(self) -> usize {
        match self {
            RunLength::Observed(v) | RunLength::Censored(v) => v,
        }
    }

    pub fn is_censored(self) -> bool {
        matches!(self, RunLength::Censored(_))
    }
}

fn check_lengths(s: &[f64], m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::PhaseTooShort(m));
    }
    if s.len() < m {
        return Err(Error::InvalidParams(format!(
            "series of length {} is shorter than phase I ({m})",
            s.len()
        )));
    }
    Ok(())
}

/// Shewhart individuals chart: constant limits, strict-inequality signals.
pub fn shewhart(s: &[f64], m: usize) -> Result<ControlChart> {
    check_lengths(s, m)?;
    let base = phase1_estimate(&s[..m])?;
    let (lcl, ucl) = base.shewhart_limits();
    let points = s
        .iter()
        .enumerate()
        .map(|(i, &value)| ChartPoint {
            t: i + 1,
            value,
            lcl,
            ucl,
            signal: i + 1 > m && (value > ucl || value < lcl),
        })
        .collect();
    Ok(ControlChart {
        kind: ChartKind::Shewhart,
        base,
        points,
    })
}

/// Half-width factor of the EWMA limits, in units of sigma, `steps` points
/// into Phase II (`None` for the steady state).
pub fn ewma_width(lambda: f64, steps: Option<usize>) -> f64 {
    let ratio = lambda / (2.0 - lambda);
    let decay = match steps {
        None => 1.0,
        Some(j) => 1.0 - (1.0 - lambda).powi(2 * j as i32),
    };
    LIMIT_WIDTH * (ratio * decay).sqrt()
}

/// EWMA chart started at `Z_m = mu_hat`.
pub fn ewma(s: &[f64], m: usize, lambda: f64, style: LimitStyle) -> Result<ControlChart> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::Lambda(lambda));
    }
    check_lengths(s, m)?;
    let base = phase1_estimate(&s[..m])?;
    let steady = ewma_width(lambda, None) * base.sigma_hat;
    let mut z = base.mu_hat;
    let points = s
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let t = i + 1;
            if t <= m {
                return ChartPoint {
                    t,
                    value: x,
                    lcl: base.mu_hat - steady,
                    ucl: base.mu_hat + steady,
                    signal: false,
                };
            }
            z = lambda * x + (1.0 - lambda) * z;
            let half = match style {
                LimitStyle::SteadyState => steady,
                LimitStyle::TimeVarying => ewma_width(lambda, Some(t - m)) * base.sigma_hat,
            };
            let (lcl, ucl) = (base.mu_hat - half, base.mu_hat + half);
            ChartPoint {
                t,
                value: z,
                lcl,
                ucl,
                signal: z > ucl || z < lcl,
            }
        })
        .collect();
    Ok(ControlChart {
        kind: ChartKind::Ewma { lambda, style },
        base,
        points,
    })
}

/// Builds a chart of the given kind.
pub fn chart(s: &[f64], m: usize, kind: ChartKind) -> Result<ControlChart> {
    match kind {
        ChartKind::Shewhart => shewhart(s, m),
        ChartKind::Ewma { lambda, style } => ewma(s, m, lambda, style),
    }
}

impl ControlChart {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn m(&self) -> usize {
        self.base.m
    }

    /// Times (1-based) at which the chart signals.
    pub fn signals(&self) -> Vec<usize> {
        self.points
            .iter()
            .filter(|p| p.signal)
            .map(|p| p.t)
            .collect()
    }

    pub fn first_signal(&self) -> Option<usize> {
        self.points.iter().find(|p| p.signal).map(|p| p.t)
    }

    /// Number of observations from `from` up to and including the first
    /// signal at or after `from`.
    pub fn run_length(&self, from: usize) -> Result<RunLength> {
        let m = self.base.m;
        if from <= m {
            return Err(Error::Origin { from, m });
        }
        if from > self.len() {
            return Err(Error::InvalidParams(format!(
                "run length origin {from} beyond the series end {}",
                self.len()
            )));
        }
        Ok(match self.points[from - 1..].iter().find(|p| p.signal) {
            Some(p) => RunLength::Observed(p.t - from + 1),
            None => RunLength::Censored(self.len() - from + 1),
        })
    }

    /// CSV with columns `t,value,lcl,ucl,signal`. When `times` is given it
    /// replaces the numeric index in the first column.
    pub fn write_csv<W: Write>(&self, mut out: W, times: Option<&[String]>) -> Result<()> {
        writeln!(out, "t,value,lcl,ucl,signal")?;
        for p in &self.points {
            let t = times
                .and_then(|ts| ts.get(p.t - 1).cloned())
                .unwrap_or_else(|| p.t.to_string());
            writeln!(
                out,
                "{t},{},{},{},{}",
                p.value,
                p.lcl,
                p.ucl,
                u8::from(p.signal)
            )?;
        }
        Ok(())
    }
}
