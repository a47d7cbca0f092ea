//! Monte Carlo run-length study of the monitoring strategy under seven
//! change scenarios on a two-community base model.
//!
//! Each replicate estimates Shewhart limits from `m` in-control graphs,
//! then generates monitoring graphs until every chart has signaled or the
//! cap is reached. The change takes effect at the `t_star`-th monitoring
//! graph and run lengths count from there; without a change they count
//! from the first monitoring graph. A chart that signals before the change
//! records a false alarm and contributes no run length for that replicate.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::charts::phase1_estimate;
use crate::dcsbm::{draw_theta, ChangeSpec, DcsbmParams, EdgeSampler, Regime};
use crate::error::{Error, Result};
use crate::graph::CommunityAssignment;
use crate::linalg::Matrix;
use crate::sampling::{stream_rng, StreamRng};
use crate::surveillance::{stat_vector_from_summary, Statistic};

pub const DEFAULT_CAP: usize = 5000;
pub const DEFAULT_T_STAR: usize = 25;
pub const DEFAULT_N: usize = 100;

/// The charted statistics, in table column order.
pub const STATISTICS: [Statistic; 4] = [
    Statistic::PooledSpread,
    Statistic::Connectivity(0, 0),
    Statistic::Connectivity(0, 1),
    Statistic::Connectivity(1, 1),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    NoChange,
    /// `P_11 += eps`.
    LocalRate(f64),
    /// Every `P_rs += eps`.
    GlobalRate(f64),
    /// `delta_1 += tau`.
    LocalSpread(f64),
    /// Every `delta_r += tau`.
    GlobalSpread(f64),
    /// Both communities become one.
    Merge,
    /// Community 1 splits into two halves.
    Split,
}

impl Scenario {
    /// Builds a scenario from its table number and parameter (`eps` for
    /// 1-2, `tau` for 3-4, unused otherwise).
    pub fn from_id(id: u8, parameter: Option<f64>) -> Result<Self> {
        let need = |what: &str| {
            parameter.ok_or_else(|| Error::InvalidParams(format!("scenario {id} needs {what}")))
        };
        Ok(match id {
            0 => Scenario::NoChange,
            1 => Scenario::LocalRate(need("eps")?),
            2 => Scenario::GlobalRate(need("eps")?),
            3 => Scenario::LocalSpread(need("tau")?),
            4 => Scenario::GlobalSpread(need("tau")?),
            5 => Scenario::Merge,
            6 => Scenario::Split,
            _ => return Err(Error::InvalidParams(format!("unknown scenario {id}"))),
        })
    }

    pub fn id(&self) -> u8 {
        match self {
            Scenario::NoChange => 0,
            Scenario::LocalRate(_) => 1,
            Scenario::GlobalRate(_) => 2,
            Scenario::LocalSpread(_) => 3,
            Scenario::GlobalSpread(_) => 4,
            Scenario::Merge => 5,
            Scenario::Split => 6,
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Scenario::NoChange => "none",
            Scenario::LocalRate(_) => "P*11 = P11 + eps",
            Scenario::GlobalRate(_) => "P*ij = Pij + eps",
            Scenario::LocalSpread(_) => "delta*1 = delta1 + tau",
            Scenario::GlobalSpread(_) => "delta*i = deltai + tau",
            Scenario::Merge => "merge communities",
            Scenario::Split => "split community 1",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    /// Number of nodes, split into two communities of `ceil(n/2)` and `floor(n/2)`.
    pub n: usize,
    /// Phase I size.
    pub m: usize,
    /// Index of the first changed monitoring graph.
    pub t_star: usize,
    pub p: Matrix,
    pub delta: Vec<f64>,
    pub reps: usize,
    pub cap: usize,
}

impl ScenarioSpec {
    /// The base model: `P = [[0.2, 0.1], [0.1, 0.2]]`, `delta = 0.5`,
    /// change at the 25th monitoring graph, cap 5000.
    pub fn new(scenario: Scenario, n: usize, m: usize, reps: usize) -> Self {
        Self {
            scenario,
            n,
            m,
            t_star: DEFAULT_T_STAR,
            p: Matrix::from_rows(&[vec![0.2, 0.1], vec![0.1, 0.2]]),
            delta: vec![0.5, 0.5],
            reps,
            cap: DEFAULT_CAP,
        }
    }

    /// Label for the parameter column.
    pub fn parameter_label(&self) -> String {
        match self.scenario {
            Scenario::NoChange => String::new(),
            Scenario::LocalRate(e) | Scenario::GlobalRate(e) => format!("eps = {e:.2}"),
            Scenario::LocalSpread(t) | Scenario::GlobalSpread(t) => format!("tau = {t:.2}"),
            Scenario::Merge | Scenario::Split => format!("n = {}", self.n),
        }
    }

    pub fn labels(&self) -> Result<CommunityAssignment> {
        CommunityAssignment::contiguous(&[self.n.div_ceil(2), self.n / 2])
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 || self.cap == 0 {
            return Err(Error::InvalidParams(
                "replicates and cap must be positive".into(),
            ));
        }
        if self.m < 2 {
            return Err(Error::PhaseTooShort(self.m));
        }
        if self.t_star == 0 {
            return Err(Error::InvalidParams("change index counts from 1".into()));
        }
        if self.n < 4 {
            return Err(Error::InvalidParams(
                "need at least two nodes per community".into(),
            ));
        }
        self.models().map(|_| ())
    }

    /// Pre- and post-change generating regimes.
    pub fn models(&self) -> Result<(Regime, Regime)> {
        let c = self.labels()?;
        let pre = DcsbmParams::with_unit_theta(c.clone(), self.p.clone(), self.delta.clone())?;
        let t = self.m + self.t_star;
        let change = match self.scenario {
            Scenario::NoChange => ChangeSpec::identity(&pre, t)?,
            Scenario::LocalRate(eps) => {
                let mut p = self.p.clone();
                p[(0, 0)] += eps;
                ChangeSpec::new(t, c, p, self.delta.clone())?
            }
            Scenario::GlobalRate(eps) => {
                let v = self.p.as_slice().iter().map(|x| x + eps).collect();
                ChangeSpec::new(t, c, Matrix::from_vec(2, 2, v)?, self.delta.clone())?
            }
            Scenario::LocalSpread(tau) => {
                let mut d = self.delta.clone();
                d[0] += tau;
                ChangeSpec::new(t, c, self.p.clone(), d)?
            }
            Scenario::GlobalSpread(tau) => {
                let d = self.delta.iter().map(|x| x + tau).collect();
                ChangeSpec::new(t, c, self.p.clone(), d)?
            }
            Scenario::Merge => ChangeSpec::merge(&pre, 0, 1, t)?,
            Scenario::Split => ChangeSpec::split(&pre, 0, self.p[(0, 1)], t)?,
        };
        Ok((pre.regime(), change.post().clone()))
    }
}

/// What one chart did in one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Signaled this many graphs after the origin (1 = at the origin).
    Signal(usize),
    /// No signal within the cap.
    Censored(usize),
    /// Signaled before the change.
    FalseAlarm,
}

struct Generator {
    regime: Regime,
    sampler: EdgeSampler,
}

impl Generator {
    fn new(regime: Regime) -> Self {
        let sampler = EdgeSampler::new(&regime);
        Self { regime, sampler }
    }

    fn stats(&self, monitor: &CommunityAssignment, rng: &mut StreamRng) -> Result<[f64; 4]> {
        let theta = draw_theta(&self.regime.labels, &self.regime.delta, rng)?;
        let summary = self.sampler.sample(&theta, monitor, rng);
        let v = stat_vector_from_summary(&summary, monitor)?;
        Ok(STATISTICS.map(|s| s.value(&v)))
    }
}

/// One replicate with its own random stream.
pub fn run_replicate(spec: &ScenarioSpec, rng: &mut StreamRng) -> Result<[Outcome; 4]> {
    let (pre, post) = spec.models()?;
    let monitor = pre.labels.clone();
    let before = Generator::new(pre);
    let after = Generator::new(post);

    let mut series: [Vec<f64>; 4] = Default::default();
    for _ in 0..spec.m {
        let s = before.stats(&monitor, rng)?;
        for (col, x) in series.iter_mut().zip(s) {
            col.push(x);
        }
    }
    let mut limits = [(0.0, 0.0); 4];
    for (lim, col) in limits.iter_mut().zip(&series) {
        *lim = phase1_estimate(col)?.shewhart_limits();
    }

    let changes = spec.scenario != Scenario::NoChange;
    let origin = if changes { spec.t_star } else { 1 };
    let mut outcome: [Option<Outcome>; 4] = [None; 4];
    let mut j = 0;
    while outcome.iter().any(Option::is_none) {
        j += 1;
        if j >= origin && j - origin + 1 > spec.cap {
            for o in outcome.iter_mut().filter(|o| o.is_none()) {
                *o = Some(Outcome::Censored(spec.cap));
            }
            break;
        }
        let gen = if changes && j >= spec.t_star {
            &after
        } else {
            &before
        };
        let s = gen.stats(&monitor, rng)?;
        for i in 0..4 {
            if outcome[i].is_some() {
                continue;
            }
            let (lcl, ucl) = limits[i];
            if s[i] > ucl || s[i] < lcl {
                outcome[i] = Some(if j < origin {
                    Outcome::FalseAlarm
                } else {
                    Outcome::Signal(j - origin + 1)
                });
            }
        }
    }
    Ok(outcome.map(|o| o.expect("all charts resolved")))
}

/// Average run length of one chart over replicates. Censored replicates
/// enter the mean at the cap, so the mean is a lower bound when any are censored.
#[derive(Debug, Clone, PartialEq)]
pub struct StatArl {
    pub statistic: Statistic,
    pub mean: f64,
    pub se: f64,
    pub censored: usize,
    /// Replicates contributing a run length.
    pub count: usize,
    pub false_alarms: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArlSummary {
    pub spec: ScenarioSpec,
    pub stats: Vec<StatArl>,
}

impl ArlSummary {
    pub fn get(&self, statistic: Statistic) -> Option<&StatArl> {
        self.stats.iter().find(|s| s.statistic == statistic)
    }

    fn from_outcomes(spec: &ScenarioSpec, outcomes: &[[Outcome; 4]]) -> Self {
        let stats = STATISTICS
            .iter()
            .enumerate()
            .map(|(i, &statistic)| {
                let mut values = Vec::new();
                let mut censored = 0;
                let mut false_alarms = 0;
                for o in outcomes {
                    match o[i] {
                        Outcome::Signal(v) => values.push(v as f64),
                        Outcome::Censored(v) => {
                            censored += 1;
                            values.push(v as f64);
                        }
                        Outcome::FalseAlarm => false_alarms += 1,
                    }
                }
                let count = values.len();
                let mean = values.iter().sum::<f64>() / count as f64;
                let se = if count > 1 {
                    let var =
                        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
                    (var / count as f64).sqrt()
                } else {
                    f64::NAN
                };
                StatArl {
                    statistic,
                    mean,
                    se,
                    censored,
                    count,
                    false_alarms,
                }
            })
            .collect();
        Self {
            spec: spec.clone(),
            stats,
        }
    }
}

/// Runs every replicate of `spec`. Replicate `i` draws from stream `i` of
/// `seed`, so the result does not depend on `workers`.
pub fn run_scenario(spec: &ScenarioSpec, seed: u64, workers: Option<usize>) -> Result<ArlSummary> {
    spec.validate()?;
    let run = || {
        (0..spec.reps)
            .into_par_iter()
            .map(|i| run_replicate(spec, &mut stream_rng(seed, i as u64)))
            .collect::<Result<Vec<_>>>()
    };
    let outcomes = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidParams(format!("worker pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(ArlSummary::from_outcomes(spec, &outcomes))
}

/// A rendered results table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub csv: String,
    pub text: String,
}

fn column_names() -> Vec<String> {
    STATISTICS.iter().map(ToString::to_string).collect()
}

/// Lays out summaries one row per scenario setting with the AARL of each
/// chart, followed by standard errors, censoring and false-alarm counts.
pub fn table_report(summaries: &[ArlSummary]) -> Table {
    let cols = column_names();
    let mut header = vec![
        "sim".to_string(),
        "change".into(),
        "parameter".into(),
        "m".into(),
        "reps".into(),
    ];
    header.extend(cols.iter().cloned());
    for prefix in ["se_", "censored_", "false_alarms_"] {
        header.extend(cols.iter().map(|c| format!("{prefix}{c}")));
    }
    let mut csv = header.join(",");
    csv.push('\n');

    let mut rows: Vec<Vec<String>> = Vec::new();
    for s in summaries {
        let mut row = vec![
            s.spec.scenario.id().to_string(),
            s.spec.scenario.description().to_string(),
            s.spec.parameter_label(),
            s.spec.m.to_string(),
            s.spec.reps.to_string(),
        ];
        row.extend(s.stats.iter().map(|a| format!("{:.2}", a.mean)));
        row.extend(s.stats.iter().map(|a| format!("{:.2}", a.se)));
        row.extend(s.stats.iter().map(|a| a.censored.to_string()));
        row.extend(s.stats.iter().map(|a| a.false_alarms.to_string()));
        rows.push(row);
    }
    for row in &rows {
        csv.push_str(&row.join(","));
        csv.push('\n');
    }

    // aligned text: identification columns, then "mean (se)" per chart
    let mut text_rows = vec![{
        let mut h = vec!["sim".to_string(), "change".into(), "parameter".into()];
        h.extend(cols.iter().cloned());
        h.push("censored".into());
        h.push("false alarms".into());
        h
    }];
    for (s, row) in summaries.iter().zip(&rows) {
        let mut r = row[..3].to_vec();
        r.extend(
            s.stats
                .iter()
                .map(|a| format!("{:.2} ({:.2})", a.mean, a.se)),
        );
        r.push(
            s.stats
                .iter()
                .map(|a| a.censored.to_string())
                .collect::<Vec<_>>()
                .join("/"),
        );
        r.push(
            s.stats
                .iter()
                .map(|a| a.false_alarms.to_string())
                .collect::<Vec<_>>()
                .join("/"),
        );
        text_rows.push(r);
    }
    let widths: Vec<usize> = (0..text_rows[0].len())
        .map(|i| text_rows.iter().map(|r| r[i].len()).max().unwrap_or(0))
        .collect();
    let mut text = String::new();
    for r in &text_rows {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (cell, &w))| {
                if i < 3 {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        let _ = writeln!(text, "{}", line.join("  ").trim_end());
    }
    Table { csv, text }
}
