//! Monitoring of model-based statistics through time: fitted connectivity
//! for every block pair and the spread of fitted propensities within each
//! community.

use std::fmt;
use std::io::Write;

use rand::Rng;

use crate::charts::{chart, ChartKind, ControlChart};
use crate::community::{regularized_spectral_clustering, Clustering};
use crate::dcsbm::{mle_from_summary, BlockSummary};
use crate::error::{Error, Result};
use crate::graph::{CommunityAssignment, DynamicNetwork, WeightedGraph};
use crate::linalg::Matrix;

/// Statistics extracted from one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct StatVector {
    pub p_hat: Matrix,
    /// Root mean squared deviation of fitted propensities from 1, per community.
    pub s: Vec<f64>,
    /// `s` pooled over communities with weights `n_r - 1`.
    pub pooled_s: f64,
}

/// Statistics of `g` under labels `c`. Every community needs at least two nodes.
pub fn stat_vector(g: &WeightedGraph, c: &CommunityAssignment) -> Result<StatVector> {
    stat_vector_from_summary(&BlockSummary::from_graph(g, c)?, c)
}

pub fn stat_vector_from_summary(
    summary: &BlockSummary,
    c: &CommunityAssignment,
) -> Result<StatVector> {
    let sizes = c.sizes();
    if let Some((r, &size)) = sizes.iter().enumerate().find(|(_, &s)| s < 2) {
        return Err(Error::CommunityTooSmall {
            community: r + 1,
            size,
        });
    }
    let fit = mle_from_summary(summary, c)?;
    let mut ss = vec![0.0; c.k()];
    for (u, &t) in fit.theta.iter().enumerate() {
        ss[c.label(u)] += (t - 1.0) * (t - 1.0);
    }
    let s: Vec<f64> = ss
        .iter()
        .zip(&sizes)
        .map(|(&q, &n)| (q / (n - 1) as f64).sqrt())
        .collect();
    let dof: usize = sizes.iter().map(|n| n - 1).sum();
    let pooled_s = (ss.iter().sum::<f64>() / dof as f64).sqrt();
    Ok(StatVector {
        p_hat: fit.p,
        s,
        pooled_s,
    })
}

/// Which propensity-spread statistics to chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SdMode {
    /// One chart per community.
    #[default]
    PerCommunity,
    /// A single pooled chart, for when spreads are assumed common.
    Pooled,
    Both,
}

/// A monitored statistic. Indices are 0-based; names are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statistic {
    Connectivity(usize, usize),
    Spread(usize),
    PooledSpread,
}

impl Statistic {
    pub fn value(&self, v: &StatVector) -> f64 {
        match *self {
            Statistic::Connectivity(r, s) => v.p_hat[(r, s)],
            Statistic::Spread(r) => v.s[r],
            Statistic::PooledSpread => v.pooled_s,
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Statistic::Connectivity(r, s) => write!(f, "P{}_{}", r + 1, s + 1),
            Statistic::Spread(r) => write!(f, "s{}", r + 1),
            Statistic::PooledSpread => write!(f, "s"),
        }
    }
}

/// The monitored statistics for `k` communities: `P_rs` for `r <= s`
/// followed by the spread statistics selected by `mode`.
pub fn statistics(k: usize, mode: SdMode) -> Vec<Statistic> {
    let mut out = Vec::new();
    for r in 0..k {
        for s in r..k {
            out.push(Statistic::Connectivity(r, s));
        }
    }
    if matches!(mode, SdMode::PerCommunity | SdMode::Both) {
        out.extend((0..k).map(Statistic::Spread));
    }
    if matches!(mode, SdMode::Pooled | SdMode::Both) {
        out.push(Statistic::PooledSpread);
    }
    out
}

#[derive(Debug, Clone)]
pub struct MonitorConfig {
    /// Phase I size.
    pub m: usize,
    pub kinds: Vec<ChartKind>,
    pub sd_mode: SdMode,
}

impl MonitorConfig {
    pub fn shewhart(m: usize) -> Self {
        Self {
            m,
            kinds: vec![ChartKind::Shewhart],
            sd_mode: SdMode::PerCommunity,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MonitoredChart {
    pub statistic: Statistic,
    pub chart: ControlChart,
}

impl MonitoredChart {
    /// `<statistic>-<kind>`, e.g. `P1_2-ewma`.
    pub fn name(&self) -> String {
        format!("{}-{}", self.statistic, self.chart.kind.name())
    }
}

/// One chart per statistic per chart kind, plus the statistic series.
#[derive(Debug, Clone)]
pub struct ChartBank {
    pub charts: Vec<MonitoredChart>,
    pub stats: Vec<StatVector>,
    pub times: Option<Vec<String>>,
}

impl ChartBank {
    /// For each time with at least one signal, the names of the charts that signaled.
    pub fn combined_signals(&self) -> Vec<(usize, Vec<String>)> {
        let len = self.stats.len();
        (1..=len)
            .filter_map(|t| {
                let names: Vec<String> = self
                    .charts
                    .iter()
                    .filter(|c| c.chart.points[t - 1].signal)
                    .map(MonitoredChart::name)
                    .collect();
                (!names.is_empty()).then_some((t, names))
            })
            .collect()
    }

    /// First time at which any chart signals.
    pub fn first_signal(&self) -> Option<usize> {
        self.charts
            .iter()
            .filter_map(|c| c.chart.first_signal())
            .min()
    }

    pub fn get(&self, statistic: Statistic, kind: &str) -> Option<&ControlChart> {
        self.charts
            .iter()
            .find(|c| c.statistic == statistic && c.chart.kind.name() == kind)
            .map(|c| &c.chart)
    }

    /// `t,chart,statistic,value` with one row per signal, in time order.
    pub fn write_signals_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,chart,statistic,value")?;
        for (t, _) in self.combined_signals() {
            let label = self
                .times
                .as_ref()
                .and_then(|ts| ts.get(t - 1).cloned())
                .unwrap_or_else(|| t.to_string());
            for c in self.charts.iter().filter(|c| c.chart.points[t - 1].signal) {
                writeln!(
                    out,
                    "{label},{},{},{}",
                    c.chart.kind.name(),
                    c.statistic,
                    c.chart.points[t - 1].value
                )?;
            }
        }
        Ok(())
    }
}

/// Builds the chart bank from precomputed statistics. All vectors must
/// have the same number of communities.
pub fn monitor_stats(
    stats: Vec<StatVector>,
    config: &MonitorConfig,
    times: Option<Vec<String>>,
) -> Result<ChartBank> {
    let len = stats.len();
    if config.m < 2 {
        return Err(Error::PhaseTooShort(config.m));
    }
    if config.m >= len {
        return Err(Error::InvalidParams(format!(
            "phase I size {} leaves no phase II in a sequence of length {len}",
            config.m
        )));
    }
    let k = stats[0].s.len();
    if stats.iter().any(|v| v.s.len() != k) {
        return Err(Error::Dimension("community count changes over time".into()));
    }
    let mut charts = Vec::new();
    for kind in &config.kinds {
        for statistic in statistics(k, config.sd_mode) {
            let series: Vec<f64> = stats.iter().map(|v| statistic.value(v)).collect();
            charts.push(MonitoredChart {
                statistic,
                chart: chart(&series, config.m, *kind)?,
            });
        }
    }
    Ok(ChartBank {
        charts,
        stats,
        times,
    })
}

/// Charts every statistic of `seq` under fixed labels `c`.
pub fn monitor(
    seq: &DynamicNetwork,
    c: &CommunityAssignment,
    config: &MonitorConfig,
) -> Result<ChartBank> {
    if c.n() != seq.n() {
        return Err(Error::Dimension(format!(
            "labels cover {} nodes, sequence has {}",
            c.n(),
            seq.n()
        )));
    }
    let stats = seq
        .graphs()
        .iter()
        .map(|g| stat_vector(g, c))
        .collect::<Result<Vec<_>>>()?;
    monitor_stats(stats, config, seq.times().map(<[String]>::to_vec))
}

/// Detects `k` communities on the average Phase I graph, then monitors with them.
pub fn monitor_with_detection<R: Rng + ?Sized>(
    seq: &DynamicNetwork,
    k: usize,
    config: &MonitorConfig,
    rng: &mut R,
) -> Result<(ChartBank, Clustering)> {
    if config.m < 2 || config.m > seq.len() {
        return Err(Error::Window {
            first: 1,
            last: config.m,
            len: seq.len(),
        });
    }
    let avg = seq.average_graph(1, config.m)?;
    let clustering = regularized_spectral_clustering(&avg, k, None, rng)?;
    clustering.labels.require_nonempty()?;
    let bank = monitor(seq, &clustering.labels, config)?;
    Ok((bank, clustering))
}
