//! Degree-corrected stochastic block model for Poisson edge weights.
//!
//! Edge weights are independent with `w(u,v) ~ Poisson(theta_u theta_v P[c_u][c_v])`
//! for `u < v`. Degree propensities are identified by requiring them to sum
//! to the community size within each community.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{block_weight_matrix, CommunityAssignment, DynamicNetwork, WeightedGraph};
use crate::linalg::Matrix;
use crate::sampling::{poisson, uniform, AliasTable};

/// Relative tolerance for the per-community propensity sum constraint.
pub const IDENTIFIABILITY_TOL: f64 = 1e-10;

fn check_connectivity(p: &Matrix, k: usize) -> Result<()> {
    if p.rows() != k || p.cols() != k {
        return Err(Error::Dimension(format!(
            "connectivity matrix is {}x{}, expected {k}x{k}",
            p.rows(),
            p.cols()
        )));
    }
    if !p.is_symmetric(0.0) {
        return Err(Error::InvalidParams(
            "connectivity matrix must be symmetric".into(),
        ));
    }
    if p.as_slice().iter().any(|&x| !x.is_finite() || x <= 0.0) {
        return Err(Error::InvalidParams(
            "connectivity entries must be positive and finite".into(),
        ));
    }
    Ok(())
}

fn check_delta(delta: &[f64], k: usize) -> Result<()> {
    if delta.len() != k {
        return Err(Error::Dimension(format!(
            "{} spreads for {k} communities",
            delta.len()
        )));
    }
    if delta.iter().any(|d| !(0.0..=1.0).contains(d)) {
        return Err(Error::InvalidParams("spreads must lie in [0, 1]".into()));
    }
    Ok(())
}

fn check_pi(pi: &[f64], k: usize) -> Result<()> {
    if pi.len() != k {
        return Err(Error::Dimension(format!(
            "{} probabilities for {k} communities",
            pi.len()
        )));
    }
    if pi.iter().any(|&p| p.is_nan() || p <= 0.0) {
        return Err(Error::InvalidParams(
            "community probabilities must be positive".into(),
        ));
    }
    let total: f64 = pi.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParams(format!(
            "community probabilities sum to {total}"
        )));
    }
    Ok(())
}

/// Checks `sum_{c_u = r} theta_u = n_r` for every community.
pub fn check_identifiability(c: &CommunityAssignment, theta: &[f64]) -> Result<()> {
    if theta.len() != c.n() {
        return Err(Error::Dimension(format!(
            "{} propensities for {} nodes",
            theta.len(),
            c.n()
        )));
    }
    if theta.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParams(
            "propensities must be nonnegative and finite".into(),
        ));
    }
    let sizes = c.sizes();
    let mut sums = vec![0.0; c.k()];
    for (u, &t) in theta.iter().enumerate() {
        sums[c.label(u)] += t;
    }
    for (r, (&sum, &size)) in sums.iter().zip(&sizes).enumerate() {
        let target = size as f64;
        if (sum - target).abs() > IDENTIFIABILITY_TOL * target.max(1.0) {
            return Err(Error::InvalidParams(format!(
                "propensities in community {} sum to {sum}, expected {size}",
                r + 1
            )));
        }
    }
    Ok(())
}

/// Full parameter set of a single-graph DCSBM.
#[derive(Debug, Clone, PartialEq)]
pub struct DcsbmParams {
    labels: CommunityAssignment,
    theta: Vec<f64>,
    pi: Option<Vec<f64>>,
    p: Matrix,
    delta: Vec<f64>,
}

impl DcsbmParams {
    pub fn new(
        labels: CommunityAssignment,
        theta: Vec<f64>,
        pi: Option<Vec<f64>>,
        p: Matrix,
        delta: Vec<f64>,
    ) -> Result<Self> {
        let k = labels.k();
        check_connectivity(&p, k)?;
        check_delta(&delta, k)?;
        if let Some(pi) = &pi {
            check_pi(pi, k)?;
        }
        check_identifiability(&labels, &theta)?;
        Ok(Self {
            labels,
            theta,
            pi,
            p,
            delta,
        })
    }

    /// Parameters with `theta = 1` everywhere (always identifiable).
    pub fn with_unit_theta(
        labels: CommunityAssignment,
        p: Matrix,
        delta: Vec<f64>,
    ) -> Result<Self> {
        let theta = vec![1.0; labels.n()];
        Self::new(labels, theta, None, p, delta)
    }

    pub fn labels(&self) -> &CommunityAssignment {
        &self.labels
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn pi(&self) -> Option<&[f64]> {
        self.pi.as_deref()
    }

    pub fn p(&self) -> &Matrix {
        &self.p
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn n(&self) -> usize {
        self.labels.n()
    }

    pub fn k(&self) -> usize {
        self.labels.k()
    }

    /// Replaces the propensities, re-checking identifiability.
    pub fn with_theta(mut self, theta: Vec<f64>) -> Result<Self> {
        check_identifiability(&self.labels, &theta)?;
        self.theta = theta;
        Ok(self)
    }

    /// Expected weight `theta_u theta_v P[c_u][c_v]` of the pair.
    #[inline]
    pub fn expected_weight(&self, u: usize, v: usize) -> f64 {
        self.theta[u] * self.theta[v] * self.p[(self.labels.label(u), self.labels.label(v))]
    }

    pub fn regime(&self) -> Regime {
        Regime {
            labels: self.labels.clone(),
            p: self.p.clone(),
            delta: self.delta.clone(),
        }
    }
}

/// The parameters that persist across time steps of a dynamic simulation:
/// labels, connectivity and propensity spreads. Propensities are redrawn
/// from these.
#[derive(Debug, Clone, PartialEq)]
pub struct Regime {
    pub labels: CommunityAssignment,
    pub p: Matrix,
    pub delta: Vec<f64>,
}

impl Regime {
    pub fn new(labels: CommunityAssignment, p: Matrix, delta: Vec<f64>) -> Result<Self> {
        check_connectivity(&p, labels.k())?;
        check_delta(&delta, labels.k())?;
        Ok(Self { labels, p, delta })
    }

    fn params_with(&self, theta: Vec<f64>) -> DcsbmParams {
        DcsbmParams {
            labels: self.labels.clone(),
            theta,
            pi: None,
            p: self.p.clone(),
            delta: self.delta.clone(),
        }
    }
}

/// A structural change applied from time `t_star` onward.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeSpec {
    t_star: usize,
    post: Regime,
}

impl ChangeSpec {
    /// `labels`, `p` and `delta` describe the post-change regime and must
    /// agree in the number of communities.
    pub fn new(
        t_star: usize,
        labels: CommunityAssignment,
        p: Matrix,
        delta: Vec<f64>,
    ) -> Result<Self> {
        if t_star < 2 {
            return Err(Error::InvalidParams(format!(
                "change time must be at least 2, got {t_star}"
            )));
        }
        let post = Regime::new(labels, p, delta)?;
        Ok(Self { t_star, post })
    }

    /// A change that leaves the model as it is.
    pub fn identity(pre: &DcsbmParams, t_star: usize) -> Result<Self> {
        Self::new(t_star, pre.labels.clone(), pre.p.clone(), pre.delta.clone())
    }

    /// Splits community `r` (0-based) into two contiguous halves of sizes
    /// `ceil(n_r/2)` and `floor(n_r/2)`. The second half becomes community
    /// `k`; it inherits `r`'s connectivity and spread, and the two halves
    /// connect at rate `between`.
    pub fn split(pre: &DcsbmParams, r: usize, between: f64, t_star: usize) -> Result<Self> {
        let labels = split_labels(&pre.labels, r)?;
        let k = pre.k();
        let mut p = Matrix::zeros(k + 1, k + 1);
        let src = |i: usize| if i == k { r } else { i };
        for i in 0..=k {
            for j in 0..=k {
                p[(i, j)] = pre.p[(src(i), src(j))];
            }
        }
        p[(r, k)] = between;
        p[(k, r)] = between;
        let mut delta = pre.delta.clone();
        delta.push(pre.delta[r]);
        Self::new(t_star, labels, p, delta)
    }

    /// Merges communities `a` and `b` (0-based). The merged within-block rate
    /// is the mean of the four old rates among the two communities
    /// (`P_aa`, `P_bb` and twice `P_ab`); rates to other communities and the
    /// spread are averaged over the pair.
    pub fn merge(pre: &DcsbmParams, a: usize, b: usize, t_star: usize) -> Result<Self> {
        let (labels, _) = merge_labels(&pre.labels, a, b)?;
        let (lo, hi) = (a.min(b), a.max(b));
        let k_new = pre.k() - 1;
        // old index for each new community, with `lo` standing for the union
        let old: Vec<usize> = (0..pre.k()).filter(|&i| i != hi).collect();
        debug_assert_eq!(old.len(), k_new);
        let rate = |i: usize, j: usize| -> f64 {
            let expand = |x: usize| if x == lo { vec![lo, hi] } else { vec![x] };
            let (ri, rj) = (expand(old[i]), expand(old[j]));
            let mut sum = 0.0;
            for &x in &ri {
                for &y in &rj {
                    sum += pre.p[(x, y)];
                }
            }
            sum / (ri.len() * rj.len()) as f64
        };
        let mut p = Matrix::zeros(k_new, k_new);
        for i in 0..k_new {
            for j in 0..k_new {
                p[(i, j)] = rate(i, j);
            }
        }
        let delta = old
            .iter()
            .map(|&o| {
                if o == lo {
                    0.5 * (pre.delta[lo] + pre.delta[hi])
                } else {
                    pre.delta[o]
                }
            })
            .collect();
        Self::new(t_star, labels, p, delta)
    }

    pub fn t_star(&self) -> usize {
        self.t_star
    }

    pub fn post(&self) -> &Regime {
        &self.post
    }
}

/// Labels after splitting community `r` into contiguous halves; the second
/// half gets the new label `k`.
pub fn split_labels(c: &CommunityAssignment, r: usize) -> Result<CommunityAssignment> {
    if r >= c.k() {
        return Err(Error::InvalidParams(format!("no community {}", r + 1)));
    }
    let members = &c.members()[r];
    if members.len() < 2 {
        return Err(Error::CommunityTooSmall {
            community: r + 1,
            size: members.len(),
        });
    }
    let first = members.len().div_ceil(2);
    let mut labels = c.labels().to_vec();
    for &u in &members[first..] {
        labels[u] = c.k();
    }
    CommunityAssignment::new(labels, c.k() + 1)
}

/// Labels after merging communities `a` and `b` into the smaller index;
/// higher labels shift down by one. Also returns the old-to-new label map.
pub fn merge_labels(
    c: &CommunityAssignment,
    a: usize,
    b: usize,
) -> Result<(CommunityAssignment, Vec<usize>)> {
    if a == b || a >= c.k() || b >= c.k() {
        return Err(Error::InvalidParams(format!(
            "cannot merge communities {} and {}",
            a + 1,
            b + 1
        )));
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let map: Vec<usize> = (0..c.k())
        .map(|r| match r.cmp(&hi) {
            std::cmp::Ordering::Less => r,
            std::cmp::Ordering::Equal => lo,
            std::cmp::Ordering::Greater => r - 1,
        })
        .collect();
    let labels = c.labels().iter().map(|&l| map[l]).collect();
    Ok((CommunityAssignment::new(labels, c.k() - 1)?, map))
}

/// I.i.d. categorical labels with probabilities `pi`.
pub fn draw_labels<R: Rng + ?Sized>(
    pi: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<CommunityAssignment> {
    check_pi(pi, pi.len())?;
    let labels = (0..n)
        .map(|_| {
            let u = uniform(rng);
            let mut acc = 0.0;
            for (r, &p) in pi.iter().enumerate() {
                acc += p;
                if u < acc {
                    return r;
                }
            }
            pi.len() - 1
        })
        .collect();
    CommunityAssignment::new(labels, pi.len())
}

/// Draws `theta0_u ~ U(1 - delta_r, 1 + delta_r)` and rescales each
/// community to sum to its size.
pub fn draw_theta<R: Rng + ?Sized>(
    c: &CommunityAssignment,
    delta: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_delta(delta, c.k())?;
    c.require_nonempty()?;
    let mut theta: Vec<f64> = c
        .labels()
        .iter()
        .map(|&r| 1.0 - delta[r] + 2.0 * delta[r] * uniform(rng))
        .collect();
    normalize_theta(c, &mut theta);
    Ok(theta)
}

fn normalize_theta(c: &CommunityAssignment, theta: &mut [f64]) {
    let sizes = c.sizes();
    let mut sums = vec![0.0; c.k()];
    for (u, &t) in theta.iter().enumerate() {
        sums[c.label(u)] += t;
    }
    for (u, t) in theta.iter_mut().enumerate() {
        let r = c.label(u);
        *t = if sums[r] > 0.0 {
            sizes[r] as f64 * *t / sums[r]
        } else {
            1.0
        };
    }
}

/// One graph with independent Poisson weights for every pair `u < v`.
pub fn simulate_graph<R: Rng + ?Sized>(params: &DcsbmParams, rng: &mut R) -> WeightedGraph {
    let n = params.n();
    let mut g = WeightedGraph::empty(n).expect("params have n > 0");
    for u in 0..n {
        for v in (u + 1)..n {
            let w = poisson(rng, params.expected_weight(u, v));
            if w > 0 {
                let w = u32::try_from(w).expect("edge weight overflows u32");
                g.set_weight(u, v, w).expect("indices in range");
            }
        }
    }
    g
}

/// How often propensities are drawn during a dynamic simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaRedraw {
    /// Fresh propensities at every time step.
    #[default]
    EveryStep,
    /// One draw per regime, reused for every graph in it.
    OncePerRegime,
}

/// Simulates `len` graphs: steps `t < t_star` from `pre`, steps
/// `t >= t_star` from the change's post regime.
pub fn simulate_dynamic<R: Rng + ?Sized>(
    pre: &DcsbmParams,
    change: &ChangeSpec,
    len: usize,
    redraw: ThetaRedraw,
    rng: &mut R,
) -> Result<DynamicNetwork> {
    if len == 0 {
        return Err(Error::InvalidParams(
            "sequence length must be positive".into(),
        ));
    }
    if change.post.labels.n() != pre.n() {
        return Err(Error::Dimension(format!(
            "post-change labels cover {} nodes, model has {}",
            change.post.labels.n(),
            pre.n()
        )));
    }
    let regimes = [pre.regime(), change.post.clone()];
    let mut fixed: [Option<DcsbmParams>; 2] = [None, None];
    let mut graphs = Vec::with_capacity(len);
    for t in 1..=len {
        let idx = usize::from(t >= change.t_star);
        let regime = &regimes[idx];
        let params = match redraw {
            ThetaRedraw::EveryStep => {
                regime.params_with(draw_theta(&regime.labels, &regime.delta, rng)?)
            }
            ThetaRedraw::OncePerRegime => match &fixed[idx] {
                Some(p) => p.clone(),
                None => {
                    let p = regime.params_with(draw_theta(&regime.labels, &regime.delta, rng)?);
                    fixed[idx] = Some(p.clone());
                    p
                }
            },
        };
        graphs.push(simulate_graph(&params, rng));
    }
    DynamicNetwork::new(graphs)
}

/// Degrees and block weight matrix of one graph under fixed labels: the
/// sufficient statistics of the likelihood.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSummary {
    pub degrees: Vec<u64>,
    pub block: Vec<Vec<u64>>,
}

impl BlockSummary {
    pub fn from_graph(g: &WeightedGraph, c: &CommunityAssignment) -> Result<Self> {
        Ok(Self {
            block: block_weight_matrix(g, c)?,
            degrees: g.degrees(),
        })
    }
}

/// Samples the sufficient statistics of a DCSBM graph without materializing
/// the adjacency matrix.
///
/// The total weight of each block is Poisson with the summed mean; given the
/// total, each unit of weight lands on a pair with probability proportional
/// to `theta_u theta_v`. Within a block, ordered pairs are drawn from the
/// product of per-node alias tables and self-pairs are rejected. The result
/// has the same distribution as [`simulate_graph`] followed by
/// [`BlockSummary::from_graph`], at a cost proportional to the number of
/// edges.
#[derive(Debug, Clone)]
pub struct EdgeSampler {
    members: Vec<Vec<usize>>,
    p: Matrix,
}

impl EdgeSampler {
    pub fn new(regime: &Regime) -> Self {
        Self {
            members: regime.labels.members(),
            p: regime.p.clone(),
        }
    }

    /// Summary of one graph drawn with propensities `theta`, aggregated by
    /// `monitor` labels (which may differ from the generating labels).
    pub fn sample<R: Rng + ?Sized>(
        &self,
        theta: &[f64],
        monitor: &CommunityAssignment,
        rng: &mut R,
    ) -> BlockSummary {
        let k = self.members.len();
        let km = monitor.k();
        let mut degrees = vec![0u64; theta.len()];
        let mut block = vec![vec![0u64; km]; km];
        let mut add = |u: usize, v: usize, degrees: &mut Vec<u64>| {
            degrees[u] += 1;
            degrees[v] += 1;
            let (a, b) = (monitor.label(u), monitor.label(v));
            block[a][b] += 1;
            block[b][a] += 1;
        };

        let mut tables = Vec::with_capacity(k);
        let mut sums = Vec::with_capacity(k);
        let mut squares = Vec::with_capacity(k);
        for nodes in &self.members {
            let w: Vec<f64> = nodes.iter().map(|&u| theta[u]).collect();
            let s: f64 = w.iter().sum();
            squares.push(w.iter().map(|x| x * x).sum::<f64>());
            sums.push(s);
            tables.push((s > 0.0).then(|| AliasTable::new(&w)));
        }

        for r in 0..k {
            for s in r..k {
                let (Some(tr), Some(ts)) = (&tables[r], &tables[s]) else {
                    continue;
                };
                let rate = self.p[(r, s)];
                if r == s {
                    let mean = 0.5 * rate * (sums[r] * sums[r] - squares[r]);
                    if self.members[r].len() < 2 || mean <= 0.0 {
                        continue;
                    }
                    let count = poisson(rng, mean);
                    for _ in 0..count {
                        loop {
                            let u = self.members[r][tr.sample(rng)];
                            let v = self.members[r][tr.sample(rng)];
                            if u != v {
                                add(u, v, &mut degrees);
                                break;
                            }
                        }
                    }
                } else {
                    let count = poisson(rng, rate * sums[r] * sums[s]);
                    for _ in 0..count {
                        let u = self.members[r][tr.sample(rng)];
                        let v = self.members[s][ts.sample(rng)];
                        add(u, v, &mut degrees);
                    }
                }
            }
        }
        BlockSummary { degrees, block }
    }
}

fn log_likelihood_parts(
    summary: &BlockSummary,
    c: &CommunityAssignment,
    theta: &[f64],
    pi: Option<&[f64]>,
    p: &Matrix,
) -> f64 {
    let sizes = c.sizes();
    let mut ll = 0.0;
    if let Some(pi) = pi {
        for (r, &size) in sizes.iter().enumerate() {
            if size > 0 {
                ll += size as f64 * pi[r].ln();
            }
        }
    }
    for (u, &d) in summary.degrees.iter().enumerate() {
        if d > 0 {
            if theta[u] <= 0.0 {
                return f64::NEG_INFINITY;
            }
            ll += d as f64 * theta[u].ln();
        }
    }
    let k = c.k();
    let mut block_term = 0.0;
    for r in 0..k {
        for s in 0..k {
            let m = summary.block[r][s] as f64;
            let prs = p[(r, s)];
            if m > 0.0 {
                if prs <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                block_term += m * prs.ln();
            }
            block_term -= (sizes[r] * sizes[s]) as f64 * prs;
        }
    }
    ll + 0.5 * block_term
}

/// Log-likelihood of `params` for graph `g`, dropping the `sum log w!`
/// constant. The label term is included only when `params` carries
/// community probabilities. Returns negative infinity when a node with
/// positive degree has zero propensity.
pub fn log_likelihood(g: &WeightedGraph, params: &DcsbmParams) -> Result<f64> {
    if g.n() != params.n() {
        return Err(Error::Dimension(format!(
            "graph has {} nodes, parameters {}",
            g.n(),
            params.n()
        )));
    }
    if params.p.as_slice().iter().any(|&x| x <= 0.0) {
        return Err(Error::InvalidParams(
            "connectivity entries must be positive".into(),
        ));
    }
    let summary = BlockSummary::from_graph(g, &params.labels)?;
    Ok(log_likelihood_parts(
        &summary,
        &params.labels,
        &params.theta,
        params.pi.as_deref(),
        &params.p,
    ))
}

/// Closed-form maximum likelihood estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct MleFit {
    pub theta: Vec<f64>,
    pub pi: Vec<f64>,
    pub p: Matrix,
    /// Communities whose total degree is zero; their propensities are set to 1.
    pub degenerate: Vec<bool>,
}

impl MleFit {
    /// Log-likelihood at the fitted values, with `0 log 0 = 0` for empty
    /// blocks (the supremum as the rate goes to zero).
    pub fn log_likelihood(
        &self,
        g: &WeightedGraph,
        c: &CommunityAssignment,
        with_labels: bool,
    ) -> Result<f64> {
        let summary = BlockSummary::from_graph(g, c)?;
        let pi = with_labels.then_some(self.pi.as_slice());
        Ok(log_likelihood_parts(&summary, c, &self.theta, pi, &self.p))
    }
}

/// Closed-form estimates from a graph and fixed labels.
pub fn mle(g: &WeightedGraph, c: &CommunityAssignment) -> Result<MleFit> {
    mle_from_summary(&BlockSummary::from_graph(g, c)?, c)
}

/// Closed-form estimates from precomputed sufficient statistics:
/// `theta_u = d_u / mean degree of its community`, `pi_r = n_r / n`,
/// `P_rs = m_rs / (n_r n_s)`.
pub fn mle_from_summary(summary: &BlockSummary, c: &CommunityAssignment) -> Result<MleFit> {
    c.require_nonempty()?;
    let sizes = c.sizes();
    let k = c.k();
    let n = c.n() as f64;
    let mut degree_sums = vec![0u64; k];
    for (u, &d) in summary.degrees.iter().enumerate() {
        degree_sums[c.label(u)] += d;
    }
    let degenerate: Vec<bool> = degree_sums.iter().map(|&s| s == 0).collect();
    let theta = summary
        .degrees
        .iter()
        .enumerate()
        .map(|(u, &d)| {
            let r = c.label(u);
            if degenerate[r] {
                1.0
            } else {
                d as f64 * sizes[r] as f64 / degree_sums[r] as f64
            }
        })
        .collect();
    let pi = sizes.iter().map(|&s| s as f64 / n).collect();
    let mut p = Matrix::zeros(k, k);
    for r in 0..k {
        for s in 0..k {
            p[(r, s)] = summary.block[r][s] as f64 / (sizes[r] * sizes[s]) as f64;
        }
    }
    Ok(MleFit {
        theta,
        pi,
        p,
        degenerate,
    })
}

/// Expected weights of a parameterization and how far they sit from the
/// special cases the model contains.
#[derive(Debug, Clone)]
pub struct ReductionReport {
    /// `E[w(u,v)] = theta_u theta_v P[c_u][c_v]` for `u != v`, zero on the diagonal.
    pub expected: Matrix,
    /// Max deviation from `P[c_u][c_v]` when every `theta_u = 1`.
    pub sbm: Option<f64>,
    /// Max deviation from the common rate when additionally all of `P` is equal.
    pub erdos_renyi: Option<f64>,
    /// Max deviation from `d(u) d(v) / sum d` when `k = 1` and `P = [1]`, with
    /// the degree sequence implied by `theta_u = d(u) / sqrt(sum d)`,
    /// i.e. `d(u) = theta_u * sum(theta)`.
    pub chung_lu: Option<f64>,
}

/// Evaluates the expected weights and the three special-case reductions.
/// Propensities are not required to satisfy the identifiability constraint.
pub fn reduction_checks(
    theta: &[f64],
    c: &CommunityAssignment,
    p: &Matrix,
) -> Result<ReductionReport> {
    let n = c.n();
    if theta.len() != n {
        return Err(Error::Dimension(format!(
            "{} propensities for {n} nodes",
            theta.len()
        )));
    }
    check_connectivity(p, c.k())?;
    let mut expected = Matrix::zeros(n, n);
    for u in 0..n {
        for v in 0..n {
            if u != v {
                expected[(u, v)] = theta[u] * theta[v] * p[(c.label(u), c.label(v))];
            }
        }
    }
    let off_pairs = || (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)));

    let unit = theta.iter().all(|&t| t == 1.0);
    let sbm = unit.then(|| {
        off_pairs()
            .map(|(u, v)| (expected[(u, v)] - p[(c.label(u), c.label(v))]).abs())
            .fold(0.0, f64::max)
    });
    let first = p[(0, 0)];
    let constant = p.as_slice().iter().all(|&x| x == first);
    let erdos_renyi = (unit && constant).then(|| {
        off_pairs()
            .map(|(u, v)| (expected[(u, v)] - first).abs())
            .fold(0.0, f64::max)
    });
    let chung_lu = (c.k() == 1 && first == 1.0).then(|| {
        let total_theta: f64 = theta.iter().sum();
        let d: Vec<f64> = theta.iter().map(|t| t * total_theta).collect();
        let dsum: f64 = d.iter().sum();
        off_pairs()
            .map(|(u, v)| (expected[(u, v)] - d[u] * d[v] / dsum).abs())
            .fold(0.0, f64::max)
    });
    Ok(ReductionReport {
        expected,
        sbm,
        erdos_renyi,
        chung_lu,
    })
}

/// Propensities `d(u) / sqrt(sum d)` that turn a one-community model with
/// `P = [1]` into the Chung–Lu model for degree sequence `d`.
pub fn chung_lu_theta(degrees: &[f64]) -> Vec<f64> {
    let total: f64 = degrees.iter().sum();
    let root = total.sqrt();
    degrees.iter().map(|d| d / root).collect()
}
