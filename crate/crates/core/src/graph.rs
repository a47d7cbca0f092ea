//! Weighted undirected graphs, dynamic sequences of them, community
//! assignments, and the community-aggregated sufficient statistics.
//!
//! Community labels are stored 0-based (`0..k`). Files and user-facing
//! output use 1-based labels.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Undirected graph on `n` nodes with nonnegative integer edge weights,
/// stored as a dense symmetric matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    n: usize,
    weights: Vec<u32>,
}

impl WeightedGraph {
    /// Graph with every weight zero.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("node count must be positive".into()));
        }
        Ok(Self {
            n,
            weights: vec![0; n * n],
        })
    }

    /// Validates a row-major `n*n` weight matrix.
    pub fn from_weights(n: usize, weights: Vec<u32>) -> Result<Self> {
        if n == 0 || weights.len() != n * n {
            return Err(Error::InvalidGraph(format!(
                "expected {} weights for n = {n}, got {}",
                n * n,
                weights.len()
            )));
        }
        for u in 0..n {
            if weights[u * n + u] != 0 {
                return Err(Error::InvalidGraph(format!("self-loop at node {}", u + 1)));
            }
            for v in (u + 1)..n {
                if weights[u * n + v] != weights[v * n + u] {
                    return Err(Error::InvalidGraph(format!(
                        "asymmetric weight between nodes {} and {}",
                        u + 1,
                        v + 1
                    )));
                }
            }
        }
        Ok(Self { n, weights })
    }

    /// Builds a graph from `(u, v, w)` triples with 0-based endpoints.
    /// Repeated pairs accumulate.
    pub fn from_edges(n: usize, edges: &[(usize, usize, u32)]) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for &(u, v, w) in edges {
            let cur = g.weight(u, v);
            g.set_weight(u, v, cur + w)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weight(&self, u: usize, v: usize) -> u32 {
        self.weights[u * self.n + v]
    }

    /// Sets `w(u,v) = w(v,u) = w`.
    pub fn set_weight(&mut self, u: usize, v: usize, w: u32) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::InvalidGraph(format!(
                "endpoint out of range for n = {}",
                self.n
            )));
        }
        if u == v {
            if w != 0 {
                return Err(Error::InvalidGraph(format!("self-loop at node {}", u + 1)));
            }
            return Ok(());
        }
        self.weights[u * self.n + v] = w;
        self.weights[v * self.n + u] = w;
        Ok(())
    }

    pub fn row(&self, u: usize) -> &[u32] {
        &self.weights[u * self.n..(u + 1) * self.n]
    }

    /// Total edge weight, counting each unordered pair once.
    pub fn total_weight(&self) -> u64 {
        self.degrees().iter().sum::<u64>() / 2
    }

    /// Number of pairs with positive weight.
    pub fn edge_count(&self) -> usize {
        (0..self.n)
            .map(|u| self.row(u)[u + 1..].iter().filter(|&&w| w > 0).count())
            .sum()
    }

    /// Iterates over `(u, v, w)` with `u < v` and `w > 0`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        (0..self.n).flat_map(move |u| {
            ((u + 1)..self.n).filter_map(move |v| {
                let w = self.weight(u, v);
                (w > 0).then_some((u, v, w))
            })
        })
    }

    /// Node degrees `d_u = sum_v w(u,v)`.
    pub fn degrees(&self) -> Vec<u64> {
        (0..self.n)
            .map(|u| self.row(u).iter().map(|&w| u64::from(w)).sum())
            .collect()
    }

    /// Weights as a real matrix.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_vec(
            self.n,
            self.n,
            self.weights.iter().map(|&w| f64::from(w)).collect(),
        )
        .expect("square by construction")
    }

    /// Returns the graph with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: u32) -> Self {
        Self {
            n: self.n,
            weights: self.weights.iter().map(|w| w * factor).collect(),
        }
    }
}

/// Community labels for `n` nodes, each in `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CommunityAssignment {
    labels: Vec<usize>,
    k: usize,
}

impl CommunityAssignment {
    /// 0-based labels.
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        if let Some(bad) = labels.iter().find(|&&c| c >= k) {
            return Err(Error::InvalidParams(format!(
                "label {} outside 1..={k}",
                bad + 1
            )));
        }
        Ok(Self { labels, k })
    }

    /// 1-based labels as they appear in files.
    pub fn from_one_based(labels: &[usize], k: usize) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::InvalidParams("labels are 1-based".into()));
        }
        Self::new(labels.iter().map(|c| c - 1).collect(), k)
    }

    /// Contiguous blocks: the first `sizes[0]` nodes in community 0, and so on.
    pub fn contiguous(sizes: &[usize]) -> Result<Self> {
        let labels = sizes
            .iter()
            .enumerate()
            .flat_map(|(r, &s)| std::iter::repeat_n(r, s))
            .collect();
        Self::new(labels, sizes.len())
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, u: usize) -> usize {
        self.labels[u]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Community sizes `n_r`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.labels {
            sizes[c] += 1;
        }
        sizes
    }

    /// Node indices of each community, in increasing order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.k];
        for (u, &c) in self.labels.iter().enumerate() {
            m[c].push(u);
        }
        m
    }

    /// Errors with the first empty community (reported 1-based).
    pub fn require_nonempty(&self) -> Result<()> {
        match self.sizes().iter().position(|&s| s == 0) {
            Some(r) => Err(Error::EmptyCommunity(r + 1)),
            None => Ok(()),
        }
    }

    pub fn relabeled(&self, perm: &[usize]) -> Self {
        Self {
            labels: self.labels.iter().map(|&c| perm[c]).collect(),
            k: self.k,
        }
    }
}

/// Ordered sequence of graphs on a common node set.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicNetwork {
    graphs: Vec<WeightedGraph>,
    times: Option<Vec<String>>,
}

impl DynamicNetwork {
    pub fn new(graphs: Vec<WeightedGraph>) -> Result<Self> {
        let Some(first) = graphs.first() else {
            return Err(Error::InvalidGraph(
                "a dynamic network needs at least one graph".into(),
            ));
        };
        let n = first.n();
        if let Some(pos) = graphs.iter().position(|g| g.n() != n) {
            return Err(Error::Dimension(format!(
                "graph {} has {} nodes, expected {n}",
                pos + 1,
                graphs[pos].n()
            )));
        }
        Ok(Self {
            graphs,
            times: None,
        })
    }

    /// Attaches display labels (e.g. session numbers) to each time index.
    pub fn with_times(mut self, times: Vec<String>) -> Result<Self> {
        if times.len() != self.graphs.len() {
            return Err(Error::Dimension(format!(
                "{} time labels for {} graphs",
                times.len(),
                self.graphs.len()
            )));
        }
        self.times = Some(times);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.graphs[0].n()
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn graphs(&self) -> &[WeightedGraph] {
        &self.graphs
    }

    /// Graph at 1-based time `t`.
    pub fn at(&self, t: usize) -> &WeightedGraph {
        &self.graphs[t - 1]
    }

    pub fn times(&self) -> Option<&[String]> {
        self.times.as_deref()
    }

    /// Entrywise mean of the weight matrices over the 1-based inclusive window.
    pub fn average_graph(&self, first: usize, last: usize) -> Result<Matrix> {
        if first == 0 || first > last || last > self.len() {
            return Err(Error::Window {
                first,
                last,
                len: self.len(),
            });
        }
        let n = self.n();
        let mut acc = vec![0u64; n * n];
        for g in &self.graphs[first - 1..last] {
            for (a, &w) in acc.iter_mut().zip(&g.weights) {
                *a += u64::from(w);
            }
        }
        let m = (last - first + 1) as f64;
        Matrix::from_vec(n, n, acc.into_iter().map(|s| s as f64 / m).collect())
    }
}

/// Block weight matrix `M[r][s] = sum_{c_u = r} sum_{c_v = s} w(u,v)`.
///
/// Within-community edges are counted twice on the diagonal, so the matrix
/// sums to the total degree.
pub fn block_weight_matrix(g: &WeightedGraph, c: &CommunityAssignment) -> Result<Vec<Vec<u64>>> {
    if c.n() != g.n() {
        return Err(Error::Dimension(format!(
            "{} labels for a graph on {} nodes",
            c.n(),
            g.n()
        )));
    }
    let k = c.k();
    let mut m = vec![vec![0u64; k]; k];
    for u in 0..g.n() {
        let cu = c.label(u);
        for (v, &w) in g.row(u).iter().enumerate() {
            if w > 0 {
                m[cu][c.label(v)] += u64::from(w);
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degrees_single_edge() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 5)]).unwrap();
        assert_eq!(g.degrees(), vec![5, 5, 0]);
    }

    #[test]
    fn degrees_empty_and_triangle() {
        assert_eq!(WeightedGraph::empty(4).unwrap().degrees(), vec![0; 4]);
        let tri = WeightedGraph::from_edges(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]).unwrap();
        assert_eq!(tri.degrees(), vec![2, 2, 2]);
    }

    #[test]
    fn block_matrix_within_and_between() {
        let c = CommunityAssignment::from_one_based(&[1, 1, 2, 2], 2).unwrap();
        let g = WeightedGraph::from_edges(4, &[(0, 1, 3)]).unwrap();
        assert_eq!(
            block_weight_matrix(&g, &c).unwrap(),
            vec![vec![6, 0], vec![0, 0]]
        );
        let g = WeightedGraph::from_edges(4, &[(1, 2, 4)]).unwrap();
        assert_eq!(
            block_weight_matrix(&g, &c).unwrap(),
            vec![vec![0, 4], vec![4, 0]]
        );
    }

    #[test]
    fn block_matrix_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 6;
            let mut g = WeightedGraph::empty(n).unwrap();
            for u in 0..n {
                for v in (u + 1)..n {
                    g.set_weight(u, v, rng.random_range(0..5)).unwrap();
                }
            }
            let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let c = CommunityAssignment::new(labels.clone(), 2).unwrap();
            let mut oracle = vec![vec![0u64; 2]; 2];
            for u in 0..n {
                for v in 0..n {
                    oracle[labels[u]][labels[v]] += u64::from(g.weight(u, v));
                }
            }
            let m = block_weight_matrix(&g, &c).unwrap();
            assert_eq!(m, oracle);
            let total: u64 = m.iter().flatten().sum();
            assert_eq!(total, g.degrees().iter().sum::<u64>());
        }
    }

    #[test]
    fn invalid_weights_rejected() {
        assert!(WeightedGraph::from_weights(2, vec![0, 1, 2, 0]).is_err());
        assert!(WeightedGraph::from_weights(2, vec![1, 0, 0, 0]).is_err());
        assert!(WeightedGraph::empty(0).is_err());
    }

    #[test]
    fn average_of_one_and_two_graphs() {
        let g0 = WeightedGraph::empty(3).unwrap();
        let g1 = WeightedGraph::from_edges(3, &[(0, 1, 4)]).unwrap();
        let seq = DynamicNetwork::new(vec![g0, g1.clone()]).unwrap();
        let single = seq.average_graph(2, 2).unwrap();
        assert_eq!(single, g1.to_matrix());
        let avg = seq.average_graph(1, 2).unwrap();
        assert_eq!(avg[(0, 1)], 2.0);
        assert_eq!(avg[(1, 0)], 2.0);
        assert_eq!(avg[(0, 0)], 0.0);
    }

    #[test]
    fn average_window_errors() {
        let seq = DynamicNetwork::new(vec![WeightedGraph::empty(2).unwrap()]).unwrap();
        assert!(seq.average_graph(0, 1).is_err());
        assert!(seq.average_graph(1, 2).is_err());
        assert!(seq.average_graph(2, 1).is_err());
    }

    #[test]
    fn sequence_requires_common_node_count() {
        let r = DynamicNetwork::new(vec![
            WeightedGraph::empty(2).unwrap(),
            WeightedGraph::empty(3).unwrap(),
        ]);
        assert!(r.is_err());
        assert!(DynamicNetwork::new(vec![]).is_err());
    }

    #[test]
    fn constant_sequence_average_is_exact() {
        let g = WeightedGraph::from_edges(4, &[(0, 1, 3), (2, 3, 7)]).unwrap();
        let seq = DynamicNetwork::new(vec![g.clone(); 5]).unwrap();
        assert_eq!(seq.average_graph(1, 5).unwrap(), g.to_matrix());
    }

    #[test]
    fn labels_out_of_range_rejected() {
        assert!(CommunityAssignment::new(vec![0, 2], 2).is_err());
        assert!(CommunityAssignment::from_one_based(&[0, 1], 2).is_err());
        let c = CommunityAssignment::new(vec![0, 0], 2).unwrap();
        assert!(matches!(
            c.require_nonempty(),
            Err(Error::EmptyCommunity(2))
        ));
    }
}
