//! Community detection by regularized spectral clustering, and label alignment.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::CommunityAssignment;
use crate::linalg::{symmetric_eigen, Matrix};
use crate::sampling::uniform;

pub const KMEANS_RESTARTS: usize = 20;
pub const KMEANS_MAX_ITER: usize = 100;

/// `D_tau^{-1/2} A D_tau^{-1/2}` with `D_tau = D + tau I`. `tau` defaults to
/// the mean degree.
pub fn regularized_laplacian(a: &Matrix, tau: Option<f64>) -> Result<Matrix> {
    if !a.is_symmetric(1e-12) {
        return Err(Error::NotSymmetric);
    }
    if a.as_slice().iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidGraph(
            "adjacency entries must be nonnegative".into(),
        ));
    }
    let n = a.rows();
    let degrees: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum()).collect();
    let tau = tau.unwrap_or_else(|| degrees.iter().sum::<f64>() / n.max(1) as f64);
    if tau < 0.0 {
        return Err(Error::InvalidParams(format!(
            "regularizer must be nonnegative, got {tau}"
        )));
    }
    let scale: Vec<f64> = degrees
        .iter()
        .map(|&d| {
            let dt = d + tau;
            if dt > 0.0 {
                1.0 / dt.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] = scale[i] * a[(i, j)] * scale[j];
        }
    }
    Ok(l)
}

/// Result of spectral clustering.
#[derive(Debug, Clone)]
pub struct Clustering {
    pub labels: CommunityAssignment,
    /// Nodes whose embedding row was zero (no weight); placed in the largest cluster.
    pub isolated: Vec<usize>,
    /// Within-cluster sum of squares of the chosen k-means solution.
    pub wcss: f64,
}

/// Rows of the eigenvectors for the `k` largest-magnitude eigenvalues,
/// normalized to unit length. Zero rows stay zero.
pub fn spectral_embedding(l: &Matrix, k: usize) -> Result<Vec<Vec<f64>>> {
    let eig = symmetric_eigen(l)?;
    let mut order: Vec<usize> = (0..eig.values.len()).collect();
    order.sort_by(|&i, &j| eig.values[j].abs().total_cmp(&eig.values[i].abs()));
    let n = l.rows();
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|u| order[..k].iter().map(|&i| eig.vectors[i][u]).collect())
        .collect();
    for row in &mut rows {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            row.iter_mut().for_each(|x| *x /= norm);
        } else {
            row.iter_mut().for_each(|x| *x = 0.0);
        }
    }
    Ok(rows)
}

/// Clusters the nodes of weighted adjacency `a` into `k` groups.
///
/// Labels are canonical: community indices appear in order of first node.
pub fn regularized_spectral_clustering<R: Rng + ?Sized>(
    a: &Matrix,
    k: usize,
    tau: Option<f64>,
    rng: &mut R,
) -> Result<Clustering> {
    let n = a.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidParams(format!(
            "cannot form {k} communities from {n} nodes"
        )));
    }
    let l = regularized_laplacian(a, tau)?;
    let isolated: Vec<usize> = (0..n)
        .filter(|&i| a.row(i).iter().all(|&x| x == 0.0))
        .collect();
    if k == 1 {
        return Ok(Clustering {
            labels: CommunityAssignment::new(vec![0; n], 1)?,
            isolated,
            wcss: 0.0,
        });
    }
    let rows = spectral_embedding(&l, k)?;
    let active: Vec<usize> = (0..n)
        .filter(|i| isolated.binary_search(i).is_err())
        .collect();
    let points: Vec<Vec<f64>> = active.iter().map(|&i| rows[i].clone()).collect();
    let mut labels = vec![0usize; n];
    let mut wcss = 0.0;
    if !points.is_empty() {
        let fit = kmeans(&points, k, KMEANS_RESTARTS, KMEANS_MAX_ITER, rng);
        wcss = fit.wcss;
        for (&node, &l) in active.iter().zip(&fit.labels) {
            labels[node] = l;
        }
        let mut counts = vec![0usize; k];
        fit.labels.iter().for_each(|&l| counts[l] += 1);
        let largest = (0..k)
            .max_by_key(|&r| (counts[r], std::cmp::Reverse(r)))
            .unwrap_or(0);
        for &node in &isolated {
            labels[node] = largest;
        }
    }
    if !isolated.is_empty() {
        log::warn!(
            "{} node(s) with no weight placed in the largest cluster",
            isolated.len()
        );
    }
    Ok(Clustering {
        labels: canonical(&labels, k)?,
        isolated,
        wcss,
    })
}

fn canonical(labels: &[usize], k: usize) -> Result<CommunityAssignment> {
    let mut map = vec![usize::MAX; k];
    let mut next = 0;
    for &l in labels {
        if map[l] == usize::MAX {
            map[l] = next;
            next += 1;
        }
    }
    for slot in map.iter_mut().filter(|m| **m == usize::MAX) {
        *slot = next;
        next += 1;
    }
    CommunityAssignment::new(labels.iter().map(|&l| map[l]).collect(), k)
}

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub labels: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub wcss: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus_init<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let pick = |rng: &mut R| ((uniform(rng) * n as f64) as usize).min(n - 1);
    let mut centers = vec![points[pick(rng)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let target = uniform(rng) * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            pick(rng)
        };
        centers.push(points[idx].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, centers.last().expect("just pushed")));
        }
    }
    centers
}

fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>, max_iter: usize) -> KMeansFit {
    let dim = points[0].len();
    let k = centers.len();
    let mut labels = vec![usize::MAX; points.len()];
    for _ in 0..max_iter {
        let mut changed = false;
        for (l, p) in labels.iter_mut().zip(points) {
            let (j, _) = nearest(p, &centers);
            if *l != j {
                *l = j;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&l, p) in labels.iter().zip(points) {
            counts[l] += 1;
            sums[l].iter_mut().zip(p).for_each(|(s, x)| *s += x);
        }
        for j in 0..k {
            // an emptied cluster keeps its previous center
            if counts[j] > 0 {
                centers[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
    }
    let wcss = labels
        .iter()
        .zip(points)
        .map(|(&l, p)| sq_dist(p, &centers[l]))
        .sum();
    KMeansFit {
        labels,
        centers,
        wcss,
    }
}

/// k-means with k-means++ seeding. Keeps the restart with the lowest
/// within-cluster sum of squares, the earliest one on ties.
pub fn kmeans<R: Rng + ?Sized>(
    points: &[Vec<f64>],
    k: usize,
    restarts: usize,
    max_iter: usize,
    rng: &mut R,
) -> KMeansFit {
    assert!(
        !points.is_empty() && k >= 1,
        "k-means needs points and k >= 1"
    );
    let mut best: Option<KMeansFit> = None;
    for _ in 0..restarts.max(1) {
        let fit = lloyd(points, plus_plus_init(points, k, rng), max_iter);
        if best.as_ref().is_none_or(|b| fit.wcss < b.wcss) {
            best = Some(fit);
        }
    }
    best.expect("at least one restart")
}

/// Relabels `estimate` to agree as much as possible with `reference`.
/// Exhaustive over permutations for `k <= 6`, greedy matching otherwise.
/// Returns the relabeled estimate and the fraction of nodes that agree.
pub fn align_labels(
    estimate: &CommunityAssignment,
    reference: &CommunityAssignment,
) -> Result<(CommunityAssignment, f64)> {
    if estimate.k() != reference.k() {
        return Err(Error::Dimension(format!(
            "estimate has {} communities, reference {}",
            estimate.k(),
            reference.k()
        )));
    }
    if estimate.n() != reference.n() {
        return Err(Error::Dimension(format!(
            "estimate covers {} nodes, reference {}",
            estimate.n(),
            reference.n()
        )));
    }
    let k = estimate.k();
    let mut confusion = vec![vec![0usize; k]; k];
    for (&e, &r) in estimate.labels().iter().zip(reference.labels()) {
        confusion[e][r] += 1;
    }
    let perm = if k <= 6 {
        best_permutation(&confusion)
    } else {
        greedy_matching(&confusion)
    };
    let agree: usize = (0..k).map(|e| confusion[e][perm[e]]).sum();
    let n = estimate.n().max(1);
    Ok((estimate.relabeled(&perm), agree as f64 / n as f64))
}

fn best_permutation(confusion: &[Vec<usize>]) -> Vec<usize> {
    let k = confusion.len();
    let mut current: Vec<usize> = (0..k).collect();
    let mut best = current.clone();
    let mut best_score = score(confusion, &current);
    // lexicographic enumeration starting at the identity
    while next_permutation(&mut current) {
        let s = score(confusion, &current);
        if s > best_score {
            best_score = s;
            best.clone_from(&current);
        }
    }
    best
}

fn score(confusion: &[Vec<usize>], perm: &[usize]) -> usize {
    perm.iter().enumerate().map(|(e, &r)| confusion[e][r]).sum()
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn greedy_matching(confusion: &[Vec<usize>]) -> Vec<usize> {
    let k = confusion.len();
    let mut cells: Vec<(usize, usize, usize)> = (0..k)
        .flat_map(|e| (0..k).map(move |r| (e, r)))
        .map(|(e, r)| (confusion[e][r], e, r))
        .collect();
    cells.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut perm = vec![usize::MAX; k];
    let mut used = vec![false; k];
    for (_, e, r) in cells {
        if perm[e] == usize::MAX && !used[r] {
            perm[e] = r;
            used[r] = true;
        }
    }
    perm
}
