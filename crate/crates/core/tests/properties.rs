use netsurv::charts::{ewma, ewma_width, phase1_estimate, shewhart, LimitStyle};
use netsurv::community::regularized_laplacian;
use netsurv::community::{align_labels, regularized_spectral_clustering};
use netsurv::dcsbm::{check_identifiability, draw_theta, log_likelihood, mle, DcsbmParams};
use netsurv::graph::{block_weight_matrix, CommunityAssignment, DynamicNetwork, WeightedGraph};
use netsurv::ingest::{covoting_graph, Party, RollCall, Senator, Vote};
use netsurv::linalg::{symmetric_eigen, Matrix};
use netsurv::sampling::stream_rng;
use netsurv::surveillance::{stat_vector, statistics, SdMode};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// Symmetric graph with zero diagonal from a flat upper-triangle vector.
fn graph_from_upper(n: usize, upper: &[u32]) -> WeightedGraph {
    let mut g = WeightedGraph::empty(n).unwrap();
    let mut i = 0;
    for u in 0..n {
        for v in (u + 1)..n {
            if upper[i] > 0 {
                g.set_weight(u, v, upper[i]).unwrap();
            }
            i += 1;
        }
    }
    g
}

fn arb_graph(max_n: usize, max_w: u32) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(0..=max_w, n * (n - 1) / 2)
            .prop_map(move |upper| graph_from_upper(n, &upper))
    })
}

/// Graph with labels over `k` communities, each of size at least `min_size`.
fn arb_labeled(
    k: usize,
    min_size: usize,
    max_size: usize,
    max_w: u32,
) -> impl Strategy<Value = (WeightedGraph, CommunityAssignment)> {
    prop::collection::vec(min_size..=max_size, k).prop_flat_map(move |sizes| {
        let n: usize = sizes.iter().sum();
        let c = CommunityAssignment::contiguous(&sizes).unwrap();
        prop::collection::vec(0..=max_w, n * (n - 1) / 2)
            .prop_map(move |upper| (graph_from_upper(n, &upper), c.clone()))
    })
}

fn series(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0..50.0f64, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graphs_are_symmetric_with_zero_diagonal(g in arb_graph(12, 5)) {
        for u in 0..g.n() {
            prop_assert_eq!(g.weight(u, u), 0);
            for v in 0..g.n() {
                prop_assert_eq!(g.weight(u, v), g.weight(v, u));
            }
        }
    }

    #[test]
    fn degree_sum_equals_block_total((g, c) in arb_labeled(3, 1, 5, 4)) {
        let m = block_weight_matrix(&g, &c).unwrap();
        let block_total: u64 = m.iter().flatten().sum();
        prop_assert_eq!(g.degrees().iter().sum::<u64>(), block_total);
    }

    #[test]
    fn block_matrix_ignores_order_within_communities((g, c) in arb_labeled(2, 2, 5, 4), seed in any::<u64>()) {
        // permute nodes inside each community and rebuild the graph accordingly
        let mut rng = stream_rng(seed, 0);
        let mut image: Vec<usize> = (0..g.n()).collect();
        for members in c.members() {
            let mut shuffled = members.clone();
            shuffled.shuffle(&mut rng);
            for (a, b) in members.iter().zip(&shuffled) {
                image[*a] = *b;
            }
        }
        let mut h = WeightedGraph::empty(g.n()).unwrap();
        for (u, v, w) in g.edges() {
            h.set_weight(image[u], image[v], w).unwrap();
        }
        prop_assert_eq!(block_weight_matrix(&g, &c).unwrap(), block_weight_matrix(&h, &c).unwrap());
        let (x, y) = (stat_vector(&g, &c).unwrap(), stat_vector(&h, &c).unwrap());
        prop_assert_eq!(x.p_hat, y.p_hat);
        // the spread sums run in a different order
        for (a, b) in x.s.iter().chain([&x.pooled_s]).zip(y.s.iter().chain([&y.pooled_s])) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn average_of_constant_sequence_is_exact(g in arb_graph(8, 7), reps in 1usize..6) {
        let seq = DynamicNetwork::new(vec![g.clone(); reps]).unwrap();
        prop_assert_eq!(seq.average_graph(1, reps).unwrap(), g.to_matrix());
    }

    #[test]
    fn drawn_and_fitted_theta_are_identifiable((g, c) in arb_labeled(3, 1, 6, 3), delta in 0.0..=1.0f64, seed in any::<u64>()) {
        let theta = draw_theta(&c, &[delta; 3], &mut stream_rng(seed, 0)).unwrap();
        prop_assert!(check_identifiability(&c, &theta).is_ok());
        let fit = mle(&g, &c).unwrap();
        prop_assert!(check_identifiability(&c, &fit.theta).is_ok());
    }

    #[test]
    fn mle_is_scale_consistent((g, c) in arb_labeled(2, 1, 5, 4), factor in 1u32..6) {
        let a = mle(&g, &c).unwrap();
        let b = mle(&g.scaled(factor), &c).unwrap();
        for (x, y) in a.theta.iter().zip(&b.theta) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
        for (x, y) in a.p.as_slice().iter().zip(b.p.as_slice()) {
            prop_assert!((factor as f64 * x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn mle_beats_perturbed_parameters((g, c) in arb_labeled(2, 1, 4, 5), seed in any::<u64>()) {
        prop_assume!(g.total_weight() > 0);
        let fit = mle(&g, &c).unwrap();
        let best = fit.log_likelihood(&g, &c, false).unwrap();
        let mut rng = stream_rng(seed, 0);
        for _ in 0..100 {
            // multiplicative noise on theta, renormalized per community
            let mut theta: Vec<f64> = fit.theta.iter().map(|t| t * rng.random_range(0.5..1.5)).collect();
            for members in c.members() {
                let sum: f64 = members.iter().map(|&u| theta[u]).sum();
                for &u in &members {
                    theta[u] *= members.len() as f64 / sum;
                }
            }
            let mut p = Matrix::zeros(2, 2);
            for r in 0..2 {
                for s in r..2 {
                    let x = (fit.p[(r, s)] * rng.random_range(0.5..1.5)).max(1e-3);
                    p[(r, s)] = x;
                    p[(s, r)] = x;
                }
            }
            let params = DcsbmParams::new(c.clone(), theta, None, p, vec![0.5; 2]).unwrap();
            prop_assert!(log_likelihood(&g, &params).unwrap() <= best + 1e-9);
        }
    }

    #[test]
    fn stat_vector_fields_are_valid((g, c) in arb_labeled(3, 2, 5, 3)) {
        let v = stat_vector(&g, &c).unwrap();
        prop_assert!(v.p_hat.is_symmetric(0.0));
        prop_assert!(v.p_hat.as_slice().iter().all(|&x| x >= 0.0));
        prop_assert!(v.s.iter().all(|&x| x >= 0.0));
        // propensities average to one inside every community
        let fit = mle(&g, &c).unwrap();
        for members in c.members() {
            let mean: f64 = members.iter().map(|&u| fit.theta[u]).sum::<f64>() / members.len() as f64;
            prop_assert!((mean - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn phase1_estimate_is_affine_equivariant(s in series(2..40), a in 0.1..10.0f64, b in -100.0..100.0f64, flip in any::<bool>()) {
        let a = if flip { -a } else { a };
        let e = phase1_estimate(&s).unwrap();
        let t: Vec<f64> = s.iter().map(|x| a * x + b).collect();
        let f = phase1_estimate(&t).unwrap();
        prop_assert!((f.mu_hat - (a * e.mu_hat + b)).abs() < 1e-9 * (1.0 + f.mu_hat.abs()));
        prop_assert!((f.sigma_hat - a.abs() * e.sigma_hat).abs() < 1e-9 * (1.0 + f.sigma_hat));
        prop_assert!(e.sigma_hat >= 0.0);
    }

    #[test]
    fn shewhart_signals_survive_positive_affine_maps(s in series(12..60), m in 2usize..12, a in 0.5..4.0f64, b in -10.0..10.0f64) {
        let t: Vec<f64> = s.iter().map(|x| a * x + b).collect();
        let before = shewhart(&s, m).unwrap();
        let after = shewhart(&t, m).unwrap();
        // values exactly at a limit could flip under rounding; skip those
        let near = before.points.iter().any(|p| {
            let tol = 1e-9 * (1.0 + p.value.abs());
            (p.value - p.ucl).abs() < tol || (p.value - p.lcl).abs() < tol
        });
        prop_assume!(!near);
        prop_assert_eq!(before.signals(), after.signals());
    }

    #[test]
    fn charts_respect_phase_boundaries(s in series(5..80), m in 2usize..5, lambda in 0.05..=1.0f64, tv in any::<bool>()) {
        let style = if tv { LimitStyle::TimeVarying } else { LimitStyle::SteadyState };
        for c in [shewhart(&s, m).unwrap(), ewma(&s, m, lambda, style).unwrap()] {
            prop_assert!(c.signals().iter().all(|&t| t > m));
            prop_assert!(c.points.iter().all(|p| p.lcl <= p.ucl));
        }
    }

    #[test]
    fn ewma_with_unit_weight_matches_shewhart(s in series(5..80), m in 2usize..5) {
        let a = shewhart(&s, m).unwrap();
        let b = ewma(&s, m, 1.0, LimitStyle::SteadyState).unwrap();
        prop_assert_eq!(a.signals(), b.signals());
    }

    #[test]
    fn time_varying_width_grows_to_steady_state(lambda in 0.01..=1.0f64) {
        let mut prev = 0.0;
        for j in 1..400 {
            let w = ewma_width(lambda, Some(j));
            prop_assert!(w >= prev);
            prev = w;
        }
        prop_assert!(prev <= ewma_width(lambda, None) + 1e-15);
    }

    #[test]
    fn chart_count_matches_statistic_count(k in 1usize..7) {
        let pairs = k * (k + 1) / 2;
        prop_assert_eq!(statistics(k, SdMode::PerCommunity).len(), pairs + k);
        prop_assert_eq!(statistics(k, SdMode::Pooled).len(), pairs + 1);
        prop_assert_eq!(statistics(k, SdMode::Both).len(), pairs + k + 1);
    }
}

/// Noisy two-block weighted graph as a dense matrix.
fn planted(sizes: &[usize], within: f64, seed: u64) -> (Matrix, CommunityAssignment) {
    let c = CommunityAssignment::contiguous(sizes).unwrap();
    let n = c.n();
    let mut rng = stream_rng(seed, 0);
    let mut a = Matrix::zeros(n, n);
    for u in 0..n {
        for v in (u + 1)..n {
            let rate = if c.label(u) == c.label(v) {
                within
            } else {
                0.05
            };
            let w = if rng.random::<f64>() < rate { 1.0 } else { 0.0 };
            a[(u, v)] = w;
            a[(v, u)] = w;
        }
    }
    (a, c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn clustering_ignores_node_order(seed in any::<u64>(), within in 0.5..0.9f64) {
        let (a, _) = planted(&[12, 10, 8], within, seed);
        let n = a.rows();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut stream_rng(seed, 1));
        let mut b = Matrix::zeros(n, n);
        for u in 0..n {
            for v in 0..n {
                b[(perm[u], perm[v])] = a[(u, v)];
            }
        }
        let x = regularized_spectral_clustering(&a, 3, None, &mut stream_rng(seed, 2)).unwrap();
        let y = regularized_spectral_clustering(&b, 3, None, &mut stream_rng(seed, 2)).unwrap();
        // pull the shuffled labels back to the original node order
        let back: Vec<usize> = (0..n).map(|u| y.labels.label(perm[u])).collect();
        let back = CommunityAssignment::new(back, 3).unwrap();
        let (_, agreement) = align_labels(&back, &x.labels).unwrap();
        prop_assert_eq!(agreement, 1.0);
    }

    #[test]
    fn alignment_never_loses_agreement(labels in prop::collection::vec(0usize..4, 4..60), reference in prop::collection::vec(0usize..4, 60)) {
        let n = labels.len();
        let est = CommunityAssignment::new(labels, 4).unwrap();
        let truth = CommunityAssignment::new(reference[..n].to_vec(), 4).unwrap();
        let raw = est.labels().iter().zip(truth.labels()).filter(|(a, b)| a == b).count() as f64 / n as f64;
        let (aligned, agreement) = align_labels(&est, &truth).unwrap();
        prop_assert!(agreement >= raw);
        let check = aligned.labels().iter().zip(truth.labels()).filter(|(a, b)| a == b).count() as f64 / n as f64;
        prop_assert_eq!(check, agreement);
    }

    #[test]
    fn eigenpairs_have_small_residuals(seed in any::<u64>()) {
        let (a, _) = planted(&[9, 7], 0.6, seed);
        let l = regularized_laplacian(&a, None).unwrap();
        let eig = symmetric_eigen(&l).unwrap();
        for (j, &lambda) in eig.values.iter().enumerate() {
            let v = &eig.vectors[j];
            let lv = l.mul_vec(v);
            let residual: f64 = lv.iter().zip(v).map(|(x, y)| (x - lambda * y).powi(2)).sum::<f64>().sqrt();
            prop_assert!(residual <= 1e-8, "residual {residual}");
        }
    }

    #[test]
    fn separated_blocks_are_recovered_for_any_seed(seed in any::<u64>()) {
        let mut a = Matrix::zeros(20, 20);
        for u in 0..20 {
            for v in 0..20 {
                if u != v && (u < 10) == (v < 10) {
                    a[(u, v)] = 1.0;
                }
            }
        }
        let fit = regularized_spectral_clustering(&a, 2, None, &mut stream_rng(seed, 0)).unwrap();
        let truth = CommunityAssignment::contiguous(&[10, 10]).unwrap();
        prop_assert_eq!(align_labels(&fit.labels, &truth).unwrap().1, 1.0);
    }
}

fn vote_strategy() -> impl Strategy<Value = Vote> {
    prop_oneof![Just(Vote::Yay), Just(Vote::Nay), Just(Vote::Abstain)]
}

fn arb_rollcall() -> impl Strategy<Value = RollCall> {
    (3usize..10, 1usize..15).prop_flat_map(|(senators, bills)| {
        (
            prop::collection::vec(prop::collection::vec(vote_strategy(), bills), senators),
            prop::collection::vec(any::<bool>(), senators),
        )
            .prop_map(move |(votes, dem)| RollCall {
                congress: "100".into(),
                senators: dem
                    .iter()
                    .enumerate()
                    .map(|(i, &d)| Senator {
                        id: format!("s{i}"),
                        name: format!("Senator {i}"),
                        party: if d {
                            Party::Democrat
                        } else {
                            Party::Republican
                        },
                    })
                    .collect(),
                bills: (0..bills).map(|b| format!("b{b}")).collect(),
                votes,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn covoting_is_symmetric_and_bill_order_free(rc in arb_rollcall(), threshold in 0.05..=1.0f64, seed in any::<u64>()) {
        let g = covoting_graph(&rc, threshold, None).unwrap().graph;
        let mut order: Vec<usize> = (0..rc.bills.len()).collect();
        order.shuffle(&mut stream_rng(seed, 0));
        let mut shuffled = rc.clone();
        shuffled.bills = order.iter().map(|&j| rc.bills[j].clone()).collect();
        shuffled.votes = rc.votes.iter().map(|row| order.iter().map(|&j| row[j]).collect()).collect();
        let h = covoting_graph(&shuffled, threshold, None).unwrap().graph;
        prop_assert_eq!(&g, &h);
        for (_, _, w) in g.edges() {
            prop_assert_eq!(w, 1);
        }
    }

    #[test]
    fn raising_threshold_never_adds_edges(rc in arb_rollcall(), lo in 0.05..=1.0f64, bump in 0.0..0.5f64) {
        let hi = (lo + bump).min(1.0);
        let low = covoting_graph(&rc, lo, None).unwrap().graph;
        let high = covoting_graph(&rc, hi, None).unwrap().graph;
        for (u, v, _) in high.edges() {
            prop_assert_eq!(low.weight(u, v), 1);
        }
    }
}
