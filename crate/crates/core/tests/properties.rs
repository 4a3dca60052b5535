use proptest::prelude::*;

use flowcut::brute::brute_force_sparsest_cut;
use flowcut::cover::{compose_chain, projection_cover};
use flowcut::cutmatch::greedy_match;
use flowcut::decomp::{pseudo_decompose_with, scale_paths_with};
use flowcut::directions::{gaussian_vector, rng_from};
use flowcut::embedding::{payoff_phi, Embedding};
use flowcut::generators;
use flowcut::graph::{cut_stats, DemandGraph, WeightedGraph};
use flowcut::maxflow::{flow_and_cut, max_flow, support_is_acyclic, Branch, FlowNetwork};
use flowcut::mwu::DualState;

/// Connected weighted graphs: a random spanning path plus random extra edges.
fn graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (3..=max_n).prop_flat_map(|n| {
        let extra = prop::collection::vec((0..n, 0..n, 1u32..=5), 0..3 * n);
        (Just(n), prop::collection::vec(1u32..=5, n - 1), extra, any::<u64>())
    })
    .prop_map(|(n, path_w, extra, seed)| {
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = rng_from(seed);
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        let mut seen = std::collections::BTreeMap::new();
        for (i, w) in path_w.iter().enumerate() {
            let (a, b) = (order[i].min(order[i + 1]), order[i].max(order[i + 1]));
            seen.insert((a, b), *w as f64);
        }
        for (a, b, w) in extra {
            if a != b {
                seen.entry((a.min(b), a.max(b))).or_insert(w as f64);
            }
        }
        WeightedGraph::new(n, seen.into_iter().map(|((a, b), w)| (a, b, w))).unwrap()
    })
}

fn proper_side(n: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), n).prop_filter("proper cut", |s| s.iter().any(|&b| b) && s.iter().any(|&b| !b))
}

fn embedding(n: usize, d: usize, seed: u64) -> Embedding {
    let mut rng = rng_from(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| gaussian_vector(&mut rng, d)).collect();
    Embedding::from_rows(&rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complement_has_same_capacity_and_expansion(
        (g, side) in graph(24).prop_flat_map(|g| { let n = g.n(); (Just(g), proper_side(n)) })
    ) {
        let a = cut_stats(&g, &side).unwrap();
        let flipped: Vec<bool> = side.iter().map(|b| !b).collect();
        let b = cut_stats(&g, &flipped).unwrap();
        prop_assert_eq!(a.capacity, b.capacity);
        prop_assert_eq!(a.balance, b.balance);
        prop_assert_eq!(a.expansion, b.expansion);
    }

    #[test]
    fn brute_force_beats_random_cuts(g in graph(12), seed in any::<u64>()) {
        let best = brute_force_sparsest_cut(&g).unwrap();
        let mut rng = rng_from(seed);
        for _ in 0..1000 {
            let side: Vec<bool> = (0..g.n()).map(|_| rand::Rng::random_bool(&mut rng, 0.5)).collect();
            if let Ok(c) = cut_stats(&g, &side) {
                prop_assert!(best.expansion <= c.expansion * (1.0 + 1e-9));
            }
        }
        let again = cut_stats(&g, &best.side).unwrap();
        prop_assert_eq!(again.expansion, best.expansion);
    }

    #[test]
    fn phi_is_scale_invariant(
        n in 3usize..30, d in 1usize..6, seed in any::<u64>(),
        factor in prop_oneof![-100.0..-0.01f64, 0.01..100.0f64],
        demands in prop::collection::vec((0usize..30, 0usize..30, 0.1..5.0f64), 1..40),
    ) {
        let mut v = embedding(n, d, seed);
        let mut dg = DemandGraph::new(n);
        for (x, y, w) in demands {
            let (x, y) = (x % n, y % n);
            if x != y {
                dg.add(x, y, w);
            }
        }
        let before = payoff_phi(&v, &dg).unwrap();
        v.scale(factor);
        let after = payoff_phi(&v, &dg).unwrap();
        prop_assert!((before - after).abs() <= 1e-9 * before.abs().max(1.0));
    }

    #[test]
    fn normalized_embedding_has_spread_n_squared(n in 2usize..40, d in 1usize..8, seed in any::<u64>()) {
        let mut v = embedding(n, d, seed);
        v.normalize().unwrap();
        let direct: f64 = (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).map(|(x, y)| v.sq_dist(x, y)).sum();
        let target = (n * n) as f64;
        prop_assert!((direct - target).abs() <= 1e-9 * target);
    }

    #[test]
    fn max_flow_matches_min_cut_and_is_acyclic(g in graph(30), s in 0usize..30, t in 0usize..30) {
        let n = g.n();
        let (s, t) = (s % n, t % n);
        prop_assume!(s != t);
        let mut net = FlowNetwork::new(n, s, t).unwrap();
        for e in g.edges() {
            net.add_pair(e.u, e.v, e.w, e.w, flowcut::maxflow::ArcOrigin::Source).unwrap();
        }
        let r = max_flow(&net).unwrap();
        prop_assert_eq!(r.value, r.cut_capacity());
        prop_assert!(support_is_acyclic(&r));
    }

    #[test]
    fn flow_and_cut_cuts_are_balanced_and_sparse(
        g in graph(40), seed in any::<u64>(), c in 0.05..=0.25f64, log_kappa in -1.5..1.7f64,
    ) {
        let n = g.n();
        prop_assume!((2.0 * c * n as f64).floor() >= 1.0);
        let kappa = 10f64.powf(log_kappa);
        let proj = gaussian_vector(&mut rng_from(seed), n);
        let out = flow_and_cut(&g, kappa, c, &proj).unwrap();
        if let Branch::Cut(cut) = out.branch {
            let again = cut_stats(&g, &cut.side).unwrap();
            prop_assert!(again.balance >= (c * n as f64).floor() as usize);
            prop_assert!(again.expansion <= kappa * (1.0 + 1e-9));
        }
    }

    #[test]
    fn decomposition_peelers_agree(n in 3usize..200, density in 1usize..6, seed in any::<u64>(), lengths_seed in any::<u64>()) {
        let m = (n - 1) * density;
        let f = generators::random_acyclic_flow(n, m, seed).unwrap();
        let mut rng = rng_from(lengths_seed);
        let w: Vec<f64> = (0..m).map(|_| rand::Rng::random_range(&mut rng, 0.0..3.0)).collect();
        let fast = pseudo_decompose_with(&f, &w, false).unwrap();
        let naive = pseudo_decompose_with(&f, &w, true).unwrap();
        prop_assert_eq!(&fast, &naive);
        prop_assert_eq!(fast.total_flow(), f.value);
        let positive = (0..f.network.arc_count()).filter(|&a| f.arc_units(a) > 0).count();
        prop_assert!(fast.entries.len() <= positive);
        prop_assert!(fast.entries.iter().all(|e| e.flow_units > 0));
        // Unit scale factors recompose the original flow exactly.
        let ones = vec![1.0; fast.entries.len()];
        let back = scale_paths_with(&f, &ones, false).unwrap();
        prop_assert_eq!(back.pair_flows, f.pair_flows());
    }

    #[test]
    fn dual_normalization_gives_mass_two_n(
        g in graph(30), beta in 0.1..50.0f64, seed in any::<u64>(),
    ) {
        let mut rng = rng_from(seed);
        let w_e: Vec<f64> = (0..g.m()).map(|_| rand::Rng::random_range(&mut rng, 0.0..10.0)).collect();
        let w_x: Vec<f64> = (0..g.n()).map(|_| rand::Rng::random_range(&mut rng, 0.01..10.0)).collect();
        let mut d = DualState::from_raw(w_e, w_x, beta).unwrap();
        d.normalize(&g).unwrap();
        let target = 2.0 * g.n() as f64;
        prop_assert!((d.mass(&g) - target).abs() <= 1e-12 * target);
    }

    #[test]
    fn covers_are_stretched_and_chains_have_unit_degree(
        n in 4usize..80, d in 1usize..6, seed in any::<u64>(), hops in 0usize..4,
    ) {
        let v = embedding(n, d, seed);
        let mut rng = rng_from(seed ^ 1);
        let covers: Vec<_> = (0..hops)
            .map(|_| projection_cover(&v, &gaussian_vector(&mut rng, d), 0.125, 0.25))
            .collect();
        for m in &covers {
            let proj = v.project(&m.direction);
            let mut used = vec![false; n];
            for p in &m.pairs {
                prop_assert!(proj[p.t] - proj[p.s] >= 0.25);
                prop_assert!(!used[p.s] && !used[p.t]);
                used[p.s] = true;
                used[p.t] = true;
            }
        }
        let chain = compose_chain(n, &covers);
        let (out, inn) = chain.max_degrees();
        prop_assert!(out <= 1 && inn <= 1);
        if hops == 0 {
            prop_assert!(chain.edges.len() == n && chain.edges.iter().all(|e| e.from == e.to));
        }
    }

    #[test]
    fn greedy_matching_is_perfect_across_the_bisection(half in 1usize..20, d in 1usize..5, seed in any::<u64>()) {
        let n = 2 * half;
        let v = embedding(n, d, seed);
        let side: Vec<bool> = (0..n).map(|x| x % 2 == 0).collect();
        let (m, cost) = greedy_match(&v, &side).unwrap();
        prop_assert_eq!(m.len(), half);
        let mut used = vec![false; n];
        let mut total = 0.0;
        for &(x, y) in &m {
            prop_assert!(side[x] != side[y]);
            prop_assert!(!used[x] && !used[y]);
            used[x] = true;
            used[y] = true;
            total += v.sq_dist(x, y);
        }
        prop_assert!((total - cost).abs() <= 1e-9 * cost.max(1.0));
    }
}

#[test]
fn lambda2_matches_closed_forms() {
    use flowcut::spectral::{lambda2, Laplacian};
    let lambda2_of_graph = |g: &WeightedGraph| lambda2(&Laplacian::of_graph(g), 1e-10);
    for n in [2usize, 5, 16, 64] {
        let l = lambda2_of_graph(&generators::complete(n).unwrap()).unwrap();
        assert!((l - n as f64).abs() < 1e-6, "K{n}: {l}");
    }
    let two = WeightedGraph::new(4, vec![(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
    assert!(lambda2_of_graph(&two).unwrap().abs() < 1e-6);
}
