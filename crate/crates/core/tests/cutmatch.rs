use flowcut::cutmatch::{
    hypercube_points, run_game, sphere_point_set_near, FlowMatchingPlayer, GreedyMatchingPlayer, ScriptedCutPlayer,
    SpectralCutPlayer,
};
use flowcut::driver::update_embedding;
use flowcut::generators;
use flowcut::graph::cut_stats;

#[test]
fn dumbbell_lobes_give_a_sparse_cut_at_once() {
    let g = generators::dumbbell(6).unwrap();
    let n = g.n();
    let lobes: Vec<bool> = (0..n).map(|x| x < n / 2).collect();
    let v = update_embedding(n, 3, None, None, 1).unwrap().embedding;
    let mut cut_player = ScriptedCutPlayer { script: vec![lobes], fallback: SpectralCutPlayer { seed: 1 } };
    let state = run_game(&v, &mut cut_player, &mut FlowMatchingPlayer { graph: &g }, 5).unwrap();
    let cut = state.cut.expect("the bridge separates the lobes");
    assert_eq!(state.t, 0);
    assert!(cut.expansion <= 1.0);
    assert_eq!(cut_stats(&g, &cut.side).unwrap().expansion, cut.expansion);
}

#[test]
fn expander_flow_player_matches_every_round() {
    let g = generators::expander(16, 6, 2).unwrap();
    let v = update_embedding(16, 4, None, None, 3).unwrap().embedding;
    let state = run_game(&v, &mut SpectralCutPlayer { seed: 3 }, &mut FlowMatchingPlayer { graph: &g }, 4).unwrap();
    assert!(state.cut.is_none());
    assert_eq!(state.t, 4);
    assert_eq!(state.matchings.len(), 4);
    for m in &state.matchings {
        assert_eq!(m.len(), 8);
    }
}

#[test]
fn hypercube_potential_grows_by_at_most_one_per_round() {
    let v = hypercube_points(4).unwrap();
    let state = run_game(&v, &mut SpectralCutPlayer { seed: 5 }, &mut GreedyMatchingPlayer { points: &v }, 8).unwrap();
    assert_eq!(state.rounds.len(), 8);
    let mut last = state.rounds[0].psi - state.rounds[0].increment;
    for r in &state.rounds {
        assert!(r.increment <= 1.0, "round {} increment {}", r.t, r.increment);
        assert!((r.psi - last - r.increment).abs() < 1e-9);
        assert!(r.lambda2 <= r.psi + 1e-6);
        last = r.psi;
    }
}

#[test]
fn small_sphere_game_keeps_lambda2_below_psi() {
    let set = sphere_point_set_near(3, 64, 7).unwrap();
    let v = &set.points;
    let state = run_game(v, &mut SpectralCutPlayer { seed: 7 }, &mut GreedyMatchingPlayer { points: v }, 10).unwrap();
    for r in &state.rounds {
        assert!(r.lambda2 <= r.psi + 1e-6);
        assert!(r.matching_cost <= 64.0 * set.n() as f64 * set.radius_r);
    }
    let mut csv = Vec::new();
    state.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 11);
}
