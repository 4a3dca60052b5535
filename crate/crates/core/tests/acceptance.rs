//! End-to-end acceptance suite. Every criterion runs at its stated tolerance
//! and prints one PASS/FAIL line; the test fails if any criterion fails.

use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use rand::Rng;

use flowcut::brute::brute_force_sparsest_cut;
use flowcut::cover::{projection_cover, single_direction_baseline, validate_chained_covers, CongestionAudit};
use flowcut::cutmatch::{
    hypercube_points, run_game, sphere_point_set_near, FlowMatchingPlayer, GreedyMatchingPlayer,
    ScriptedCutPlayer, SpectralCutPlayer,
};
use flowcut::decomp::{pseudo_decompose_with, scale_paths_with, Entry};
use flowcut::directions::{gaussian_vector, pm1_stretch_tail, rng_from, validate_isoperimetry};
use flowcut::driver::{sparsest_cut, update_embedding, verify_certificate, Certificate};
use flowcut::embedding::Embedding;
use flowcut::generators;
use flowcut::graph::{cut_stats, WeightedGraph};
use flowcut::maxflow::{flow_and_cut, Branch};
use flowcut::mwu::{generic_mwu, MwuConfig, MwuOracle};
use flowcut::params::Params;
use flowcut::{Error, Result};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn params_for(n: usize) -> Params {
    let (lo, hi) = Params::epsilon_range(n);
    Params::new(0.25f64.clamp(lo, hi))
}

fn unit_rows(n: usize, d: usize, seed: u64) -> Embedding {
    let mut rng = rng_from(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut r = gaussian_vector(&mut rng, d);
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            r.iter_mut().for_each(|x| *x /= norm);
            r
        })
        .collect();
    Embedding::from_rows(&rows).unwrap()
}

/// The 50 soundness graphs: sizes spread over `[8, 64]`, alternating models.
fn soundness_graphs() -> Vec<WeightedGraph> {
    (0..50u64)
        .map(|i| {
            let n = 8 + (i as usize * 56) / 49;
            if i % 2 == 0 {
                generators::gnp(n, 0.3, 1000 + i).unwrap()
            } else {
                generators::planted(n, 0.6, 0.08, 1000 + i).unwrap()
            }
        })
        .collect()
}

fn criterion_1_and_6() -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut flows = 0;
    let mut audits: Vec<CongestionAudit> = Vec::new();
    for (i, g) in soundness_graphs().iter().enumerate() {
        let report = match sparsest_cut(g, &params_for(g.n()), i as u64) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("graph {i}: {e}"));
                continue;
            }
        };
        audits.extend(report.audits.iter().cloned());
        let mut certs: Vec<&Certificate> = vec![&report.certificate];
        certs.extend(report.flow_certificate.iter());
        for cert in certs {
            let v = verify_certificate(g, cert);
            if let Some(c) = v.first_failure() {
                failures.push(format!("graph {i}: check {} failed: {}", c.name, c.detail));
            }
            if let Some(f) = cert.flow() {
                flows += 1;
                if f.lambda2 < 0.1 || f.congestion > 1.0 + 1e-9 {
                    failures.push(format!("graph {i}: lambda2 {} congestion {}", f.lambda2, f.congestion));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(600) {
        failures.push(format!("runtime {elapsed:?} exceeds 10 min"));
    }
    let c1 = outcome(
        failures.is_empty(),
        format!("50 graphs, {flows} flow certificates, {elapsed:.1?}; failures: {failures:?}"),
    );
    let worst = audits.iter().map(|a| a.max_ratio).fold(0.0, f64::max);
    let violations: usize = audits.iter().map(|a| a.violations).sum();
    let c6 = outcome(
        !audits.is_empty() && violations == 0 && worst <= 1.0,
        format!("{} matchings audited, max load/bound {worst:.4}, {violations} violations", audits.len()),
    );
    (c1, c6)
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for i in 0..30u64 {
        let n = 8 + (i as usize % 13);
        let g = if i % 2 == 0 {
            generators::gnp(n, 0.4, 100 + i).unwrap()
        } else {
            generators::planted(n, 0.7, 0.1, 100 + i).unwrap()
        };
        let best = brute_force_sparsest_cut(&g).unwrap().expansion;
        let found = match sparsest_cut(&g, &params_for(n), i) {
            Ok(r) => r.expansion,
            Err(e) => {
                bad.push(format!("graph {i}: {e}"));
                continue;
            }
        };
        let ratio = if best == 0.0 {
            if found == 0.0 { 1.0 } else { f64::INFINITY }
        } else {
            found / best
        };
        worst = worst.max(ratio);
        if ratio > 10.0 {
            bad.push(format!("graph {i}: ratio {ratio}"));
        }
    }
    outcome(bad.is_empty(), format!("30 graphs with n <= 20, worst ratio {worst:.3}; failures: {bad:?}"))
}

/// Plays `2 e_j` on the lighter of two unit constraints.
struct Alternating;

impl MwuOracle for Alternating {
    type Solution = [f64; 2];

    fn respond(&mut self, _: usize, y: &[f64]) -> Result<[f64; 2]> {
        Ok(if y[0] <= y[1] { [2.0, 0.0] } else { [0.0, 2.0] })
    }

    fn evaluate(&self, x: &[f64; 2]) -> Vec<f64> {
        x.to_vec()
    }
}

/// Violates both constraints at once.
struct Violating;

impl MwuOracle for Violating {
    type Solution = ();

    fn respond(&mut self, _: usize, _: &[f64]) -> Result<()> {
        Ok(())
    }

    fn evaluate(&self, _: &()) -> Vec<f64> {
        vec![2.0, 2.0]
    }
}

fn criterion_3() -> Outcome {
    let (eta, width) = (0.25, 2.0);
    let rounds = MwuConfig::guaranteed_rounds(eta, width, 2);
    let expected_rounds = (width * 16.0 * 2f64.ln()).ceil() as usize;
    let config = MwuConfig::new(eta, width, rounds).unwrap();
    let run = generic_mwu(&mut Alternating, &[1.0, 1.0], &config, |_, _| Ok(ControlFlow::Continue(())));
    let contract = match &run {
        Ok(out) => out.max_ratio <= 1.0 + 4.0 * eta,
        Err(_) => false,
    };
    let fault = generic_mwu(&mut Violating, &[1.0, 1.0], &config, |_, _| Ok(ControlFlow::Continue(())));
    let detected = matches!(fault, Err(Error::OracleFault { .. }));
    outcome(
        contract && detected && rounds == expected_rounds,
        format!(
            "T = {rounds}, averaged max ratio {:?} <= 2, fault detected: {detected}",
            run.map(|o| o.max_ratio).map_err(|e| e.to_string())
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = rng_from(4);
    let (mut cuts, mut flows) = (0, 0);
    let mut bad = Vec::new();
    for i in 0..500 {
        let n = rng.random_range(8..=48);
        let g = loop {
            let raw = generators::gnp(n, rng.random_range(0.15..0.6), rng.random()).unwrap();
            let edges: Vec<(usize, usize, f64)> =
                raw.edges().iter().map(|e| (e.u, e.v, rng.random_range(1..=4) as f64)).collect();
            if !edges.is_empty() {
                break WeightedGraph::new(n, edges).unwrap();
            }
        };
        // At least one vertex in each of A and B.
        let c = rng.random_range((1.0 / (2.0 * n as f64)).max(0.05)..=0.25);
        let kappa = 10f64.powf(rng.random_range(-1.5..1.7));
        let proj = gaussian_vector(&mut rng, n);
        match flow_and_cut(&g, kappa, c, &proj) {
            Ok(out) => match out.branch {
                Branch::Cut(cut) => {
                    cuts += 1;
                    let again = cut_stats(&g, &cut.side).unwrap();
                    let min_balance = (c * n as f64).floor() as usize;
                    if again.balance < min_balance || again.expansion > kappa * (1.0 + 1e-9) {
                        bad.push(format!("instance {i}: balance {} expansion {}", again.balance, again.expansion));
                    }
                }
                Branch::Flow(_) => flows += 1,
            },
            Err(e) => bad.push(format!("instance {i}: {e}")),
        }
    }
    outcome(bad.is_empty() && cuts > 0, format!("{cuts} cut and {flows} flow branches; exceptions: {bad:?}"))
}

fn sorted_entries(mut v: Vec<Entry>) -> Vec<(i64, usize, usize, u64)> {
    v.sort_by(|a, b| (a.flow_units, a.s_i, a.t_i).cmp(&(b.flow_units, b.s_i, b.t_i)).then(a.length.total_cmp(&b.length)));
    v.into_iter().map(|e| (e.flow_units, e.s_i, e.t_i, e.length.to_bits())).collect()
}

fn criterion_5() -> Outcome {
    let mut mismatches = Vec::new();
    let mut rng = rng_from(5);
    for i in 0..200u64 {
        let (n, m) = if i < 180 {
            let n = rng.random_range(16..=1024);
            (n, (n * rng.random_range(2..=8)).min(8192))
        } else {
            (1024, 8192)
        };
        let f = generators::random_acyclic_flow(n, m, 5000 + i).unwrap();
        let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..2.0)).collect();
        let fast = pseudo_decompose_with(&f, &w, false).unwrap();
        let naive = pseudo_decompose_with(&f, &w, true).unwrap();
        let k = fast.entries.len();
        if sorted_entries(fast.entries) != sorted_entries(naive.entries) {
            mismatches.push(format!("flow {i}: entry multisets differ"));
            continue;
        }
        let alpha: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        let a = scale_paths_with(&f, &alpha, false).unwrap();
        let b = scale_paths_with(&f, &alpha, true).unwrap();
        if a.pair_flows != b.pair_flows {
            mismatches.push(format!("flow {i}: recomposed flows differ"));
        }
    }
    let batch: Vec<_> = (0..20u64).map(|i| generators::random_acyclic_flow(1024, 8192, 9000 + i).unwrap()).collect();
    let w = vec![0.5; 8192];
    // Interleaved repetitions; the minimum of each filters out scheduler noise.
    let time = |naive: bool| {
        let t = Instant::now();
        batch.iter().for_each(|f| {
            std::hint::black_box(pseudo_decompose_with(f, &w, naive).unwrap());
        });
        t.elapsed()
    };
    let (mut fast, mut naive) = (Duration::MAX, Duration::MAX);
    for _ in 0..3 {
        fast = fast.min(time(false));
        naive = naive.min(time(true));
    }
    let speedup = naive.as_secs_f64() / fast.as_secs_f64();
    outcome(
        mismatches.is_empty() && speedup >= 5.0,
        format!(
            "200 flows agree: {}; n=1024 batch (best of 3) fast {fast:.2?} naive {naive:.2?}, speedup {speedup:.2} (soft target 5); {mismatches:?}",
            mismatches.is_empty()
        ),
    )
}

fn criterion_7() -> Outcome {
    let k = (9.0 * 1024f64.log2()).ceil() as usize;
    let mut rng = rng_from(7);
    let mut v = gaussian_vector(&mut rng, 16);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut ok = true;
    let mut cells = Vec::new();
    for rho in [0.0, 0.9] {
        for t in [1.0, 2.0, 3.0] {
            let rate = pm1_stretch_tail(&v, k, rho, t, 100_000, &mut rng).unwrap();
            let limit = 1.5 * (-t * t / 3.0f64).exp();
            ok &= rate <= limit;
            cells.push(format!("rho={rho} t={t}: {rate:.5} <= {limit:.5}"));
        }
    }
    outcome(ok, format!("k = {k}; {}", cells.join(", ")))
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut cells = Vec::new();
    for (i, (delta, rho, eps)) in [(0.3, 0.5, 0.1), (0.1, 0.9, 0.05)].into_iter().enumerate() {
        let r = validate_isoperimetry(eps, delta, rho, 100_000, &mut rng_from(80 + i as u64)).unwrap();
        let sigma = (eps * (1.0 - eps) / r.samples as f64).sqrt();
        let limit = eps + 3.0 * sigma;
        ok &= r.samples == 100_000 && r.violation_rate < limit;
        cells.push(format!("(delta={delta}, rho={rho}, eps={eps}): {:.5} < {limit:.5}", r.violation_rate));
    }
    outcome(ok, cells.join(", "))
}

fn criterion_9() -> Outcome {
    let emb = unit_rows(512, 9, 9);
    let sampler = |u: &[f64]| Ok(projection_cover(&emb, u, 0.125, 0.25));
    let (l, trials) = (1.0, 1000);
    let mut ok = true;
    let mut cells = Vec::new();
    let mut r1 = None;
    for r in 1..=3 {
        let rep = validate_chained_covers(&emb, sampler, r, l, trials, &mut rng_from(90 + r as u64)).unwrap();
        ok &= rep.mean_long > 0.0;
        cells.push(format!("R={r}: {:.3} ± {:.3}", rep.mean_long, rep.std_error));
        if r == 1 {
            r1 = Some(rep);
        }
    }
    let base = single_direction_baseline(&emb, sampler, l, trials, &mut rng_from(99)).unwrap();
    let r1 = r1.unwrap();
    let gap = (r1.mean_long - base.mean_long).abs();
    let tol = 3.0 * (r1.std_error.powi(2) + base.std_error.powi(2)).sqrt();
    ok &= gap <= tol;
    cells.push(format!("baseline {:.3} ± {:.3}, |R1 - baseline| {gap:.3} <= {tol:.3}", base.mean_long, base.std_error));
    outcome(ok, cells.join(", "))
}

fn criterion_10() -> Outcome {
    let mut notes = Vec::new();
    // (a) The lobes of the dumbbell as the first bisection.
    let g = generators::dumbbell(8).unwrap();
    let n = g.n();
    let lobes: Vec<bool> = (0..n).map(|x| x < n / 2).collect();
    let start = update_embedding(n, 4, None, None, 10).unwrap().embedding;
    let mut cut_player = ScriptedCutPlayer { script: vec![lobes], fallback: SpectralCutPlayer { seed: 10 } };
    let state = run_game(&start, &mut cut_player, &mut FlowMatchingPlayer { graph: &g }, 4).unwrap();
    let a = matches!(&state.cut, Some(c) if c.expansion <= 1.0) && state.t == 0;
    notes.push(format!("(a) round-1 cut {:?}", state.cut.as_ref().map(|c| c.expansion)));
    // (b) Hypercube increments never exceed 4/d = 1.
    let v = hypercube_points(4).unwrap();
    let b = match run_game(&v, &mut SpectralCutPlayer { seed: 11 }, &mut GreedyMatchingPlayer { points: &v }, 8) {
        Ok(s) => {
            let top = s.rounds.iter().map(|r| r.increment).fold(0.0, f64::max);
            notes.push(format!("(b) 8 rounds, max increment {top}"));
            s.rounds.len() == 8 && top <= 1.0
        }
        Err(e) => {
            notes.push(format!("(b) {e}"));
            false
        }
    };
    // (c) Sphere nets near 512 points.
    let mut c = true;
    for d in [4, 6] {
        let set = sphere_point_set_near(d, 512, 12).unwrap();
        let v = &set.points;
        let cap = 64.0 * set.n() as f64 * set.radius_r;
        match run_game(v, &mut SpectralCutPlayer { seed: 13 }, &mut GreedyMatchingPlayer { points: v }, 20) {
            Ok(s) => {
                let spectral = s.rounds.iter().all(|r| r.lambda2 <= r.psi + 1e-6);
                let cost = s.rounds.iter().map(|r| r.matching_cost).fold(0.0, f64::max);
                c &= s.rounds.len() == 20 && spectral && cost <= cap;
                notes.push(format!(
                    "(c) d={d} n={} lambda2<=psi every round: {spectral}, max cost {cost:.1} <= {cap:.1}",
                    set.n()
                ));
            }
            Err(e) => {
                c = false;
                notes.push(format!("(c) d={d}: {e}"));
            }
        }
    }
    outcome(a && b && c, notes.join("; "))
}

fn criterion_11() -> Outcome {
    let fixtures = [
        generators::path(10).unwrap(),
        generators::cycle(12).unwrap(),
        generators::complete(8).unwrap(),
        generators::dumbbell(5).unwrap(),
        generators::hypercube(3).unwrap(),
        generators::gnp(16, 0.35, 1).unwrap(),
        generators::planted(16, 0.7, 0.1, 2).unwrap(),
        generators::expander(16, 3, 3).unwrap(),
        generators::gnp(12, 0.5, 4).unwrap(),
        generators::planted(20, 0.6, 0.05, 5).unwrap(),
    ];
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut differing = Vec::new();
    for (i, g) in fixtures.iter().enumerate() {
        let p = params_for(g.n());
        let a = sparsest_cut(g, &p, 77).unwrap().certificate.to_json().unwrap();
        let b = single.install(|| sparsest_cut(g, &p, 77)).unwrap().certificate.to_json().unwrap();
        if a != b {
            differing.push(i);
        }
    }
    outcome(differing.is_empty(), format!("10 fixtures, second run on one thread; differing: {differing:?}"))
}

#[test]
fn acceptance_criteria() {
    let (c1, c6) = criterion_1_and_6();
    let results = [
        ("1 certificate soundness", c1),
        ("2 approximation at desk scale", criterion_2()),
        ("3 MWU contract and fault detector", criterion_3()),
        ("4 flow-and-cut balance and expansion", criterion_4()),
        ("5 decomposition equivalence and speed", criterion_5()),
        ("6 matching congestion audit", c6),
        ("7 sign-projection tails", criterion_7()),
        ("8 halfspace isoperimetry", criterion_8()),
        ("9 chained matching covers", criterion_9()),
        ("10 cut-matching mechanics", criterion_10()),
        ("11 determinism", criterion_11()),
    ];
    for (name, o) in &results {
        println!("[{}] criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.passed).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
