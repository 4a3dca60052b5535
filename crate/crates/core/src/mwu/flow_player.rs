//! The flow player: rounds of matchings composed along correlated directions,
//! fed to multiplicative weights over the edge and degree constraints.

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generic_mwu, DualState, MwuConfig, MwuOracle};
use crate::cover::{compose_chain, matching, ChainEdge, CongestionAudit, MatchingOutcome, MatchingRun};
use crate::decomp::scale_paths;
use crate::directions::{gaussian_vector, rng_from, sample_chain, sample_shuffled, split};
use crate::embedding::{payoff_phi, Embedding};
use crate::error::{Error, Result};
use crate::graph::{Cut, DemandGraph, WeightedGraph};
use crate::maxflow::{flow_and_cut, Branch};
use crate::params::{ChainRule, Derived};

/// One answer of the flow player: demands of objective exactly `2n` and the
/// walks routing them.
#[derive(Clone, Debug)]
pub struct RoundResult {
    pub demand: DemandGraph,
    /// Vertex walks with the amount each carries.
    pub walks: Vec<(Vec<usize>, f64)>,
    /// Traversals of each edge, weighted by amount.
    pub edge_flow: Vec<f64>,
    pub objective: f64,
    pub trials: usize,
    /// Long pairs collected, `|D'|`.
    pub pairs: usize,
    /// Factor applied to the unit pairs.
    pub scale: f64,
    /// `max(max_e F_e/G_e, max_x deg(x)/β)`.
    pub violation: f64,
    pub audits: Vec<CongestionAudit>,
}

#[derive(Clone, Debug)]
pub enum RoundOutcome {
    Round(Box<RoundResult>),
    Cut(Cut),
}

/// Line of the round trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub iteration: usize,
    pub objective: f64,
    pub max_violation: f64,
    pub pairs: usize,
    pub trials: usize,
}

impl RoundTrace {
    pub fn write_jsonl(records: &[RoundTrace], out: &mut dyn Write) -> Result<()> {
        for r in records {
            serde_json::to_writer(&mut *out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

enum Trial {
    Cut(Cut),
    Chain { runs: Vec<MatchingRun>, long: Vec<ChainEdge>, audits: Vec<CongestionAudit> },
}

fn run_trial(g: &WeightedGraph, v: &Embedding, p: &Derived, duals: &DualState, seed: u64) -> Result<Trial> {
    let mut rng = rng_from(seed);
    let chain = if p.chain_rule == ChainRule::Standard && p.chain_len == 1 {
        sample_chain(v.d(), 1, 0.0, &mut rng)?
    } else {
        sample_shuffled(v.d(), p.chain_len, p.chain_rho, &mut rng)?.chain
    };
    let mut runs = Vec::with_capacity(chain.len());
    for u in &chain.vectors {
        match matching(g, v, u, p, duals)? {
            MatchingOutcome::Cut(c) => return Ok(Trial::Cut(c)),
            MatchingOutcome::Matched(run) => runs.push(*run),
        }
    }
    let audits = runs.iter().map(|r| r.audit).collect();
    let ms: Vec<_> = runs.iter().map(|r| r.matching.clone()).collect();
    let long = compose_chain(v.n(), &ms)
        .edges
        .into_iter()
        .filter(|e| e.from != e.to && v.sq_dist(e.from, e.to) >= p.l)
        .collect();
    Ok(Trial::Chain { runs, long, audits })
}

fn edge_index(g: &WeightedGraph, x: usize, y: usize) -> Result<usize> {
    let nb = g.neighbors(x);
    nb.binary_search_by_key(&y, |&(z, _)| z)
        .map(|i| nb[i].1)
        .map_err(|_| Error::Contract(format!("walk step ({x}, {y}) is not an edge")))
}

/// Collects long pairs from independent trials until `⌈n^{1-ε}/2⌉` are found,
/// scales them to objective `2n`, and routes them along the kept flow paths.
///
/// Trials run in batches of the pool size with seeds derived from `seed`, so
/// the result does not depend on the number of threads.
pub fn flow_player_round(
    g: &WeightedGraph,
    v: &Embedding,
    duals: &DualState,
    p: &Derived,
    seed: u64,
) -> Result<RoundOutcome> {
    let n = g.n();
    let batch = rayon::current_num_threads().max(1);
    let mut long: Vec<ChainEdge> = Vec::new();
    let mut used: Vec<(Vec<MatchingRun>, Vec<ChainEdge>)> = Vec::new();
    let mut audits = Vec::new();
    let mut trials = 0;
    'collect: while trials < p.trial_cap {
        let hi = (trials + batch).min(p.trial_cap);
        let outcomes: Vec<Result<Trial>> =
            (trials..hi).into_par_iter().map(|t| run_trial(g, v, p, duals, split(seed, t as u64))).collect();
        for outcome in outcomes {
            trials += 1;
            match outcome? {
                Trial::Cut(c) => return Ok(RoundOutcome::Cut(c)),
                Trial::Chain { runs, long: l, audits: a } => {
                    audits.extend(a);
                    if !l.is_empty() {
                        long.extend(l.iter().cloned());
                        used.push((runs, l));
                    }
                }
            }
            if long.len() >= p.pairs_needed {
                break 'collect;
            }
        }
    }
    if long.len() < p.pairs_needed {
        return Err(Error::OracleStarvation { trials, best: long.len(), needed: p.pairs_needed });
    }
    let total_sq: f64 = long.iter().map(|e| v.sq_dist(e.from, e.to)).sum();
    let scale = 2.0 * n as f64 / total_sq;
    let mut demand = DemandGraph::new(n);
    let mut walks = Vec::with_capacity(long.len());
    let mut edge_flow = vec![0.0; g.m()];
    for (runs, edges) in &used {
        let hop_walks = runs.iter().map(|r| r.walks()).collect::<Result<Vec<_>>>()?;
        let mut alpha: Vec<Vec<f64>> = runs.iter().map(|r| vec![0.0; r.filters.entries]).collect();
        for e in edges {
            demand.add(e.from, e.to, scale);
            let mut walk = vec![e.from];
            for (r, &i) in e.via.iter().enumerate() {
                walk.extend_from_slice(&hop_walks[r][i][1..]);
                let pair = runs[r].matching.pairs[i];
                alpha[r][pair.entry] += scale / pair.flow;
            }
            walks.push((walk, scale));
        }
        // Route through the rescaled flows, one per matching.
        for (run, a) in runs.iter().zip(alpha) {
            let scaled = scale_paths(&run.flow, &a)?;
            for (f, x) in edge_flow.iter_mut().zip(scaled.edge_flows(g.m())) {
                *f += x;
            }
        }
    }
    let mut walk_load = vec![0.0; g.m()];
    for (walk, amount) in &walks {
        for step in walk.windows(2) {
            walk_load[edge_index(g, step[0], step[1])?] += amount;
        }
    }
    for (e, (a, b)) in walk_load.iter().zip(&edge_flow).enumerate() {
        if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
            return Err(Error::Contract(format!("edge {e}: walks carry {a}, rescaled flows carry {b}")));
        }
    }
    let degrees = demand.degrees();
    let objective: f64 = demand.pairs().map(|(x, y, w)| w * v.sq_dist(x, y)).sum();
    let edge_violation = edge_flow.iter().zip(g.edges()).map(|(f, e)| f / e.w).fold(0.0, f64::max);
    let degree_violation = degrees.iter().map(|d| d / p.beta).fold(0.0, f64::max);
    let lhs = duals.load(&edge_flow, &degrees);
    let rhs = duals.mass(g);
    if lhs > rhs * (1.0 + 1e-9) {
        return Err(Error::Contract(format!("round load {lhs} exceeds dual mass {rhs}")));
    }
    Ok(RoundOutcome::Round(Box::new(RoundResult {
        demand,
        walks,
        edge_flow,
        objective,
        trials,
        pairs: long.len(),
        scale,
        violation: edge_violation.max(degree_violation),
        audits,
    })))
}

struct FlowPlayer<'a> {
    g: &'a WeightedGraph,
    v: &'a Embedding,
    p: &'a Derived,
    seed: u64,
}

impl MwuOracle for FlowPlayer<'_> {
    type Solution = RoundOutcome;

    fn respond(&mut self, iteration: usize, weights: &[f64]) -> Result<RoundOutcome> {
        let m = self.g.m();
        let mut duals = DualState { w_e: weights[..m].to_vec(), w_x: weights[m..].to_vec(), beta: self.p.beta };
        duals.normalize(self.g)?;
        flow_player_round(self.g, self.v, &duals, self.p, split(self.seed, iteration as u64))
    }

    fn evaluate(&self, x: &RoundOutcome) -> Vec<f64> {
        match x {
            RoundOutcome::Round(r) => r.edge_flow.iter().copied().chain(r.demand.degrees()).collect(),
            RoundOutcome::Cut(_) => vec![0.0; self.g.m() + self.g.n()],
        }
    }
}

/// Configured width: the value making the configured round count exactly the
/// count the averaging guarantee needs over `m + n` constraints.
pub fn mwu_width(p: &Derived, m: usize) -> f64 {
    let k = (m + p.n).max(2) as f64;
    p.mwu_rounds as f64 * p.eta * p.eta / k.ln()
}

/// The averaged, halved flow of a completed MWU run.
#[derive(Clone, Debug)]
pub struct FlowOutcome {
    pub demand: DemandGraph,
    pub walks: Vec<(Vec<usize>, f64)>,
    pub edge_flow: Vec<f64>,
    /// `max_e F_e / G_e`.
    pub congestion: f64,
    pub phi: f64,
    pub max_degree: f64,
    pub rounds: usize,
    pub trials: usize,
    pub configured_width: f64,
    pub measured_width: f64,
    pub traces: Vec<RoundTrace>,
    pub audits: Vec<CongestionAudit>,
}

#[derive(Clone, Debug)]
pub enum FindFlowResult {
    Flow(Box<FlowOutcome>),
    /// Balanced cut with expansion at most `κ`, and the audits gathered
    /// before it was found.
    Cut(Cut, Vec<CongestionAudit>),
}

/// Direct probes, then the MWU rounds. Returns a feasible flow with
/// `Φ(V, D) ≥ 1 - tol` and degrees at most `β`, or a balanced cut.
pub fn find_flow(g: &WeightedGraph, v: &Embedding, p: &Derived, seed: u64) -> Result<FindFlowResult> {
    if g.n() != v.n() || g.n() != p.n {
        return Err(Error::Parameter(format!("graph, embedding and parameters disagree on n ({}, {}, {})", g.n(), v.n(), p.n)));
    }
    let mut v = v.clone();
    v.normalize()?;
    let probe_seed = split(seed, 0);
    for i in 0..p.probes {
        let u = gaussian_vector(&mut rng_from(split(probe_seed, i as u64)), v.d());
        if let Branch::Cut(c) = flow_and_cut(g, p.kappa, p.c, &v.project(&u))?.branch {
            return Ok(FindFlowResult::Cut(c, Vec::new()));
        }
    }
    let m = g.m();
    let width = mwu_width(p, m);
    let config = MwuConfig::new(p.eta, width, p.mwu_rounds)?;
    let b: Vec<f64> = g.edges().iter().map(|e| e.w).chain(std::iter::repeat_n(p.beta, g.n())).collect();
    let mut oracle = FlowPlayer { g, v: &v, p, seed: split(seed, 1) };
    let mut demand = DemandGraph::new(g.n());
    let mut walks: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut edge_flow = vec![0.0; m];
    let mut traces = Vec::new();
    let mut audits = Vec::new();
    let mut trials = 0;
    let mut cut = None;
    let out = generic_mwu(&mut oracle, &b, &config, |iteration, x| match x {
        RoundOutcome::Cut(c) => {
            cut = Some(c);
            Ok(ControlFlow::Break(()))
        }
        RoundOutcome::Round(r) => {
            demand.add_scaled(&r.demand, 1.0);
            for (w, a) in r.walks {
                *walks.entry(w).or_insert(0.0) += a;
            }
            edge_flow.iter_mut().zip(&r.edge_flow).for_each(|(f, x)| *f += x);
            traces.push(RoundTrace {
                iteration,
                objective: r.objective,
                max_violation: r.violation,
                pairs: r.pairs,
                trials: r.trials,
            });
            audits.extend(r.audits);
            trials += r.trials;
            Ok(ControlFlow::Continue(()))
        }
    })?;
    if let Some(c) = cut {
        return Ok(FindFlowResult::Cut(c, audits));
    }
    let factor = 0.5 / out.rounds as f64;
    demand.scale(factor);
    let walks: Vec<(Vec<usize>, f64)> = walks.into_iter().map(|(w, a)| (w, a * factor)).collect();
    edge_flow.iter_mut().for_each(|f| *f *= factor);
    let congestion = edge_flow.iter().zip(g.edges()).map(|(f, e)| f / e.w).fold(0.0, f64::max);
    let max_degree = demand.max_degree();
    let limit = (1.0 + 4.0 * p.eta) / 2.0;
    if congestion > limit * (1.0 + 1e-9) || max_degree > p.beta * limit * (1.0 + 1e-9) {
        return Err(Error::Contract(format!(
            "averaged flow has congestion {congestion} and max degree {max_degree} (beta {})",
            p.beta
        )));
    }
    let phi = payoff_phi(&v, &demand)?;
    if phi < 1.0 - p.phi_tol {
        return Err(Error::Contract(format!("averaged demands have payoff {phi} below 1")));
    }
    Ok(FindFlowResult::Flow(Box::new(FlowOutcome {
        demand,
        walks,
        edge_flow,
        congestion,
        phi,
        max_degree,
        rounds: out.rounds,
        trials,
        configured_width: width,
        measured_width: out.measured_width,
        traces,
        audits,
    })))
}
