//! The cut-matching game: a cut player names bisections, a matching player
//! answers with perfect matchings, and the potential `ψ` of a fixed
//! embedding tracks how fast the accumulated graph can be made to expand.

mod sphere;

pub use sphere::{hypercube_points, sphere_point_set, sphere_point_set_near, LowerBoundEmbedding, ISO_EXPANSION};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::decomp::pseudo_decompose;
use crate::directions::{gaussian_vector, rng_from, split};
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::graph::{cut_stats, Cut, DemandGraph, WeightedGraph};
use crate::maxflow::{max_flow, ArcOrigin, FlowNetwork};
use crate::spectral::{fiedler, lambda2, Laplacian};

const EIGEN_TOL: f64 = 1e-10;
/// Slack on `λ₂(H^t) ≤ ψ(t)`.
pub const PSI_TOL: f64 = 1e-6;

/// Sorts vertices by the Fiedler vector of `L_H`, or by Gaussian projection
/// values while `H` is empty, and returns the lower half as `S` (ties by id).
pub fn cut_player_bisection(h: &DemandGraph, seed: u64) -> Result<Vec<bool>> {
    let n = h.n();
    if n < 2 || n % 2 == 1 {
        return Err(Error::Precondition(format!("a bisection needs an even n >= 2, got {n}")));
    }
    let values = if h.is_empty() {
        gaussian_vector(&mut rng_from(seed), n)
    } else {
        fiedler(&Laplacian::of_demands(h), EIGEN_TOL)?.vector
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut side = vec![false; n];
    order[..n / 2].iter().for_each(|&x| side[x] = true);
    Ok(side)
}

fn check_bisection(n: usize, side: &[bool]) -> Result<()> {
    let size = side.iter().filter(|&&b| b).count();
    if side.len() != n || 2 * size != n {
        return Err(Error::Precondition(format!("side of {size} vertices is not a bisection of {n}")));
    }
    Ok(())
}

/// Pairs `(x, y)` with `x ∈ S`, `y ∈ S̄`.
pub type Matching = Vec<(usize, usize)>;

#[derive(Clone, Debug, PartialEq)]
pub enum Response {
    Matching(Matching),
    /// A cut of expansion at most one.
    Cut(Cut),
}

/// Attaches a unit-capacity source to `S` and sink to `S̄`. A min cut below
/// `n/2` has expansion at most one and is returned; otherwise the integral
/// flow saturates the attachments and its path endpoints form a perfect
/// matching.
pub fn flow_matching_player(g: &WeightedGraph, side: &[bool]) -> Result<Response> {
    let n = g.n();
    check_bisection(n, side)?;
    if let Some(e) = g.edges().iter().find(|e| e.w.fract() != 0.0) {
        return Err(Error::Precondition(format!("capacity {} is not integral", e.w)));
    }
    let mut net = FlowNetwork::from_graph(g);
    let (s, t) = (net.source(), net.sink());
    for (x, &in_s) in side.iter().enumerate() {
        if in_s {
            net.add_pair(s, x, 1.0, 0.0, ArcOrigin::Source)?;
        } else {
            net.add_pair(x, t, 1.0, 0.0, ArcOrigin::Sink)?;
        }
    }
    let flow = max_flow(&net)?;
    if flow.value < n as f64 / 2.0 - 0.5 {
        let cut = cut_stats(g, &flow.source_side[..n])?;
        if cut.expansion > 1.0 + 1e-12 {
            return Err(Error::Contract(format!("flow player cut has expansion {} > 1", cut.expansion)));
        }
        return Ok(Response::Cut(cut));
    }
    let entries = pseudo_decompose(&flow, &vec![0.0; g.m()])?.entries;
    let mut seen = vec![false; n];
    let mut matching = Vec::with_capacity(n / 2);
    for e in entries {
        if e.flow != 1.0 || !side[e.s_i] || side[e.t_i] || seen[e.s_i] || seen[e.t_i] {
            return Err(Error::Contract(format!("path ({}, {}) with flow {} breaks the matching", e.s_i, e.t_i, e.flow)));
        }
        seen[e.s_i] = true;
        seen[e.t_i] = true;
        matching.push((e.s_i, e.t_i));
    }
    if matching.len() != n / 2 {
        return Err(Error::Contract(format!("{} paths for a perfect matching of {n}", matching.len())));
    }
    matching.sort_unstable();
    Ok(Response::Matching(matching))
}

/// Repeatedly matches the closest remaining pair across the bisection, ties
/// broken by `(x, y)`. Returns the matching and `Σ ‖v_x - v_y‖²`.
pub fn greedy_match(points: &Embedding, side: &[bool]) -> Result<(Matching, f64)> {
    let n = points.n();
    let s: Vec<usize> = (0..n).filter(|&x| side.get(x) == Some(&true)).collect();
    let other: Vec<usize> = (0..n).filter(|&x| side.get(x) == Some(&false)).collect();
    if side.len() != n || s.len() != other.len() {
        return Err(Error::Contract(format!("sides of {} and {} points cannot be matched", s.len(), other.len())));
    }
    let mut pairs: Vec<(f64, usize, usize)> =
        s.iter().flat_map(|&x| other.iter().map(move |&y| (points.sq_dist(x, y), x, y))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used = vec![false; n];
    let mut matching = Vec::with_capacity(s.len());
    let mut cost = 0.0;
    for (d, x, y) in pairs {
        if !used[x] && !used[y] {
            used[x] = true;
            used[y] = true;
            matching.push((x, y));
            cost += d;
        }
    }
    Ok((matching, cost))
}

pub trait CutPlayer {
    fn bisect(&mut self, h: &DemandGraph, round: usize) -> Result<Vec<bool>>;
}

/// [`cut_player_bisection`] with round seeds split from `seed`.
pub struct SpectralCutPlayer {
    pub seed: u64,
}

impl CutPlayer for SpectralCutPlayer {
    fn bisect(&mut self, h: &DemandGraph, round: usize) -> Result<Vec<bool>> {
        cut_player_bisection(h, split(self.seed, round as u64))
    }
}

/// Plays a fixed list of bisections, then falls back to the spectral player.
pub struct ScriptedCutPlayer {
    pub script: Vec<Vec<bool>>,
    pub fallback: SpectralCutPlayer,
}

impl CutPlayer for ScriptedCutPlayer {
    fn bisect(&mut self, h: &DemandGraph, round: usize) -> Result<Vec<bool>> {
        match self.script.get(round - 1) {
            Some(side) => Ok(side.clone()),
            None => self.fallback.bisect(h, round),
        }
    }
}

pub trait MatchingPlayer {
    fn respond(&mut self, side: &[bool]) -> Result<Response>;
}

pub struct FlowMatchingPlayer<'a> {
    pub graph: &'a WeightedGraph,
}

impl MatchingPlayer for FlowMatchingPlayer<'_> {
    fn respond(&mut self, side: &[bool]) -> Result<Response> {
        flow_matching_player(self.graph, side)
    }
}

/// Greedy closest-pair matching on a fixed point set.
pub struct GreedyMatchingPlayer<'a> {
    pub points: &'a Embedding,
}

impl MatchingPlayer for GreedyMatchingPlayer<'_> {
    fn respond(&mut self, side: &[bool]) -> Result<Response> {
        Ok(Response::Matching(greedy_match(self.points, side)?.0))
    }
}

/// One row of the game trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRound {
    pub t: usize,
    pub psi: f64,
    pub lambda2: f64,
    /// `ψ(t) - ψ(t-1)`, summed directly over the new matching.
    pub increment: f64,
    /// `Σ_{xy ∈ M^t} ‖v_x - v_y‖²`.
    pub matching_cost: f64,
}

#[derive(Clone, Debug)]
pub struct GameState {
    pub n: usize,
    pub t: usize,
    /// `H^t`, the sum of the matchings so far.
    pub h: DemandGraph,
    pub matchings: Vec<Matching>,
    pub rounds: Vec<GameRound>,
    /// Smallest column norm `min_i ‖w_i‖²`.
    pub l: f64,
    pub d: usize,
    /// Set when the matching player answered with a cut.
    pub cut: Option<Cut>,
}

impl GameState {
    pub fn psi(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.psi)
    }

    /// Writes `t,psi,lambda2,increment,matching_cost` rows.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rounds {
            w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn columns_centered(v: &Embedding) -> bool {
    let scale = (0..v.n()).map(|x| v.sq_norm(x)).sum::<f64>().sqrt().max(1e-300);
    v.mean().iter().all(|m| (m * v.n() as f64).abs() <= 1e-9 * scale)
}

/// `(1/d) Σ_i w_iᵀ L w_i / w_iᵀ w_i` over the columns of `v`.
fn potential(v: &Embedding, l: &Laplacian, norms: &[f64]) -> f64 {
    (0..v.d()).map(|i| l.quadratic_form(&v.column(i)) / norms[i]).sum::<f64>() / v.d() as f64
}

/// Plays `rounds` rounds, tracking `ψ` against the columns of `embedding`.
///
/// Each round checks that the directly summed increment matches `ψ`
/// recomputed from `L_{H^t}`, that it respects `(1/(dL)) Σ ‖v_x - v_y‖²`,
/// that every vertex has weighted degree `t`, and, for centered embeddings,
/// that `λ₂(L_{H^t}) ≤ ψ(t) + 10⁻⁶`.
pub fn run_game(
    embedding: &Embedding,
    cut_player: &mut dyn CutPlayer,
    matching_player: &mut dyn MatchingPlayer,
    rounds: usize,
) -> Result<GameState> {
    let n = embedding.n();
    let d = embedding.d();
    let norms: Vec<f64> = (0..d).map(|i| embedding.column(i).iter().map(|x| x * x).sum()).collect();
    let l_floor = norms.iter().copied().fold(f64::INFINITY, f64::min);
    if !(l_floor > 0.0) {
        return Err(Error::DegenerateEmbedding("an embedding column is zero".into()));
    }
    let centered = columns_centered(embedding);
    let mut state =
        GameState { n, t: 0, h: DemandGraph::new(n), matchings: Vec::new(), rounds: Vec::new(), l: l_floor, d, cut: None };
    for t in 1..=rounds {
        let side = cut_player.bisect(&state.h, t)?;
        check_bisection(n, &side)?;
        let matching = match matching_player.respond(&side)? {
            Response::Cut(c) => {
                state.cut = Some(c);
                break;
            }
            Response::Matching(m) => m,
        };
        let mut seen = vec![false; n];
        for &(x, y) in &matching {
            if !side[x] || side[y] || seen[x] || seen[y] {
                return Err(Error::Contract(format!("({x}, {y}) does not belong to a perfect matching across the bisection")));
            }
            seen[x] = true;
            seen[y] = true;
        }
        if matching.len() != n / 2 {
            return Err(Error::Contract(format!("matching has {} pairs, expected {}", matching.len(), n / 2)));
        }
        let cost: f64 = matching.iter().map(|&(x, y)| embedding.sq_dist(x, y)).sum();
        let increment = (0..d)
            .map(|i| {
                let w = embedding.column(i);
                matching.iter().map(|&(x, y)| (w[x] - w[y]).powi(2)).sum::<f64>() / norms[i]
            })
            .sum::<f64>()
            / d as f64;
        let bound = cost / (d as f64 * l_floor);
        if increment > bound * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::Contract(format!("round {t}: increment {increment} exceeds the bound {bound}")));
        }
        matching.iter().for_each(|&(x, y)| state.h.add(x, y, 1.0));
        let lap = Laplacian::of_demands(&state.h);
        let psi = state.psi() + increment;
        let direct = potential(embedding, &lap, &norms);
        if (direct - psi).abs() > 1e-9 * psi.abs().max(1.0) {
            return Err(Error::Contract(format!("round {t}: ψ = {direct} recomputed, {psi} accumulated")));
        }
        if let Some(x) = state.h.degrees().iter().position(|&deg| deg != t as f64) {
            return Err(Error::Contract(format!("round {t}: vertex {x} has degree {}", state.h.degrees()[x])));
        }
        let l2 = lambda2(&lap, EIGEN_TOL)?;
        if centered && l2 > psi + PSI_TOL {
            return Err(Error::Contract(format!("round {t}: λ₂ = {l2} exceeds ψ = {psi}")));
        }
        state.t = t;
        state.matchings.push(matching);
        state.rounds.push(GameRound { t, psi, lambda2: l2, increment, matching_cost: cost });
    }
    Ok(state)
}
