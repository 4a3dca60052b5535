//! Directed matchings from single-commodity flows, their chain composition,
//! pruning to a uniform cover, and empirical checks of the chaining bound.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decomp::{explicit_paths, pseudo_decompose, scale_paths, ScaledFlow};
use crate::directions::{gaussian_vector, sample_shuffled};
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::graph::{Cut, WeightedGraph};
use crate::maxflow::{flow_and_cut, ArcOrigin, Branch, FlowResult};
use crate::mwu::DualState;
use crate::params::Derived;

/// One matched pair `(s, t)`, directed from low to high projection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub s: usize,
    pub t: usize,
    /// Index of the flow path in the pseudo-decomposition it came from.
    pub entry: usize,
    pub flow: f64,
    pub length: f64,
}

/// A matching `M(u)` for direction `u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectedMatching {
    pub direction: Vec<f64>,
    pub pairs: Vec<MatchedPair>,
}

impl DirectedMatching {
    /// A matching given by bare pairs, as produced by synthetic covers.
    pub fn from_pairs(direction: Vec<f64>, pairs: &[(usize, usize)]) -> Self {
        let pairs = pairs
            .iter()
            .enumerate()
            .map(|(i, &(s, t))| MatchedPair { s, t, entry: i, flow: 0.0, length: 0.0 })
            .collect();
        DirectedMatching { direction, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().map(|p| (p.s, p.t)).collect()
    }

    /// Number of pairs with `(v_t - v_s)·u < σ`.
    pub fn stretch_violations(&self, v: &Embedding, sigma: f64) -> usize {
        let proj = v.project(&self.direction);
        self.pairs.iter().filter(|p| proj[p.t] - proj[p.s] < sigma).count()
    }

    /// Checks vertex-disjointness and stretch.
    pub fn validate(&self, v: &Embedding, sigma: f64) -> Result<()> {
        let mut seen = vec![false; v.n()];
        for p in &self.pairs {
            for x in [p.s, p.t] {
                if x >= v.n() || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::Contract(format!("vertex {x} is matched twice or out of range")));
                }
            }
        }
        match self.stretch_violations(v, sigma) {
            0 => Ok(()),
            k => Err(Error::Contract(format!("{k} matched pairs are stretched less than {sigma}"))),
        }
    }
}

/// Exact per-edge accounting of a matching's unit demands routed along its
/// kept flow paths.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CongestionAudit {
    pub paths: usize,
    /// Largest `load_e · κcn / (4m G_e)`; at most one when the bound holds.
    pub max_ratio: f64,
    pub violations: usize,
}

/// How many decomposition entries each filter removed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterCounts {
    pub entries: usize,
    pub stretch: usize,
    pub small_flow: usize,
    pub heavy_endpoint: usize,
    pub long_path: usize,
    pub conflicts: usize,
}

/// A matching together with the flow it was cut from.
#[derive(Clone, Debug)]
pub struct MatchingRun {
    pub matching: DirectedMatching,
    pub flow: FlowResult,
    /// The kept paths, each rescaled to carry one unit.
    pub unit_flow: ScaledFlow,
    pub audit: CongestionAudit,
    pub filters: FilterCounts,
}

impl MatchingRun {
    /// Vertex walk `s_i, …, t_i` of each matched pair, in pair order.
    pub fn walks(&self) -> Result<Vec<Vec<usize>>> {
        let m = self.unit_flow.network.pairs().iter().filter(|p| matches!(p.origin, ArcOrigin::Edge(_))).count();
        let paths = explicit_paths(&self.flow, &vec![0.0; m])?;
        let net = &self.flow.network;
        self.matching
            .pairs
            .iter()
            .map(|p| {
                let (entry, arcs) = paths
                    .get(p.entry)
                    .ok_or_else(|| Error::Contract(format!("no path for decomposition entry {}", p.entry)))?;
                if (entry.s_i, entry.t_i) != (p.s, p.t) {
                    return Err(Error::Contract(format!("entry {} does not join {} and {}", p.entry, p.s, p.t)));
                }
                let mut walk = vec![p.s];
                for &a in arcs {
                    if let ArcOrigin::Edge(_) = net.pairs()[a / 2].origin {
                        walk.push(net.arc_ends(a).1);
                    }
                }
                Ok(walk)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub enum MatchingOutcome {
    Matched(Box<MatchingRun>),
    /// FlowAndCut found a balanced cut below the flow threshold.
    Cut(Cut),
}

/// Runs FlowAndCut on the projections `v·u`, pseudo-decomposes the flow,
/// filters the paths and greedily matches the survivors.
///
/// A path is dropped when its endpoints are stretched less than `σ`, it
/// carries less than `κcn/(4m)`, either endpoint has dual length above `L/3`,
/// or its edge length exceeds `L/(3R)`. Survivors are taken by decreasing
/// flow, ties by entry index, skipping any that share an endpoint with an
/// earlier pick.
pub fn matching(
    g: &WeightedGraph,
    v: &Embedding,
    u: &[f64],
    p: &Derived,
    duals: &DualState,
) -> Result<MatchingOutcome> {
    let proj = v.project(u);
    let flow = match flow_and_cut(g, p.kappa, p.c, &proj)?.branch {
        Branch::Cut(c) => return Ok(MatchingOutcome::Cut(c)),
        Branch::Flow(f) => f,
    };
    let dec = pseudo_decompose(&flow, &duals.w_e)?;
    let min_flow = p.min_path_flow(g.m());
    let w_cap = p.l / 3.0;
    let len_cap = p.l / (3.0 * p.r as f64);
    let mut filters = FilterCounts { entries: dec.entries.len(), ..Default::default() };
    let mut candidates = Vec::new();
    for (i, e) in dec.entries.iter().enumerate() {
        if proj[e.t_i] - proj[e.s_i] < p.sigma {
            filters.stretch += 1;
        } else if e.flow < min_flow {
            filters.small_flow += 1;
        } else if duals.w_x[e.s_i] > w_cap || duals.w_x[e.t_i] > w_cap {
            filters.heavy_endpoint += 1;
        } else if e.length > len_cap {
            filters.long_path += 1;
        } else {
            candidates.push(i);
        }
    }
    candidates.sort_by(|&a, &b| dec.entries[b].flow_units.cmp(&dec.entries[a].flow_units).then(a.cmp(&b)));
    let mut used = vec![false; g.n()];
    let mut pairs = Vec::new();
    let mut alpha = vec![0.0; dec.entries.len()];
    for i in candidates {
        let e = dec.entries[i];
        if used[e.s_i] || used[e.t_i] {
            filters.conflicts += 1;
            continue;
        }
        used[e.s_i] = true;
        used[e.t_i] = true;
        alpha[i] = 1.0 / e.flow;
        pairs.push(MatchedPair { s: e.s_i, t: e.t_i, entry: i, flow: e.flow, length: e.length });
    }
    let unit_flow = scale_paths(&flow, &alpha)?;
    let audit = audit_unit_flow(g, &unit_flow, p, pairs.len());
    Ok(MatchingOutcome::Matched(Box::new(MatchingRun {
        matching: DirectedMatching { direction: u.to_vec(), pairs },
        flow,
        unit_flow,
        audit,
        filters,
    })))
}

/// Checks `load_e ≤ 4m G_e/(κcn)` edge by edge, where `load_e` counts the
/// unit paths through `e`.
fn audit_unit_flow(g: &WeightedGraph, unit: &ScaledFlow, p: &Derived, paths: usize) -> CongestionAudit {
    let m = g.m();
    let threshold = p.flow_threshold();
    let mut audit = CongestionAudit { paths, ..Default::default() };
    for (load, e) in unit.edge_flows(m).iter().zip(g.edges()) {
        let ratio = load * threshold / (4.0 * m as f64 * e.w);
        audit.max_ratio = audit.max_ratio.max(ratio);
        if ratio > 1.0 + 1e-9 {
            audit.violations += 1;
        }
    }
    audit
}

/// One composed edge `from → to` and the pair it used in each matching.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainEdge {
    pub from: usize,
    pub to: usize,
    pub via: Vec<usize>,
}

/// The composition `M(u_1, …, u_R)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainGraph {
    pub n: usize,
    pub hops: usize,
    pub edges: Vec<ChainEdge>,
}

impl ChainGraph {
    pub fn max_degrees(&self) -> (usize, usize) {
        let (mut out, mut inn) = (vec![0usize; self.n], vec![0usize; self.n]);
        for e in &self.edges {
            out[e.from] += 1;
            inn[e.to] += 1;
        }
        (out.into_iter().max().unwrap_or(0), inn.into_iter().max().unwrap_or(0))
    }
}

/// Edge `(x, y)` is present iff some `x = x_0, x_1, …, x_R = y` has
/// `(x_{r-1}, x_r) ∈ M_r` for every `r`. With no matchings every vertex has
/// a self-loop.
pub fn compose_chain(n: usize, matchings: &[DirectedMatching]) -> ChainGraph {
    let outs: Vec<Vec<Option<usize>>> = matchings
        .iter()
        .map(|m| {
            let mut out = vec![None; n];
            for (i, p) in m.pairs.iter().enumerate() {
                out[p.s] = Some(i);
            }
            out
        })
        .collect();
    let mut edges = Vec::new();
    'start: for x in 0..n {
        let mut cur = x;
        let mut via = Vec::with_capacity(matchings.len());
        for (m, out) in matchings.iter().zip(&outs) {
            let Some(i) = out[cur] else { continue 'start };
            via.push(i);
            cur = m.pairs[i].t;
        }
        edges.push(ChainEdge { from: x, to: cur, via });
    }
    ChainGraph { n, hops: matchings.len(), edges }
}

/// A matching cover built directly from projections: the `i`-th lowest
/// vertex is paired with the `i`-th highest, for the `⌊2cn⌋` extremes on each
/// side, as long as the pair is stretched at least `σ`.
pub fn projection_cover(v: &Embedding, u: &[f64], c: f64, sigma: f64) -> DirectedMatching {
    let proj = v.project(u);
    let n = v.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| proj[x].total_cmp(&proj[y]).then(x.cmp(&y)));
    let k = ((2.0 * c * n as f64).floor() as usize).min(n / 2);
    let pairs: Vec<(usize, usize)> = (0..k)
        .map(|i| (order[i], order[n - 1 - i]))
        .take_while(|&(s, t)| proj[t] - proj[s] >= sigma)
        .collect();
    DirectedMatching::from_pairs(u.to_vec(), &pairs)
}

/// Per-sample record of a cover statistics run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverTrial {
    pub trial: usize,
    pub size: usize,
    pub stretch_violations: usize,
    pub skew_mismatches: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverStats {
    pub samples: usize,
    pub mean_size: f64,
    pub stretch_violations: usize,
    /// Pairs of `M(-u)` that are not reversed pairs of `M(u)`, and vice versa.
    pub skew_discrepancy: usize,
    pub trials: Vec<CoverTrial>,
}

impl CoverStats {
    /// One JSON object per trial.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for t in &self.trials {
            out.push_str(&serde_json::to_string(t)?);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Samples `u` and `-u` pairs and measures size, stretch and skew-symmetry.
pub fn cover_stats<R: Rng + ?Sized>(
    v: &Embedding,
    mut sampler: impl FnMut(&[f64]) -> Result<DirectedMatching>,
    samples: usize,
    sigma: f64,
    rng: &mut R,
) -> Result<CoverStats> {
    let mut stats =
        CoverStats { samples, mean_size: 0.0, stretch_violations: 0, skew_discrepancy: 0, trials: Vec::new() };
    let mut total = 0usize;
    for trial in 0..samples {
        let u = gaussian_vector(rng, v.d());
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        let (a, b) = (sampler(&u)?, sampler(&neg)?);
        let violations = a.stretch_violations(v, sigma) + b.stretch_violations(v, sigma);
        let mut fwd: Vec<(usize, usize)> = a.edges();
        let mut back: Vec<(usize, usize)> = b.edges().into_iter().map(|(s, t)| (t, s)).collect();
        fwd.sort_unstable();
        back.sort_unstable();
        let common = fwd.iter().filter(|e| back.binary_search(e).is_ok()).count();
        let mismatches = fwd.len() + back.len() - 2 * common;
        total += a.len() + b.len();
        stats.stretch_violations += violations;
        stats.skew_discrepancy += mismatches;
        stats.trials.push(CoverTrial { trial, size: a.len(), stretch_violations: violations, skew_mismatches: mismatches });
    }
    stats.mean_size = total as f64 / (2 * samples.max(1)) as f64;
    Ok(stats)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneReport {
    pub survivors: Vec<bool>,
    /// Estimated `Σ_x outdeg(x)` before and after pruning.
    pub input_mass: f64,
    pub surviving_mass: f64,
    pub passes: usize,
}

impl PruneReport {
    pub fn survivor_count(&self) -> usize {
        self.survivors.iter().filter(|&&s| s).count()
    }
}

/// Estimates out-degrees from `budget` antipodal sample pairs and prunes.
pub fn prune_to_uniform<R: Rng + ?Sized>(
    v: &Embedding,
    mut sampler: impl FnMut(&[f64]) -> Result<DirectedMatching>,
    delta: f64,
    budget: usize,
    rng: &mut R,
) -> Result<PruneReport> {
    if budget == 0 {
        return Err(Error::Parameter("pruning needs a positive sample budget".into()));
    }
    let mut samples = Vec::with_capacity(2 * budget);
    for _ in 0..budget {
        let u = gaussian_vector(rng, v.d());
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        samples.push(sampler(&u)?.edges());
        samples.push(sampler(&neg)?.edges());
    }
    prune_samples(v.n(), &samples, delta)
}

/// Repeatedly removes every vertex whose estimated out-degree, counting only
/// pairs between survivors, is below `δ/4`. When the input mass is at least
/// `δn`, at least half of it must survive.
pub fn prune_samples(n: usize, samples: &[Vec<(usize, usize)>], delta: f64) -> Result<PruneReport> {
    if samples.is_empty() {
        return Err(Error::Parameter("pruning needs a positive sample budget".into()));
    }
    let weight = 1.0 / samples.len() as f64;
    let degrees = |alive: &[bool]| {
        let mut out = vec![0.0; n];
        for s in samples {
            for &(x, y) in s {
                if alive[x] && alive[y] {
                    out[x] += weight;
                }
            }
        }
        out
    };
    let mut alive = vec![true; n];
    let input_mass: f64 = degrees(&alive).iter().sum();
    let mut passes = 0;
    loop {
        let out = degrees(&alive);
        let drop: Vec<usize> = (0..n).filter(|&x| alive[x] && out[x] < delta / 4.0).collect();
        if drop.is_empty() {
            let surviving_mass = out.iter().sum();
            if input_mass >= delta * n as f64 && surviving_mass < input_mass / 2.0 - 1e-12 {
                return Err(Error::Contract(format!(
                    "pruning kept mass {surviving_mass} of {input_mass}, below half"
                )));
            }
            return Ok(PruneReport { survivors: alive, input_mass, surviving_mass, passes });
        }
        for x in drop {
            alive[x] = false;
        }
        passes += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub r: usize,
    pub trials: usize,
    /// Mean number of composed pairs with squared distance at least `L`.
    pub mean_long: f64,
    /// Standard error of `mean_long`.
    pub std_error: f64,
    pub positive_fraction: f64,
}

fn summarize(r: usize, counts: &[usize]) -> ChainReport {
    let t = counts.len().max(1) as f64;
    let mean = counts.iter().sum::<usize>() as f64 / t;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (t - 1.0).max(1.0);
    ChainReport {
        r,
        trials: counts.len(),
        mean_long: mean,
        std_error: (var / t).sqrt(),
        positive_fraction: counts.iter().filter(|&&c| c > 0).count() as f64 / t,
    }
}

fn long_edges(v: &Embedding, chain: &ChainGraph, l: f64) -> usize {
    chain.edges.iter().filter(|e| e.from != e.to && v.sq_dist(e.from, e.to) >= l).count()
}

/// Mean number of long pairs in `M(u_1, …, u_r)` for chains drawn by the
/// shuffled sampler with correlation `1 - 1/R`.
pub fn validate_chained_covers<R: Rng + ?Sized>(
    v: &Embedding,
    mut sampler: impl FnMut(&[f64]) -> Result<DirectedMatching>,
    r: usize,
    l: f64,
    trials: usize,
    rng: &mut R,
) -> Result<ChainReport> {
    let rho = 1.0 - 1.0 / r.max(1) as f64;
    let mut counts = Vec::with_capacity(trials);
    for _ in 0..trials {
        let draw = sample_shuffled(v.d(), r, rho, rng)?;
        let ms = draw.chain.vectors.iter().map(|u| sampler(u)).collect::<Result<Vec<_>>>()?;
        counts.push(long_edges(v, &compose_chain(v.n(), &ms), l));
    }
    Ok(summarize(r, &counts))
}

/// Mean number of long pairs of `M(u)` for a single Gaussian direction.
pub fn single_direction_baseline<R: Rng + ?Sized>(
    v: &Embedding,
    mut sampler: impl FnMut(&[f64]) -> Result<DirectedMatching>,
    l: f64,
    trials: usize,
    rng: &mut R,
) -> Result<ChainReport> {
    let mut counts = Vec::with_capacity(trials);
    for _ in 0..trials {
        let u = gaussian_vector(rng, v.d());
        let m = sampler(&u)?;
        counts.push(m.pairs.iter().filter(|p| v.sq_dist(p.s, p.t) >= l).count());
    }
    Ok(summarize(1, &counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directions::rng_from;
    use crate::generators::dumbbell;
    use crate::params::Params;

    fn line(n: usize) -> Embedding {
        let mut v = Embedding::new(n, 1, (0..n).map(|x| x as f64).collect()).unwrap();
        v.normalize().unwrap();
        v
    }

    #[test]
    fn chain_composition_cases() {
        let m = |pairs: &[(usize, usize)]| DirectedMatching::from_pairs(vec![1.0], pairs);
        let id = compose_chain(3, &[]);
        assert_eq!(id.edges.iter().map(|e| (e.from, e.to)).collect::<Vec<_>>(), vec![(0, 0), (1, 1), (2, 2)]);
        let c = compose_chain(4, &[m(&[(0, 1)]), m(&[(1, 2)])]);
        assert_eq!(c.edges, vec![ChainEdge { from: 0, to: 2, via: vec![0, 0] }]);
        assert!(compose_chain(4, &[m(&[(0, 1)]), m(&[(2, 3)])]).edges.is_empty());
        assert_eq!(c.max_degrees(), (1, 1));
    }

    #[test]
    fn greedy_prefers_heavier_paths() {
        // Entries (f = 5, a → b) and (f = 3, b → c) share b; only the first
        // survives. Reproduced on the greedy rule directly.
        let entries = [(5i64, 0usize, 1usize), (3, 1, 2)];
        let mut order: Vec<usize> = (0..2).collect();
        order.sort_by(|&a, &b| entries[b].0.cmp(&entries[a].0).then(a.cmp(&b)));
        let mut used = [false; 3];
        let mut kept = Vec::new();
        for i in order {
            let (_, s, t) = entries[i];
            if !used[s] && !used[t] {
                used[s] = true;
                used[t] = true;
                kept.push((s, t));
            }
        }
        assert_eq!(kept, vec![(0, 1)]);
    }

    #[test]
    fn dumbbell_matching_crosses_bridge_within_congestion_bound() {
        let n = 8;
        let p = Params::new(1.0 / 3.0).derive(n).unwrap();
        // Capacities large enough for the flow branch.
        let g = dumbbell(4).unwrap().scaled(p.flow_threshold()).unwrap();
        let v = line(n);
        let duals = DualState::from_raw(vec![0.0; g.m()], vec![0.0; n], p.beta).unwrap();
        let MatchingOutcome::Matched(run) = matching(&g, &v, &[1.0], &p, &duals).unwrap() else {
            panic!("expected the flow branch");
        };
        assert!(!run.matching.is_empty());
        run.matching.validate(&v, p.sigma).unwrap();
        for pair in &run.matching.pairs {
            assert!(pair.s < 4 && pair.t >= 4, "pair {pair:?} does not cross");
        }
        let bridge = g.edges().iter().position(|e| (e.u, e.v) == (3, 4)).unwrap();
        let load = run.unit_flow.edge_flows(g.m())[bridge];
        assert_eq!(load, run.matching.len() as f64);
        assert!(load <= p.matching_congestion_bound(g.m()) * g.edge(bridge).w * (1.0 + 1e-9));
        assert_eq!(run.audit.violations, 0);
        let walks = run.walks().unwrap();
        for (w, pair) in walks.iter().zip(&run.matching.pairs) {
            assert_eq!((w[0], *w.last().unwrap()), (pair.s, pair.t));
            assert!(w.windows(2).any(|e| e == [3, 4]));
        }
    }

    #[test]
    fn all_filtered_is_empty() {
        let n = 8;
        let p = Params::new(1.0 / 3.0).derive(n).unwrap();
        let g = dumbbell(4).unwrap().scaled(p.flow_threshold()).unwrap();
        let heavy = DualState::from_raw(vec![0.0; g.m()], vec![1.0; n], p.beta).unwrap();
        let MatchingOutcome::Matched(run) = matching(&g, &line(n), &[1.0], &p, &heavy).unwrap() else {
            panic!("expected the flow branch");
        };
        assert!(run.matching.is_empty());
        assert_eq!(run.filters.heavy_endpoint + run.filters.stretch, run.filters.entries);
    }

    #[test]
    fn unscaled_dumbbell_gives_cut() {
        let p = Params::new(1.0 / 3.0).derive(8).unwrap();
        let g = dumbbell(4).unwrap();
        let duals = DualState::uniform(&g, p.beta).unwrap();
        assert!(matches!(matching(&g, &line(8), &[1.0], &p, &duals).unwrap(), MatchingOutcome::Cut(_)));
    }

    #[test]
    fn pruning_cases() {
        let delta = 0.4;
        // Every vertex is a source in every sample: no pruning.
        let full = vec![vec![(0, 1), (1, 0)]; 4];
        let r = prune_samples(2, &full, delta).unwrap();
        assert_eq!(r.survivor_count(), 2);
        assert_eq!(r.passes, 0);
        // Vertex 2 is never matched; the rest keep degree one.
        let r = prune_samples(3, &full, delta).unwrap();
        assert_eq!(r.survivors, vec![true, true, false]);
        assert_eq!(r.passes, 1);
        assert!(matches!(prune_samples(3, &[], delta), Err(Error::Parameter(_))));
    }

    #[test]
    fn pruning_cascade_keeps_half() {
        // Vertex x's only partner is x + 1, with frequency rising along the
        // chain; once the rarest pair goes, its neighbor falls below the
        // threshold in turn. Mass is simulated independently here.
        let n = 6;
        let freq = [1usize, 2, 3, 40, 40, 40];
        let budget = 40;
        let mut samples = vec![Vec::new(); budget];
        for x in 0..n - 1 {
            for s in samples.iter_mut().take(freq[x]) {
                s.push((x, x + 1));
                s.push((x + 1, x));
            }
        }
        let delta = 0.5;
        let r = prune_samples(n, &samples, delta).unwrap();
        let mut alive = vec![true; n];
        loop {
            let out: Vec<f64> = (0..n)
                .map(|x| {
                    let mut d = 0.0;
                    for y in [x.wrapping_sub(1), x + 1] {
                        if y < n && alive[x] && alive[y] {
                            d += freq[x.min(y)] as f64 / budget as f64;
                        }
                    }
                    d
                })
                .collect();
            let drop: Vec<usize> = (0..n).filter(|&x| alive[x] && out[x] < delta / 4.0).collect();
            if drop.is_empty() {
                break;
            }
            drop.into_iter().for_each(|x| alive[x] = false);
        }
        assert_eq!(r.survivors, alive);
        assert!(r.passes >= 2);
        assert!(r.surviving_mass >= r.input_mass / 2.0);
    }

    #[test]
    fn projection_cover_is_skew_symmetric() {
        let mut rng = rng_from(4);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| gaussian_vector(&mut rng, 3)).collect();
        let mut v = Embedding::from_rows(&rows).unwrap();
        v.normalize().unwrap();
        let stats = cover_stats(&v, |u| Ok(projection_cover(&v, u, 0.125, 0.25)), 50, 0.25, &mut rng).unwrap();
        assert_eq!(stats.stretch_violations, 0);
        assert_eq!(stats.skew_discrepancy, 0);
        assert!(stats.mean_size > 0.0);
        assert_eq!(stats.to_jsonl().unwrap().lines().count(), 50);
    }

    #[test]
    fn chained_cover_edge_cases() {
        // Two clusters far apart: every matched pair spans them.
        let rows: Vec<Vec<f64>> = (0..20).map(|x| vec![if x < 10 { -1.0 } else { 1.0 }, 0.0]).collect();
        let v = Embedding::from_rows(&rows).unwrap();
        let sampler = |u: &[f64]| Ok(projection_cover(&v, u, 0.125, 0.25));
        let mut rng = rng_from(8);
        let r1 = validate_chained_covers(&v, sampler, 1, 1.0, 200, &mut rng).unwrap();
        let sizes = single_direction_baseline(&v, sampler, 0.0, 200, &mut rng_from(8)).unwrap();
        assert!(r1.mean_long > 0.0);
        // Every pair is long, so the long count equals the matching size.
        let all = single_direction_baseline(&v, sampler, 4.0 - 1e-9, 200, &mut rng_from(8)).unwrap();
        assert_eq!(all.mean_long, sizes.mean_long);
        let none = validate_chained_covers(&v, sampler, 2, 100.0, 50, &mut rng).unwrap();
        assert_eq!(none.mean_long, 0.0);
    }
}
