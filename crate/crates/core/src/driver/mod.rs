//! The embedding game: alternate embeddings and routed demands until the
//! averaged demands expand or a balanced cut appears, and search capacity
//! scales for the sparsest cut.

mod certificate;
mod verify;

pub use certificate::{
    Certificate, CertificateBody, CutBody, FlowBody, PathFlow, RoundSummary, CERTIFICATE_VERSION,
};
pub use verify::{laplacian_lambda2, verify_certificate, Check, VerifyReport, JACOBI_LIMIT};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::brute::{brute_force_sparsest_cut, BRUTE_FORCE_LIMIT};
use crate::cover::CongestionAudit;
use crate::directions::{fill_gaussian, rng_from, split};
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::graph::{cut_stats, Cut, DemandGraph, WeightedGraph};
use crate::mwu::{find_flow, FindFlowResult, RoundTrace};
use crate::params::{Derived, Params};
use crate::spectral::{bottom_eigenpairs, lambda2, Laplacian};

/// Rows are clipped to this norm after every update.
pub const NORM_BOUND: f64 = 2.0;
/// Geometric bisection steps once a flow scale is bracketed.
pub const BISECTION_STEPS: usize = 8;
/// Doublings tried before the scale search gives up.
pub const MAX_DOUBLINGS: usize = 48;

const EIGEN_TOL: f64 = 1e-10;
const FALLBACK_NOISE: f64 = 0.1;

/// A new embedding and whether it came from the noisy fallback.
#[derive(Clone, Debug)]
pub struct EmbeddingUpdate {
    pub embedding: Embedding,
    pub fallback: bool,
}

fn gaussian_embedding(n: usize, d: usize, seed: u64) -> Result<Embedding> {
    let mut coords = vec![0.0; n * d];
    fill_gaussian(&mut rng_from(seed), &mut coords);
    Embedding::new(n, d, coords)
}

fn finish(mut v: Embedding) -> Result<Embedding> {
    v.normalize()?;
    v.clip_norms(NORM_BOUND)?;
    Ok(v)
}

/// Cold start: Gaussian rows. Warm: rows of the bottom `d` eigenvectors of
/// the accumulated demand Laplacian, which pulls heavily demanded pairs
/// together. Both are normalized to `Σ_{x<y} ‖v_x - v_y‖² = n²` and clipped
/// to [`NORM_BOUND`]. If the eigensolve fails the previous embedding is
/// perturbed instead.
pub fn update_embedding(
    n: usize,
    d: usize,
    history: Option<&Laplacian>,
    previous: Option<&Embedding>,
    seed: u64,
) -> Result<EmbeddingUpdate> {
    if n < 2 || d == 0 {
        return Err(Error::Parameter(format!("an embedding needs n >= 2 and d >= 1, got n = {n}, d = {d}")));
    }
    let Some(l) = history else {
        return Ok(EmbeddingUpdate { embedding: finish(gaussian_embedding(n, d, seed)?)?, fallback: false });
    };
    if l.n() != n {
        return Err(Error::Parameter(format!("Laplacian has {} vertices, expected {n}", l.n())));
    }
    let warm = bottom_eigenpairs(l, d, EIGEN_TOL).and_then(|pairs| {
        let k = pairs.len();
        let coords: Vec<f64> = (0..n).flat_map(|x| pairs.iter().map(move |p| p.vector[x])).collect();
        finish(Embedding::new(n, k, coords)?)
    });
    match (warm, previous) {
        (Ok(v), _) => Ok(EmbeddingUpdate { embedding: v, fallback: false }),
        (Err(_), Some(prev)) => {
            let mut v = prev.clone();
            let noise = gaussian_embedding(n, prev.d(), seed)?;
            let coords: Vec<f64> = (0..n)
                .flat_map(|x| v.row(x).iter().zip(noise.row(x)).map(|(a, b)| a + FALLBACK_NOISE * b).collect::<Vec<_>>())
                .collect();
            v = Embedding::new(n, prev.d(), coords)?;
            Ok(EmbeddingUpdate { embedding: finish(v)?, fallback: true })
        }
        (Err(e), None) => Err(e),
    }
}

/// A finished game: its certificate plus what was observed along the way.
#[derive(Clone, Debug)]
pub struct SeparatorRun {
    pub certificate: Certificate,
    pub audits: Vec<CongestionAudit>,
    pub traces: Vec<RoundTrace>,
    /// Embedding updates that fell back to noise.
    pub fallbacks: usize,
}

fn cut_certificate(g: &WeightedGraph, cut: &Cut, scale: f64, bound: f64, header: Header) -> Result<Certificate> {
    let c = cut_stats(g, &cut.side)?;
    Ok(header.wrap(CertificateBody::Cut(CutBody {
        cut_side: c.members(),
        capacity: c.capacity,
        balance: c.balance,
        // Adding zero turns a negative zero positive.
        expansion: c.expansion + 0.0,
        capacity_scale: scale,
        expansion_bound: bound,
    })))
}

#[derive(Clone, Copy)]
struct Header {
    seed: u64,
    epsilon: f64,
    kappa: f64,
    rounds: usize,
    n: usize,
    m: usize,
}

impl Header {
    fn wrap(self, body: CertificateBody) -> Certificate {
        Certificate {
            version: CERTIFICATE_VERSION,
            seed: self.seed,
            epsilon: self.epsilon,
            kappa: self.kappa,
            rounds: self.rounds,
            n: self.n,
            m: self.m,
            trace_path: None,
            body,
        }
    }
}

/// Zero-expansion cut around the component of vertex 0.
fn component_cut(g: &WeightedGraph) -> Result<Cut> {
    let comp = g.components();
    let side: Vec<bool> = comp.iter().map(|&c| c == comp[0]).collect();
    cut_stats(g, &side)
}

/// Plays the game on `G` with unit capacity scale.
pub fn balanced_separator(g: &WeightedGraph, params: &Params, seed: u64) -> Result<SeparatorRun> {
    separator_at_scale(g, 1.0, params, seed)
}

/// Plays the game on `αG`. A cut has expansion at most `κ/α` in `G`; a flow
/// certificate routes demands with `λ₂ ≥ λ_min` in `αG`.
pub fn separator_at_scale(g: &WeightedGraph, alpha: f64, params: &Params, seed: u64) -> Result<SeparatorRun> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!("capacity scale {alpha} must be positive and finite")));
    }
    let p = params.derive(g.n())?;
    let mut header =
        Header { seed, epsilon: p.epsilon, kappa: p.kappa, rounds: 0, n: g.n(), m: g.m() };
    if !g.is_connected() {
        let cert = cut_certificate(g, &component_cut(g)?, alpha, p.kappa / alpha, header)?;
        return Ok(SeparatorRun { certificate: cert, audits: Vec::new(), traces: Vec::new(), fallbacks: 0 });
    }
    let scaled = g.scaled(alpha)?;
    play(g, &scaled, alpha, &p, seed, &mut header)
}

fn play(
    g: &WeightedGraph,
    scaled: &WeightedGraph,
    alpha: f64,
    p: &Derived,
    seed: u64,
    header: &mut Header,
) -> Result<SeparatorRun> {
    let n = g.n();
    let mut v = update_embedding(n, p.embed_dim, None, None, split(seed, 0))?.embedding;
    let mut total = DemandGraph::new(n);
    let mut walks: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut edge_flow = vec![0.0; g.m()];
    let mut audits = Vec::new();
    let mut traces = Vec::new();
    let mut summaries = Vec::new();
    let mut fallbacks = 0;
    for k in 0..p.game_rounds {
        let iteration_seed = split(seed, k as u64 + 1);
        header.rounds = k + 1;
        let flow = match find_flow(scaled, &v, p, iteration_seed)? {
            FindFlowResult::Cut(cut, found) => {
                audits.extend(found);
                let cert = cut_certificate(g, &cut, alpha, p.kappa / alpha, *header)?;
                return Ok(SeparatorRun { certificate: cert, audits, traces, fallbacks });
            }
            FindFlowResult::Flow(f) => f,
        };
        audits.extend(flow.audits.iter().copied());
        traces.extend(flow.traces.iter().cloned());
        total.add_scaled(&flow.demand, 1.0);
        for (w, a) in &flow.walks {
            *walks.entry(w.clone()).or_insert(0.0) += a;
        }
        edge_flow.iter_mut().zip(&flow.edge_flow).for_each(|(f, x)| *f += x);
        let factor = 1.0 / (k + 1) as f64;
        let mut average = total.clone();
        average.scale(factor);
        let l2 = lambda2(&Laplacian::of_demands(&average), EIGEN_TOL)?;
        summaries.push(RoundSummary {
            iteration: k + 1,
            mwu_rounds: flow.rounds,
            trials: flow.trials,
            phi: flow.phi,
            lambda2: l2,
            congestion: flow.congestion,
            measured_width: flow.measured_width,
        });
        if l2 >= p.lambda_min {
            let congestion = edge_flow
                .iter()
                .zip(scaled.edges())
                .map(|(f, e)| f * factor / e.w)
                .fold(0.0, f64::max);
            let body = FlowBody {
                capacity_scale: alpha,
                lambda2: l2,
                lambda_min: p.lambda_min,
                phi: flow.phi,
                phi_tol: p.phi_tol,
                congestion,
                max_degree: average.max_degree(),
                beta: p.beta,
                demand: average.pairs().collect(),
                flow_paths: walks.into_iter().map(|(walk, a)| PathFlow { walk, amount: a * factor }).collect(),
                final_embedding: v.rows(),
                final_demand: flow.demand.pairs().collect(),
                round_summaries: summaries,
            };
            return Ok(SeparatorRun {
                certificate: header.wrap(CertificateBody::Flow(body)),
                audits,
                traces,
                fallbacks,
            });
        }
        let update = update_embedding(
            n,
            p.embed_dim,
            Some(&Laplacian::of_demands(&total)),
            Some(&v),
            split(seed, (p.game_rounds + k + 1) as u64),
        )?;
        fallbacks += update.fallback as usize;
        v = update.embedding;
    }
    Err(Error::Inconclusive {
        rounds: p.game_rounds,
        detail: format!(
            "λ₂ of the averaged demands stayed below {} (trace: {:?})",
            p.lambda_min,
            summaries.iter().map(|s| s.lambda2).collect::<Vec<_>>()
        ),
    })
}

/// What happened at one capacity scale of the search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleProbe {
    pub alpha: f64,
    /// `cut`, `flow` or `error`.
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expansion: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub matchings: usize,
    pub max_ratio: f64,
    pub violations: usize,
}

impl AuditSummary {
    pub fn of(audits: &[CongestionAudit]) -> Self {
        AuditSummary {
            matchings: audits.len(),
            max_ratio: audits.iter().map(|a| a.max_ratio).fold(0.0, f64::max),
            violations: audits.iter().map(|a| a.violations).sum(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SparsestCutReport {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub cut_side: Vec<usize>,
    pub capacity: f64,
    pub balance: usize,
    pub expansion: f64,
    /// Certificate of the reported cut.
    pub certificate: Certificate,
    /// Flow certificate at the smallest scale that produced one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow_certificate: Option<Certificate>,
    /// `λ₂ / (2α)` from the flow certificate: no cut has smaller expansion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    pub probes: Vec<ScaleProbe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brute_force_expansion: Option<f64>,
    /// Reported expansion over the exact optimum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub audit: AuditSummary,
    #[serde(skip)]
    pub audits: Vec<CongestionAudit>,
    /// Every certificate produced during the search.
    #[serde(skip)]
    pub all_certificates: Vec<Certificate>,
}

impl SparsestCutReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

struct Search<'a> {
    g: &'a WeightedGraph,
    params: &'a Params,
    seed: u64,
    probes: Vec<ScaleProbe>,
    audits: Vec<CongestionAudit>,
    certificates: Vec<Certificate>,
}

impl Search<'_> {
    /// Plays at `alpha`; returns `λ₂` if a flow certificate came back.
    /// Errors at a scale count as "no certificate" and are recorded.
    fn probe(&mut self, alpha: f64) -> Result<Option<f64>> {
        match separator_at_scale(self.g, alpha, self.params, self.seed) {
            Ok(run) => {
                self.audits.extend(run.audits);
                let cert = run.certificate;
                let (outcome, expansion, l2) = match &cert.body {
                    CertificateBody::Cut(c) => ("cut", Some(c.expansion), None),
                    CertificateBody::Flow(f) => ("flow", None, Some(f.lambda2)),
                };
                self.probes.push(ScaleProbe { alpha, outcome: outcome.into(), expansion, lambda2: l2, detail: None });
                self.certificates.push(cert);
                Ok(l2)
            }
            Err(e @ (Error::OracleStarvation { .. } | Error::Inconclusive { .. })) => {
                self.probes.push(ScaleProbe {
                    alpha,
                    outcome: "error".into(),
                    expansion: None,
                    lambda2: None,
                    detail: Some(e.to_string()),
                });
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }
}

/// Sparsest cut by a search over capacity scales. Starting from a scale at
/// which every balanced cut is below the flow threshold, `α` doubles until a
/// flow certificate appears, then bisects geometrically between the last two
/// scales. The best cut over all scales is returned, with the lower bound
/// `λ₂ / (2α)` from the smallest flow scale and, when `n ≤ 24`, the ratio to
/// the exact optimum.
pub fn sparsest_cut(g: &WeightedGraph, params: &Params, seed: u64) -> Result<SparsestCutReport> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidGraph(format!("a sparsest cut needs two vertices, got {n}")));
    }
    let exact = if n <= BRUTE_FORCE_LIMIT { Some(brute_force_sparsest_cut(g)?) } else { None };
    let mut search =
        Search { g, params, seed, probes: Vec::new(), audits: Vec::new(), certificates: Vec::new() };
    let mut flow_cert = None;
    if n < 4 {
        let cut = exact.clone().expect("small graphs are solved exactly");
        let header = Header { seed, epsilon: params.epsilon, kappa: 0.0, rounds: 0, n, m: g.m() };
        search.certificates.push(cut_certificate(g, &cut, 1.0, cut.expansion, header)?);
    } else if !g.is_connected() {
        search.probe(1.0)?;
    } else {
        let p = params.derive(n)?;
        let total = g.total_capacity();
        let mut alpha = p.flow_threshold() / (2.0 * total);
        let mut last_empty = None;
        let mut flow_at = None;
        for _ in 0..MAX_DOUBLINGS {
            if search.probe(alpha)?.is_some() {
                flow_at = Some(alpha);
                break;
            }
            last_empty = Some(alpha);
            alpha *= 2.0;
        }
        if let (Some(mut lo), Some(mut hi)) = (last_empty, flow_at) {
            for _ in 0..BISECTION_STEPS {
                let mid = (lo * hi).sqrt();
                if search.probe(mid)?.is_some() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
        }
        flow_cert = search
            .certificates
            .iter()
            .filter_map(|c| c.flow().map(|f| (f.capacity_scale, c)))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, c)| c.clone());
    }
    let best = search
        .certificates
        .iter()
        .filter_map(|c| c.cut().map(|b| (b.expansion, c)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c.clone())
        .ok_or_else(|| Error::Inconclusive {
            rounds: search.probes.len(),
            detail: "no capacity scale produced a cut".into(),
        })?;
    let body = best.cut().expect("selected among cuts").clone();
    let lower_bound = flow_cert.as_ref().and_then(|c| c.flow()).map(|f| f.lambda2 / (2.0 * f.capacity_scale));
    let brute_force_expansion = exact.map(|c| c.expansion);
    let ratio = brute_force_expansion.map(|h| if h > 0.0 { body.expansion / h } else if body.expansion == 0.0 { 1.0 } else { f64::INFINITY });
    Ok(SparsestCutReport {
        n,
        m: g.m(),
        seed,
        cut_side: body.cut_side,
        capacity: body.capacity,
        balance: body.balance,
        expansion: body.expansion,
        certificate: best,
        flow_certificate: flow_cert,
        lower_bound,
        probes: search.probes,
        brute_force_expansion,
        ratio,
        audit: AuditSummary::of(&search.audits),
        audits: search.audits,
        all_certificates: search.certificates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn params_for(n: usize) -> Params {
        let (lo, hi) = Params::epsilon_range(n);
        Params::new(0.25f64.clamp(lo, hi))
    }

    #[test]
    fn cold_start_is_normalized() {
        let v = update_embedding(10, 4, None, None, 3).unwrap().embedding;
        assert!((v.spread() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn heavy_pair_is_pulled_together() {
        let n = 8;
        let cold = update_embedding(n, 3, None, None, 5).unwrap().embedding;
        let mut pairs: Vec<(usize, usize, f64)> = (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y, 1.0))).collect();
        pairs.push((2, 5, 50.0));
        let l = Laplacian::from_pairs(n, pairs);
        let warm = update_embedding(n, 3, Some(&l), Some(&cold), 6).unwrap().embedding;
        assert!((warm.spread() - 64.0).abs() < 1e-9);
        assert!(warm.sq_dist(2, 5) < cold.sq_dist(2, 5));
        assert!(warm.sq_dist(2, 5) < 1e-9);
    }

    #[test]
    fn complete_history_keeps_points_spread() {
        let n = 6;
        let pairs: Vec<(usize, usize, f64)> = (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y, 3.0))).collect();
        let v = update_embedding(n, n - 1, Some(&Laplacian::from_pairs(n, pairs)), None, 1).unwrap().embedding;
        let d01 = v.sq_dist(0, 1);
        for x in 0..n {
            for y in x + 1..n {
                assert!((v.sq_dist(x, y) - d01).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn disconnected_graph_gives_a_zero_cut() {
        let g = WeightedGraph::new(6, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (3, 4, 1.0), (4, 5, 1.0), (5, 3, 1.0)]).unwrap();
        let run = balanced_separator(&g, &params_for(6), 1).unwrap();
        let cut = run.certificate.cut().unwrap();
        assert_eq!((cut.cut_side.clone(), cut.expansion), (vec![0, 1, 2], 0.0));
        assert!(verify_certificate(&g, &run.certificate).passed);
    }

    #[test]
    fn dumbbell_separates_the_lobes() {
        let g = generators::dumbbell(4).unwrap();
        let run = balanced_separator(&g, &params_for(8), 7).unwrap();
        let cut = run.certificate.cut().expect("unit scale gives a cut");
        assert!(cut.expansion <= cut.expansion_bound);
        assert!(verify_certificate(&g, &run.certificate).passed);
    }

    #[test]
    fn tampered_cut_fails_on_expansion() {
        let g = generators::dumbbell(4).unwrap();
        let mut cert = balanced_separator(&g, &params_for(8), 7).unwrap().certificate;
        if let CertificateBody::Cut(c) = &mut cert.body {
            c.expansion *= 0.5;
        }
        let report = verify_certificate(&g, &cert);
        assert!(!report.passed);
        assert_eq!(report.first_failure().unwrap().name, "expansion");
    }

    #[test]
    fn small_graphs_are_solved_exactly() {
        let g = WeightedGraph::new(2, [(0, 1, 2.5)]).unwrap();
        let r = sparsest_cut(&g, &Params::new(0.5), 0).unwrap();
        assert_eq!((r.expansion, r.ratio), (2.5, Some(1.0)));
        let p4 = generators::path(4).unwrap();
        let r = sparsest_cut(&p4, &params_for(4), 2).unwrap();
        assert_eq!(r.brute_force_expansion, Some(0.5));
        assert!(r.ratio.unwrap() >= 1.0);
        assert!(verify_certificate(&p4, &r.certificate).passed);
    }
}
