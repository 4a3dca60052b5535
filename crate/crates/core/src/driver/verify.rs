//! Independent certificate checker. Everything here is recomputed from the
//! graph and the certificate alone, with its own arithmetic: pairwise sums
//! instead of centered ones, and a Jacobi eigensolver instead of the solver's
//! spectral routines.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::certificate::{Certificate, CertificateBody, CutBody, FlowBody, CERTIFICATE_VERSION};
use crate::graph::WeightedGraph;

/// Largest instance handled by the Jacobi eigensolver.
pub const JACOBI_LIMIT: usize = 256;

const REL_TOL: f64 = 1e-9;
const LAMBDA_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: &str, passed: bool, detail: String) -> bool {
        self.0.push(Check { name: name.into(), passed, detail });
        passed
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Recomputes every field of the certificate against `g`.
pub fn verify_certificate(g: &WeightedGraph, cert: &Certificate) -> VerifyReport {
    let mut c = Checks(Vec::new());
    let shape = c.add("version", cert.version == CERTIFICATE_VERSION, format!("version {}", cert.version))
        & c.add(
            "graph",
            cert.n == g.n() && cert.m == g.m(),
            format!("certificate has n = {}, m = {}; graph has n = {}, m = {}", cert.n, cert.m, g.n(), g.m()),
        );
    if shape {
        match &cert.body {
            CertificateBody::Cut(body) => verify_cut(g, body, &mut c),
            CertificateBody::Flow(body) => verify_flow(g, body, cert.rounds, &mut c),
        }
    }
    let passed = c.0.iter().all(|x| x.passed);
    VerifyReport { passed, checks: c.0 }
}

fn verify_cut(g: &WeightedGraph, body: &CutBody, c: &mut Checks) {
    let n = g.n();
    let mut inside = vec![false; n];
    let mut distinct = true;
    for &x in &body.cut_side {
        if x >= n || inside[x] {
            distinct = false;
            break;
        }
        inside[x] = true;
    }
    let size = body.cut_side.len();
    if !c.add("cut_side", distinct && size > 0 && size < n, format!("{size} listed vertices out of {n}")) {
        return;
    }
    let mut capacity = 0.0;
    for e in g.edges() {
        if inside[e.u] != inside[e.v] {
            capacity += e.w;
        }
    }
    let balance = size.min(n - size);
    let expansion = capacity / balance as f64;
    c.add("capacity", close(capacity, body.capacity, REL_TOL), format!("recomputed {capacity}, stored {}", body.capacity));
    c.add("balance", balance == body.balance, format!("recomputed {balance}, stored {}", body.balance));
    c.add(
        "expansion",
        close(expansion, body.expansion, REL_TOL),
        format!("recomputed {expansion}, stored {}", body.expansion),
    );
    c.add(
        "expansion_bound",
        expansion <= body.expansion_bound * (1.0 + REL_TOL),
        format!("expansion {expansion} against bound {}", body.expansion_bound),
    );
}

fn demand_map(n: usize, list: &[(usize, usize, f64)]) -> Option<BTreeMap<(usize, usize), f64>> {
    let mut map = BTreeMap::new();
    for &(x, y, w) in list {
        if x >= y || y >= n || !(w >= 0.0 && w.is_finite()) || map.insert((x, y), w).is_some() {
            return None;
        }
    }
    Some(map)
}

fn verify_flow(g: &WeightedGraph, body: &FlowBody, rounds: usize, c: &mut Checks) {
    let n = g.n();
    let Some(demand) = demand_map(n, &body.demand) else {
        c.add("demand", false, "demand pairs must be distinct, ordered, in range and nonnegative".into());
        return;
    };
    let Some(final_demand) = demand_map(n, &body.final_demand) else {
        c.add("final_demand", false, "final demand pairs are malformed".into());
        return;
    };
    if !(body.capacity_scale > 0.0 && body.capacity_scale.is_finite()) {
        c.add("capacity_scale", false, format!("scale {} must be positive", body.capacity_scale));
        return;
    }

    // Walks: valid, and summing to the demands pair by pair.
    let edge_of: HashMap<(usize, usize), usize> =
        g.edges().iter().enumerate().flat_map(|(i, e)| [((e.u, e.v), i), ((e.v, e.u), i)]).collect();
    let mut load = vec![0.0; g.m()];
    let mut routed: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (k, p) in body.flow_paths.iter().enumerate() {
        let ok_amount = p.amount > 0.0 && p.amount.is_finite();
        let ends = p.walk.len() >= 2 && p.walk[0] != *p.walk.last().expect("nonempty") && p.walk.iter().all(|&x| x < n);
        if !ok_amount || !ends {
            c.add("flow_paths", false, format!("path {k} is malformed"));
            return;
        }
        for s in p.walk.windows(2) {
            match edge_of.get(&(s[0], s[1])) {
                Some(&e) => load[e] += p.amount,
                None => {
                    c.add("flow_paths", false, format!("path {k} steps along the non-edge ({}, {})", s[0], s[1]));
                    return;
                }
            }
        }
        let (x, y) = (p.walk[0], *p.walk.last().expect("nonempty"));
        *routed.entry((x.min(y), x.max(y))).or_insert(0.0) += p.amount;
    }
    let mut mismatch = None;
    for (pair, &want) in &demand {
        let got = routed.get(pair).copied().unwrap_or(0.0);
        if !close(got, want, REL_TOL) {
            mismatch = Some(format!("pair {pair:?} routes {got} of {want}"));
            break;
        }
    }
    if mismatch.is_none() {
        if let Some((pair, _)) = routed.iter().find(|(p, &a)| a > 0.0 && !demand.contains_key(p)) {
            mismatch = Some(format!("pair {pair:?} is routed but not demanded"));
        }
    }
    c.add("routing", mismatch.is_none(), mismatch.unwrap_or_else(|| format!("{} paths", body.flow_paths.len())));

    let congestion = load
        .iter()
        .zip(g.edges())
        .map(|(f, e)| f / (body.capacity_scale * e.w))
        .fold(0.0, f64::max);
    c.add(
        "congestion",
        close(congestion, body.congestion, REL_TOL) && congestion <= 1.0 + REL_TOL,
        format!("recomputed {congestion}, stored {}", body.congestion),
    );

    let mut deg = vec![0.0; n];
    for (&(x, y), &w) in &demand {
        deg[x] += w;
        deg[y] += w;
    }
    let max_degree = deg.iter().copied().fold(0.0, f64::max);
    c.add(
        "max_degree",
        close(max_degree, body.max_degree, REL_TOL) && max_degree <= body.beta * (1.0 + REL_TOL),
        format!("recomputed {max_degree}, stored {}, beta {}", body.max_degree, body.beta),
    );

    match laplacian_lambda2(n, &demand) {
        Some(l2) => c.add(
            "lambda2",
            (l2 - body.lambda2).abs() <= LAMBDA_TOL && l2 >= body.lambda_min - LAMBDA_TOL,
            format!("recomputed {l2}, stored {}, threshold {}", body.lambda2, body.lambda_min),
        ),
        None => c.add("lambda2", false, format!("n = {n} exceeds the checker's limit {JACOBI_LIMIT}")),
    };

    // Payoff of the final demands against the final embedding.
    let v = &body.final_embedding;
    let d = v.first().map_or(0, Vec::len);
    if v.len() != n || d == 0 || v.iter().any(|r| r.len() != d || r.iter().any(|x| !x.is_finite())) {
        c.add("final_embedding", false, "embedding must have one finite row per vertex".into());
        return;
    }
    let sq = |x: usize, y: usize| v[x].iter().zip(&v[y]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let mut spread = 0.0;
    for x in 0..n {
        for y in x + 1..n {
            spread += sq(x, y);
        }
    }
    let num: f64 = final_demand.iter().map(|(&(x, y), &w)| w * sq(x, y)).sum();
    let phi = num / (spread / n as f64);
    c.add(
        "phi",
        (phi - body.phi).abs() <= LAMBDA_TOL * phi.abs().max(1.0) && phi >= 1.0 - body.phi_tol,
        format!("recomputed {phi}, stored {}", body.phi),
    );
    // The final demands are one of the `rounds` averaged terms.
    let dominated = final_demand
        .iter()
        .all(|(p, &w)| w <= rounds as f64 * demand.get(p).copied().unwrap_or(0.0) * (1.0 + REL_TOL) + 1e-300);
    c.add("final_demand", dominated, format!("final demands within {rounds} times the average"));
}

/// Second smallest eigenvalue of the demand Laplacian by cyclic Jacobi
/// rotations, or `None` above [`JACOBI_LIMIT`].
pub fn laplacian_lambda2(n: usize, demand: &BTreeMap<(usize, usize), f64>) -> Option<f64> {
    if n > JACOBI_LIMIT || n < 2 {
        return None;
    }
    let mut a = vec![vec![0.0; n]; n];
    for (&(x, y), &w) in demand {
        a[x][y] -= w;
        a[y][x] -= w;
        a[x][x] += w;
        a[y][y] += w;
    }
    let mut eig = jacobi_eigenvalues(a);
    eig.sort_by(f64::total_cmp);
    Some(eig[1])
}

fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    let norm: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off.sqrt() <= 1e-15 * norm.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}
