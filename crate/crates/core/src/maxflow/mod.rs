//! Exact s–t max-flow on networks with real capacities.
//!
//! Capacities are mapped to 64-bit integers by a per-instance scale factor so
//! that flow values and cut capacities compare exactly. Arc pairs carry a
//! signed net flow; arc `2k` runs along pair `k` and arc `2k + 1` against it.

mod dimacs;
mod flow_and_cut;
mod push_relabel;

pub use dimacs::{from_dimacs, to_dimacs};
pub use flow_and_cut::{build_flow_and_cut, flow_and_cut, Branch, FlowAndCutOutcome};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// What an arc pair stands for in the original instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcOrigin {
    Edge(usize),
    Source,
    Sink,
    Other,
}

/// Two opposing arcs `u → v` (capacity `cap_uv`) and `v → u` (capacity `cap_vu`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcPair {
    pub u: usize,
    pub v: usize,
    pub cap_uv: f64,
    pub cap_vu: f64,
    pub origin: ArcOrigin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowNetwork {
    nodes: usize,
    source: usize,
    sink: usize,
    pairs: Vec<ArcPair>,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Result<Self> {
        if source >= nodes || sink >= nodes || source == sink {
            return Err(Error::Parameter(format!("bad terminals {source}, {sink} for {nodes} nodes")));
        }
        Ok(FlowNetwork { nodes, source, sink, pairs: Vec::new() })
    }

    /// Network on `G ∪ {s, t}` with `s = n`, `t = n + 1`; every edge becomes
    /// two opposing arcs of capacity `w`.
    pub fn from_graph(g: &WeightedGraph) -> Self {
        let mut net = FlowNetwork::new(g.n() + 2, g.n(), g.n() + 1).expect("terminals are distinct");
        for (id, e) in g.edges().iter().enumerate() {
            net.pairs.push(ArcPair { u: e.u, v: e.v, cap_uv: e.w, cap_vu: e.w, origin: ArcOrigin::Edge(id) });
        }
        net
    }

    /// Adds a pair and returns its index.
    pub fn add_pair(&mut self, u: usize, v: usize, cap_uv: f64, cap_vu: f64, origin: ArcOrigin) -> Result<usize> {
        if u >= self.nodes || v >= self.nodes || u == v {
            return Err(Error::Parameter(format!("bad arc ({u}, {v}) for {} nodes", self.nodes)));
        }
        for c in [cap_uv, cap_vu] {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::Parameter(format!("arc capacity {c} must be finite and nonnegative")));
            }
        }
        self.pairs.push(ArcPair { u, v, cap_uv, cap_vu, origin });
        Ok(self.pairs.len() - 1)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn pairs(&self) -> &[ArcPair] {
        &self.pairs
    }

    pub fn arc_count(&self) -> usize {
        2 * self.pairs.len()
    }

    /// Tail and head of arc `a`.
    pub fn arc_ends(&self, a: usize) -> (usize, usize) {
        let p = &self.pairs[a / 2];
        if a % 2 == 0 {
            (p.u, p.v)
        } else {
            (p.v, p.u)
        }
    }

    pub fn arc_capacity(&self, a: usize) -> f64 {
        let p = &self.pairs[a / 2];
        if a % 2 == 0 {
            p.cap_uv
        } else {
            p.cap_vu
        }
    }

    /// Outgoing arc ids per node, ascending.
    pub fn out_arcs(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for a in 0..self.arc_count() {
            adj[self.arc_ends(a).0].push(a);
        }
        adj
    }
}

/// A maximum flow with its certifying minimum cut.
#[derive(Clone, Debug)]
pub struct FlowResult {
    pub network: FlowNetwork,
    /// Net flow along each pair in integer units (negative runs `v → u`).
    pub units: Vec<i64>,
    /// Real amount of one unit.
    pub quantum: f64,
    pub value_units: i64,
    pub value: f64,
    /// Node membership of the source side of the minimum cut.
    pub source_side: Vec<bool>,
}

impl FlowResult {
    /// Wraps an arbitrary feasible flow given in units of `quantum`.
    ///
    /// Checks capacity bounds and conservation; `source_side` holds the nodes
    /// reachable from the source in the residual network.
    pub fn from_units(network: FlowNetwork, units: Vec<i64>, quantum: f64) -> Result<Self> {
        if units.len() != network.pairs.len() || !(quantum > 0.0 && quantum.is_finite()) {
            return Err(Error::Parameter("flow units do not match the network".into()));
        }
        let caps: Vec<(i64, i64)> = network
            .pairs
            .iter()
            .map(|p| ((p.cap_uv / quantum * (1.0 + 1e-12)).floor() as i64, (p.cap_vu / quantum * (1.0 + 1e-12)).floor() as i64))
            .collect();
        let mut balance = vec![0i64; network.nodes];
        for (k, p) in network.pairs.iter().enumerate() {
            let x = units[k];
            if x > caps[k].0 || -x > caps[k].1 {
                return Err(Error::Parameter(format!("pair {k} carries {x} units beyond capacity")));
            }
            balance[p.u] -= x;
            balance[p.v] += x;
        }
        for (v, &b) in balance.iter().enumerate() {
            if v != network.source && v != network.sink && b != 0 {
                return Err(Error::Parameter(format!("node {v} violates conservation by {b} units")));
            }
        }
        let value_units = -balance[network.source];
        let source_side = residual_reach(&network, &caps, &units);
        Ok(FlowResult { network, units, quantum, value_units, value: value_units as f64 * quantum, source_side })
    }

    /// Flow on arc `a` in units; negative when the pair's flow runs the other way.
    pub fn arc_units(&self, a: usize) -> i64 {
        if a % 2 == 0 {
            self.units[a / 2]
        } else {
            -self.units[a / 2]
        }
    }

    /// Real net flow along each pair.
    pub fn pair_flows(&self) -> Vec<f64> {
        self.units.iter().map(|&x| x as f64 * self.quantum).collect()
    }

    /// Real capacity of the reported cut, summed over crossing arcs in id order.
    pub fn cut_capacity(&self) -> f64 {
        let net = &self.network;
        (0..net.arc_count())
            .filter(|&a| {
                let (x, y) = net.arc_ends(a);
                self.source_side[x] && !self.source_side[y]
            })
            .map(|a| net.arc_capacity(a))
            .sum()
    }

    /// Absolute flow on each original edge of the underlying graph.
    pub fn edge_flows(&self, m: usize) -> Vec<f64> {
        let mut f = vec![0.0; m];
        for (k, p) in self.network.pairs.iter().enumerate() {
            if let ArcOrigin::Edge(e) = p.origin {
                f[e] = (self.units[k] as f64 * self.quantum).abs();
            }
        }
        f
    }

    /// Checks conservation, capacity bounds and exact max-flow/min-cut duality.
    pub fn check(&self, caps: &[(i64, i64)]) -> Result<()> {
        let net = &self.network;
        let mut balance = vec![0i64; net.nodes];
        for (k, p) in net.pairs.iter().enumerate() {
            let x = self.units[k];
            if x > caps[k].0 || -x > caps[k].1 {
                return Err(Error::Contract(format!("pair {k} carries {x} units beyond capacity")));
            }
            balance[p.u] -= x;
            balance[p.v] += x;
        }
        for (v, &b) in balance.iter().enumerate() {
            if v != net.source && v != net.sink && b != 0 {
                return Err(Error::Contract(format!("node {v} violates conservation by {b} units")));
            }
        }
        if -balance[net.source] != self.value_units || balance[net.sink] != self.value_units {
            return Err(Error::Contract("terminal balances disagree with the flow value".into()));
        }
        let cut: i64 = (0..net.arc_count())
            .filter(|&a| {
                let (x, y) = net.arc_ends(a);
                self.source_side[x] && !self.source_side[y]
            })
            .map(|a| if a % 2 == 0 { caps[a / 2].0 } else { caps[a / 2].1 })
            .sum();
        if cut != self.value_units {
            return Err(Error::Contract(format!("flow value {} differs from cut capacity {cut}", self.value_units)));
        }
        Ok(())
    }
}

/// Largest total integer capacity allowed, leaving headroom in `i64`.
const UNIT_BUDGET: f64 = (1u64 << 60) as f64;

/// Integer capacities `(uv, vu)` per pair and the real value of one unit.
///
/// When every capacity is a rational with small denominator (up to `1e-9`
/// relative error) the scale is the least common denominator and the mapping
/// is exact. Otherwise capacities are rounded down on a power-of-two grid,
/// which keeps every integer flow feasible for the real capacities.
pub fn quantize(net: &FlowNetwork) -> (Vec<(i64, i64)>, f64) {
    let caps: Vec<f64> = net.pairs.iter().flat_map(|p| [p.cap_uv, p.cap_vu]).collect();
    let total: f64 = caps.iter().sum();
    if total == 0.0 {
        return (vec![(0, 0); net.pairs.len()], 1.0);
    }
    if let Some(scale) = common_denominator(&caps, total) {
        let ints: Vec<(i64, i64)> = net
            .pairs
            .iter()
            .map(|p| ((p.cap_uv * scale).round() as i64, (p.cap_vu * scale).round() as i64))
            .collect();
        return (ints, 1.0 / scale);
    }
    let exp = (UNIT_BUDGET / total).log2().floor() as i32;
    let scale = 2f64.powi(exp);
    let ints = net
        .pairs
        .iter()
        .map(|p| ((p.cap_uv * scale).floor() as i64, (p.cap_vu * scale).floor() as i64))
        .collect();
    (ints, 1.0 / scale)
}

fn common_denominator(caps: &[f64], total: f64) -> Option<f64> {
    let mut distinct: Vec<f64> = caps.iter().copied().filter(|&c| c > 0.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut lcm: u128 = 1;
    for &c in &distinct {
        let q = small_denominator(c)?;
        lcm = lcm / gcd(lcm, q) * q;
        if lcm as f64 * total > UNIT_BUDGET {
            return None;
        }
    }
    Some(lcm as f64)
}

/// Denominator `q ≤ 2^20` with `c·q` within `1e-9` relative of an integer,
/// found by continued fractions.
fn small_denominator(c: f64) -> Option<u128> {
    let (mut h0, mut h1, mut k0, mut k1) = (0u128, 1u128, 1u128, 0u128);
    let mut x = c;
    for _ in 0..40 {
        let a = x.floor();
        if a > 1e15 {
            return None;
        }
        let a = a as u128;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > 1 << 20 {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let scaled = c * k1 as f64;
        if (scaled - scaled.round()).abs() <= 1e-9 * scaled.abs().max(1.0) {
            return Some(k1);
        }
        let frac = x - x.floor();
        if frac == 0.0 {
            return None;
        }
        x = 1.0 / frac;
    }
    None
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact maximum flow with acyclic support and a residual-reachability min cut.
pub fn max_flow(net: &FlowNetwork) -> Result<FlowResult> {
    for p in &net.pairs {
        if !(p.cap_uv >= 0.0 && p.cap_uv.is_finite() && p.cap_vu >= 0.0 && p.cap_vu.is_finite()) {
            return Err(Error::Parameter("arc capacities must be finite and nonnegative".into()));
        }
    }
    let (caps, quantum) = quantize(net);
    let mut units = push_relabel::solve(net, &caps);
    cancel_cycles(net, &mut units);
    let source_side = residual_reach(net, &caps, &units);
    let value_units: i64 = net
        .pairs
        .iter()
        .zip(&units)
        .map(|(p, &x)| {
            if p.u == net.source {
                x
            } else if p.v == net.source {
                -x
            } else {
                0
            }
        })
        .sum();
    let result = FlowResult {
        network: net.clone(),
        units,
        quantum,
        value_units,
        value: value_units as f64 * quantum,
        source_side,
    };
    result.check(&caps)?;
    Ok(result)
}

/// Nodes reachable from the source through arcs with residual capacity.
fn residual_reach(net: &FlowNetwork, caps: &[(i64, i64)], units: &[i64]) -> Vec<bool> {
    let adj = net.out_arcs();
    let mut seen = vec![false; net.nodes];
    seen[net.source] = true;
    let mut stack = vec![net.source];
    while let Some(x) = stack.pop() {
        for &a in &adj[x] {
            let k = a / 2;
            let residual = if a % 2 == 0 { caps[k].0 - units[k] } else { caps[k].1 + units[k] };
            let y = net.arc_ends(a).1;
            if residual > 0 && !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen
}

/// Removes every directed cycle from the support of the flow, leaving the
/// value unchanged.
pub(crate) fn cancel_cycles(net: &FlowNetwork, units: &mut [i64]) {
    let adj = net.out_arcs();
    let flow_on = |units: &[i64], a: usize| if a % 2 == 0 { units[a / 2] } else { -units[a / 2] };
    // 0 = unvisited, 1 = on the current path, 2 = finished.
    let mut state = vec![0u8; net.nodes];
    let mut next = vec![0usize; net.nodes];
    for root in 0..net.nodes {
        if state[root] != 0 {
            continue;
        }
        // Path of nodes and the arc used to enter each.
        let mut path: Vec<usize> = vec![root];
        let mut via: Vec<usize> = Vec::new();
        state[root] = 1;
        while let Some(&x) = path.last() {
            if next[x] == adj[x].len() {
                state[x] = 2;
                path.pop();
                via.pop();
                continue;
            }
            let a = adj[x][next[x]];
            if flow_on(units, a) <= 0 {
                next[x] += 1;
                continue;
            }
            let y = net.arc_ends(a).1;
            match state[y] {
                2 => next[x] += 1,
                0 => {
                    state[y] = 1;
                    path.push(y);
                    via.push(a);
                }
                _ => {
                    let start = path.iter().rposition(|&z| z == y).expect("node on path");
                    let mut cycle: Vec<usize> = via[start..].to_vec();
                    cycle.push(a);
                    let delta = cycle.iter().map(|&c| flow_on(units, c)).min().expect("nonempty cycle");
                    for &c in &cycle {
                        if c % 2 == 0 {
                            units[c / 2] -= delta;
                        } else {
                            units[c / 2] += delta;
                        }
                    }
                    for &z in &path[start + 1..] {
                        state[z] = 0;
                    }
                    path.truncate(start + 1);
                    via.truncate(start);
                }
            }
        }
    }
}

/// True when the positive-flow arcs admit a topological order.
pub fn support_is_acyclic(result: &FlowResult) -> bool {
    let net = &result.network;
    let mut indeg = vec![0usize; net.nodes];
    let arcs: Vec<(usize, usize)> =
        (0..net.arc_count()).filter(|&a| result.arc_units(a) > 0).map(|a| net.arc_ends(a)).collect();
    for &(_, y) in &arcs {
        indeg[y] += 1;
    }
    let mut out = vec![Vec::new(); net.nodes];
    for &(x, y) in &arcs {
        out[x].push(y);
    }
    let mut queue: Vec<usize> = (0..net.nodes).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(x) = queue.pop() {
        seen += 1;
        for &y in &out[x] {
            indeg[y] -= 1;
            if indeg[y] == 0 {
                queue.push(y);
            }
        }
    }
    seen == net.nodes
}
