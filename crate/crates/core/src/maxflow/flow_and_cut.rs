//! Reduction of a one-dimensional projection to a single s–t max-flow.

use super::{max_flow, ArcOrigin, FlowNetwork, FlowResult};
use crate::error::{Error, Result};
use crate::graph::{cut_stats, Cut, WeightedGraph};

#[derive(Clone, Debug)]
pub enum Branch {
    /// The max-flow reached `κcn`.
    Flow(FlowResult),
    /// A min cut of capacity below `κcn`, restricted to the original vertices.
    Cut(Cut),
}

#[derive(Clone, Debug)]
pub struct FlowAndCutOutcome {
    /// The `⌊2cn⌋` vertices of least projection, in sorted order.
    pub a: Vec<usize>,
    /// The `⌊2cn⌋` vertices of greatest projection, greatest first.
    pub b: Vec<usize>,
    pub branch: Branch,
}

/// Builds `G ∪ {s, t}` with `s → x` arcs for `x ∈ A` and `y → t` arcs for
/// `y ∈ B`, all of capacity `κ`. Equal projections are ordered by vertex id.
pub fn build_flow_and_cut(
    g: &WeightedGraph,
    kappa: f64,
    c: f64,
    proj: &[f64],
) -> Result<(FlowNetwork, Vec<usize>, Vec<usize>)> {
    let n = g.n();
    if !(c > 0.0 && c <= 0.25) {
        return Err(Error::Parameter(format!("balance constant c = {c} must lie in (0, 1/4]")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Parameter(format!("kappa = {kappa} must be positive and finite")));
    }
    if proj.len() != n {
        return Err(Error::Parameter(format!("{} projections for {n} vertices", proj.len())));
    }
    if proj.iter().any(|p| !p.is_finite()) {
        return Err(Error::Parameter("projection values must be finite".into()));
    }
    let k = (2.0 * c * n as f64).floor() as usize;
    if k == 0 {
        return Err(Error::Parameter(format!("2cn = {} leaves A and B empty", 2.0 * c * n as f64)));
    }
    if 2 * k > n {
        return Err(Error::Parameter(format!("A and B of size {k} overlap on {n} vertices")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| proj[x].total_cmp(&proj[y]).then(x.cmp(&y)));
    let a: Vec<usize> = order[..k].to_vec();
    let b: Vec<usize> = order[n - k..].iter().rev().copied().collect();
    let mut net = FlowNetwork::from_graph(g);
    let (s, t) = (net.source(), net.sink());
    for &x in &a {
        net.add_pair(s, x, kappa, 0.0, ArcOrigin::Source)?;
    }
    for &y in &b {
        net.add_pair(y, t, kappa, 0.0, ArcOrigin::Sink)?;
    }
    Ok((net, a, b))
}

/// Runs the max-flow and reports a flow of value at least `κcn`, or else a cut
/// of capacity below `κcn`, which is `⌊cn⌋`-balanced with expansion at most `κ`.
pub fn flow_and_cut(g: &WeightedGraph, kappa: f64, c: f64, proj: &[f64]) -> Result<FlowAndCutOutcome> {
    let (net, a, b) = build_flow_and_cut(g, kappa, c, proj)?;
    let n = g.n();
    let threshold = kappa * c * n as f64;
    let result = max_flow(&net)?;
    let cut_capacity = result.cut_capacity();
    if cut_capacity >= threshold {
        return Ok(FlowAndCutOutcome { a, b, branch: Branch::Flow(result) });
    }
    let side: Vec<bool> = result.source_side[..n].to_vec();
    let cut = cut_stats(g, &side)
        .map_err(|e| Error::Contract(format!("min cut of capacity {cut_capacity} is not proper: {e}")))?;
    let min_balance = (c * n as f64).floor() as usize;
    if cut.balance < min_balance || cut.expansion > kappa * (1.0 + 1e-9) {
        return Err(Error::Contract(format!(
            "cut with balance {} and expansion {} breaks the balance {min_balance} / expansion {kappa} guarantee",
            cut.balance, cut.expansion
        )));
    }
    Ok(FlowAndCutOutcome { a, b, branch: Branch::Cut(cut) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> WeightedGraph {
        let mut e = Vec::new();
        for x in 0..n {
            for y in x + 1..n {
                e.push((x, y, 1.0));
            }
        }
        WeightedGraph::new(n, e).unwrap()
    }

    fn dumbbell() -> WeightedGraph {
        let mut e = Vec::new();
        for base in [0, 4] {
            for x in 0..4 {
                for y in x + 1..4 {
                    e.push((base + x, base + y, 1.0));
                }
            }
        }
        e.push((3, 4, 1.0));
        WeightedGraph::new(8, e).unwrap()
    }

    #[test]
    fn endpoint_sets_follow_projection_order() {
        let g = complete(8);
        let proj: Vec<f64> = (0..8).map(|x| x as f64).collect();
        let (_, a, b) = build_flow_and_cut(&g, 1.0, 0.25, &proj).unwrap();
        assert_eq!(a, vec![0, 1, 2, 3]);
        assert_eq!(b, vec![7, 6, 5, 4]);
        let (_, a, b) = build_flow_and_cut(&g, 1.0, 0.25, &[0.0; 8]).unwrap();
        assert_eq!(a, vec![0, 1, 2, 3]);
        assert_eq!(b, vec![7, 6, 5, 4]);
    }

    #[test]
    fn overlap_and_degenerate_parameters_rejected() {
        let g = complete(8);
        assert!(matches!(build_flow_and_cut(&g, 1.0, 0.3, &[0.0; 8]), Err(Error::Parameter(_))));
        assert!(matches!(build_flow_and_cut(&g, 0.0, 0.25, &[0.0; 8]), Err(Error::Parameter(_))));
    }

    #[test]
    fn dumbbell_yields_bridge_cut() {
        let g = dumbbell();
        let proj = [-1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0];
        let out = flow_and_cut(&g, 1.0, 0.25, &proj).unwrap();
        match out.branch {
            Branch::Cut(cut) => {
                assert_eq!(cut.capacity, 1.0);
                assert_eq!(cut.balance, 4);
                assert_eq!(cut.expansion, 0.25);
            }
            Branch::Flow(_) => panic!("expected the bridge cut"),
        }
    }

    #[test]
    fn complete_graph_routes() {
        let proj: Vec<f64> = (0..8).map(|x| x as f64).collect();
        let out = flow_and_cut(&complete(8), 1.0, 0.25, &proj).unwrap();
        match out.branch {
            Branch::Flow(r) => assert_eq!(r.value, 4.0),
            Branch::Cut(c) => panic!("unexpected cut {c:?}"),
        }
    }
}
