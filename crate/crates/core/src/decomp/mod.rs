//! Pseudo-decomposition of acyclic s–t flows and per-path rescaling.
//!
//! Both implementations peel paths in the same order: starting at the source,
//! each node forwards along its positive-flow out-arc of smallest id, and the
//! bottleneck of the resulting path is removed. The link-cut version keeps the
//! current arcs in a dynamic forest; the naive version walks every path.
//! Lengths and scaled amounts are accumulated in fixed point, so the two agree
//! bit for bit.

mod link_cut;
mod naive;

use crate::error::{Error, Result};
use crate::maxflow::{support_is_acyclic, ArcOrigin, FlowNetwork, FlowResult};

/// Fixed-point scale for path lengths.
const LEN_SCALE: f64 = (1u64 << 60) as f64;
/// Fixed-point scale for rescaled path flows.
const FLOW_SCALE: f64 = (1u64 << 32) as f64;

/// One flow path `s, s_i, …, t_i, t`, summarized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub flow_units: i64,
    pub flow: f64,
    /// Second vertex of the path.
    pub s_i: usize,
    /// Second-to-last vertex of the path.
    pub t_i: usize,
    /// Sum of edge lengths along the path; source and sink arcs count zero.
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PseudoDecomposition {
    pub entries: Vec<Entry>,
}

impl PseudoDecomposition {
    pub fn total_flow(&self) -> f64 {
        self.entries.iter().map(|e| e.flow).sum()
    }

    pub fn total_units(&self) -> i64 {
        self.entries.iter().map(|e| e.flow_units).sum()
    }
}

/// A flow obtained by rescaling the paths of a decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledFlow {
    pub network: FlowNetwork,
    /// Net flow along each arc pair; negative runs `v → u`.
    pub pair_flows: Vec<f64>,
}

impl ScaledFlow {
    /// Absolute flow on each original edge.
    pub fn edge_flows(&self, m: usize) -> Vec<f64> {
        let mut f = vec![0.0; m];
        for (p, x) in self.network.pairs().iter().zip(&self.pair_flows) {
            if let ArcOrigin::Edge(e) = p.origin {
                f[e] = x.abs();
            }
        }
        f
    }

    /// Net flow leaving the source.
    pub fn value(&self) -> f64 {
        let s = self.network.source();
        self.network
            .pairs()
            .iter()
            .zip(&self.pair_flows)
            .map(|(p, x)| {
                if p.u == s {
                    *x
                } else if p.v == s {
                    -x
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// Output shared by both peelers.
pub(crate) struct Peel {
    /// `(units, second vertex, second-to-last vertex, length)` per path.
    pub entries: Vec<(i64, usize, usize, i128)>,
    /// Fixed-point amount added to each arc by the scale callback.
    pub added: Vec<i128>,
}

/// Positive flow on each arc, in units.
fn arc_flows(f: &FlowResult) -> Vec<i64> {
    (0..f.network.arc_count()).map(|a| f.arc_units(a).max(0)).collect()
}

/// Fixed-point length of each arc: `w_e` for original edges, zero otherwise.
fn arc_lengths(net: &FlowNetwork, w: &[f64]) -> Result<Vec<i128>> {
    let mut out = Vec::with_capacity(net.arc_count());
    for a in 0..net.arc_count() {
        let len = match net.pairs()[a / 2].origin {
            ArcOrigin::Edge(e) => {
                let x = *w.get(e).ok_or_else(|| Error::Parameter(format!("no length for edge {e}")))?;
                if !(x >= 0.0 && x.is_finite()) {
                    return Err(Error::Parameter(format!("edge length {x} must be finite and nonnegative")));
                }
                (x * LEN_SCALE).round() as i128
            }
            _ => 0,
        };
        out.push(len);
    }
    Ok(out)
}

fn check_acyclic(f: &FlowResult) -> Result<()> {
    if support_is_acyclic(f) {
        Ok(())
    } else {
        Err(Error::Precondition("flow support contains a directed cycle".into()))
    }
}

fn run(
    f: &FlowResult,
    lengths: &[i128],
    scale: Option<&mut dyn FnMut(usize, i64) -> i128>,
    naive: bool,
) -> Peel {
    let flows = arc_flows(f);
    if naive {
        naive::peel(&f.network, &flows, lengths, scale, None)
    } else {
        link_cut::peel(&f.network, &flows, lengths, scale)
    }
}

fn to_entries(f: &FlowResult, peel: &Peel) -> PseudoDecomposition {
    let entries = peel
        .entries
        .iter()
        .map(|&(units, s_i, t_i, len)| Entry {
            flow_units: units,
            flow: units as f64 * f.quantum,
            s_i,
            t_i,
            length: len as f64 / LEN_SCALE,
        })
        .collect();
    PseudoDecomposition { entries }
}

fn use_naive() -> bool {
    cfg!(feature = "naive-decomp")
}

/// Pseudo-decomposition under edge lengths `w`, using the build's default peeler.
pub fn pseudo_decompose(f: &FlowResult, w: &[f64]) -> Result<PseudoDecomposition> {
    pseudo_decompose_with(f, w, use_naive())
}

/// Pseudo-decomposition with an explicit choice of peeler.
pub fn pseudo_decompose_with(f: &FlowResult, w: &[f64], naive: bool) -> Result<PseudoDecomposition> {
    check_acyclic(f)?;
    let lengths = arc_lengths(&f.network, w)?;
    Ok(to_entries(f, &run(f, &lengths, None, naive)))
}

/// The flow whose `i`-th path carries `α_i f_i` instead of `f_i`.
pub fn scale_paths(f: &FlowResult, alpha: &[f64]) -> Result<ScaledFlow> {
    scale_paths_with(f, alpha, use_naive())
}

pub fn scale_paths_with(f: &FlowResult, alpha: &[f64], naive: bool) -> Result<ScaledFlow> {
    check_acyclic(f)?;
    if let Some(a) = alpha.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
        return Err(Error::Parameter(format!("scale factor {a} must be finite and nonnegative")));
    }
    let lengths = vec![0i128; f.network.arc_count()];
    let quantum = f.quantum;
    let mut seen = 0usize;
    let mut cb = |i: usize, units: i64| -> i128 {
        seen = seen.max(i + 1);
        match alpha.get(i) {
            Some(a) => (a * units as f64 * quantum * FLOW_SCALE).round() as i128,
            None => 0,
        }
    };
    let peel = run(f, &lengths, Some(&mut cb), naive);
    if peel.entries.len() != alpha.len() {
        return Err(Error::Contract(format!(
            "{} scale factors for a decomposition of {} paths",
            alpha.len(),
            peel.entries.len()
        )));
    }
    let pair_flows = (0..f.network.pairs().len())
        .map(|k| (peel.added[2 * k] - peel.added[2 * k + 1]) as f64 / FLOW_SCALE)
        .collect();
    Ok(ScaledFlow { network: f.network.clone(), pair_flows })
}

/// Entries together with their arc sequences, via the naive peeler.
pub fn explicit_paths(f: &FlowResult, w: &[f64]) -> Result<Vec<(Entry, Vec<usize>)>> {
    check_acyclic(f)?;
    let lengths = arc_lengths(&f.network, w)?;
    let mut paths = Vec::new();
    let peel = naive::peel(&f.network, &arc_flows(f), &lengths, None, Some(&mut paths));
    Ok(to_entries(f, &peel).entries.into_iter().zip(paths).collect())
}
