//! Exhaustive sparsest cut for small graphs, used as a test and reporting oracle.

use crate::error::{Error, Result};
use crate::graph::{cut_stats, Cut, WeightedGraph};

pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Exact minimizer of edge expansion over all proper cuts.
///
/// Sides are enumerated as bitmasks that exclude the last vertex, so each cut
/// is visited once. Ties go to the lexicographically smallest membership
/// vector, read from vertex 0 upward.
pub fn brute_force_sparsest_cut(g: &WeightedGraph) -> Result<Cut> {
    let n = g.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeLimit { n, limit: BRUTE_FORCE_LIMIT });
    }
    if n < 2 {
        return Err(Error::InvalidCut("a graph needs two vertices to have a proper cut".into()));
    }
    let edges: Vec<(u32, u32, f64)> = g.edges().iter().map(|e| (1u32 << e.u, 1u32 << e.v, e.w)).collect();
    let mut best: Option<(f64, u32)> = None;
    for mask in 1u32..(1u32 << (n - 1)) {
        let capacity: f64 = edges.iter().filter(|(a, b, _)| (mask & a == 0) != (mask & b == 0)).map(|e| e.2).sum();
        let size = mask.count_ones() as usize;
        let h = capacity / size.min(n - size) as f64;
        let better = match best {
            None => true,
            Some((bh, bm)) => h < bh || (h == bh && lex_less(mask, bm)),
        };
        if better {
            best = Some((h, mask));
        }
    }
    let (_, mask) = best.expect("n >= 2 gives at least one cut");
    let side: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
    cut_stats(g, &side)
}

/// Membership vectors compared from vertex 0 upward with `false < true`.
fn lex_less(a: u32, b: u32) -> bool {
    let diff = a ^ b;
    diff != 0 && a & (diff & diff.wrapping_neg()) == 0
}
