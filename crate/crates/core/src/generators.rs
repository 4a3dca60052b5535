//! Unit-capacity graph families and random acyclic flows for tests and the CLI.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::maxflow::{ArcOrigin, FlowNetwork, FlowResult};

fn unit(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<WeightedGraph> {
    WeightedGraph::new(n, pairs.into_iter().map(|(u, v)| (u, v, 1.0)))
}

pub fn path(n: usize) -> Result<WeightedGraph> {
    unit(n, (1..n).map(|x| (x - 1, x)))
}

pub fn cycle(n: usize) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(Error::Parameter(format!("a cycle needs 3 vertices, got {n}")));
    }
    unit(n, (0..n).map(|x| (x, (x + 1) % n)))
}

pub fn complete(n: usize) -> Result<WeightedGraph> {
    unit(n, (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))))
}

/// Two copies of `K_k` joined by the bridge `(k - 1, k)`.
pub fn dumbbell(k: usize) -> Result<WeightedGraph> {
    if k < 2 {
        return Err(Error::Parameter(format!("dumbbell lobes need 2 vertices, got {k}")));
    }
    let lobe = |base: usize| (0..k).flat_map(move |x| (x + 1..k).map(move |y| (base + x, base + y)));
    unit(2 * k, lobe(0).chain(lobe(k)).chain([(k - 1, k)]))
}

/// The `d`-dimensional hypercube on `2^d` vertices.
pub fn hypercube(d: usize) -> Result<WeightedGraph> {
    if d == 0 || d > 20 {
        return Err(Error::Parameter(format!("hypercube dimension {d} outside 1..=20")));
    }
    let n = 1usize << d;
    unit(n, (0..n).flat_map(|x| (0..d).map(move |i| (x, x ^ (1 << i))).filter(|&(x, y)| x < y)))
}

/// Erdős–Rényi `G(n, p)`.
pub fn gnp(n: usize, p: f64, seed: u64) -> Result<WeightedGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            if rng.random_bool(p) {
                pairs.push((x, y));
            }
        }
    }
    unit(n, pairs)
}

/// Two halves with edge probability `p_in` inside and `p_out` across.
pub fn planted(n: usize, p_in: f64, p_out: f64, seed: u64) -> Result<WeightedGraph> {
    for p in [p_in, p_out] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Parameter(format!("edge probability {p} outside [0, 1]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            let p = if (x < n / 2) == (y < n / 2) { p_in } else { p_out };
            if rng.random_bool(p) {
                pairs.push((x, y));
            }
        }
    }
    unit(n, pairs)
}

/// Random `d`-regular simple graph as a union of `d` random perfect matchings,
/// each redrawn until it repeats no earlier pair.
pub fn expander(n: usize, d: usize, seed: u64) -> Result<WeightedGraph> {
    if n % 2 == 1 || d == 0 || d >= n {
        return Err(Error::Parameter(format!("need even n and 0 < d < n, got n = {n}, d = {d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::new();
    let mut pairs = Vec::new();
    for k in 0..d {
        let matching = (0..1000).find_map(|_| {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let keys: Vec<(usize, usize)> = perm.chunks(2).map(|c| (c[0].min(c[1]), c[0].max(c[1]))).collect();
            keys.iter().all(|key| !seen.contains(key)).then_some(keys)
        });
        let Some(keys) = matching else {
            return Err(Error::Construction(format!(
                "matching {k} of a {d}-regular graph on {n} vertices kept repeating pairs"
            )));
        };
        seen.extend(keys.iter().copied());
        pairs.extend(keys);
    }
    unit(n, pairs)
}

/// A random acyclic flow on a layered network of `n` nodes and `m` arc pairs.
///
/// Node `0` is the source and `n - 1` the sink; every pair joins `x < y` with
/// `y - x ≤ 8`, oriented at random so both arc directions occur. The flow is a
/// sum of random forward walks from source to sink that mostly step by one,
/// which makes flow paths long.
pub fn random_acyclic_flow(n: usize, m: usize, seed: u64) -> Result<FlowResult> {
    if n < 3 || m < n - 1 {
        return Err(Error::Parameter(format!("need n >= 3 and m >= n - 1, got n = {n}, m = {m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(usize, usize)> = (1..n).map(|y| (y - 1, y)).collect();
    while pairs.len() < m {
        let x = rng.random_range(0..n - 2);
        let y = (x + rng.random_range(2..=8)).min(n - 1);
        pairs.push((x, y));
    }
    pairs.shuffle(&mut rng);
    let mut forward: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, &(x, y)) in pairs.iter().enumerate() {
        forward[x].push((k, y));
    }
    let mut units = vec![0i64; m];
    for _ in 0..m / 4 {
        let amount = rng.random_range(1..=100);
        let mut x = 0;
        while x != n - 1 {
            let step = if rng.random_bool(0.9) {
                forward[x].iter().find(|&&(_, y)| y == x + 1).copied()
            } else {
                None
            };
            let (k, y) = step.unwrap_or_else(|| forward[x][rng.random_range(0..forward[x].len())]);
            units[k] += amount;
            x = y;
        }
    }
    let mut net = FlowNetwork::new(n, 0, n - 1)?;
    let mut signed = Vec::with_capacity(m);
    for (k, &(x, y)) in pairs.iter().enumerate() {
        let cap = units[k] as f64 + rng.random_range(0..3) as f64;
        if rng.random_bool(0.5) {
            net.add_pair(x, y, cap, 0.0, ArcOrigin::Edge(k))?;
            signed.push(units[k]);
        } else {
            net.add_pair(y, x, 0.0, cap, ArcOrigin::Edge(k))?;
            signed.push(-units[k]);
        }
    }
    FlowResult::from_units(net, signed, 1.0)
}
