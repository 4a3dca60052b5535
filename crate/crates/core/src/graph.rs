//! Undirected capacitated graphs, cuts and demand graphs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One undirected edge `{u, v}` with capacity `w > 0`. Stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Immutable undirected graph with positive capacities and an adjacency index.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    /// `adj[x]` lists `(neighbor, edge id)`, sorted by neighbor.
    adj: Vec<Vec<(usize, usize)>>,
}

impl WeightedGraph {
    /// Builds a graph, rejecting self-loops, duplicate pairs, out-of-range
    /// endpoints and non-positive or non-finite capacities.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut seen = BTreeMap::new();
        let mut list = Vec::new();
        for (i, (a, b, w)) in edges.into_iter().enumerate() {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} ({a}, {b}) has an endpoint outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("edge {i} is a self-loop at {a}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} ({a}, {b}) has capacity {w}; capacities must be finite and positive"
                )));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if seen.insert((u, v), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
            list.push(Edge { u, v, w });
        }
        let mut adj = vec![Vec::new(); n];
        for (id, e) in list.iter().enumerate() {
            adj[e.u].push((e.v, id));
            adj[e.v].push((e.u, id));
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(WeightedGraph { n, edges: list, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    /// `(neighbor, edge id)` pairs of `x`, sorted by neighbor.
    pub fn neighbors(&self, x: usize) -> &[(usize, usize)] {
        &self.adj[x]
    }

    pub fn weighted_degree(&self, x: usize) -> f64 {
        self.adj[x].iter().map(|&(_, e)| self.edges[e].w).sum()
    }

    pub fn total_capacity(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Copy of the graph with every capacity multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::Parameter(format!("capacity scale {factor} must be positive")));
        }
        let mut g = self.clone();
        for e in &mut g.edges {
            e.w *= factor;
        }
        Ok(g)
    }

    /// Connected components as a label per vertex, labels in order of first vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            stack.push(start);
            while let Some(x) = stack.pop() {
                for &(y, _) in &self.adj[x] {
                    if label[y] == usize::MAX {
                        label[y] = next;
                        stack.push(y);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().iter().all(|&c| c == 0)
    }

    /// Parses the edge-list text format: `u v w` per line, 0-indexed, `#`
    /// comments. A `# vertices N` comment fixes the vertex count; otherwise it
    /// is one more than the largest endpoint.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut declared: Option<usize> = None;
        let mut edges = Vec::new();
        let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix('#') {
                let mut words = comment.split_whitespace();
                if words.next() == Some("vertices") {
                    let count = words.next().and_then(|s| s.parse::<usize>().ok()).ok_or(
                        Error::Parse {
                            line: line_no,
                            msg: "malformed `# vertices N` header".into(),
                        },
                    )?;
                    declared = Some(count);
                }
                continue;
            }
            let line = match line.find('#') {
                Some(p) => line[..p].trim(),
                None => line,
            };
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected `u v w`, found {} fields", fields.len()),
                });
            }
            let parse_id = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("invalid vertex id `{s}`"),
                })
            };
            let u = parse_id(fields[0])?;
            let v = parse_id(fields[1])?;
            let w: f64 = fields[2].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid capacity `{}`", fields[2]),
            })?;
            if u == v {
                return Err(Error::Parse { line: line_no, msg: format!("self-loop at vertex {u}") });
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("capacity {w} must be finite and positive"),
                });
            }
            let key = (u.min(v), u.max(v));
            if let Some(first) = seen.insert(key, line_no) {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("duplicate edge ({}, {}), first given on line {first}", key.0, key.1),
                });
            }
            edges.push((u, v, w));
        }
        let inferred = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
        let n = match declared {
            Some(d) if d < inferred => {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("header declares {d} vertices but ids reach {}", inferred - 1),
                })
            }
            Some(d) => d,
            None => inferred,
        };
        WeightedGraph::new(n, edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# vertices {}", self.n);
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", e.u, e.v, e.w);
        }
        out
    }
}

/// A proper cut with its crossing capacity and expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub side: Vec<bool>,
    pub capacity: f64,
    pub balance: usize,
    pub expansion: f64,
}

impl Cut {
    pub fn size(&self) -> usize {
        self.side.iter().filter(|&&b| b).count()
    }

    pub fn members(&self) -> Vec<usize> {
        self.side.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    /// Side normalized to contain vertex 0, so a cut and its complement compare equal.
    pub fn canonical_side(&self) -> Vec<bool> {
        if self.side.first() == Some(&true) {
            self.side.clone()
        } else {
            self.side.iter().map(|b| !b).collect()
        }
    }
}

/// Crossing capacity, balance and edge expansion of `side`.
pub fn cut_stats(g: &WeightedGraph, side: &[bool]) -> Result<Cut> {
    if side.len() != g.n() {
        return Err(Error::InvalidCut(format!(
            "membership vector has length {} for a graph on {} vertices",
            side.len(),
            g.n()
        )));
    }
    let size = side.iter().filter(|&&b| b).count();
    if size == 0 || size == g.n() {
        return Err(Error::InvalidCut(format!("side has {size} of {} vertices", g.n())));
    }
    let capacity: f64 = g.edges().iter().filter(|e| side[e.u] != side[e.v]).map(|e| e.w).sum();
    let balance = size.min(g.n() - size);
    Ok(Cut { side: side.to_vec(), capacity, balance, expansion: capacity / balance as f64 })
}

pub fn side_from_members(n: usize, members: &[usize]) -> Vec<bool> {
    let mut side = vec![false; n];
    for &x in members {
        side[x] = true;
    }
    side
}

/// Symmetric nonnegative demands, one entry per unordered pair `x < y`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DemandGraph {
    n: usize,
    pairs: BTreeMap<(usize, usize), f64>,
}

impl DemandGraph {
    pub fn new(n: usize) -> Self {
        DemandGraph { n, pairs: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds `amount` to `D_xy = D_yx`.
    pub fn add(&mut self, x: usize, y: usize, amount: f64) {
        assert!(x != y && x < self.n && y < self.n, "demand pair ({x}, {y}) out of range");
        assert!(amount >= 0.0, "negative demand {amount}");
        if amount == 0.0 {
            return;
        }
        *self.pairs.entry((x.min(y), x.max(y))).or_insert(0.0) += amount;
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pairs.get(&(x.min(y), x.max(y))).copied().unwrap_or(0.0)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.pairs.iter().map(|(&(x, y), &w)| (x, y, w))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.n];
        for (&(x, y), &w) in &self.pairs {
            deg[x] += w;
            deg[y] += w;
        }
        deg
    }

    pub fn max_degree(&self) -> f64 {
        self.degrees().into_iter().fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.pairs.values().sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for w in self.pairs.values_mut() {
            *w *= factor;
        }
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &DemandGraph, factor: f64) {
        for (x, y, w) in other.pairs() {
            self.add(x, y, w * factor);
        }
    }

    /// Demands viewed as a graph, for Laplacian computations.
    pub fn as_graph(&self) -> WeightedGraph {
        WeightedGraph::new(self.n, self.pairs().filter(|&(_, _, w)| w > 0.0))
            .expect("demand pairs are distinct, in range and positive")
    }
}
