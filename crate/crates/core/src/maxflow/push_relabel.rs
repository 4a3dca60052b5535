//! Highest-label push-relabel with gap and global relabeling, on integers.

use std::collections::VecDeque;

use super::FlowNetwork;

struct State<'a> {
    net: &'a FlowNetwork,
    caps: &'a [(i64, i64)],
    units: Vec<i64>,
    adj: Vec<Vec<usize>>,
    head: Vec<usize>,
    height: Vec<usize>,
    excess: Vec<i64>,
    current: Vec<usize>,
    buckets: Vec<Vec<usize>>,
    count: Vec<usize>,
    top: usize,
}

impl State<'_> {
    fn residual(&self, a: usize) -> i64 {
        let k = a / 2;
        if a % 2 == 0 {
            self.caps[k].0 - self.units[k]
        } else {
            self.caps[k].1 + self.units[k]
        }
    }

    fn push_units(&mut self, a: usize, delta: i64) {
        if a % 2 == 0 {
            self.units[a / 2] += delta;
        } else {
            self.units[a / 2] -= delta;
        }
    }

    fn is_terminal(&self, v: usize) -> bool {
        v == self.net.source() || v == self.net.sink()
    }

    fn activate(&mut self, v: usize) {
        if !self.is_terminal(v) {
            let h = self.height[v];
            self.buckets[h].push(v);
            self.top = self.top.max(h);
        }
    }

    fn set_height(&mut self, v: usize, h: usize) {
        let n = self.net.nodes();
        if self.height[v] < n {
            self.count[self.height[v]] -= 1;
        }
        self.height[v] = h;
        if h < n {
            self.count[h] += 1;
        }
    }

    /// Exact distance labels: to the sink where reachable, otherwise `n` plus
    /// the distance to the source, otherwise `2n - 1`.
    fn global_relabel(&mut self) {
        let n = self.net.nodes();
        let (s, t) = (self.net.source(), self.net.sink());
        let mut label = vec![usize::MAX; n];
        for (root, base) in [(t, 0), (s, n)] {
            label[root] = base;
            let mut queue = VecDeque::from([root]);
            while let Some(y) = queue.pop_front() {
                for &a in &self.adj[y] {
                    // Arc a leaves y; its reverse a ^ 1 enters y from x.
                    let x = self.head[a];
                    if label[x] == usize::MAX && self.residual(a ^ 1) > 0 {
                        label[x] = label[y] + 1;
                        queue.push_back(x);
                    }
                }
            }
        }
        self.count.iter_mut().for_each(|c| *c = 0);
        self.buckets.iter_mut().for_each(Vec::clear);
        self.top = 0;
        for v in 0..n {
            let h = if v == s { n } else if label[v] == usize::MAX { 2 * n - 1 } else { label[v].min(2 * n - 1) };
            self.height[v] = h;
            if h < n {
                self.count[h] += 1;
            }
            self.current[v] = 0;
        }
        for v in 0..n {
            if self.excess[v] > 0 {
                self.activate(v);
            }
        }
    }

    fn relabel(&mut self, v: usize) {
        let n = self.net.nodes();
        let old = self.height[v];
        let mut best = 2 * n - 1;
        for &a in &self.adj[v] {
            if self.residual(a) > 0 {
                best = best.min(self.height[self.head[a]] + 1);
            }
        }
        self.set_height(v, best);
        self.current[v] = 0;
        if old < n && self.count[old] == 0 {
            // Gap: nodes above `old` can no longer reach the sink.
            for w in 0..n {
                let h = self.height[w];
                if h > old && h < n && !self.is_terminal(w) {
                    self.set_height(w, n + 1);
                    if self.excess[w] > 0 && w != v {
                        self.activate(w);
                    }
                }
            }
        }
    }

    fn discharge(&mut self, v: usize) -> usize {
        let mut relabels = 0;
        while self.excess[v] > 0 {
            if self.current[v] == self.adj[v].len() {
                self.relabel(v);
                relabels += 1;
                continue;
            }
            let a = self.adj[v][self.current[v]];
            let w = self.head[a];
            let r = self.residual(a);
            if r > 0 && self.height[v] == self.height[w] + 1 {
                let delta = r.min(self.excess[v]);
                self.push_units(a, delta);
                self.excess[v] -= delta;
                if self.excess[w] == 0 {
                    self.excess[w] += delta;
                    self.activate(w);
                } else {
                    self.excess[w] += delta;
                }
            } else {
                self.current[v] += 1;
            }
        }
        relabels
    }
}

/// Maximum flow in integer units; returns the net flow per arc pair.
pub(super) fn solve(net: &FlowNetwork, caps: &[(i64, i64)]) -> Vec<i64> {
    let n = net.nodes();
    let adj = net.out_arcs();
    let head: Vec<usize> = (0..net.arc_count()).map(|a| net.arc_ends(a).1).collect();
    let mut st = State {
        net,
        caps,
        units: vec![0; net.pairs().len()],
        adj,
        head,
        height: vec![0; n],
        excess: vec![0; n],
        current: vec![0; n],
        buckets: vec![Vec::new(); 2 * n],
        count: vec![0; n],
        top: 0,
    };
    let s = net.source();
    for i in 0..st.adj[s].len() {
        let a = st.adj[s][i];
        let r = st.residual(a);
        if r > 0 {
            st.push_units(a, r);
            st.excess[st.head[a]] += r;
            st.excess[s] -= r;
        }
    }
    st.global_relabel();
    let mut work = 0usize;
    loop {
        while st.top > 0 && st.buckets[st.top].is_empty() {
            st.top -= 1;
        }
        let Some(v) = st.buckets[st.top].pop() else { break };
        if st.height[v] != st.top || st.excess[v] <= 0 {
            continue;
        }
        work += st.discharge(v);
        if work > n {
            work = 0;
            st.global_relabel();
        }
    }
    st.units
}
