//! Peeler backed by link-cut trees, `O(m log n)` amortized.
//!
//! Every node with a current out-arc is linked to that arc's head, and stores
//! the arc's remaining flow and length. The tree path from the source to the
//! sink is then exactly the path the naive peeler would walk.

use super::Peel;
use crate::maxflow::FlowNetwork;

const NIL: usize = usize::MAX;
const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Node {
    ch: [u32; 2],
    par: u32,
    /// Whether the node currently holds an arc.
    has: bool,
    val: i64,
    min: i64,
    len: i128,
    sum_len: i128,
    lazy_val: i64,
}

const EMPTY: Node = Node {
    ch: [NONE; 2],
    par: NONE,
    has: false,
    val: 0,
    min: i64::MAX,
    len: 0,
    sum_len: 0,
    lazy_val: 0,
};

struct Forest {
    t: Vec<Node>,
    /// Accumulated scaled amount and its pending lazy add, kept apart from the
    /// hot node data since most peels do not scale.
    acc: Vec<(i128, i128)>,
    /// Whether `acc` is in use; plain decompositions never touch it.
    scaling: bool,
    stack: Vec<usize>,
}

impl Forest {
    fn new(n: usize, scaling: bool) -> Self {
        assert!(n < NONE as usize, "too many nodes for 32-bit indices");
        let acc = if scaling { vec![(0, 0); n] } else { Vec::new() };
        Forest { t: vec![EMPTY; n], acc, scaling, stack: Vec::new() }
    }

    fn idx(x: u32) -> usize {
        x as usize
    }

    fn is_root(&self, x: usize) -> bool {
        let p = self.t[x].par;
        p == NONE || {
            let [a, b] = self.t[Self::idx(p)].ch;
            a != x as u32 && b != x as u32
        }
    }

    fn apply(&mut self, x: usize, dv: i64, da: i128) {
        let n = &mut self.t[x];
        if n.has {
            n.val += dv;
        }
        if n.min != i64::MAX {
            n.min += dv;
        }
        n.lazy_val += dv;
        if da != 0 {
            let a = &mut self.acc[x];
            a.0 += da;
            a.1 += da;
        }
    }

    fn push(&mut self, x: usize) {
        let Node { lazy_val: dv, ch, .. } = self.t[x];
        let da = if self.scaling { std::mem::take(&mut self.acc[x].1) } else { 0 };
        if dv != 0 || da != 0 {
            for c in ch {
                if c != NONE {
                    self.apply(Self::idx(c), dv, da);
                }
            }
            self.t[x].lazy_val = 0;
        }
    }

    fn pull(&mut self, x: usize) {
        let n = self.t[x];
        let mut min = if n.has { n.val } else { i64::MAX };
        let mut sum = n.len;
        for c in n.ch {
            if c != NONE {
                let k = &self.t[Self::idx(c)];
                min = min.min(k.min);
                sum += k.sum_len;
            }
        }
        let n = &mut self.t[x];
        n.min = min;
        n.sum_len = sum;
    }

    fn rotate(&mut self, x: usize) {
        let p = Self::idx(self.t[x].par);
        let g = self.t[p].par;
        let dir = usize::from(self.t[p].ch[1] == x as u32);
        let b = self.t[x].ch[1 - dir];
        if !self.is_root(p) {
            let g = Self::idx(g);
            let pd = usize::from(self.t[g].ch[1] == p as u32);
            self.t[g].ch[pd] = x as u32;
        }
        self.t[x].par = g;
        self.t[x].ch[1 - dir] = p as u32;
        self.t[p].par = x as u32;
        self.t[p].ch[dir] = b;
        if b != NONE {
            self.t[Self::idx(b)].par = p as u32;
        }
        // `x` is pulled once when its splay finishes.
        self.pull(p);
    }

    fn splay(&mut self, x: usize) {
        self.stack.clear();
        self.stack.push(x);
        let mut y = x;
        while !self.is_root(y) {
            y = Self::idx(self.t[y].par);
            self.stack.push(y);
        }
        while let Some(z) = self.stack.pop() {
            self.push(z);
        }
        while !self.is_root(x) {
            let p = Self::idx(self.t[x].par);
            if !self.is_root(p) {
                let g = Self::idx(self.t[p].par);
                let zigzig = (self.t[g].ch[1] == p as u32) == (self.t[p].ch[1] == x as u32);
                self.rotate(if zigzig { p } else { x });
            }
            self.rotate(x);
        }
        self.pull(x);
    }

    /// Makes the root-to-`x` path preferred; `x` ends as its splay root with
    /// no deeper nodes attached.
    fn access(&mut self, x: usize) {
        let mut last = NONE;
        let mut y = x as u32;
        while y != NONE {
            let yi = Self::idx(y);
            self.splay(yi);
            self.t[yi].ch[1] = last;
            self.pull(yi);
            last = y;
            y = self.t[yi].par;
        }
        self.splay(x);
    }

    /// Leftmost node of the splay tree under `x`, pushing lazies on the way.
    fn leftmost(&mut self, x: usize) -> usize {
        let mut y = x;
        loop {
            self.push(y);
            match self.t[y].ch[0] {
                NONE => return y,
                l => y = Self::idx(l),
            }
        }
    }

    /// In-order successor of the leftmost node `y`.
    fn successor_of_leftmost(&mut self, y: usize) -> usize {
        match self.t[y].ch[1] {
            NONE => Self::idx(self.t[y].par),
            r => self.leftmost(Self::idx(r)),
        }
    }

    /// Attaches `v` below `w` through an arc with the given state. `v` must
    /// be a tree root splayed to the top of its path.
    fn link_root(&mut self, v: usize, w: usize, val: i64, len: i128) {
        let n = &mut self.t[v];
        debug_assert!(n.ch[0] == NONE && n.par == NONE);
        n.has = true;
        n.val = val;
        n.len = len;
        if self.scaling {
            self.acc[v].0 = 0;
        }
        self.pull(v);
        self.t[v].par = w as u32;
    }

    /// Detaches `v` from its parent and returns its arc's remaining flow and
    /// accumulated amount.
    fn cut(&mut self, v: usize) -> (i64, i128) {
        self.access(v);
        self.detach_above(v)
    }

    /// Cut for a node already splayed to the root of the tree's top path.
    fn detach_above(&mut self, v: usize) -> (i64, i128) {
        let l = self.t[v].ch[0];
        if l != NONE {
            self.t[Self::idx(l)].par = NONE;
            self.t[v].ch[0] = NONE;
        }
        let n = &mut self.t[v];
        let val = n.val;
        n.has = false;
        n.len = 0;
        let out = (val, if self.scaling { std::mem::take(&mut self.acc[v].0) } else { 0 });
        self.pull(v);
        out
    }

    /// The shallowest node on the splay tree of `x` whose arc flow is zero.
    /// Cutting shallowest first keeps the remaining zeros on the source path.
    fn find_zero(&mut self, x: usize) -> usize {
        let mut y = x;
        loop {
            self.push(y);
            let Node { ch: [l, r], has, val, .. } = self.t[y];
            if l != NONE && self.t[Self::idx(l)].min == 0 {
                y = Self::idx(l);
            } else if has && val == 0 {
                return y;
            } else {
                y = Self::idx(r);
            }
        }
    }
}

pub(super) fn peel(
    net: &FlowNetwork,
    flows: &[i64],
    lengths: &[i128],
    mut scale: Option<&mut dyn FnMut(usize, i64) -> i128>,
) -> Peel {
    let adj = net.out_arcs();
    let (s, t) = (net.source(), net.sink());
    let mut rem = flows.to_vec();
    let mut current = vec![0usize; net.nodes()];
    let mut arc = vec![NIL; net.nodes()];
    let mut out = Peel { entries: Vec::new(), added: vec![0; net.arc_count()] };
    let mut f = Forest::new(net.nodes(), scale.is_some());
    // Root of the tree holding `s` when it is already splayed to the top of
    // its path, which is the case right after a peel.
    let mut resume: Option<usize> = None;
    'peel: loop {
        // After the access the splay tree under `s` is exactly the path from
        // the tree root down to `s`, so any splay root summarizes it.
        let r = match resume.take() {
            Some(z) => z,
            None => {
                f.access(s);
                f.leftmost(s)
            }
        };
        if r != t {
            // Extend from the root. A head without an out-arc is itself a
            // root, so the walk continues there without another access.
            let mut v = r;
            loop {
                f.splay(v);
                while current[v] < adj[v].len() && rem[adj[v][current[v]]] == 0 {
                    current[v] += 1;
                }
                let Some(&a) = adj[v].get(current[v]) else {
                    assert_eq!(v, s, "conserved acyclic flow cannot strand at node {v}");
                    break 'peel;
                };
                arc[v] = a;
                let w = net.arc_ends(a).1;
                f.link_root(v, w, rem[a], lengths[a]);
                if w == t || arc[w] != NIL {
                    break;
                }
                v = w;
            }
            continue;
        }
        let penultimate = f.successor_of_leftmost(r);
        f.splay(penultimate);
        let mut top = penultimate;
        let bottleneck = f.t[top].min;
        let length = f.t[top].sum_len;
        let second = net.arc_ends(arc[s]).1;
        let amount = match scale.as_deref_mut() {
            Some(cb) => cb(out.entries.len(), bottleneck),
            None => 0,
        };
        f.apply(top, -bottleneck, amount);
        out.entries.push((bottleneck, second, penultimate, length));
        // Cutting the shallowest zero leaves the rest of the path below it, with
        // the cut node heading its splay tree.
        while f.t[top].min == 0 {
            let z = f.find_zero(top);
            f.splay(z);
            let (left, added) = f.detach_above(z);
            rem[arc[z]] = left;
            out.added[arc[z]] += added;
            arc[z] = NIL;
            top = z;
        }
        // The last node cut is the root of the tree holding `s`.
        resume = Some(top);
    }
    for v in 0..net.nodes() {
        if arc[v] != NIL {
            let (left, added) = f.cut(v);
            rem[arc[v]] = left;
            out.added[arc[v]] += added;
        }
    }
    out
}
