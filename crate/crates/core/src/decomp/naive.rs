//! Reference peeler that walks each path explicitly, `O(nm)` overall.

use super::Peel;
use crate::maxflow::FlowNetwork;

pub(super) fn peel(
    net: &FlowNetwork,
    flows: &[i64],
    lengths: &[i128],
    mut scale: Option<&mut dyn FnMut(usize, i64) -> i128>,
    mut paths: Option<&mut Vec<Vec<usize>>>,
) -> Peel {
    let adj = net.out_arcs();
    let (s, t) = (net.source(), net.sink());
    let mut rem = flows.to_vec();
    let mut current = vec![0usize; net.nodes()];
    let mut out = Peel { entries: Vec::new(), added: vec![0; net.arc_count()] };
    let mut path: Vec<usize> = Vec::new();
    'peel: loop {
        path.clear();
        let mut v = s;
        while v != t {
            while current[v] < adj[v].len() && rem[adj[v][current[v]]] == 0 {
                current[v] += 1;
            }
            let Some(&a) = adj[v].get(current[v]) else {
                assert_eq!(v, s, "conserved acyclic flow cannot strand at node {v}");
                break 'peel;
            };
            path.push(a);
            v = net.arc_ends(a).1;
        }
        let bottleneck = path.iter().map(|&a| rem[a]).min().expect("path has an arc");
        let length: i128 = path.iter().map(|&a| lengths[a]).sum();
        for &a in &path {
            rem[a] -= bottleneck;
        }
        let second = net.arc_ends(path[0]).1;
        let penultimate = net.arc_ends(*path.last().expect("path has an arc")).0;
        if let Some(cb) = scale.as_deref_mut() {
            let amount = cb(out.entries.len(), bottleneck);
            for &a in &path {
                out.added[a] += amount;
            }
        }
        if let Some(p) = paths.as_deref_mut() {
            p.push(path.clone());
        }
        out.entries.push((bottleneck, second, penultimate, length));
    }
    out
}
