//! DIMACS max-flow text format (`p max`, `n s|t`, `a u v cap`, 1-indexed).

use std::fmt::Write as _;

use super::{ArcOrigin, FlowNetwork};
use crate::error::{Error, Result};

/// Writes every positive-capacity arc as a directed `a` line.
pub fn to_dimacs(net: &FlowNetwork) -> String {
    let arcs: Vec<usize> = (0..net.arc_count()).filter(|&a| net.arc_capacity(a) > 0.0).collect();
    let mut out = String::new();
    writeln!(out, "p max {} {}", net.nodes(), arcs.len()).unwrap();
    writeln!(out, "n {} s", net.source() + 1).unwrap();
    writeln!(out, "n {} t", net.sink() + 1).unwrap();
    for a in arcs {
        let (u, v) = net.arc_ends(a);
        writeln!(out, "a {} {} {}", u + 1, v + 1, net.arc_capacity(a)).unwrap();
    }
    out
}

pub fn from_dimacs(text: &str) -> Result<FlowNetwork> {
    let mut header: Option<(usize, usize)> = None;
    let (mut source, mut sink) = (None, None);
    let mut arcs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: String| Error::Parse { line, msg };
        let fields: Vec<&str> = raw.split_whitespace().collect();
        match fields.first().copied() {
            None | Some("c") => {}
            Some("p") => {
                if fields.len() != 4 || fields[1] != "max" {
                    return Err(err(format!("expected `p max <nodes> <arcs>`, found `{raw}`")));
                }
                let nodes = fields[2].parse().map_err(|_| err(format!("bad node count `{}`", fields[2])))?;
                let m = fields[3].parse().map_err(|_| err(format!("bad arc count `{}`", fields[3])))?;
                header = Some((nodes, m));
            }
            Some("n") => {
                let nodes = header.ok_or_else(|| err("node line before problem line".into()))?.0;
                if fields.len() != 3 {
                    return Err(err(format!("expected `n <id> s|t`, found `{raw}`")));
                }
                let id = parse_node(fields[1], nodes).map_err(err)?;
                match fields[2] {
                    "s" => source = Some(id),
                    "t" => sink = Some(id),
                    other => return Err(err(format!("unknown terminal kind `{other}`"))),
                }
            }
            Some("a") => {
                let nodes = header.ok_or_else(|| err("arc line before problem line".into()))?.0;
                if fields.len() != 4 {
                    return Err(err(format!("expected `a <u> <v> <cap>`, found `{raw}`")));
                }
                let u = parse_node(fields[1], nodes).map_err(err)?;
                let v = parse_node(fields[2], nodes).map_err(err)?;
                let cap: f64 = fields[3].parse().map_err(|_| err(format!("bad capacity `{}`", fields[3])))?;
                if !(cap >= 0.0 && cap.is_finite()) || u == v {
                    return Err(err(format!("invalid arc `{raw}`")));
                }
                arcs.push((u, v, cap));
            }
            Some(other) => return Err(err(format!("unknown line kind `{other}`"))),
        }
    }
    let (nodes, m) = header.ok_or(Error::Parse { line: 0, msg: "missing problem line".into() })?;
    if m != arcs.len() {
        return Err(Error::Parse { line: 0, msg: format!("problem line declares {m} arcs, found {}", arcs.len()) });
    }
    let missing = |what: &str| Error::Parse { line: 0, msg: format!("missing {what} line") };
    let mut net = FlowNetwork::new(nodes, source.ok_or_else(|| missing("source"))?, sink.ok_or_else(|| missing("sink"))?)?;
    for (u, v, cap) in arcs {
        net.add_pair(u, v, cap, 0.0, ArcOrigin::Other)?;
    }
    Ok(net)
}

fn parse_node(field: &str, nodes: usize) -> std::result::Result<usize, String> {
    match field.parse::<usize>() {
        Ok(id) if id >= 1 && id <= nodes => Ok(id - 1),
        _ => Err(format!("node `{field}` outside 1..={nodes}")),
    }
}
