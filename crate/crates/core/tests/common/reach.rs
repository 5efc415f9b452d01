//! Reachability oracle for simplified views, by transitive closure over the
//! full model.

use std::collections::{BTreeMap, BTreeSet};

use tmlang::{SimplifiedView, TmModel};

/// Warshall transitive closure over node indices.
pub fn closure(n: usize, arcs: impl Iterator<Item = (usize, usize)>) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for (s, d) in arcs {
        r[s][d] = true;
    }
    for k in 0..n {
        let via = r[k].clone();
        for row in r.iter_mut().filter(|row| row[k]) {
            for (cell, &step) in row.iter_mut().zip(&via) {
                *cell |= step;
            }
        }
    }
    r
}

/// Surviving node pairs `(u, v)` with a path of length >= 1 in the full model.
pub fn full_reach(m: &TmModel, survivors: &BTreeSet<String>) -> BTreeSet<(String, String)> {
    let idx: BTreeMap<&str, usize> = m.nodes().iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
    let r = closure(m.nodes().len(), m.arcs().map(|a| (idx[a.src.as_str()], idx[a.dst.as_str()])));
    let mut out = BTreeSet::new();
    for u in survivors {
        for v in survivors {
            if r[idx[u.as_str()]][idx[v.as_str()]] {
                out.insert((u.clone(), v.clone()));
            }
        }
    }
    out
}

pub fn view_reach(v: &SimplifiedView) -> BTreeSet<(String, String)> {
    let ids: Vec<&str> = v.nodes.iter().map(|n| n.id.as_str()).collect();
    let idx: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let r = closure(ids.len(), v.arcs.iter().map(|a| (idx[a.src.as_str()], idx[a.dst.as_str()])));
    let mut out = BTreeSet::new();
    for (i, u) in ids.iter().enumerate() {
        for (j, w) in ids.iter().enumerate() {
            if r[i][j] {
                out.insert((u.to_string(), w.to_string()));
            }
        }
    }
    out
}

pub fn survivors(v: &SimplifiedView) -> BTreeSet<String> {
    v.nodes.iter().map(|n| n.id.to_string()).collect()
}

pub fn machine_pairs(m: &TmModel, pairs: &BTreeSet<(String, String)>) -> BTreeSet<(String, String)> {
    let machine = |id: &str| m.node(id).unwrap().machine.to_string();
    pairs.iter().map(|(u, v)| (machine(u), machine(v))).collect()
}
