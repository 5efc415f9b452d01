//! Rule-table oracle for the structural rules; shares no code with the
//! validator.

use std::collections::BTreeMap;

use tmlang::{validate_model, ActionKind, ArcKind, Code, Severity, TmModel};

use ActionKind::*;

/// Verdicts keyed by rule; each entry is the sorted list of offenders.
pub type Verdicts = BTreeMap<&'static str, Vec<Vec<String>>>;

/// Machine ids are paths, so nesting is a prefix test.
pub fn related(a: &str, b: &str) -> bool {
    a == b || a.starts_with(&format!("{b}.")) || b.starts_with(&format!("{a}."))
}

const LEGAL: [(ActionKind, ActionKind); 8] = [
    (Create, Release),
    (Create, Process),
    (Receive, Process),
    (Receive, Release),
    (Process, Release),
    (Process, Process),
    (Release, Transfer),
    (Transfer, Receive),
];

pub fn oracle(m: &TmModel) -> Verdicts {
    let mut v: Verdicts = BTreeMap::new();
    let mut put = |rule: &'static str, ids: Vec<String>| v.entry(rule).or_default().push(ids);
    let nodes = m.nodes();
    let idx = |id: &str| nodes.iter().position(|n| n.id == id).unwrap();

    for a in m.arcs() {
        let (s, d) = (&nodes[idx(a.src.as_str())], &nodes[idx(a.dst.as_str())]);
        match a.kind {
            ArcKind::Flow => {
                let same = related(s.machine.as_str(), d.machine.as_str());
                if same && !LEGAL.contains(&(s.kind, d.kind)) {
                    put("R1", vec![a.id.to_string()]);
                }
                if !same && !(s.kind == Transfer && d.kind == Transfer) {
                    put("R2", vec![a.id.to_string()]);
                }
                if s.thing != d.thing {
                    put("R6", vec![a.id.to_string()]);
                }
            }
            ArcKind::Trigger => {
                if !matches!(d.kind, Create | Process) {
                    put("R4", vec![a.id.to_string()]);
                }
            }
        }
    }

    // R3 by transitive closure over flows with release nodes removed.
    let n = nodes.len();
    let mut reach = vec![vec![false; n]; n];
    for a in m.flow_arcs() {
        let (s, d) = (idx(a.src.as_str()), idx(a.dst.as_str()));
        if nodes[s].kind != Release && nodes[d].kind != Release {
            reach[s][d] = true;
        }
    }
    for k in 0..n {
        let via = reach[k].clone();
        for row in reach.iter_mut().filter(|row| row[k]) {
            for (cell, &step) in row.iter_mut().zip(&via) {
                *cell |= step;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if reach[i][j]
                && matches!(nodes[i].kind, Create | Process | Receive)
                && nodes[j].kind == Transfer
                && related(nodes[i].machine.as_str(), nodes[j].machine.as_str())
            {
                put("R3", vec![nodes[i].id.to_string(), nodes[j].id.to_string()]);
            }
        }
    }

    // R5 over conditional arcs per source.
    for node in nodes {
        let conds: Vec<&str> = m.arcs().filter(|a| a.src == node.id).filter_map(|a| a.condition.as_deref()).collect();
        if conds.len() == 1 {
            put("R5w", vec![node.id.to_string()]);
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for c in conds {
            *counts.entry(c).or_default() += 1;
        }
        for (label, k) in counts {
            if k > 1 {
                put("R5", vec![node.id.to_string(), label.to_owned()]);
            }
        }
    }
    for list in v.values_mut() {
        list.sort();
    }
    v
}

/// The validator's verdicts in the oracle's shape.
pub fn verdicts(m: &TmModel) -> Verdicts {
    let mut v: Verdicts = BTreeMap::new();
    for d in validate_model(m) {
        let key = match (d.code, d.severity) {
            (Code::R1, _) => "R1",
            (Code::R2, _) => "R2",
            (Code::R3, _) => "R3",
            (Code::R4, _) => "R4",
            (Code::R5, Severity::Error) => "R5",
            (Code::R5, Severity::Warning) => "R5w",
            (Code::R6, _) => "R6",
            _ => continue,
        };
        let ids = match key {
            "R3" => d.ids[..2].to_vec(),
            "R5" => {
                let label = m.arc(&d.ids[1]).and_then(|a| a.condition.clone()).unwrap();
                vec![d.ids[0].clone(), label]
            }
            _ => vec![d.ids[0].clone()],
        };
        v.entry(key).or_default().push(ids);
    }
    for list in v.values_mut() {
        list.sort();
    }
    v
}
