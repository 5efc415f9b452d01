//! Structural legality of the five-action machine.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::diagnostic::{sort_diagnostics, Code, Diagnostic};
use crate::model::{ActionKind, ArcId, ArcKind, MachineId, ModelArc, NodeId, TmModel};

use ActionKind::*;

/// Legal (src, dst) kind pairs for a flow inside one machine.
pub const STAGE_ORDER: [(ActionKind, ActionKind); 8] = [
    (Create, Release),
    (Create, Process),
    (Receive, Process),
    (Receive, Release),
    (Process, Release),
    (Process, Process),
    (Release, Transfer),
    (Transfer, Receive),
];

pub fn stage_pair_legal(src: ActionKind, dst: ActionKind) -> bool {
    STAGE_ORDER.contains(&(src, dst))
}

/// Mutually exclusive conditional arcs leaving one node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BranchGroup {
    pub src: NodeId,
    /// `(arc, condition)` sorted by condition.
    pub arcs: Vec<(ArcId, String)>,
}

impl BranchGroup {
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.arcs.iter().map(|(_, c)| c.as_str())
    }

    pub fn arc_for(&self, label: &str) -> Option<&ArcId> {
        self.arcs.iter().find(|(_, c)| c == label).map(|(a, _)| a)
    }
}

fn conditional_arcs_by_src(model: &TmModel) -> BTreeMap<&NodeId, Vec<&ModelArc>> {
    let mut by_src: BTreeMap<&NodeId, Vec<&ModelArc>> = BTreeMap::new();
    for arc in model.arcs().filter(|a| a.condition.is_some()) {
        by_src.entry(&arc.src).or_default().push(arc);
    }
    by_src
}

/// Branch groups (two or more conditional arcs from one node), ordered by
/// source id then condition.
pub fn branch_groups(model: &TmModel) -> Vec<BranchGroup> {
    conditional_arcs_by_src(model)
        .into_iter()
        .filter(|(_, arcs)| arcs.len() >= 2)
        .map(|(src, arcs)| {
            let mut arcs: Vec<(ArcId, String)> =
                arcs.into_iter().map(|a| (a.id.clone(), a.condition.clone().unwrap_or_default())).collect();
            arcs.sort_by(|a, b| (&a.1, &a.0).cmp(&(&b.1, &b.0)));
            BranchGroup { src: src.clone(), arcs }
        })
        .collect()
}

/// Returns every rule violation, sorted. An empty list means the model is valid.
pub fn validate_model(model: &TmModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let node = |id: &NodeId| model.node(id.as_str()).expect("resolved at construction");

    for arc in model.flow_arcs() {
        let (src, dst) = (node(&arc.src), node(&arc.dst));
        let ids = || vec![arc.id.to_string(), src.id.to_string(), dst.id.to_string()];
        if model.machines_related(&src.machine, &dst.machine) {
            if !stage_pair_legal(src.kind, dst.kind) {
                out.push(Diagnostic::error(
                    Code::R1,
                    format!("flow {} -> {} inside a machine is not a legal stage order", src.kind, dst.kind),
                    ids(),
                ));
            }
        } else if !(src.kind == Transfer && dst.kind == Transfer) {
            out.push(Diagnostic::error(
                Code::R2,
                format!(
                    "flow between machines `{}` and `{}` must go transfer -> transfer, found {} -> {}",
                    src.machine, dst.machine, src.kind, dst.kind
                ),
                ids(),
            ));
        }
        if src.thing != dst.thing {
            out.push(Diagnostic::error(
                Code::R6,
                format!("flow changes thing from `{}` to `{}`", src.thing, dst.thing),
                ids(),
            ));
        }
    }

    out.extend(release_bypasses(model));

    for arc in model.trigger_arcs() {
        let dst = node(&arc.dst);
        if !matches!(dst.kind, Create | Process) {
            out.push(Diagnostic::error(
                Code::R4,
                format!("trigger targets a {} action; only create or process may be triggered", dst.kind),
                vec![arc.id.to_string(), dst.id.to_string()],
            ));
        }
    }

    for (src, arcs) in conditional_arcs_by_src(model) {
        if arcs.len() == 1 {
            out.push(Diagnostic::warning(
                Code::R5,
                "single conditional arc is treated as unconditional",
                vec![src.to_string(), arcs[0].id.to_string()],
            ));
            continue;
        }
        let mut seen: BTreeMap<&str, Vec<&ArcId>> = BTreeMap::new();
        for arc in &arcs {
            seen.entry(arc.condition.as_deref().unwrap_or_default()).or_default().push(&arc.id);
        }
        for (label, dup) in seen.into_iter().filter(|(_, v)| v.len() > 1) {
            let mut ids = vec![src.to_string()];
            ids.extend(dup.iter().map(|a| a.to_string()));
            out.push(Diagnostic::error(
                Code::R5,
                format!("condition \"{label}\" appears more than once in one branch group"),
                ids,
            ));
        }
    }

    out.extend(port_warnings(model));
    sort_diagnostics(&mut out);
    out
}

/// R3: from every create/process/receive node, any flow path to a transfer of
/// the same machine must pass a release.
fn release_bypasses(model: &TmModel) -> Vec<Diagnostic> {
    let mut succ: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
    for arc in model.flow_arcs() {
        succ.entry(&arc.src).or_default().push(&arc.dst);
    }
    let mut out = Vec::new();
    for start in model.nodes().iter().filter(|n| matches!(n.kind, Create | Process | Receive)) {
        let mut seen: BTreeSet<&NodeId> = BTreeSet::new();
        let mut queue: VecDeque<&NodeId> = VecDeque::from([&start.id]);
        let mut hits: BTreeSet<&NodeId> = BTreeSet::new();
        while let Some(cur) = queue.pop_front() {
            for &next in succ.get(cur).into_iter().flatten() {
                let n = model.node(next.as_str()).expect("resolved");
                if n.kind == Release || !seen.insert(next) {
                    continue;
                }
                if n.kind == Transfer && model.machines_related(&start.machine, &n.machine) {
                    hits.insert(next);
                }
                queue.push_back(next);
            }
        }
        for t in hits {
            out.push(Diagnostic::error(
                Code::R3,
                format!("flow reaches output transfer `{t}` without passing a release"),
                vec![start.id.to_string(), t.to_string()],
            ));
        }
    }
    out
}

fn port_warnings(model: &TmModel) -> Vec<Diagnostic> {
    let mut outgoing: BTreeMap<&NodeId, usize> = BTreeMap::new();
    let mut incoming: BTreeMap<&NodeId, usize> = BTreeMap::new();
    for arc in model.flow_arcs() {
        let (src, dst) = (model.node(arc.src.as_str()).unwrap(), model.node(arc.dst.as_str()).unwrap());
        if model.machines_related(&src.machine, &dst.machine) {
            continue;
        }
        if src.kind == Transfer {
            *outgoing.entry(&src.id).or_default() += 1;
        }
        if dst.kind == Transfer {
            *incoming.entry(&dst.id).or_default() += 1;
        }
    }
    let mut out = Vec::new();
    for (dir, counts) in [("sends", outgoing), ("receives", incoming)] {
        for (id, n) in counts.into_iter().filter(|(_, n)| *n > 1) {
            out.push(Diagnostic::warning(
                Code::Port,
                format!("transfer {dir} on {n} cross-machine flows; a transfer is one port"),
                vec![id.to_string()],
            ));
        }
    }
    out
}

/// Machine pairs `(A, B)` such that a node of `A` reaches a node of `B`
/// along one or more arcs of either kind.
pub fn machine_reachability(model: &TmModel) -> BTreeSet<(MachineId, MachineId)> {
    let arcs: Vec<(&NodeId, &NodeId)> = model.arcs().map(|a| (&a.src, &a.dst)).collect();
    let reach = node_reachability(model.nodes().iter().map(|n| &n.id), &arcs);
    let machine_of = |id: &NodeId| model.node(id.as_str()).unwrap().machine.clone();
    reach.into_iter().map(|(a, b)| (machine_of(a), machine_of(b))).collect()
}

/// All `(a, b)` with a path of length >= 1 from `a` to `b`.
pub(crate) fn node_reachability<'a>(
    starts: impl Iterator<Item = &'a NodeId>,
    arcs: &[(&'a NodeId, &'a NodeId)],
) -> BTreeSet<(&'a NodeId, &'a NodeId)> {
    let mut succ: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
    for &(s, d) in arcs {
        succ.entry(s).or_default().push(d);
    }
    let mut out = BTreeSet::new();
    for start in starts {
        let mut seen: BTreeSet<&NodeId> = BTreeSet::new();
        let mut queue: VecDeque<&NodeId> = succ.get(start).into_iter().flatten().copied().collect();
        while let Some(cur) = queue.pop_front() {
            if !seen.insert(cur) {
                continue;
            }
            out.insert((start, cur));
            queue.extend(succ.get(cur).into_iter().flatten().copied());
        }
    }
    out
}

/// Convenience used by downstream passes: the arc kind of every arc id.
pub fn arc_kinds(model: &TmModel) -> BTreeMap<&ArcId, ArcKind> {
    model.arcs().map(|a| (&a.id, a.kind)).collect()
}
