//! Events (regions of the static model) and the behavior graph over them.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::diagnostic::{sort_diagnostics, Code, Diagnostic};
use crate::model::{ArcId, ModelError, NodeId, TmModel};

/// A named region: a subset of nodes plus a subset of arcs among them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventDef {
    pub name: String,
    pub region_nodes: BTreeSet<NodeId>,
    pub region_arcs: BTreeSet<ArcId>,
    /// Optional presentation order; does not affect semantics.
    pub order: Option<i64>,
}

impl EventDef {
    pub fn new(
        name: impl Into<String>,
        nodes: impl IntoIterator<Item = NodeId>,
        arcs: impl IntoIterator<Item = ArcId>,
    ) -> Self {
        Self {
            name: name.into(),
            region_nodes: nodes.into_iter().collect(),
            region_arcs: arcs.into_iter().collect(),
            order: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BehaviorEdge {
    pub from: String,
    pub to: String,
    pub condition: Option<String>,
}

impl BehaviorEdge {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Self { from: from.into(), to: to.into(), condition: None }
    }

    pub fn with_condition(mut self, condition: impl Into<String>) -> Self {
        self.condition = Some(condition.into());
        self
    }
}

/// Directed graph over event names. Edges are unique per `(from, to)` and
/// ordered by the position of their endpoints in `nodes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BehaviorGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<BehaviorEdge>,
    /// Events without incoming edges.
    pub entry: BTreeSet<String>,
}

impl BehaviorGraph {
    pub fn new(nodes: Vec<String>, edges: impl IntoIterator<Item = BehaviorEdge>) -> Result<Self, ModelError> {
        let pos =
            |name: &str| nodes.iter().position(|n| n == name).ok_or_else(|| ModelError::UnknownEvent(name.to_owned()));
        let mut by_pair: BTreeMap<(usize, usize), BehaviorEdge> = BTreeMap::new();
        for edge in edges {
            if edge.from == edge.to {
                return Err(ModelError::BehaviorSelfLoop(edge.from));
            }
            by_pair.entry((pos(&edge.from)?, pos(&edge.to)?)).or_insert(edge);
        }
        let edges: Vec<BehaviorEdge> = by_pair.into_values().collect();
        let targets: BTreeSet<&str> = edges.iter().map(|e| e.to.as_str()).collect();
        let entry = nodes.iter().filter(|n| !targets.contains(n.as_str())).cloned().collect();
        Ok(Self { nodes, edges, entry })
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edges.iter().any(|e| e.from == from && e.to == to)
    }

    pub fn edge_pairs(&self) -> BTreeSet<(&str, &str)> {
        self.edges.iter().map(|e| (e.from.as_str(), e.to.as_str())).collect()
    }

    pub fn successors<'a>(&'a self, from: &'a str) -> impl Iterator<Item = &'a BehaviorEdge> + 'a {
        self.edges.iter().filter(move |e| e.from == from)
    }
}

/// Event names ordered by their order hint, then declaration order.
pub fn events_in_order(model: &TmModel) -> Vec<&EventDef> {
    let mut events: Vec<(usize, &EventDef)> = model.events().iter().enumerate().collect();
    events.sort_by_key(|(i, e)| (e.order.unwrap_or(i64::MAX), *i));
    events.into_iter().map(|(_, e)| e).collect()
}

/// Well-formedness of every event region, plus coverage and duplicate
/// region warnings.
pub fn check_events(model: &TmModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen_names: BTreeSet<&str> = BTreeSet::new();

    for event in model.events() {
        let name = event.name.clone();
        if !seen_names.insert(&event.name) {
            out.push(Diagnostic::error(
                Code::EventDuplicate,
                format!("event `{name}` declared twice"),
                vec![name.clone()],
            ));
        }
        if event.region_nodes.is_empty() {
            out.push(Diagnostic::error(Code::EventEmpty, format!("event `{name}` has no nodes"), vec![name.clone()]));
            continue;
        }
        for id in &event.region_nodes {
            if model.node(id.as_str()).is_none() {
                out.push(Diagnostic::error(
                    Code::EventUnknownId,
                    format!("event `{name}` names unknown node `{id}`"),
                    vec![name.clone(), id.to_string()],
                ));
            }
        }
        for id in &event.region_arcs {
            match model.arc(id.as_str()) {
                None => out.push(Diagnostic::error(
                    Code::EventUnknownId,
                    format!("event `{name}` names unknown arc `{id}`"),
                    vec![name.clone(), id.to_string()],
                )),
                Some(arc) if !event.region_nodes.contains(&arc.src) || !event.region_nodes.contains(&arc.dst) => out
                    .push(Diagnostic::error(
                        Code::EventArcOutside,
                        format!("arc `{id}` of event `{name}` leaves the event's nodes"),
                        vec![name.clone(), id.to_string()],
                    )),
                Some(_) => {}
            }
        }
        if !region_connected(model, event) {
            out.push(Diagnostic::error(
                Code::EventDisconnected,
                format!("event `{name}` is not connected through its own arcs"),
                vec![name.clone()],
            ));
        }
    }

    if !model.events().is_empty() {
        let covered: BTreeSet<&NodeId> = model.events().iter().flat_map(|e| &e.region_nodes).collect();
        for node in model.nodes().iter().filter(|n| !covered.contains(&n.id)) {
            out.push(Diagnostic::warning(
                Code::EventCoverage,
                format!("node `{}` belongs to no event", node.id),
                vec![node.id.to_string()],
            ));
        }
    }

    let events = model.events();
    for (i, a) in events.iter().enumerate() {
        for b in &events[i + 1..] {
            if a.name != b.name && a.region_nodes == b.region_nodes && a.region_arcs == b.region_arcs {
                out.push(Diagnostic::warning(
                    Code::EventSameRegion,
                    format!("events `{}` and `{}` cover the same region", a.name, b.name),
                    vec![a.name.clone(), b.name.clone()],
                ));
            }
        }
    }

    sort_diagnostics(&mut out);
    out
}

/// Weak connectivity of the region over its own known arcs.
fn region_connected(model: &TmModel, event: &EventDef) -> bool {
    let nodes: Vec<&NodeId> = event.region_nodes.iter().collect();
    let index: BTreeMap<&NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for arc in event.region_arcs.iter().filter_map(|id| model.arc(id.as_str())) {
        if let (Some(&s), Some(&d)) = (index.get(&arc.src), index.get(&arc.dst)) {
            let (rs, rd) = (find(&mut parent, s), find(&mut parent, d));
            parent[rs] = rd;
        }
    }
    let root = find(&mut parent, 0);
    (0..nodes.len()).all(|i| find(&mut parent, i) == root)
}

/// Derives the behavior graph from event regions.
///
/// `Ei -> Ej` holds when an arc outside `Ei`'s arcs leads from a node of `Ei`
/// to a node of `Ej`, or when `Ei` and `Ej` share a node that `Ei` ends in
/// and `Ej` starts from. The edge carries a condition only when every
/// witnessing arc is conditional (the smallest label is kept).
pub fn derive_behavior(model: &TmModel) -> BehaviorGraph {
    let events = model.events();
    let mut member_of: BTreeMap<&NodeId, Vec<usize>> = BTreeMap::new();
    for (i, e) in events.iter().enumerate() {
        for n in &e.region_nodes {
            member_of.entry(n).or_default().push(i);
        }
    }

    // (from, to) -> witness conditions; `None` marks an unconditional witness.
    let mut witnesses: BTreeMap<(usize, usize), BTreeSet<Option<&str>>> = BTreeMap::new();
    for arc in model.arcs() {
        let (Some(froms), Some(tos)) = (member_of.get(&arc.src), member_of.get(&arc.dst)) else {
            continue;
        };
        for &i in froms {
            if events[i].region_arcs.contains(&arc.id) {
                continue;
            }
            for &j in tos.iter().filter(|&&j| j != i) {
                witnesses.entry((i, j)).or_default().insert(arc.condition.as_deref());
            }
        }
    }

    let leaves =
        |e: &EventDef, n: &NodeId| e.region_arcs.iter().filter_map(|a| model.arc(a.as_str())).any(|a| &a.src == n);
    let enters =
        |e: &EventDef, n: &NodeId| e.region_arcs.iter().filter_map(|a| model.arc(a.as_str())).any(|a| &a.dst == n);
    for (n, members) in &member_of {
        for &i in members {
            if leaves(&events[i], n) {
                continue;
            }
            for &j in members.iter().filter(|&&j| j != i) {
                if !enters(&events[j], n) {
                    witnesses.entry((i, j)).or_default().insert(None);
                }
            }
        }
    }

    let edges = witnesses.into_iter().map(|((i, j), conds)| {
        let mut edge = BehaviorEdge::new(&events[i].name, &events[j].name);
        if !conds.contains(&None) {
            edge.condition = conds.into_iter().flatten().next().map(str::to_owned);
        }
        edge
    });
    let mut names: Vec<String> = Vec::new();
    for e in events {
        if !names.contains(&e.name) {
            names.push(e.name.clone());
        }
    }
    BehaviorGraph::new(names, edges).expect("derived edges join distinct known events")
}

/// Declared edges that are not derivable are errors; derivable edges that
/// were not declared are warnings.
pub fn compare_behavior(derived: &BehaviorGraph, declared: &BehaviorGraph) -> Vec<Diagnostic> {
    let d = declared.edge_pairs();
    let g = derived.edge_pairs();
    let mut out: Vec<Diagnostic> = d
        .difference(&g)
        .map(|(a, b)| {
            Diagnostic::error(
                Code::BehaviorNotDerivable,
                format!("declared transition {a} -> {b} does not follow from the event regions"),
                vec![a.to_string(), b.to_string()],
            )
        })
        .chain(g.difference(&d).map(|(a, b)| {
            Diagnostic::warning(
                Code::BehaviorUndeclared,
                format!("transition {a} -> {b} follows from the regions but is not declared"),
                vec![a.to_string(), b.to_string()],
            )
        }))
        .collect();
    sort_diagnostics(&mut out);
    out
}

/// Checks an event trace against a behavior graph. Every event must be an
/// entry event or have a predecessor that already fired; interleaved
/// independent things therefore conform.
pub fn check_event_sequence(graph: &BehaviorGraph, trace: &[String]) -> Vec<Diagnostic> {
    let known: BTreeSet<&str> = graph.nodes.iter().map(String::as_str).collect();
    let mut fired: BTreeSet<&str> = BTreeSet::new();
    let mut out = Vec::new();
    for (i, e) in trace.iter().enumerate() {
        if !known.contains(e.as_str()) {
            out.push(Diagnostic::error(
                Code::TraceUnknownEvent,
                format!("trace step {i} names unknown event `{e}`"),
                vec![e.clone()],
            ));
            continue;
        }
        let enabled = graph.entry.contains(e)
            || graph.edges.iter().any(|edge| &edge.to == e && fired.contains(edge.from.as_str()));
        if !enabled {
            let mut ids = vec![e.clone()];
            ids.extend(trace[..i].iter().rev().find(|p| known.contains(p.as_str())).cloned());
            out.push(Diagnostic::error(
                Code::TraceOrder,
                format!("trace step {i}: `{e}` fires before any of its predecessors"),
                ids,
            ));
        }
        fired.insert(e);
    }
    sort_diagnostics(&mut out);
    out
}
