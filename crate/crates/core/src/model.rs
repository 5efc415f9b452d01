//! Static model: machines, action nodes, flow and trigger arcs.
//!
//! A [`TmModel`] is built through [`ModelBuilder`], which resolves every
//! reference and puts the model in normal form (machines in pre-order, nodes
//! grouped by machine, arcs sorted by endpoints). Two models describing the
//! same diagram therefore compare equal regardless of declaration order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::events::{BehaviorGraph, EventDef};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl PartialEq<str> for $name {
            fn eq(&self, other: &str) -> bool {
                self.0 == other
            }
        }

        impl PartialEq<&str> for $name {
            fn eq(&self, other: &&str) -> bool {
                self.0 == *other
            }
        }
    };
}

id_type!(
    /// Path-like machine identifier, e.g. `Customer.Order`.
    MachineId
);
id_type!(
    /// Machine-scoped node identifier, e.g. `Customer.create_order`.
    NodeId
);
id_type!(
    /// Arc identifier: `src->dst` for flows, `src=>dst` for triggers.
    ArcId
);

/// The five generic actions. There is no sixth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Create,
    Process,
    Release,
    Transfer,
    Receive,
}

impl ActionKind {
    pub const ALL: [ActionKind; 5] =
        [ActionKind::Create, ActionKind::Process, ActionKind::Release, ActionKind::Transfer, ActionKind::Receive];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Create => "create",
            ActionKind::Process => "process",
            ActionKind::Release => "release",
            ActionKind::Transfer => "transfer",
            ActionKind::Receive => "receive",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        ActionKind::ALL.into_iter().find(|k| k.as_str() == word)
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Machine {
    pub id: MachineId,
    pub name: String,
    pub parent: Option<MachineId>,
    pub children: Vec<MachineId>,
}

/// One occurrence of a generic action on a thing inside a machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActionNode {
    pub id: NodeId,
    pub machine: MachineId,
    pub kind: ActionKind,
    pub thing: String,
    pub label: Option<String>,
}

impl ActionNode {
    /// The id without its machine path.
    pub fn local_id(&self) -> &str {
        let prefix = self.machine.as_str().len() + 1;
        &self.id.as_str()[prefix..]
    }
}

/// Default local id of an action: `kind_thing`.
pub fn default_local_id(kind: ActionKind, thing: &str) -> String {
    format!("{}_{}", kind.as_str(), thing)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcKind {
    /// Solid arrow: a thing moves between actions.
    Flow,
    /// Dashed arrow: an action starts a new flow.
    Trigger,
}

impl ArcKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ArcKind::Flow => "flow",
            ArcKind::Trigger => "trigger",
        }
    }

    pub fn arc_id(self, src: &NodeId, dst: &NodeId) -> ArcId {
        match self {
            ArcKind::Flow => ArcId(format!("{src}->{dst}")),
            ArcKind::Trigger => ArcId(format!("{src}=>{dst}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelArc {
    pub id: ArcId,
    pub kind: ArcKind,
    pub src: NodeId,
    pub dst: NodeId,
    pub condition: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown machine `{0}`")]
    UnknownMachine(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("arc from `{0}` to itself")]
    SelfLoop(String),
    #[error("duplicate arc `{0}`")]
    DuplicateArc(String),
    #[error("invalid identifier `{0}`")]
    InvalidIdent(String),
    #[error("behavior edge references undeclared event `{0}`")]
    UnknownEvent(String),
    #[error("behavior edge from `{0}` to itself")]
    BehaviorSelfLoop(String),
}

/// Identifier rule shared by the DSL and the builder.
pub fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// The complete static model plus declared events and behavior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TmModel {
    name: String,
    machines: Vec<Machine>,
    nodes: Vec<ActionNode>,
    flow_arcs: Vec<ModelArc>,
    trigger_arcs: Vec<ModelArc>,
    events: Vec<EventDef>,
    declared_behavior: Option<BehaviorGraph>,
    node_index: BTreeMap<NodeId, usize>,
    machine_index: BTreeMap<MachineId, usize>,
}

impl TmModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Machines in pre-order.
    pub fn machines(&self) -> &[Machine] {
        &self.machines
    }

    pub fn nodes(&self) -> &[ActionNode] {
        &self.nodes
    }

    pub fn flow_arcs(&self) -> &[ModelArc] {
        &self.flow_arcs
    }

    pub fn trigger_arcs(&self) -> &[ModelArc] {
        &self.trigger_arcs
    }

    /// Flow arcs followed by trigger arcs.
    pub fn arcs(&self) -> impl Iterator<Item = &ModelArc> {
        self.flow_arcs.iter().chain(self.trigger_arcs.iter())
    }

    pub fn events(&self) -> &[EventDef] {
        &self.events
    }

    pub fn declared_behavior(&self) -> Option<&BehaviorGraph> {
        self.declared_behavior.as_ref()
    }

    pub fn node(&self, id: &str) -> Option<&ActionNode> {
        self.node_index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn node_position(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn machine(&self, id: &str) -> Option<&Machine> {
        self.machine_index.get(id).map(|&i| &self.machines[i])
    }

    pub fn arc(&self, id: &str) -> Option<&ModelArc> {
        self.arcs().find(|a| a.id == id)
    }

    pub fn top_level_machines(&self) -> impl Iterator<Item = &Machine> {
        self.machines.iter().filter(|m| m.parent.is_none())
    }

    /// True if `ancestor` is `descendant` or one of its enclosing machines.
    pub fn is_ancestor_or_self(&self, ancestor: &MachineId, descendant: &MachineId) -> bool {
        let mut cur = Some(descendant);
        while let Some(id) = cur {
            if id == ancestor {
                return true;
            }
            cur = self.machine(id.as_str()).and_then(|m| m.parent.as_ref());
        }
        false
    }

    /// Machines are related when one encloses the other; arcs between related
    /// machines count as intra-machine.
    pub fn machines_related(&self, a: &MachineId, b: &MachineId) -> bool {
        self.is_ancestor_or_self(a, b) || self.is_ancestor_or_self(b, a)
    }

    /// All arcs (flow and trigger) with both endpoints in `nodes`.
    pub fn induced_arcs(&self, nodes: &BTreeSet<NodeId>) -> BTreeSet<ArcId> {
        self.arcs().filter(|a| nodes.contains(&a.src) && nodes.contains(&a.dst)).map(|a| a.id.clone()).collect()
    }

    /// Outgoing arcs of `node`, flows first, each group sorted by id.
    pub fn outgoing<'a>(&'a self, node: &'a NodeId) -> impl Iterator<Item = &'a ModelArc> + 'a {
        self.arcs().filter(move |a| &a.src == node)
    }

    pub fn into_builder(self) -> ModelBuilder {
        ModelBuilder {
            name: self.name,
            machines: self.machines,
            nodes: self.nodes,
            arcs: self.flow_arcs.into_iter().chain(self.trigger_arcs).collect(),
            events: self.events.into_iter().map(|e| (e, false)).collect(),
            behavior: self.declared_behavior,
        }
    }
}

/// Incremental construction of a [`TmModel`].
///
/// Node and arc references are checked eagerly; event regions are not (the
/// event checker reports unknown ids as diagnostics).
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    name: String,
    machines: Vec<Machine>,
    nodes: Vec<ActionNode>,
    arcs: Vec<ModelArc>,
    /// `true` marks events whose arcs are to be induced from their nodes.
    events: Vec<(EventDef, bool)>,
    behavior: Option<BehaviorGraph>,
}

impl ModelBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            machines: Vec::new(),
            nodes: Vec::new(),
            arcs: Vec::new(),
            events: Vec::new(),
            behavior: None,
        }
    }

    fn id_taken(&self, id: &str) -> bool {
        self.machines.iter().any(|m| m.id == id) || self.nodes.iter().any(|n| n.id == id)
    }

    /// Adds a machine named `name`, nested in `parent` when given.
    pub fn machine(&mut self, name: &str, parent: Option<&str>) -> Result<MachineId, ModelError> {
        if !is_ident(name) {
            return Err(ModelError::InvalidIdent(name.to_owned()));
        }
        let id = match parent {
            Some(p) => {
                if !self.machines.iter().any(|m| m.id == p) {
                    return Err(ModelError::UnknownMachine(p.to_owned()));
                }
                MachineId(format!("{p}.{name}"))
            }
            None => MachineId(name.to_owned()),
        };
        if self.id_taken(id.as_str()) {
            return Err(ModelError::DuplicateId(id.0));
        }
        if let Some(p) = parent {
            let pm = self.machines.iter_mut().find(|m| m.id == p).expect("checked");
            pm.children.push(id.clone());
        }
        self.machines.push(Machine {
            id: id.clone(),
            name: name.to_owned(),
            parent: parent.map(MachineId::from),
            children: Vec::new(),
        });
        Ok(id)
    }

    /// Adds an action node. The local id defaults to `kind_thing`.
    pub fn node(
        &mut self,
        machine: &str,
        kind: ActionKind,
        thing: &str,
        local_id: Option<&str>,
    ) -> Result<NodeId, ModelError> {
        if !self.machines.iter().any(|m| m.id == machine) {
            return Err(ModelError::UnknownMachine(machine.to_owned()));
        }
        if !is_ident(thing) {
            return Err(ModelError::InvalidIdent(thing.to_owned()));
        }
        let local = match local_id {
            Some(l) if !is_ident(l) => return Err(ModelError::InvalidIdent(l.to_owned())),
            Some(l) => l.to_owned(),
            None => default_local_id(kind, thing),
        };
        let id = NodeId(format!("{machine}.{local}"));
        if self.id_taken(id.as_str()) {
            return Err(ModelError::DuplicateId(id.0));
        }
        self.nodes.push(ActionNode {
            id: id.clone(),
            machine: MachineId::from(machine),
            kind,
            thing: thing.to_owned(),
            label: None,
        });
        Ok(id)
    }

    pub fn set_label(&mut self, node: &str, label: impl Into<String>) -> Result<(), ModelError> {
        let n = self.nodes.iter_mut().find(|n| n.id == node).ok_or_else(|| ModelError::UnknownNode(node.to_owned()))?;
        n.label = Some(label.into());
        Ok(())
    }

    pub fn arc(&mut self, kind: ArcKind, src: &str, dst: &str, condition: Option<&str>) -> Result<ArcId, ModelError> {
        for end in [src, dst] {
            if !self.nodes.iter().any(|n| n.id == end) {
                return Err(ModelError::UnknownNode(end.to_owned()));
            }
        }
        if src == dst {
            return Err(ModelError::SelfLoop(src.to_owned()));
        }
        let id = kind.arc_id(&NodeId::from(src), &NodeId::from(dst));
        if self.arcs.iter().any(|a| a.id == id) {
            return Err(ModelError::DuplicateArc(id.0));
        }
        self.arcs.push(ModelArc {
            id: id.clone(),
            kind,
            src: NodeId::from(src),
            dst: NodeId::from(dst),
            condition: condition.map(str::to_owned),
        });
        Ok(id)
    }

    pub fn flow(&mut self, src: &str, dst: &str, condition: Option<&str>) -> Result<ArcId, ModelError> {
        self.arc(ArcKind::Flow, src, dst, condition)
    }

    pub fn trigger(&mut self, src: &str, dst: &str, condition: Option<&str>) -> Result<ArcId, ModelError> {
        self.arc(ArcKind::Trigger, src, dst, condition)
    }

    /// Removes an arc; used to derive mutated models in tests and tools.
    pub fn remove_arc(&mut self, id: &str) -> Option<ModelArc> {
        let pos = self.arcs.iter().position(|a| a.id == id)?;
        Some(self.arcs.remove(pos))
    }

    /// Adds an event with an explicit region.
    pub fn event(&mut self, event: EventDef) {
        self.events.push((event, false));
    }

    /// Adds an event whose region arcs are all arcs between its nodes.
    pub fn event_induced(&mut self, name: &str, nodes: &[&str], order: Option<i64>) {
        let event = EventDef {
            name: name.to_owned(),
            region_nodes: nodes.iter().map(|n| NodeId::from(*n)).collect(),
            region_arcs: BTreeSet::new(),
            order,
        };
        self.events.push((event, true));
    }

    pub fn behavior(&mut self, graph: BehaviorGraph) {
        self.behavior = Some(graph);
    }

    pub fn clear_behavior(&mut self) {
        self.behavior = None;
    }

    pub fn build(self) -> Result<TmModel, ModelError> {
        // Pre-order machine traversal, siblings in declaration order.
        let mut order: Vec<usize> = Vec::with_capacity(self.machines.len());
        let pos_of = |id: &MachineId| self.machines.iter().position(|m| &m.id == id).expect("resolved");
        let mut stack: Vec<usize> =
            self.machines.iter().enumerate().filter(|(_, m)| m.parent.is_none()).map(|(i, _)| i).rev().collect();
        while let Some(i) = stack.pop() {
            order.push(i);
            for child in self.machines[i].children.iter().rev() {
                stack.push(pos_of(child));
            }
        }
        let machines: Vec<Machine> = order.iter().map(|&i| self.machines[i].clone()).collect();
        let machine_index: BTreeMap<MachineId, usize> =
            machines.iter().enumerate().map(|(i, m)| (m.id.clone(), i)).collect();

        let mut nodes = self.nodes;
        nodes.sort_by_key(|n| machine_index[&n.machine]);
        let node_index: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();

        let (mut flow_arcs, mut trigger_arcs): (Vec<_>, Vec<_>) =
            self.arcs.into_iter().partition(|a| a.kind == ArcKind::Flow);
        let by_ends = |a: &ModelArc, b: &ModelArc| (&a.src, &a.dst).cmp(&(&b.src, &b.dst));
        flow_arcs.sort_by(by_ends);
        trigger_arcs.sort_by(by_ends);

        if let Some(graph) = &self.behavior {
            let names: BTreeSet<&str> = self.events.iter().map(|(e, _)| e.name.as_str()).collect();
            for edge in &graph.edges {
                for end in [&edge.from, &edge.to] {
                    if !names.contains(end.as_str()) {
                        return Err(ModelError::UnknownEvent(end.clone()));
                    }
                }
            }
        }

        let mut model = TmModel {
            name: self.name,
            machines,
            nodes,
            flow_arcs,
            trigger_arcs,
            events: Vec::new(),
            declared_behavior: self.behavior,
            node_index,
            machine_index,
        };
        model.events = self
            .events
            .into_iter()
            .map(|(mut e, induced)| {
                if induced {
                    e.region_arcs = model.induced_arcs(&e.region_nodes);
                }
                e
            })
            .collect();
        Ok(model)
    }
}
