//! Token simulation over a static model.
//!
//! Tokens sit on a FIFO worklist. Popping a token activates its node; flows
//! move (or, on fan-out, copy) the token along, triggers mint new tokens,
//! and a branch group takes exactly one arc per scenario decision. An event
//! fires once every node of its region has activated since it last fired.

mod scenario;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::diagnostic::Diagnostic;
use crate::events::{check_event_sequence, BehaviorGraph};
use crate::model::{ActionKind, ArcKind, ModelArc, NodeId, TmModel};

pub use scenario::Scenario;

/// Per-node visit bound for branch nodes during enumeration.
pub const DEFAULT_VISIT_BOUND: usize = 3;
pub const DEFAULT_TRACE_CAP: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("`{0}` is not a branch node")]
    NotABranch(String),
    #[error("`{label}` is not a condition of branch node `{node}`")]
    UnknownLabel { node: String, label: String },
    #[error("`{0}` cannot seed a run; seeds must be create nodes or inbound transfers")]
    InvalidSeed(String),
    #[error("max_steps must be positive")]
    ZeroMaxSteps,
    #[error("enumeration exceeds the cap of {0} traces")]
    TooManyTraces(usize),
    #[error("scenario line {line}: {message}")]
    ScenarioSyntax { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub id: u64,
    pub thing: String,
    pub at: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub index: usize,
    pub node: NodeId,
    pub token: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Terminal {
    /// The worklist ran empty.
    Completed,
    /// A decision was missing, or a thing got stuck in a release or
    /// transfer with nowhere to go.
    DeadEnd,
    /// The step budget ran out with work left.
    StepLimit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub steps: Vec<Step>,
    pub fired_events: Vec<String>,
    pub decisions_taken: Vec<(NodeId, String)>,
    pub terminal: Terminal,
}

/// Nodes where things enter: create and transfer nodes with no incoming arc.
pub fn default_seeds(model: &TmModel) -> Vec<NodeId> {
    let targets: BTreeSet<&NodeId> = model.arcs().map(|a| &a.dst).collect();
    model
        .nodes()
        .iter()
        .filter(|n| matches!(n.kind, ActionKind::Create | ActionKind::Transfer) && !targets.contains(&n.id))
        .map(|n| n.id.clone())
        .collect()
}

fn check_seeds(model: &TmModel, seeds: &[NodeId]) -> Result<(), SimError> {
    for seed in seeds {
        let node = model.node(seed.as_str()).ok_or_else(|| SimError::UnknownNode(seed.to_string()))?;
        let ok = match node.kind {
            ActionKind::Create => true,
            // a transfer fed by a release is an output port, not an entry
            ActionKind::Transfer => !model
                .flow_arcs()
                .iter()
                .any(|a| &a.dst == seed && model.node(a.src.as_str()).is_some_and(|s| s.kind == ActionKind::Release)),
            _ => false,
        };
        if !ok {
            return Err(SimError::InvalidSeed(seed.to_string()));
        }
    }
    Ok(())
}

fn step_budget(model: &TmModel, max_steps: Option<usize>) -> Result<usize, SimError> {
    match max_steps {
        Some(0) => Err(SimError::ZeroMaxSteps),
        Some(n) => Ok(n),
        None => Ok((10 * model.nodes().len()).max(1)),
    }
}

/// Runs one scenario from `seeds` (in order).
pub fn run(model: &TmModel, scenario: &Scenario, seeds: &[NodeId]) -> Result<Trace, SimError> {
    scenario.check(model)?;
    check_seeds(model, seeds)?;
    let budget = step_budget(model, scenario.max_steps)?;
    match Engine::new(model, &scenario.decisions, budget, None).execute(seeds) {
        Outcome::Done(trace) => Ok(trace),
        Outcome::Branch { .. } => unreachable!("run mode never forks"),
    }
}

/// Enumeration limits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerateOptions {
    pub max_steps: Option<usize>,
    /// Visits per branch node before a path is cut with `StepLimit`.
    pub visit_bound: usize,
    pub trace_cap: usize,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self { max_steps: None, visit_bound: DEFAULT_VISIT_BOUND, trace_cap: DEFAULT_TRACE_CAP }
    }
}

/// One trace per distinct decision assignment, depth-first with labels in
/// lexicographic order.
pub fn enumerate(model: &TmModel, seeds: &[NodeId], opts: &EnumerateOptions) -> Result<Vec<Trace>, SimError> {
    check_seeds(model, seeds)?;
    let budget = step_budget(model, opts.max_steps)?;
    let mut out = Vec::new();
    explore(model, seeds, budget, opts, BTreeMap::new(), &mut out)?;
    Ok(out)
}

fn explore(
    model: &TmModel,
    seeds: &[NodeId],
    budget: usize,
    opts: &EnumerateOptions,
    decisions: BTreeMap<NodeId, Vec<String>>,
    out: &mut Vec<Trace>,
) -> Result<(), SimError> {
    match Engine::new(model, &decisions, budget, Some(opts.visit_bound)).execute(seeds) {
        Outcome::Done(trace) => {
            if out.len() == opts.trace_cap {
                return Err(SimError::TooManyTraces(opts.trace_cap));
            }
            out.push(trace);
        }
        Outcome::Branch { node, labels } => {
            for label in labels {
                let mut next = decisions.clone();
                next.entry(node.clone()).or_default().push(label);
                explore(model, seeds, budget, opts, next, out)?;
            }
        }
    }
    Ok(())
}

/// Event-order conformance of a trace.
pub fn check_trace(trace: &Trace, behavior: &BehaviorGraph) -> Vec<Diagnostic> {
    check_event_sequence(behavior, &trace.fired_events)
}

enum Outcome {
    Done(Trace),
    /// Explore mode ran out of decisions at `node`.
    Branch {
        node: NodeId,
        labels: Vec<String>,
    },
}

struct Engine<'a> {
    model: &'a TmModel,
    decisions: &'a BTreeMap<NodeId, Vec<String>>,
    budget: usize,
    /// `Some(bound)` forks on missing decisions instead of dead-ending.
    explore: Option<usize>,
    cursor: BTreeMap<&'a NodeId, usize>,
    visits: BTreeMap<&'a NodeId, usize>,
    worklist: VecDeque<Token>,
    next_id: u64,
    /// Region nodes activated since each event last fired.
    pending: Vec<BTreeSet<&'a NodeId>>,
    events_of: BTreeMap<&'a NodeId, Vec<usize>>,
    trace: Trace,
}

impl<'a> Engine<'a> {
    fn new(
        model: &'a TmModel,
        decisions: &'a BTreeMap<NodeId, Vec<String>>,
        budget: usize,
        explore: Option<usize>,
    ) -> Self {
        let mut events_of: BTreeMap<&NodeId, Vec<usize>> = BTreeMap::new();
        for (i, e) in model.events().iter().enumerate() {
            for n in &e.region_nodes {
                events_of.entry(n).or_default().push(i);
            }
        }
        Self {
            model,
            decisions,
            budget,
            explore,
            cursor: BTreeMap::new(),
            visits: BTreeMap::new(),
            worklist: VecDeque::new(),
            next_id: 0,
            pending: vec![BTreeSet::new(); model.events().len()],
            events_of,
            trace: Trace {
                steps: vec![],
                fired_events: vec![],
                decisions_taken: vec![],
                terminal: Terminal::Completed,
            },
        }
    }

    fn mint(&mut self, thing: &str, at: &NodeId) -> Token {
        let id = self.next_id;
        self.next_id += 1;
        Token { id, thing: thing.to_owned(), at: at.clone() }
    }

    fn finish(mut self, terminal: Terminal) -> Outcome {
        self.trace.terminal = terminal;
        Outcome::Done(self.trace)
    }

    fn execute(mut self, seeds: &[NodeId]) -> Outcome {
        for seed in seeds {
            let node = self.model.node(seed.as_str()).expect("seeds checked");
            let tok = self.mint(&node.thing, seed);
            self.worklist.push_back(tok);
        }
        while let Some(token) = self.worklist.pop_front() {
            if self.trace.steps.len() == self.budget {
                return self.finish(Terminal::StepLimit);
            }
            let node = self.model.node(token.at.as_str()).expect("tokens sit on nodes");
            let node_id = &node.id;
            self.activate(node_id, token.id);

            let out: Vec<&ModelArc> = self.model.outgoing(node_id).collect();
            let conditional: Vec<&ModelArc> = out.iter().copied().filter(|a| a.condition.is_some()).collect();
            let mut taken: Vec<&ModelArc> = out.iter().copied().filter(|a| a.condition.is_none()).collect();
            if conditional.len() == 1 {
                taken.push(conditional[0]);
            } else if conditional.len() > 1 {
                let visits = self.visits.entry(node_id).or_default();
                *visits += 1;
                if self.explore.is_some_and(|bound| *visits > bound) {
                    return self.finish(Terminal::StepLimit);
                }
                let cursor = self.cursor.entry(node_id).or_default();
                let label = self.decisions.get(node_id).and_then(|l| l.get(*cursor));
                match label {
                    Some(label) => {
                        *cursor += 1;
                        let arc = conditional.iter().find(|a| a.condition.as_ref() == Some(label));
                        let arc = arc.expect("scenario labels checked against branch groups");
                        taken.push(arc);
                        self.trace.decisions_taken.push((node_id.clone(), label.clone()));
                    }
                    None if self.explore.is_some() => {
                        let mut labels: Vec<String> = conditional.iter().filter_map(|a| a.condition.clone()).collect();
                        labels.sort();
                        return Outcome::Branch { node: node_id.clone(), labels };
                    }
                    None => return self.finish(Terminal::DeadEnd),
                }
            }
            if taken.is_empty() && matches!(node.kind, ActionKind::Release | ActionKind::Transfer) {
                return self.finish(Terminal::DeadEnd);
            }
            // flows before triggers, each by destination
            taken.sort_by(|a, b| (a.kind, &a.dst).cmp(&(b.kind, &b.dst)));
            let mut moved = false;
            for arc in taken {
                let next = match arc.kind {
                    ArcKind::Flow if !moved => {
                        moved = true;
                        Token { id: token.id, thing: token.thing.clone(), at: arc.dst.clone() }
                    }
                    ArcKind::Flow => self.mint(&token.thing, &arc.dst),
                    ArcKind::Trigger => {
                        let dst = self.model.node(arc.dst.as_str()).expect("arc endpoints exist");
                        self.mint(&dst.thing, &arc.dst)
                    }
                };
                self.worklist.push_back(next);
            }
        }
        self.finish(Terminal::Completed)
    }

    fn activate(&mut self, node: &'a NodeId, token: u64) {
        let index = self.trace.steps.len();
        self.trace.steps.push(Step { index, node: node.clone(), token });
        let Some(events) = self.events_of.get(node) else { return };
        for &i in events {
            let event = &self.model.events()[i];
            self.pending[i].insert(node);
            if self.pending[i].len() == event.region_nodes.len() {
                self.pending[i].clear();
                self.trace.fired_events.push(event.name.clone());
            }
        }
    }
}
