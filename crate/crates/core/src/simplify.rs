//! Simplified display views.
//!
//! Level 1 hides release, transfer and receive; level 2 also hides create;
//! level 3 keeps level 2's nodes but draws every arc solid and without
//! conditions, marking arcs that cross machines. Hidden nodes are contracted:
//! each surviving node gets one arc per surviving node it reaches through
//! hidden ones. A path is dashed if it uses any trigger.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::diagnostic::{sort_diagnostics, Code, Diagnostic};
use crate::model::{ActionKind, ActionNode, ArcKind, Machine, NodeId, TmModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcStyle {
    Solid,
    Dashed,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ViewArc {
    pub src: NodeId,
    pub dst: NodeId,
    pub style: ArcStyle,
    pub condition: Option<String>,
    /// Set at level 3 when the endpoints sit in different machines; the arc
    /// is then drawn between the machine boxes.
    pub between_machines: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimplifiedView {
    pub level: u8,
    pub machines: Vec<Machine>,
    pub nodes: Vec<ActionNode>,
    pub arcs: Vec<ViewArc>,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimplifyError {
    #[error("simplification level must be 1, 2 or 3, got {0}")]
    InvalidLevel(u8),
}

/// Conditions met along one contracted path are joined with this.
pub const CONDITION_JOIN: &str = " & ";

pub fn simplify(model: &TmModel, level: u8) -> Result<SimplifiedView, SimplifyError> {
    if !(1..=3).contains(&level) {
        return Err(SimplifyError::InvalidLevel(level));
    }
    let full_arcs: Vec<ViewArc> = model
        .arcs()
        .map(|a| ViewArc {
            src: a.src.clone(),
            dst: a.dst.clone(),
            style: match a.kind {
                ArcKind::Flow => ArcStyle::Solid,
                ArcKind::Trigger => ArcStyle::Dashed,
            },
            condition: a.condition.clone(),
            between_machines: false,
        })
        .collect();
    let (nodes, arcs) =
        contract(model.nodes(), &full_arcs, |n| matches!(n.kind, ActionKind::Create | ActionKind::Process));
    let mut view = SimplifiedView { level: 1, machines: model.machines().to_vec(), nodes, arcs, warnings: vec![] };
    if level == 1 {
        return Ok(view);
    }

    let keep = |n: &ActionNode| n.kind == ActionKind::Process;
    let kept: BTreeSet<&NodeId> = view.nodes.iter().filter(|n| keep(n)).map(|n| &n.id).collect();
    for arc in view.arcs.iter().filter(|a| a.style == ArcStyle::Dashed && kept.contains(&a.src)) {
        let dst = view.nodes.iter().find(|n| n.id == arc.dst).expect("view arcs join view nodes");
        if dst.kind == ActionKind::Create && !reaches_kept(&view.arcs, &dst.id, &kept) {
            view.warnings.push(Diagnostic::warning(
                Code::DroppedTrigger,
                format!("trigger into `{}` dropped: the created thing reaches no process", dst.id),
                vec![arc.src.to_string(), dst.id.to_string()],
            ));
        }
    }
    sort_diagnostics(&mut view.warnings);
    let (nodes, arcs) = contract(&view.nodes, &view.arcs, keep);
    view.level = 2;
    view.nodes = nodes;
    view.arcs = arcs;
    if level == 2 {
        return Ok(view);
    }

    let machine_of = |id: &NodeId| &view.nodes.iter().find(|n| &n.id == id).expect("view node").machine;
    let mut arcs: Vec<ViewArc> = view
        .arcs
        .iter()
        .map(|a| ViewArc {
            src: a.src.clone(),
            dst: a.dst.clone(),
            style: ArcStyle::Solid,
            condition: None,
            between_machines: machine_of(&a.src) != machine_of(&a.dst),
        })
        .collect();
    arcs.sort();
    arcs.dedup();
    view.level = 3;
    view.arcs = arcs;
    Ok(view)
}

/// Removes nodes failing `keep`, joining each kept node to the kept nodes it
/// reaches through removed ones.
fn contract(
    nodes: &[ActionNode],
    arcs: &[ViewArc],
    keep: impl Fn(&ActionNode) -> bool,
) -> (Vec<ActionNode>, Vec<ViewArc>) {
    let kept_nodes: Vec<ActionNode> = nodes.iter().filter(|n| keep(n)).cloned().collect();
    let kept: BTreeSet<&NodeId> = kept_nodes.iter().map(|n| &n.id).collect();
    let mut out: BTreeSet<ViewArc> = BTreeSet::new();
    for start in &kept_nodes {
        // (node, dashed so far, conditions so far); each state is expanded once
        let mut seen: BTreeSet<(&NodeId, bool, Vec<&str>)> = BTreeSet::new();
        let mut stack: Vec<(&NodeId, bool, Vec<&str>)> = vec![(&start.id, false, vec![])];
        while let Some((at, dashed, conds)) = stack.pop() {
            for arc in arcs.iter().filter(|a| &a.src == at) {
                let dashed = dashed || arc.style == ArcStyle::Dashed;
                let mut conds = conds.clone();
                if let Some(c) = arc.condition.as_deref() {
                    if !conds.contains(&c) {
                        conds.push(c);
                    }
                }
                if kept.contains(&arc.dst) {
                    out.insert(ViewArc {
                        src: start.id.clone(),
                        dst: arc.dst.clone(),
                        style: if dashed { ArcStyle::Dashed } else { ArcStyle::Solid },
                        condition: (!conds.is_empty()).then(|| conds.join(CONDITION_JOIN)),
                        between_machines: false,
                    });
                } else if seen.insert((&arc.dst, dashed, conds.clone())) {
                    stack.push((&arc.dst, dashed, conds));
                }
            }
        }
    }
    (kept_nodes, out.into_iter().collect())
}

fn reaches_kept(arcs: &[ViewArc], from: &NodeId, kept: &BTreeSet<&NodeId>) -> bool {
    let mut seen: BTreeSet<&NodeId> = BTreeSet::from([from]);
    let mut stack = vec![from];
    while let Some(at) = stack.pop() {
        for arc in arcs.iter().filter(|a| &a.src == at) {
            if kept.contains(&arc.dst) {
                return true;
            }
            if seen.insert(&arc.dst) {
                stack.push(&arc.dst);
            }
        }
    }
    false
}
