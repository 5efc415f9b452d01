//! Graphviz DOT output. The text is byte-stable: nodes, clusters and edges
//! are emitted in id order.

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::{Command, Stdio};

use thiserror::Error;

use crate::diagnostic::error_count;
use crate::events::{check_events, derive_behavior, events_in_order, BehaviorGraph};
use crate::model::{ArcKind, Machine, MachineId, ModelArc, NodeId, TmModel};
use crate::simplify::{simplify, ArcStyle, SimplifiedView};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    Static,
    Events,
    Behavior,
    Simplified(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Dot,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankDir {
    LR,
    TB,
}

/// Which behavior graph the behavior view draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BehaviorSource {
    Derived,
    Declared,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderOptions {
    pub view: View,
    pub format: Format,
    pub show_conditions: bool,
    pub rankdir: RankDir,
    pub behavior: BehaviorSource,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            view: View::Static,
            format: Format::Dot,
            show_conditions: true,
            rankdir: RankDir::LR,
            behavior: BehaviorSource::Derived,
        }
    }
}

impl RenderOptions {
    pub fn view(view: View) -> Self {
        Self { view, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("view: simplified level must be 1, 2 or 3, got {0}")]
    InvalidLevel(u8),
    #[error("format: DOT text was requested with format=svg; use `render` for SVG")]
    SvgRequested,
    #[error("behavior: the declared behavior was requested but the model declares none")]
    NoDeclaredBehavior,
    #[error("view: the events view needs valid events, found {0} event error(s)")]
    InvalidEvents(usize),
    #[error("format: svg output needs the graphviz `dot` program: {0}")]
    Graphviz(String),
}

/// Colors cycled over events in their order.
pub const PALETTE: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

/// DOT text for the requested view.
pub fn to_dot(model: &TmModel, opts: &RenderOptions) -> Result<String, RenderError> {
    if opts.format == Format::Svg {
        return Err(RenderError::SvgRequested);
    }
    dot_text(model, opts)
}

/// DOT text, or SVG produced by piping it through `dot -Tsvg`.
pub fn render(model: &TmModel, opts: &RenderOptions) -> Result<String, RenderError> {
    let dot = dot_text(model, opts)?;
    match opts.format {
        Format::Dot => Ok(dot),
        Format::Svg => dot_to_svg(&dot),
    }
}

fn dot_text(model: &TmModel, opts: &RenderOptions) -> Result<String, RenderError> {
    match opts.view {
        View::Static => Ok(static_dot(model, opts, None)),
        View::Events => {
            let errors = error_count(&check_events(model));
            if errors > 0 {
                return Err(RenderError::InvalidEvents(errors));
            }
            Ok(static_dot(model, opts, Some(event_colors(model))))
        }
        View::Behavior => {
            let derived;
            let graph = match opts.behavior {
                BehaviorSource::Derived => {
                    derived = derive_behavior(model);
                    &derived
                }
                BehaviorSource::Declared => model.declared_behavior().ok_or(RenderError::NoDeclaredBehavior)?,
            };
            Ok(behavior_dot(model.name(), graph, opts))
        }
        View::Simplified(level) => {
            let view = simplify(model, level).map_err(|_| RenderError::InvalidLevel(level))?;
            Ok(view_dot(model.name(), &view, opts))
        }
    }
}

fn dot_to_svg(dot: &str) -> Result<String, RenderError> {
    let mut child = Command::new("dot")
        .arg("-Tsvg")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| RenderError::Graphviz(e.to_string()))?;
    child
        .stdin
        .take()
        .expect("piped stdin")
        .write_all(dot.as_bytes())
        .map_err(|e| RenderError::Graphviz(e.to_string()))?;
    let out = child.wait_with_output().map_err(|e| RenderError::Graphviz(e.to_string()))?;
    if !out.status.success() {
        return Err(RenderError::Graphviz(String::from_utf8_lossy(&out.stderr).trim().to_owned()));
    }
    String::from_utf8(out.stdout).map_err(|e| RenderError::Graphviz(e.to_string()))
}

/// Quotes `s` as a DOT string; newlines become `\n` line breaks.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn header(name: &str, opts: &RenderOptions, out: &mut String) {
    let _ = writeln!(out, "digraph {} {{", quote(name));
    let dir = match opts.rankdir {
        RankDir::LR => "LR",
        RankDir::TB => "TB",
    };
    let _ = writeln!(out, "  rankdir={dir};");
}

fn attrs(list: &[(&str, String)]) -> String {
    if list.is_empty() {
        return String::new();
    }
    let body: Vec<String> = list.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!(" [{}]", body.join(", "))
}

struct EventColors {
    /// `(event name, color)` in order-hint order.
    legend: Vec<(String, &'static str)>,
    /// node -> (color of first covering event, covering event names)
    nodes: std::collections::BTreeMap<NodeId, (&'static str, Vec<String>)>,
    arcs: std::collections::BTreeMap<String, &'static str>,
}

fn event_colors(model: &TmModel) -> EventColors {
    let mut c = EventColors { legend: vec![], nodes: Default::default(), arcs: Default::default() };
    for (i, ev) in events_in_order(model).into_iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        c.legend.push((ev.name.clone(), color));
        for n in &ev.region_nodes {
            c.nodes.entry(n.clone()).or_insert((color, vec![])).1.push(ev.name.clone());
        }
        for a in &ev.region_arcs {
            c.arcs.entry(a.to_string()).or_insert(color);
        }
    }
    c
}

fn static_dot(model: &TmModel, opts: &RenderOptions, events: Option<EventColors>) -> String {
    let mut out = String::new();
    header(model.name(), opts, &mut out);
    out.push_str("  node [shape=box];\n");
    let mut tops: Vec<&Machine> = model.top_level_machines().collect();
    tops.sort_by(|a, b| a.id.cmp(&b.id));
    for m in tops {
        cluster(model, m, 1, &mut out, &|n, out, pad| {
            let node = model.node(n.as_str()).expect("node exists");
            let mut label = format!("{}\n{}", node.kind, node.thing);
            if let Some(extra) = &node.label {
                let _ = write!(label, "\n{extra}");
            }
            let mut a = vec![("label", quote(&label))];
            if let Some((color, names)) = events.as_ref().and_then(|e| e.nodes.get(n)) {
                a.push(("color", quote(color)));
                a.push(("penwidth", "2".into()));
                a.push(("xlabel", quote(&names.join(" "))));
            }
            let _ = writeln!(out, "{pad}{}{};", quote(n.as_str()), attrs(&a));
        });
    }
    if let Some(ev) = &events {
        out.push_str("  subgraph \"cluster_#events\" {\n    label=\"events\";\n");
        for (name, color) in &ev.legend {
            let a = [
                ("label", quote(name)),
                ("shape", "note".into()),
                ("color", quote(color)),
                ("fontcolor", quote(color)),
            ];
            let _ = writeln!(out, "    {}{};", quote(&format!("#{name}")), attrs(&a));
        }
        out.push_str("  }\n");
    }
    let mut arcs: Vec<&ModelArc> = model.arcs().collect();
    arcs.sort_by(|a, b| (&a.src, &a.dst, a.kind).cmp(&(&b.src, &b.dst, b.kind)));
    for arc in arcs {
        let mut a = Vec::new();
        if arc.kind == ArcKind::Trigger {
            a.push(("style", "dashed".to_owned()));
        }
        if let (true, Some(c)) = (opts.show_conditions, &arc.condition) {
            a.push(("label", quote(c)));
        }
        if let Some(color) = events.as_ref().and_then(|e| e.arcs.get(arc.id.as_str())) {
            a.push(("color", quote(color)));
        }
        let _ = writeln!(out, "  {} -> {}{};", quote(arc.src.as_str()), quote(arc.dst.as_str()), attrs(&a));
    }
    out.push_str("}\n");
    out
}

/// Emits the cluster of `m` and its sub-machines; `node` writes one node line.
fn cluster(model: &TmModel, m: &Machine, depth: usize, out: &mut String, node: &dyn Fn(&NodeId, &mut String, &str)) {
    cluster_filtered(model, m, depth, out, &|_| true, node)
}

fn cluster_filtered(
    model: &TmModel,
    m: &Machine,
    depth: usize,
    out: &mut String,
    keep: &dyn Fn(&NodeId) -> bool,
    node: &dyn Fn(&NodeId, &mut String, &str),
) {
    let pad = "  ".repeat(depth);
    let _ = writeln!(out, "{pad}subgraph {} {{", quote(&format!("cluster_{}", m.id)));
    let _ = writeln!(out, "{pad}  label={};", quote(&m.name));
    let mut ids: Vec<&NodeId> =
        model.nodes().iter().filter(|n| n.machine == m.id && keep(&n.id)).map(|n| &n.id).collect();
    ids.sort();
    let inner = format!("{pad}  ");
    for id in ids {
        node(id, out, &inner);
    }
    let mut children: Vec<&Machine> = m.children.iter().filter_map(|c| model.machine(c.as_str())).collect();
    children.sort_by(|a, b| a.id.cmp(&b.id));
    for c in children {
        cluster_filtered(model, c, depth + 1, out, keep, node);
    }
    let _ = writeln!(out, "{pad}}}");
}

fn behavior_dot(name: &str, graph: &BehaviorGraph, opts: &RenderOptions) -> String {
    let mut out = String::new();
    header(name, opts, &mut out);
    let mut nodes: Vec<&String> = graph.nodes.iter().collect();
    nodes.sort();
    for n in nodes {
        let _ = writeln!(out, "  {} [shape=ellipse];", quote(n));
    }
    let mut edges: Vec<_> = graph.edges.iter().collect();
    edges.sort();
    for e in edges {
        let a = match (&e.condition, opts.show_conditions) {
            (Some(c), true) => vec![("label", quote(c))],
            _ => vec![],
        };
        let _ = writeln!(out, "  {} -> {}{};", quote(&e.from), quote(&e.to), attrs(&a));
    }
    out.push_str("}\n");
    out
}

/// DOT for a simplified view.
pub fn view_dot(name: &str, view: &SimplifiedView, opts: &RenderOptions) -> String {
    let mut out = String::new();
    header(name, opts, &mut out);
    if view.level == 3 {
        out.push_str("  compound=true;\n  node [shape=point, label=\"\"];\n");
    } else {
        out.push_str("  node [shape=box];\n");
    }
    let mut tops: Vec<&Machine> = view.machines.iter().filter(|m| m.parent.is_none()).collect();
    tops.sort_by(|a, b| a.id.cmp(&b.id));
    for m in tops {
        view_cluster(view, m, 1, &mut out);
    }
    let machine_of = |id: &NodeId| view.nodes.iter().find(|n| &n.id == id).map(|n| &n.machine);
    let related = |a: &MachineId, b: &MachineId| {
        let up = |x: &MachineId, y: &MachineId| {
            let mut cur = Some(y);
            while let Some(id) = cur {
                if id == x {
                    return true;
                }
                cur = view.machines.iter().find(|m| &m.id == id).and_then(|m| m.parent.as_ref());
            }
            false
        };
        up(a, b) || up(b, a)
    };
    let mut arcs: Vec<_> = view.arcs.iter().collect();
    arcs.sort();
    for arc in arcs {
        let mut a = Vec::new();
        if arc.style == ArcStyle::Dashed {
            a.push(("style", "dashed".to_owned()));
        }
        if let (true, Some(c)) = (opts.show_conditions, &arc.condition) {
            a.push(("label", quote(c)));
        }
        if arc.between_machines {
            if let (Some(ms), Some(md)) = (machine_of(&arc.src), machine_of(&arc.dst)) {
                if !related(ms, md) {
                    a.push(("ltail", quote(&format!("cluster_{ms}"))));
                    a.push(("lhead", quote(&format!("cluster_{md}"))));
                }
            }
        }
        let _ = writeln!(out, "  {} -> {}{};", quote(arc.src.as_str()), quote(arc.dst.as_str()), attrs(&a));
    }
    out.push_str("}\n");
    out
}

fn view_cluster(view: &SimplifiedView, m: &Machine, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let _ = writeln!(out, "{pad}subgraph {} {{", quote(&format!("cluster_{}", m.id)));
    let _ = writeln!(out, "{pad}  label={};", quote(&m.name));
    let mut nodes: Vec<_> = view.nodes.iter().filter(|n| n.machine == m.id).collect();
    nodes.sort_by(|a, b| a.id.cmp(&b.id));
    for n in nodes {
        if view.level == 3 {
            let _ = writeln!(out, "{pad}  {};", quote(n.id.as_str()));
        } else {
            let _ = writeln!(
                out,
                "{pad}  {} [label={}];",
                quote(n.id.as_str()),
                quote(&format!("{}\n{}", n.kind, n.thing))
            );
        }
    }
    let mut children: Vec<&Machine> =
        m.children.iter().filter_map(|c| view.machines.iter().find(|x| &x.id == c)).collect();
    children.sort_by(|a, b| a.id.cmp(&b.id));
    for c in children {
        view_cluster(view, c, depth + 1, out);
    }
    let _ = writeln!(out, "{pad}}}");
}
