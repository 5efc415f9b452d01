//! Canonical text form. Parsing the output yields an equal model.

use std::fmt::Write;

use crate::model::{default_local_id, ArcKind, Machine, ModelArc, TmModel};

/// Pretty-prints `model`. Within each machine, actions come first in
/// declaration order, then sub-machines. Conditions on declared behavior
/// edges have no surface syntax and are not printed.
pub fn print(model: &TmModel) -> String {
    let mut blocks: Vec<String> = Vec::new();
    for m in model.top_level_machines() {
        let mut s = String::new();
        machine(model, m, 1, &mut s);
        blocks.push(s);
    }

    let arcs: Vec<String> = model.flow_arcs().iter().chain(model.trigger_arcs()).map(arc_line).collect();
    if !arcs.is_empty() {
        blocks.push(arcs.concat());
    }

    for ev in model.events() {
        let mut s = format!("  event {}", ev.name);
        if let Some(n) = ev.order {
            let _ = write!(s, " order {n}");
        }
        s.push_str(" {\n");
        let nodes: Vec<&str> = ev.region_nodes.iter().map(|n| n.as_str()).collect();
        let _ = writeln!(s, "    nodes: {};", nodes.join(", "));
        if ev.region_arcs != model.induced_arcs(&ev.region_nodes) {
            let refs: Vec<String> = ev
                .region_arcs
                .iter()
                .filter_map(|id| model.arc(id.as_str()))
                .map(|a| {
                    let twin = model.arcs().any(|b| b.kind != a.kind && b.src == a.src && b.dst == a.dst);
                    let prefix = if twin { format!("{} ", a.kind.as_str()) } else { String::new() };
                    format!("{prefix}{} -> {}", a.src, a.dst)
                })
                .collect();
            if refs.is_empty() {
                s.push_str("    arcs: ;\n");
            } else {
                let _ = writeln!(s, "    arcs: {};", refs.join(", "));
            }
        }
        s.push_str("  }\n");
        blocks.push(s);
    }

    if let Some(g) = model.declared_behavior() {
        let mut s = String::from("  behavior {\n");
        for e in &g.edges {
            let _ = writeln!(s, "    {} -> {};", e.from, e.to);
        }
        s.push_str("  }\n");
        blocks.push(s);
    }

    format!("model {} {{\n{}}}\n", model.name(), blocks.join("\n"))
}

fn machine(model: &TmModel, m: &Machine, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let _ = writeln!(out, "{pad}machine {} {{", m.name);
    for n in model.nodes().iter().filter(|n| n.machine == m.id) {
        let _ = write!(out, "{pad}  {} {}", n.kind, n.thing);
        if n.local_id() != default_local_id(n.kind, &n.thing) {
            let _ = write!(out, " as {}", n.local_id());
        }
        if let Some(label) = &n.label {
            let _ = write!(out, " {}", quote(label));
        }
        out.push_str(";\n");
    }
    for child in &m.children {
        let c = model.machine(child.as_str()).expect("child machine exists");
        machine(model, c, depth + 1, out);
    }
    let _ = writeln!(out, "{pad}}}");
}

fn arc_line(a: &ModelArc) -> String {
    let kw = match a.kind {
        ArcKind::Flow => "flow",
        ArcKind::Trigger => "trigger",
    };
    match &a.condition {
        Some(c) => format!("  {kw} {} -> {} on {};\n", a.src, a.dst, quote(c)),
        None => format!("  {kw} {} -> {};\n", a.src, a.dst),
    }
}

fn quote(s: &str) -> String {
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
