//! Textual DSL: lexer, parser and canonical printer.
//!
//! ```text
//! model submit {
//!   machine Customer {
//!     create order;
//!     release order;
//!   }
//!   flow Customer.create_order -> Customer.release_order;
//! }
//! ```

mod lexer;
mod parser;
mod printer;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::diagnostic::Diagnostic;
use crate::events::{BehaviorEdge, BehaviorGraph, EventDef};
use crate::model::{ArcId, ArcKind, ModelBuilder, NodeId, TmModel};
use parser::{MachineAst, ModelAst, Parser, RefAst};

pub use printer::print;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SourceSpan {
    pub file: String,
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    /// Token descriptions that would have been accepted, if known.
    pub expected: Vec<String>,
}

impl ParseError {
    pub(crate) fn new(span: SourceSpan, message: impl Into<String>, expected: Vec<String>) -> Self {
        Self { span, message: message.into(), expected }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

impl std::error::Error for ParseError {}

/// A parsed model together with where each declaration came from.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub model: TmModel,
    /// Spans of machines, nodes and arcs, keyed by id.
    pub spans: BTreeMap<String, SourceSpan>,
    /// Spans of event declarations, keyed by event name.
    pub event_spans: BTreeMap<String, SourceSpan>,
}

impl Parsed {
    /// Best source location for a diagnostic: the first of its ids that was
    /// declared in the source.
    pub fn span_for(&self, diag: &Diagnostic) -> Option<&SourceSpan> {
        diag.ids.iter().find_map(|id| self.spans.get(id).or_else(|| self.event_spans.get(id)))
    }
}

/// Parses a model. Reference resolution errors are all reported; syntax
/// errors stop at the first one.
pub fn parse(text: &str) -> Result<TmModel, Vec<ParseError>> {
    parse_source("<input>", text).map(|p| p.model)
}

/// Like [`parse`], naming `file` in spans and keeping declaration spans.
pub fn parse_source(file: &str, text: &str) -> Result<Parsed, Vec<ParseError>> {
    let toks = lexer::tokenize(file, text).map_err(|e| vec![e])?;
    let start = toks[0].span.clone();
    let ast = Parser::new(toks).model().map_err(|e| vec![e])?;
    Resolver::default().run(ast, start)
}

#[derive(Default)]
struct Resolver {
    errors: Vec<ParseError>,
    spans: BTreeMap<String, SourceSpan>,
    event_spans: BTreeMap<String, SourceSpan>,
    /// `(full id, local id)` of every declared node.
    nodes: Vec<(NodeId, String)>,
    arcs: Vec<(ArcKind, NodeId, NodeId, ArcId)>,
}

impl Resolver {
    fn error(&mut self, span: &SourceSpan, message: impl Into<String>) {
        self.errors.push(ParseError::new(span.clone(), message, vec![]));
    }

    fn run(mut self, ast: ModelAst, start: SourceSpan) -> Result<Parsed, Vec<ParseError>> {
        let mut b = ModelBuilder::new(ast.name);
        for m in &ast.machines {
            self.machine(&mut b, m, None);
        }

        for arc in &ast.arcs {
            let (src, dst) = (self.resolve(&arc.src), self.resolve(&arc.dst));
            let (Some(src), Some(dst)) = (src, dst) else { continue };
            match b.arc(arc.kind, src.as_str(), dst.as_str(), arc.condition.as_deref()) {
                Ok(id) => {
                    self.spans.insert(id.to_string(), arc.span.clone());
                    self.arcs.push((arc.kind, src, dst, id));
                }
                Err(e) => self.error(&arc.span, e.to_string()),
            }
        }

        let mut names: Vec<String> = Vec::new();
        for ev in &ast.events {
            if names.contains(&ev.name) {
                self.error(&ev.span, format!("event `{}` declared twice", ev.name));
                continue;
            }
            names.push(ev.name.clone());
            self.event_spans.insert(ev.name.clone(), ev.span.clone());
            let nodes: Vec<NodeId> = ev.nodes.iter().filter_map(|r| self.resolve(r)).collect();
            match &ev.arcs {
                None => {
                    let refs: Vec<&str> = nodes.iter().map(NodeId::as_str).collect();
                    b.event_induced(&ev.name, &refs, ev.order);
                }
                Some(arc_refs) => {
                    let mut arcs = BTreeSet::new();
                    for r in arc_refs {
                        let (Some(src), Some(dst)) = (self.resolve(&r.src), self.resolve(&r.dst)) else {
                            continue;
                        };
                        let found: Vec<&ArcId> = self
                            .arcs
                            .iter()
                            .filter(|(k, s, d, _)| s == &src && d == &dst && r.kind.is_none_or(|rk| rk == *k))
                            .map(|(.., id)| id)
                            .collect();
                        match found.as_slice() {
                            [id] => {
                                arcs.insert((*id).clone());
                            }
                            [] => self.error(&r.span, format!("no arc from `{src}` to `{dst}`")),
                            _ => self.errors.push(ParseError::new(
                                r.span.clone(),
                                format!("both a flow and a trigger run from `{src}` to `{dst}`"),
                                vec!["`flow`".into(), "`trigger`".into()],
                            )),
                        }
                    }
                    b.event(EventDef { order: ev.order, ..EventDef::new(&ev.name, nodes, arcs) });
                }
            }
        }

        for extra in ast.behaviors.iter().skip(1) {
            self.error(&extra.span, "only one behavior block is allowed");
        }
        if let Some(beh) = ast.behaviors.first() {
            let mut edges = Vec::new();
            for (from, to, span) in &beh.edges {
                if let Some(unknown) = [from, to].into_iter().find(|e| !names.contains(e)) {
                    self.error(span, format!("behavior names undeclared event `{unknown}`"));
                } else if from == to {
                    self.error(span, format!("behavior edge from `{from}` to itself"));
                } else {
                    edges.push(BehaviorEdge::new(from, to));
                }
            }
            match BehaviorGraph::new(names.clone(), edges) {
                Ok(g) => b.behavior(g),
                Err(e) => self.error(&beh.span, e.to_string()),
            }
        }

        if !self.errors.is_empty() {
            self.errors.sort_by_key(|e| (e.span.line, e.span.column));
            return Err(self.errors);
        }
        match b.build() {
            Ok(model) => Ok(Parsed { model, spans: self.spans, event_spans: self.event_spans }),
            Err(e) => Err(vec![ParseError::new(start, e.to_string(), vec![])]),
        }
    }

    fn machine(&mut self, b: &mut ModelBuilder, m: &MachineAst, parent: Option<&str>) {
        let id = match b.machine(&m.name, parent) {
            Ok(id) => id,
            Err(e) => return self.error(&m.span, e.to_string()),
        };
        self.spans.insert(id.to_string(), m.span.clone());
        for a in &m.actions {
            match b.node(id.as_str(), a.kind, &a.thing, a.alias.as_deref()) {
                Ok(nid) => {
                    if let Some(label) = &a.label {
                        b.set_label(nid.as_str(), label.clone()).expect("node just added");
                    }
                    let local = nid.as_str()[id.as_str().len() + 1..].to_owned();
                    self.spans.insert(nid.to_string(), a.span.clone());
                    self.nodes.push((nid, local));
                }
                Err(e) => self.error(&a.span, e.to_string()),
            }
        }
        for child in &m.children {
            self.machine(b, child, Some(id.as_str()));
        }
    }

    fn resolve(&mut self, r: &RefAst) -> Option<NodeId> {
        let text = r.text();
        if r.parts.len() > 1 {
            if self.nodes.iter().any(|(id, _)| id.as_str() == text) {
                return Some(NodeId::from(text));
            }
            self.error(&r.span, format!("unresolved reference `{text}`"));
            return None;
        }
        let hits: Vec<&NodeId> = self.nodes.iter().filter(|(_, local)| local == &text).map(|(id, _)| id).collect();
        match hits.as_slice() {
            [one] => Some((*one).clone()),
            [] => {
                self.error(&r.span, format!("unresolved reference `{text}`"));
                None
            }
            many => {
                let expected: Vec<String> = many.iter().map(|id| id.to_string()).collect();
                let message = format!("ambiguous reference `{text}` matches {}", expected.join(", "));
                self.errors.push(ParseError::new(r.span.clone(), message, expected));
                None
            }
        }
    }
}
