//! Shared helpers for the integration tests: a random model generator and an
//! independent DOT syntax checker.
#![allow(dead_code)]

pub mod reach;
pub mod validator;

use proptest::prelude::*;
use proptest::sample::Index;
use tmlang::{ActionKind, ArcKind, BehaviorEdge, BehaviorGraph, EventDef, ModelBuilder, NodeId, TmModel};

pub const THINGS: [&str; 3] = ["a", "b", "c"];
pub const CONDITIONS: [&str; 2] = ["x", "y"];
pub const LABELS: [&str; 4] = ["note", "say \"hi\"", "back\\slash", "two\nlines"];

#[derive(Debug, Clone)]
pub struct RawNode {
    pub machine: Index,
    pub kind: usize,
    pub thing: usize,
    pub alias: bool,
    pub label: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RawArc {
    pub trigger: bool,
    pub src: Index,
    pub dst: Index,
    pub condition: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RawEvent {
    pub nodes: Vec<Index>,
    /// `None`: arcs induced from the nodes; otherwise a pick among arcs inside.
    pub arcs: Option<Vec<Index>>,
    pub order: Option<i64>,
}

#[derive(Debug, Clone)]
pub struct RawModel {
    /// `(nested, parent pick)` per machine; machine 0 is always top level.
    pub machines: Vec<(bool, Index)>,
    pub nodes: Vec<RawNode>,
    pub arcs: Vec<RawArc>,
    pub events: Vec<RawEvent>,
    pub behavior: Option<Vec<(Index, Index)>>,
}

fn raw_node() -> impl Strategy<Value = RawNode> {
    (
        any::<Index>(),
        0..5usize,
        0..THINGS.len(),
        prop::bool::weighted(0.2),
        prop::option::weighted(0.2, 0..LABELS.len()),
    )
        .prop_map(|(machine, kind, thing, alias, label)| RawNode { machine, kind, thing, alias, label })
}

fn raw_arc() -> impl Strategy<Value = RawArc> {
    (prop::bool::weighted(0.3), any::<Index>(), any::<Index>(), prop::option::weighted(0.35, 0..CONDITIONS.len()))
        .prop_map(|(trigger, src, dst, condition)| RawArc { trigger, src, dst, condition })
}

fn raw_event() -> impl Strategy<Value = RawEvent> {
    (
        prop::collection::vec(any::<Index>(), 1..5),
        prop::option::weighted(0.3, prop::collection::vec(any::<Index>(), 0..4)),
        prop::option::of(0..20i64),
    )
        .prop_map(|(nodes, arcs, order)| RawEvent { nodes, arcs, order })
}

/// Random raw model with up to `max_nodes` nodes.
pub fn raw_model(max_nodes: usize, with_events: bool) -> impl Strategy<Value = RawModel> {
    let events = if with_events { 0..5usize } else { 0..1usize };
    (
        prop::collection::vec((prop::bool::weighted(0.4), any::<Index>()), 1..5),
        prop::collection::vec(raw_node(), 0..=max_nodes),
        prop::collection::vec(raw_arc(), 0..=2 * max_nodes),
        prop::collection::vec(raw_event(), events),
        prop::option::weighted(0.6, prop::collection::vec((any::<Index>(), any::<Index>()), 0..6)),
    )
        .prop_map(|(machines, nodes, arcs, events, behavior)| RawModel { machines, nodes, arcs, events, behavior })
}

pub fn kind(i: usize) -> ActionKind {
    ActionKind::ALL[i % 5]
}

/// Builds the model, silently dropping pieces the builder rejects. With
/// `dag`, arcs only run from earlier to later declared nodes.
pub fn build(raw: &RawModel, dag: bool) -> TmModel {
    let mut b = ModelBuilder::new("random");
    let mut machines: Vec<String> = Vec::new();
    for (i, (nested, pick)) in raw.machines.iter().enumerate() {
        let name = format!("M{i}");
        let parent = (*nested && !machines.is_empty()).then(|| pick.get(&machines).clone());
        if let Ok(id) = b.machine(&name, parent.as_deref()) {
            machines.push(id.to_string());
        }
    }
    let mut nodes: Vec<NodeId> = Vec::new();
    for (i, n) in raw.nodes.iter().enumerate() {
        let machine = n.machine.get(&machines);
        let alias = n.alias.then(|| format!("n{i}"));
        if let Ok(id) = b.node(machine, kind(n.kind), THINGS[n.thing], alias.as_deref()) {
            if let Some(l) = n.label {
                b.set_label(id.as_str(), LABELS[l]).unwrap();
            }
            nodes.push(id);
        }
    }
    let mut arcs: Vec<(NodeId, NodeId, tmlang::ArcId)> = Vec::new();
    if !nodes.is_empty() {
        for a in &raw.arcs {
            let (mut s, mut d) = (a.src.index(nodes.len()), a.dst.index(nodes.len()));
            if dag {
                if s == d {
                    continue;
                }
                if s > d {
                    std::mem::swap(&mut s, &mut d);
                }
            }
            let kind = if a.trigger { ArcKind::Trigger } else { ArcKind::Flow };
            let cond = a.condition.map(|c| CONDITIONS[c]);
            if let Ok(id) = b.arc(kind, nodes[s].as_str(), nodes[d].as_str(), cond) {
                arcs.push((nodes[s].clone(), nodes[d].clone(), id));
            }
        }
    }
    let mut names = Vec::new();
    if !nodes.is_empty() {
        for (k, e) in raw.events.iter().enumerate() {
            let name = format!("E{k}");
            let region: Vec<NodeId> = e.nodes.iter().map(|i| i.get(&nodes).clone()).collect();
            match &e.arcs {
                None => {
                    let refs: Vec<&str> = region.iter().map(NodeId::as_str).collect();
                    b.event_induced(&name, &refs, e.order);
                }
                Some(picks) => {
                    let inside: Vec<&tmlang::ArcId> = arcs
                        .iter()
                        .filter(|(s, d, _)| region.contains(s) && region.contains(d))
                        .map(|(.., id)| id)
                        .collect();
                    let chosen: Vec<tmlang::ArcId> = if inside.is_empty() {
                        vec![]
                    } else {
                        picks.iter().map(|p| (*p.get(&inside)).clone()).collect()
                    };
                    b.event(EventDef { order: e.order, ..EventDef::new(&name, region, chosen) });
                }
            }
            names.push(name);
        }
    }
    if let (Some(edges), false) = (&raw.behavior, names.is_empty()) {
        let edges: Vec<BehaviorEdge> = edges
            .iter()
            .map(|(f, t)| (f.get(&names), t.get(&names)))
            .filter(|(f, t)| f != t)
            .map(|(f, t)| BehaviorEdge::new(f, t))
            .collect();
        b.behavior(BehaviorGraph::new(names.clone(), edges).unwrap());
    }
    b.build().unwrap()
}

pub fn arb_model(max_nodes: usize) -> impl Strategy<Value = TmModel> {
    raw_model(max_nodes, false).prop_map(|r| build(&r, false))
}

pub fn arb_model_with_events(max_nodes: usize) -> impl Strategy<Value = TmModel> {
    raw_model(max_nodes, true).prop_map(|r| build(&r, false))
}

pub fn arb_dag(max_nodes: usize) -> impl Strategy<Value = TmModel> {
    raw_model(max_nodes, false).prop_map(|r| build(&r, true))
}

// ---------------------------------------------------------------------------
// DOT syntax checker, written from the published Graphviz grammar:
//
//   graph     : [strict] (graph | digraph) [ID] '{' stmt_list '}'
//   stmt_list : [stmt [';'] stmt_list]
//   stmt      : node_stmt | edge_stmt | attr_stmt | ID '=' ID | subgraph
//   attr_stmt : (graph | node | edge) attr_list
//   attr_list : '[' [a_list] ']' [attr_list]
//   a_list    : ID '=' ID [(';' | ',')] [a_list]
//   edge_stmt : (node_id | subgraph) edgeRHS [attr_list]
//   edgeRHS   : edgeop (node_id | subgraph) [edgeRHS]
//   node_stmt : node_id [attr_list]
//   node_id   : ID [':' ID [':' ID]]
//   subgraph  : [subgraph [ID]] '{' stmt_list '}'
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum DotTok {
    Id(String),
    Keyword(String),
    Punct(&'static str),
}

fn dot_lex(text: &str) -> Result<Vec<DotTok>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '/' && chars.get(i + 1) == Some(&'/') || c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') if chars.get(i + 1) == Some(&'"') => {
                        s.push('"');
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push(DotTok::Id(s));
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(DotTok::Punct("->"));
            i += 2;
        } else if c == '-' && chars.get(i + 1) == Some(&'-') {
            out.push(DotTok::Punct("--"));
            i += 2;
        } else if let Some(p) = ["{", "}", "[", "]", ";", ",", "=", ":"].into_iter().find(|p| p.starts_with(c)) {
            out.push(DotTok::Punct(p));
            i += 1;
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let lower = word.to_lowercase();
            if ["strict", "graph", "digraph", "node", "edge", "subgraph"].contains(&lower.as_str()) {
                out.push(DotTok::Keyword(lower));
            } else {
                out.push(DotTok::Id(word));
            }
        } else if c.is_ascii_digit() || c == '.' || c == '-' {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            out.push(DotTok::Id(chars[start..i].iter().collect()));
        } else {
            return Err(format!("unexpected character {c:?}"));
        }
    }
    Ok(out)
}

struct DotParser {
    toks: Vec<DotTok>,
    pos: usize,
    directed: bool,
}

impl DotParser {
    fn peek(&self) -> Option<&DotTok> {
        self.toks.get(self.pos)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Some(DotTok::Punct(q)) if *q == p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), String> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(format!("expected `{p}` at token {} ({:?})", self.pos, self.peek()))
        }
    }

    fn eat_keyword(&mut self, k: &str) -> bool {
        if matches!(self.peek(), Some(DotTok::Keyword(q)) if q == k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.peek() {
            Some(DotTok::Id(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            other => Err(format!("expected ID at token {}, found {other:?}", self.pos)),
        }
    }

    fn graph(&mut self) -> Result<(), String> {
        self.eat_keyword("strict");
        if self.eat_keyword("digraph") {
            self.directed = true;
        } else if !self.eat_keyword("graph") {
            return Err("expected `graph` or `digraph`".into());
        }
        if matches!(self.peek(), Some(DotTok::Id(_))) {
            self.id()?;
        }
        self.expect_punct("{")?;
        self.stmt_list()?;
        self.expect_punct("}")?;
        if self.pos != self.toks.len() {
            return Err("trailing tokens after graph".into());
        }
        Ok(())
    }

    fn stmt_list(&mut self) -> Result<(), String> {
        while !matches!(self.peek(), Some(DotTok::Punct("}")) | None) {
            self.stmt()?;
            self.eat_punct(";");
        }
        Ok(())
    }

    fn attr_list(&mut self) -> Result<(), String> {
        while self.eat_punct("[") {
            while !self.eat_punct("]") {
                self.id()?;
                self.expect_punct("=")?;
                self.id()?;
                if !self.eat_punct(",") {
                    self.eat_punct(";");
                }
            }
        }
        Ok(())
    }

    fn subgraph(&mut self) -> Result<(), String> {
        if self.eat_keyword("subgraph") && matches!(self.peek(), Some(DotTok::Id(_))) {
            self.id()?;
        }
        self.expect_punct("{")?;
        self.stmt_list()?;
        self.expect_punct("}")
    }

    fn node_or_subgraph(&mut self) -> Result<(), String> {
        match self.peek() {
            Some(DotTok::Keyword(k)) if k == "subgraph" => self.subgraph(),
            Some(DotTok::Punct("{")) => self.subgraph(),
            _ => {
                self.id()?;
                if self.eat_punct(":") {
                    self.id()?;
                    if self.eat_punct(":") {
                        self.id()?;
                    }
                }
                Ok(())
            }
        }
    }

    fn stmt(&mut self) -> Result<(), String> {
        for k in ["graph", "node", "edge"] {
            if self.eat_keyword(k) {
                if !matches!(self.peek(), Some(DotTok::Punct("["))) {
                    return Err(format!("`{k}` must be followed by an attribute list"));
                }
                return self.attr_list();
            }
        }
        if let (Some(DotTok::Id(_)), Some(DotTok::Punct("="))) = (self.toks.get(self.pos), self.toks.get(self.pos + 1))
        {
            self.pos += 2;
            self.id()?;
            return Ok(());
        }
        self.node_or_subgraph()?;
        let op = if self.directed { "->" } else { "--" };
        while self.eat_punct(op) {
            self.node_or_subgraph()?;
        }
        if matches!(self.peek(), Some(DotTok::Punct(p)) if *p == "->" || *p == "--") {
            return Err("edge operator does not match graph kind".into());
        }
        self.attr_list()
    }
}

/// Accepts exactly the DOT language (modulo HTML labels, which the renderer
/// never emits).
pub fn check_dot(text: &str) -> Result<(), String> {
    let toks = dot_lex(text)?;
    DotParser { toks, pos: 0, directed: false }.graph()
}
