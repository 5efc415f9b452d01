//! Recursive-descent syntax pass producing an unresolved tree.

use super::lexer::{Tok, Token};
use super::{ParseError, SourceSpan};
use crate::model::{ActionKind, ArcKind};

#[derive(Debug)]
pub(crate) struct ModelAst {
    pub name: String,
    pub machines: Vec<MachineAst>,
    pub arcs: Vec<ArcAst>,
    pub events: Vec<EventAst>,
    pub behaviors: Vec<BehaviorAst>,
}

#[derive(Debug)]
pub(crate) struct MachineAst {
    pub name: String,
    pub span: SourceSpan,
    pub actions: Vec<ActionAst>,
    pub children: Vec<MachineAst>,
}

#[derive(Debug)]
pub(crate) struct ActionAst {
    pub kind: ActionKind,
    pub thing: String,
    pub alias: Option<String>,
    pub label: Option<String>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub(crate) struct RefAst {
    pub parts: Vec<String>,
    pub span: SourceSpan,
}

impl RefAst {
    pub fn text(&self) -> String {
        self.parts.join(".")
    }
}

#[derive(Debug)]
pub(crate) struct ArcAst {
    pub kind: ArcKind,
    pub src: RefAst,
    pub dst: RefAst,
    pub condition: Option<String>,
    pub span: SourceSpan,
}

#[derive(Debug)]
pub(crate) struct ArcRefAst {
    pub kind: Option<ArcKind>,
    pub src: RefAst,
    pub dst: RefAst,
    pub span: SourceSpan,
}

#[derive(Debug)]
pub(crate) struct EventAst {
    pub name: String,
    pub order: Option<i64>,
    pub nodes: Vec<RefAst>,
    pub arcs: Option<Vec<ArcRefAst>>,
    pub span: SourceSpan,
}

#[derive(Debug)]
pub(crate) struct BehaviorAst {
    pub edges: Vec<(String, String, SourceSpan)>,
    pub span: SourceSpan,
}

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub fn new(toks: Vec<Token>) -> Self {
        Self { toks, pos: 0 }
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        let expected: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
        ParseError::new(
            t.span.clone(),
            format!("expected {}, found {}", expected.join(" or "), t.tok.describe()),
            expected,
        )
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceSpan> {
        if self.peek().tok == tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&[&tok.describe()]))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.is_keyword(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&[&format!("`{kw}`")]))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.bump().span))
            }
            _ => Err(self.unexpected(&[what])),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match &self.peek().tok {
            Tok::Str(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(&["string"])),
        }
    }

    pub fn model(&mut self) -> PResult<ModelAst> {
        self.keyword("model")?;
        let (name, _) = self.ident("model name")?;
        self.expect(Tok::LBrace)?;
        let mut ast = ModelAst { name, machines: vec![], arcs: vec![], events: vec![], behaviors: vec![] };
        loop {
            match &self.peek().tok {
                Tok::RBrace => break,
                Tok::Ident(kw) => match kw.as_str() {
                    "machine" => ast.machines.push(self.machine()?),
                    "flow" | "trigger" => ast.arcs.push(self.arc()?),
                    "event" => ast.events.push(self.event()?),
                    "behavior" => ast.behaviors.push(self.behavior()?),
                    _ => return Err(self.unexpected(ITEM)),
                },
                _ => return Err(self.unexpected(ITEM)),
            }
        }
        self.expect(Tok::RBrace)?;
        if self.peek().tok != Tok::Eof {
            return Err(self.unexpected(&["end of input"]));
        }
        Ok(ast)
    }

    fn machine(&mut self) -> PResult<MachineAst> {
        self.keyword("machine")?;
        let (name, span) = self.ident("machine name")?;
        self.expect(Tok::LBrace)?;
        let mut m = MachineAst { name, span, actions: vec![], children: vec![] };
        loop {
            match &self.peek().tok {
                Tok::RBrace => break,
                Tok::Ident(kw) if kw == "machine" => m.children.push(self.machine()?),
                Tok::Ident(kw) if ActionKind::from_keyword(kw).is_some() => m.actions.push(self.action()?),
                _ => return Err(self.unexpected(MACHINE_ITEM)),
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(m)
    }

    fn action(&mut self) -> PResult<ActionAst> {
        let (kw, start) = self.ident("action kind")?;
        let kind = ActionKind::from_keyword(&kw).expect("checked by caller");
        let (thing, mut last) = self.ident("thing name")?;
        let alias = if self.is_keyword("as") {
            self.bump();
            let (alias, alias_span) = self.ident("node id")?;
            last = alias_span;
            Some(alias)
        } else {
            None
        };
        let label = match self.peek().tok {
            Tok::Str(_) => Some(self.string()?),
            _ => None,
        };
        self.expect(Tok::Semi)?;
        Ok(ActionAst { kind, thing, alias, label, span: join(start, &last) })
    }

    fn reference(&mut self) -> PResult<RefAst> {
        let (first, span) = self.ident("node reference")?;
        let mut parts = vec![first];
        let mut last = span.clone();
        while self.peek().tok == Tok::Dot {
            self.bump();
            let (p, s) = self.ident("identifier after `.`")?;
            last = s;
            parts.push(p);
        }
        Ok(RefAst { parts, span: join(span, &last) })
    }

    fn arc(&mut self) -> PResult<ArcAst> {
        let (kw, span) = self.ident("`flow` or `trigger`")?;
        let kind = if kw == "flow" { ArcKind::Flow } else { ArcKind::Trigger };
        let src = self.reference()?;
        self.expect(Tok::Arrow)?;
        let dst = self.reference()?;
        let condition = if self.is_keyword("on") {
            self.bump();
            Some(self.string()?)
        } else {
            None
        };
        self.expect(Tok::Semi)?;
        Ok(ArcAst { kind, src, dst, condition, span })
    }

    fn arc_ref(&mut self) -> PResult<ArcRefAst> {
        let span = self.peek().span.clone();
        // `flow a -> b` vs a bare reference that happens to be named `flow`
        let kind = match (&self.peek().tok, self.peek_at(1)) {
            (Tok::Ident(k), Tok::Ident(_)) if k == "flow" => Some(ArcKind::Flow),
            (Tok::Ident(k), Tok::Ident(_)) if k == "trigger" => Some(ArcKind::Trigger),
            _ => None,
        };
        if kind.is_some() {
            self.bump();
        }
        let src = self.reference()?;
        self.expect(Tok::Arrow)?;
        let dst = self.reference()?;
        Ok(ArcRefAst { kind, src, dst, span })
    }

    fn event(&mut self) -> PResult<EventAst> {
        self.keyword("event")?;
        let (name, span) = self.ident("event name")?;
        let order = if self.is_keyword("order") {
            self.bump();
            match self.peek().tok {
                Tok::Int(n) => {
                    self.bump();
                    Some(n)
                }
                _ => return Err(self.unexpected(&["integer"])),
            }
        } else {
            None
        };
        self.expect(Tok::LBrace)?;
        self.keyword("nodes")?;
        self.expect(Tok::Colon)?;
        let mut nodes = vec![self.reference()?];
        while self.peek().tok == Tok::Comma {
            self.bump();
            nodes.push(self.reference()?);
        }
        self.expect(Tok::Semi)?;
        let arcs = if self.is_keyword("arcs") {
            self.bump();
            self.expect(Tok::Colon)?;
            let mut arcs = Vec::new();
            if self.peek().tok != Tok::Semi {
                arcs.push(self.arc_ref()?);
            }
            while !arcs.is_empty() && self.peek().tok == Tok::Comma {
                self.bump();
                arcs.push(self.arc_ref()?);
            }
            self.expect(Tok::Semi)?;
            Some(arcs)
        } else {
            None
        };
        if self.peek().tok != Tok::RBrace {
            let expected: &[&str] = if arcs.is_none() { &["`arcs`", "`}`"] } else { &["`}`"] };
            return Err(self.unexpected(expected));
        }
        self.bump();
        Ok(EventAst { name, order, nodes, arcs, span })
    }

    fn behavior(&mut self) -> PResult<BehaviorAst> {
        let span = self.keyword("behavior")?;
        self.expect(Tok::LBrace)?;
        let mut edges = Vec::new();
        while self.peek().tok != Tok::RBrace {
            let (from, from_span) = self.ident("event name or `}`")?;
            self.expect(Tok::Arrow)?;
            let (to, _) = self.ident("event name")?;
            self.expect(Tok::Semi)?;
            edges.push((from, to, from_span));
        }
        self.bump();
        Ok(BehaviorAst { edges, span })
    }
}

const ITEM: &[&str] = &["`machine`", "`flow`", "`trigger`", "`event`", "`behavior`", "`}`"];
const MACHINE_ITEM: &[&str] = &["`machine`", "action kind", "`}`"];

/// Span from the start of `first` to the end of `last` when both sit on one
/// line; otherwise just `first`.
fn join(first: SourceSpan, last: &SourceSpan) -> SourceSpan {
    if first.line == last.line && last.column >= first.column {
        SourceSpan { length: last.column + last.length - first.column, ..first }
    } else {
        first
    }
}
