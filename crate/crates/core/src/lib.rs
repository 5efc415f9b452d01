//! Thinging-machine process models: a textual DSL, structural validation,
//! events and behavior, token simulation, simplified views and DOT output.

pub mod diagnostic;
pub mod events;
pub mod fixtures;
pub mod model;
pub mod parse;
pub mod render;
pub mod sim;
pub mod simplify;
pub mod validate;

pub use diagnostic::{Code, Diagnostic, Severity};
pub use events::{check_events, compare_behavior, derive_behavior, BehaviorEdge, BehaviorGraph, EventDef};
pub use model::{
    ActionKind, ActionNode, ArcId, ArcKind, Machine, MachineId, ModelArc, ModelBuilder, ModelError, NodeId, TmModel,
};
pub use parse::{parse, parse_source, print, ParseError, Parsed, SourceSpan};
pub use render::{render, to_dot, Format, RankDir, RenderError, RenderOptions, View};
pub use sim::{check_trace, default_seeds, enumerate, run, EnumerateOptions, Scenario, SimError, Terminal, Trace};
pub use simplify::{simplify, ArcStyle, SimplifiedView, SimplifyError, ViewArc};
pub use validate::{branch_groups, machine_reachability, validate_model, BranchGroup};
