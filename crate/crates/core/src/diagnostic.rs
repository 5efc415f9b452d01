use std::fmt;

use serde::{Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

/// Diagnostic codes. `R1`..`R6` are the structural legality rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    /// Intra-machine stage order.
    R1,
    /// Cross-machine flow must be transfer to transfer.
    R2,
    /// No flow may reach an output transfer without passing a release.
    R3,
    /// Trigger targets must be create or process.
    R4,
    /// Branch group sanity.
    R5,
    /// A flow keeps its thing.
    R6,
    /// A transfer node is a single port per direction.
    Port,
    EventEmpty,
    EventUnknownId,
    EventArcOutside,
    EventDisconnected,
    EventDuplicate,
    EventCoverage,
    EventSameRegion,
    BehaviorNotDerivable,
    BehaviorUndeclared,
    TraceOrder,
    TraceUnknownEvent,
    DroppedTrigger,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::R1 => "R1",
            Code::R2 => "R2",
            Code::R3 => "R3",
            Code::R4 => "R4",
            Code::R5 => "R5",
            Code::R6 => "R6",
            Code::Port => "P1",
            Code::EventEmpty => "EV1",
            Code::EventUnknownId => "EV2",
            Code::EventArcOutside => "EV3",
            Code::EventDisconnected => "EV4",
            Code::EventDuplicate => "EV5",
            Code::EventCoverage => "EV6",
            Code::EventSameRegion => "EV7",
            Code::BehaviorNotDerivable => "BH1",
            Code::BehaviorUndeclared => "BH2",
            Code::TraceOrder => "TR1",
            Code::TraceUnknownEvent => "TR2",
            Code::DroppedTrigger => "SV1",
        }
    }

    pub fn is_structural_rule(self) -> bool {
        matches!(self, Code::R1 | Code::R2 | Code::R3 | Code::R4 | Code::R5 | Code::R6)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Code {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    /// Offending ids, most specific first.
    pub ids: Vec<String>,
}

impl Diagnostic {
    pub fn error(code: Code, message: impl Into<String>, ids: Vec<String>) -> Self {
        Self { severity: Severity::Error, code, message: message.into(), ids }
    }

    pub fn warning(code: Code, message: impl Into<String>, ids: Vec<String>) -> Self {
        Self { severity: Severity::Warning, code, message: message.into(), ids }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]: {}", self.severity.as_str(), self.code, self.message)
    }
}

/// Sorts by severity, code, then first offending id.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        (a.severity, a.code.as_str(), &a.ids, &a.message).cmp(&(b.severity, b.code.as_str(), &b.ids, &b.message))
    });
}

pub fn error_count(diags: &[Diagnostic]) -> usize {
    diags.iter().filter(|d| d.is_error()).count()
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
