//! Diagnostic printing with optional ANSI color.

use std::io::IsTerminal;

use serde_json::json;
use tmlang::{Diagnostic, ParseError, Parsed, Severity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Stdout,
    Stderr,
}

/// Resolves `TM_COLOR` (`auto`, `always`, `never`; default `auto`).
pub fn use_color(stream: Stream) -> bool {
    match std::env::var("TM_COLOR").as_deref() {
        Ok("always") => true,
        Ok("never") => false,
        _ => match stream {
            Stream::Stdout => std::io::stdout().is_terminal(),
            Stream::Stderr => std::io::stderr().is_terminal(),
        },
    }
}

fn paint(text: &str, code: &str, color: bool) -> String {
    if color {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_owned()
    }
}

fn severity_word(sev: Severity, color: bool) -> String {
    match sev {
        Severity::Error => paint("error", "1;31", color),
        Severity::Warning => paint("warning", "1;33", color),
    }
}

/// `file:line:col: severity[code]: message`, dropping the position when the
/// diagnostic names nothing declared in the source.
pub fn diagnostic_line(file: &str, parsed: Option<&Parsed>, d: &Diagnostic, color: bool) -> String {
    let loc = match parsed.and_then(|p| p.span_for(d)) {
        Some(span) => span.to_string(),
        None => file.to_owned(),
    };
    format!("{loc}: {}[{}]: {}", severity_word(d.severity, color), d.code, d.message)
}

pub fn parse_error_line(e: &ParseError, color: bool) -> String {
    let mut line = format!("{}: {}: {}", e.span, severity_word(Severity::Error, color), e.message);
    if !e.expected.is_empty() && !e.message.contains("expected") {
        line.push_str(&format!(" (expected {})", e.expected.join(", ")));
    }
    line
}

pub fn summary(diags: &[Diagnostic]) -> String {
    let errors = diags.iter().filter(|d| d.is_error()).count();
    let warnings = diags.len() - errors;
    format!("{errors} error(s), {warnings} warning(s)")
}

/// The `--json` document: `{"file": .., "diagnostics": [{severity, code, message, ids}]}`.
pub fn json_report(file: &str, diags: &[Diagnostic]) -> String {
    let doc = json!({ "file": file, "diagnostics": diags });
    serde_json::to_string_pretty(&doc).expect("diagnostics serialize")
}

pub fn json_parse_errors(file: &str, errors: &[ParseError]) -> String {
    let diags: Vec<_> = errors
        .iter()
        .map(|e| {
            json!({
                "severity": "error",
                "code": "parse",
                "message": format!("{}:{}: {}", e.span.line, e.span.column, e.message),
                "ids": Vec::<String>::new(),
            })
        })
        .collect();
    serde_json::to_string_pretty(&json!({ "file": file, "diagnostics": diags })).expect("json")
}
