use std::collections::BTreeMap;

use crate::model::{NodeId, TmModel};
use crate::validate::branch_groups;

use super::SimError;

/// Branch decisions for one run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    /// Branch node -> labels, consumed in order on repeated visits.
    pub decisions: BTreeMap<NodeId, Vec<String>>,
    /// `None` means ten steps per node.
    pub max_steps: Option<usize>,
}

impl Scenario {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), ..Self::default() }
    }

    pub fn decide(mut self, node: &str, labels: &[&str]) -> Self {
        self.decisions.insert(NodeId::from(node), labels.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn with_max_steps(mut self, n: usize) -> Self {
        self.max_steps = Some(n);
        self
    }

    /// Reads `node-id = label[, label...]` lines; `#` starts a comment.
    pub fn parse(name: &str, text: &str) -> Result<Self, SimError> {
        let mut scenario = Scenario::new(name);
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or_default().trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, values)) = content.split_once('=') else {
                return Err(SimError::ScenarioSyntax {
                    line,
                    message: "expected `node-id = label[, label...]`".into(),
                });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(SimError::ScenarioSyntax { line, message: "missing node id before `=`".into() });
            }
            let labels: Vec<String> = values.split(',').map(|v| v.trim().trim_matches('"').to_owned()).collect();
            if labels.iter().any(String::is_empty) {
                return Err(SimError::ScenarioSyntax { line, message: format!("empty label for `{key}`") });
            }
            if scenario.decisions.insert(NodeId::from(key), labels).is_some() {
                return Err(SimError::ScenarioSyntax { line, message: format!("`{key}` listed twice") });
            }
        }
        Ok(scenario)
    }

    /// Every key must be a branch node and every label one of its conditions.
    pub fn check(&self, model: &TmModel) -> Result<(), SimError> {
        let groups = branch_groups(model);
        for (node, labels) in &self.decisions {
            if model.node(node.as_str()).is_none() {
                return Err(SimError::UnknownNode(node.to_string()));
            }
            let group = groups.iter().find(|g| &g.src == node).ok_or_else(|| SimError::NotABranch(node.to_string()))?;
            if let Some(bad) = labels.iter().find(|l| group.arc_for(l).is_none()) {
                return Err(SimError::UnknownLabel { node: node.to_string(), label: bad.clone() });
            }
        }
        if self.max_steps == Some(0) {
            return Err(SimError::ZeroMaxSteps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lines_and_comments() {
        let s = Scenario::parse("s", "# header\nA.p = OK, \"not-OK\"  # trailing\n\nB.q=x\n").unwrap();
        assert_eq!(s.decisions[&NodeId::from("A.p")], ["OK", "not-OK"]);
        assert_eq!(s.decisions[&NodeId::from("B.q")], ["x"]);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(Scenario::parse("s", "A.p OK"), Err(SimError::ScenarioSyntax { line: 1, .. })));
        assert!(matches!(Scenario::parse("s", "\n= OK"), Err(SimError::ScenarioSyntax { line: 2, .. })));
        assert!(matches!(Scenario::parse("s", "A.p = OK,"), Err(SimError::ScenarioSyntax { .. })));
        assert!(matches!(Scenario::parse("s", "A.p = a\nA.p = b"), Err(SimError::ScenarioSyntax { line: 2, .. })));
    }
}
