use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{RuleBase, VariableKind};
use crate::dimension::Dimension;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticCode {
    /// Same antecedent clause set, different consequents.
    Conflict,
    /// Same antecedent clause set and same consequent.
    Duplicate,
    DuplicateRuleId,
    /// A dimension with rules has more than one output variable.
    MultipleOutputs,
    /// Declared input read by no rule.
    UncoveredVariable,
    /// Rule omits some of its dimension's inputs.
    IncompleteAntecedent,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::Conflict => "conflict",
            DiagnosticCode::Duplicate => "duplicate",
            DiagnosticCode::DuplicateRuleId => "duplicate-rule-id",
            DiagnosticCode::MultipleOutputs => "multiple-outputs",
            DiagnosticCode::UncoveredVariable => "uncovered-variable",
            DiagnosticCode::IncompleteAntecedent => "incomplete-antecedent",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            DiagnosticCode::Conflict | DiagnosticCode::DuplicateRuleId | DiagnosticCode::MultipleOutputs => {
                Severity::Error
            }
            DiagnosticCode::Duplicate | DiagnosticCode::UncoveredVariable | DiagnosticCode::IncompleteAntecedent => {
                Severity::Warning
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagnosticCode,
    pub rule_ids: Vec<String>,
    pub message: String,
}

impl Diagnostic {
    fn new(code: DiagnosticCode, rule_ids: Vec<String>, message: String) -> Self {
        Self {
            severity: code.severity(),
            code,
            rule_ids,
            message,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// Tab-separated record: severity, code, comma-joined rule ids (`-` when
/// none), message.
impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids = if self.rule_ids.is_empty() {
            "-".to_string()
        } else {
            self.rule_ids.join(",")
        };
        write!(
            f,
            "{}\t{}\t{}\t{}",
            self.severity,
            self.code.as_str(),
            ids,
            self.message
        )
    }
}

/// Structural checks over a parsed rule base.
///
/// Rules are compared pairwise only when they target the same output
/// variable. Diagnostics come out in a stable order.
pub fn validate(rb: &RuleBase) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &rb.rules {
        *ids.entry(r.id.as_str()).or_default() += 1;
    }
    for (id, count) in ids {
        if count > 1 {
            diags.push(Diagnostic::new(
                DiagnosticCode::DuplicateRuleId,
                vec![id.to_string()],
                format!("rule id `{id}` is used {count} times"),
            ));
        }
    }

    for dim in rb.active_dimensions() {
        let outputs: Vec<&str> = rb
            .variables
            .iter()
            .filter(|v| v.kind == VariableKind::Output && v.dimension == dim)
            .map(|v| v.name())
            .collect();
        if outputs.len() > 1 {
            diags.push(Diagnostic::new(
                DiagnosticCode::MultipleOutputs,
                vec![],
                format!("dimension {dim} has {} outputs: {}", outputs.len(), outputs.join(", ")),
            ));
        }
    }

    for (i, a) in rb.rules.iter().enumerate() {
        for b in &rb.rules[i + 1..] {
            if a.consequent.variable != b.consequent.variable || a.clause_set() != b.clause_set() {
                continue;
            }
            let ids = vec![a.id.clone(), b.id.clone()];
            if a.consequent.term == b.consequent.term {
                diags.push(Diagnostic::new(
                    DiagnosticCode::Duplicate,
                    ids,
                    format!("rules `{}` and `{}` are identical", a.id, b.id),
                ));
            } else {
                diags.push(Diagnostic::new(
                    DiagnosticCode::Conflict,
                    ids,
                    format!(
                        "rules `{}` and `{}` share an antecedent but conclude `{}` vs `{}`",
                        a.id, b.id, a.consequent.term, b.consequent.term
                    ),
                ));
            }
        }
    }

    let referenced: BTreeSet<&str> = rb
        .rules
        .iter()
        .flat_map(|r| r.antecedent.iter().map(|c| c.variable.as_str()))
        .collect();
    for v in rb.inputs() {
        if !referenced.contains(v.name()) {
            diags.push(Diagnostic::new(
                DiagnosticCode::UncoveredVariable,
                vec![],
                format!("input `{}` is not used by any rule", v.name()),
            ));
        }
    }

    for dim in Dimension::ALL {
        let inputs: Vec<&str> = rb.dimension_inputs(dim).iter().map(|v| v.name()).collect();
        for r in rb.rules_for(dim) {
            let used: BTreeSet<&str> = r.antecedent.iter().map(|c| c.variable.as_str()).collect();
            let missing: Vec<&str> = inputs.iter().copied().filter(|v| !used.contains(v)).collect();
            if !missing.is_empty() {
                diags.push(Diagnostic::new(
                    DiagnosticCode::IncompleteAntecedent,
                    vec![r.id.clone()],
                    format!("rule `{}` does not mention {}", r.id, missing.join(", ")),
                ));
            }
        }
    }

    diags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_rule_base, parse_variables, RuleBase};

    const VARS: &str = "
input a dim=processing universe=[0,10] { low=(0,0,3,5) much=(3,5,10,10) }
input b dim=processing universe=[0,10] { low=(0,0,3,5) much=(3,5,10,10) }
output processing_score dim=processing universe=[0,12] { reactive=(0,0,6,8) reflective=(6,8,12,12) }
";

    fn base(rules: &str) -> RuleBase {
        let vars = parse_variables(VARS).unwrap();
        RuleBase::parse(&crate::dsl::print_variables(&vars), rules).unwrap()
    }

    fn codes(d: &[Diagnostic]) -> Vec<DiagnosticCode> {
        d.iter().map(|d| d.code).collect()
    }

    #[test]
    fn detects_conflict_regardless_of_clause_order() {
        let rb = base(
            "RULE r1: IF a IS low AND b IS much THEN processing_score IS reflective\n\
             RULE r2: IF b IS much AND a IS low THEN processing_score IS reactive\n",
        );
        let diags = validate(&rb);
        assert_eq!(codes(&diags), vec![DiagnosticCode::Conflict]);
        assert!(diags[0].is_error());
        assert_eq!(diags[0].rule_ids, vec!["r1", "r2"]);
    }

    #[test]
    fn identical_rules_are_duplicates_not_conflicts() {
        let rb = base(
            "RULE r1: IF a IS low AND b IS much THEN processing_score IS reflective\n\
             RULE r2: IF a IS low AND b IS much THEN processing_score IS reflective\n",
        );
        assert_eq!(codes(&validate(&rb)), vec![DiagnosticCode::Duplicate]);
    }

    #[test]
    fn different_antecedents_do_not_conflict() {
        let rb = base(
            "RULE r1: IF a IS low AND b IS much THEN processing_score IS reflective\n\
             RULE r2: IF a IS much AND b IS much THEN processing_score IS reactive\n",
        );
        assert!(validate(&rb).is_empty());
    }

    #[test]
    fn uncovered_and_incomplete_are_warnings() {
        let rb = base("RULE r1: IF a IS low THEN processing_score IS reflective\n");
        let diags = validate(&rb);
        assert_eq!(
            codes(&diags),
            vec![DiagnosticCode::UncoveredVariable, DiagnosticCode::IncompleteAntecedent]
        );
        assert!(diags.iter().all(|d| d.severity == Severity::Warning));
    }

    #[test]
    fn duplicate_ids_and_multiple_outputs_are_errors() {
        let text = format!(
            "{VARS}output other dim=processing universe=[0,12] {{ x=(0,0,6,8) }}\n\
             RULE r1: IF a IS low AND b IS low THEN processing_score IS reflective\n\
             RULE r1: IF a IS much AND b IS much THEN processing_score IS reactive\n"
        );
        let rb = parse_rule_base(&text).unwrap();
        let diags = validate(&rb);
        assert_eq!(
            codes(&diags),
            vec![DiagnosticCode::DuplicateRuleId, DiagnosticCode::MultipleOutputs]
        );
    }

    #[test]
    fn record_format() {
        let d = Diagnostic::new(DiagnosticCode::Conflict, vec!["p1".into(), "p2".into()], "msg".into());
        assert_eq!(d.to_string(), "error\tconflict\tp1,p2\tmsg");
        let d = Diagnostic::new(DiagnosticCode::UncoveredVariable, vec![], "m".into());
        assert_eq!(d.to_string(), "warning\tuncovered-variable\t-\tm");
    }
}
