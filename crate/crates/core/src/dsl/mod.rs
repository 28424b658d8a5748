//! Text formats for linguistic variables (`*.fvars`) and fuzzy rules
//! (`*.frules`), with a structural validator.
//!
//! Variables file, one declaration per `input`/`output` keyword (a
//! declaration may span several lines up to its closing brace):
//!
//! ```text
//! input discussion_participation dim=processing universe=[0,15] { low=(0,0,3,5) medium=(3,5,8,10) much=(8,10,15,15) }
//! output perception_score dim=perception universe=[0,12] { sensory=(0,0,6,8) sensory_intuitive=(6,7,8,8) intuitive=(6,8,12,12) }
//! ```
//!
//! Optional input attributes: `agg=sum|mean|max` (how repeated observations
//! combine, default `sum`) and `max_expected=<number>` (raw values are
//! rescaled to percent of this maximum before use).
//!
//! Rules file, one rule per line:
//!
//! ```text
//! RULE p1: IF chat_participation IS much AND test_time IS low THEN processing_score IS reactive
//! ```
//!
//! Keywords are case-insensitive, identifiers are case-sensitive and `#`
//! starts a comment.

mod lexer;
mod parser;
mod print;
mod validate;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dimension::Dimension;
use crate::fuzzy::{FuzzyError, LinguisticVariable, Term, Universe};

pub use lexer::Position;
pub use parser::{parse_rule_base, parse_rules, parse_variables};
pub use print::{pretty_print, print_rules, print_variables};
pub use validate::{validate, Diagnostic, DiagnosticCode, Severity};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("{pos}: syntax error: expected {expected}, found {found}")]
    Syntax {
        pos: Position,
        expected: String,
        found: String,
    },
    #[error("{pos}: range error: {message}")]
    Range { pos: Position, message: String },
    #[error("{pos}: unknown variable `{name}`")]
    UnknownVariable { pos: Position, name: String },
    #[error("{pos}: variable `{variable}` has no term `{term}`")]
    UnknownTerm {
        pos: Position,
        variable: String,
        term: String,
    },
    #[error("{pos}: rule `{rule}` mentions `{variable}` more than once")]
    DuplicateClauseVariable {
        pos: Position,
        rule: String,
        variable: String,
    },
    #[error("{pos}: `{variable}` must be an {expected} variable here")]
    WrongKind {
        pos: Position,
        variable: String,
        expected: VariableKind,
    },
    #[error("{pos}: variable `{name}` is declared twice")]
    DuplicateVariable { pos: Position, name: String },
}

impl DslError {
    pub fn position(&self) -> Position {
        match self {
            DslError::Syntax { pos, .. }
            | DslError::Range { pos, .. }
            | DslError::UnknownVariable { pos, .. }
            | DslError::UnknownTerm { pos, .. }
            | DslError::DuplicateClauseVariable { pos, .. }
            | DslError::WrongKind { pos, .. }
            | DslError::DuplicateVariable { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Input,
    Output,
}

impl fmt::Display for VariableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VariableKind::Input => "input",
            VariableKind::Output => "output",
        })
    }
}

/// How repeated `(learner, variable)` observations are combined on ingest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Sum,
    Mean,
    Max,
}

impl Aggregation {
    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::Sum => "sum",
            Aggregation::Mean => "mean",
            Aggregation::Max => "max",
        }
    }
}

impl FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sum" => Ok(Aggregation::Sum),
            "mean" => Ok(Aggregation::Mean),
            "max" => Ok(Aggregation::Max),
            _ => Err(s.to_string()),
        }
    }
}

/// A declared linguistic variable plus the metadata the pipeline needs.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableSpec {
    pub kind: VariableKind,
    /// Owning dimension. Inputs may still be read by rules of other
    /// dimensions (some behaviours inform more than one dimension).
    pub dimension: Dimension,
    pub aggregation: Aggregation,
    pub max_expected: Option<f64>,
    variable: LinguisticVariable,
}

impl VariableSpec {
    pub fn new(kind: VariableKind, dimension: Dimension, variable: LinguisticVariable) -> Self {
        Self {
            kind,
            dimension,
            aggregation: Aggregation::Sum,
            max_expected: None,
            variable,
        }
    }

    /// Builds a spec from raw `(label, a, b, c, d)` terms.
    pub fn from_terms(
        name: &str,
        kind: VariableKind,
        dimension: Dimension,
        universe: (f64, f64),
        terms: &[(&str, f64, f64, f64, f64)],
    ) -> Result<Self, FuzzyError> {
        let universe = Universe::new(universe.0, universe.1)?;
        let terms = terms
            .iter()
            .map(|&(label, a, b, c, d)| {
                Ok(Term {
                    label: label.to_string(),
                    shape: crate::fuzzy::Trapezoid::new(a, b, c, d)?,
                })
            })
            .collect::<Result<Vec<_>, FuzzyError>>()?;
        Ok(Self::new(
            kind,
            dimension,
            LinguisticVariable::new(name, universe, terms)?,
        ))
    }

    pub fn name(&self) -> &str {
        self.variable.name()
    }

    pub fn universe(&self) -> Universe {
        self.variable.universe()
    }

    pub fn variable(&self) -> &LinguisticVariable {
        &self.variable
    }

    /// Maps a raw observation into the variable's universe scale.
    pub fn normalize(&self, raw: f64) -> f64 {
        match self.max_expected {
            Some(max) => raw * 100.0 / max,
            None => raw,
        }
    }

    /// Inverse of [`VariableSpec::normalize`].
    pub fn denormalize(&self, value: f64) -> f64 {
        match self.max_expected {
            Some(max) => value * max / 100.0,
            None => value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClauseSpec {
    pub variable: String,
    pub term: String,
}

impl ClauseSpec {
    pub fn new(variable: impl Into<String>, term: impl Into<String>) -> Self {
        Self {
            variable: variable.into(),
            term: term.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub id: String,
    pub dimension: Dimension,
    pub antecedent: Vec<ClauseSpec>,
    pub consequent: ClauseSpec,
}

impl Rule {
    pub fn clause_set(&self) -> BTreeSet<&ClauseSpec> {
        self.antecedent.iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RuleBase {
    pub variables: Vec<VariableSpec>,
    pub rules: Vec<Rule>,
}

impl RuleBase {
    pub fn new(variables: Vec<VariableSpec>, rules: Vec<Rule>) -> Self {
        Self { variables, rules }
    }

    /// Parses a variables document and a rules document.
    pub fn parse(variables: &str, rules: &str) -> Result<Self, DslError> {
        let variables = parse_variables(variables)?;
        let rules = parse_rules(rules, &variables)?;
        Ok(Self { variables, rules })
    }

    pub fn variable(&self, name: &str) -> Option<&VariableSpec> {
        self.variables.iter().find(|v| v.name() == name)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &VariableSpec> {
        self.variables.iter().filter(|v| v.kind == VariableKind::Input)
    }

    pub fn output_for(&self, dimension: Dimension) -> Option<&VariableSpec> {
        self.variables
            .iter()
            .find(|v| v.kind == VariableKind::Output && v.dimension == dimension)
    }

    pub fn rules_for(&self, dimension: Dimension) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(move |r| r.dimension == dimension)
    }

    /// Dimensions that have at least one rule, in canonical order.
    pub fn active_dimensions(&self) -> Vec<Dimension> {
        Dimension::ALL
            .into_iter()
            .filter(|d| self.rules.iter().any(|r| r.dimension == *d))
            .collect()
    }

    /// Input variables read by a dimension's rules, in declaration order.
    pub fn referenced_inputs(&self, dimension: Dimension) -> Vec<&VariableSpec> {
        let used: BTreeSet<&str> = self
            .rules_for(dimension)
            .flat_map(|r| r.antecedent.iter().map(|c| c.variable.as_str()))
            .collect();
        self.inputs().filter(|v| used.contains(v.name())).collect()
    }

    /// Inputs owned by a dimension or read by any of its rules.
    pub fn dimension_inputs(&self, dimension: Dimension) -> Vec<&VariableSpec> {
        let used: BTreeSet<&str> = self
            .rules_for(dimension)
            .flat_map(|r| r.antecedent.iter().map(|c| c.variable.as_str()))
            .collect();
        self.inputs()
            .filter(|v| v.dimension == dimension || used.contains(v.name()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_round_trips_through_max_expected() {
        let mut spec = VariableSpec::from_terms(
            "test_time",
            VariableKind::Input,
            Dimension::Processing,
            (0.0, 100.0),
            &[("low", 0.0, 0.0, 25.0, 40.0)],
        )
        .unwrap();
        assert_eq!(spec.normalize(30.0), 30.0);
        spec.max_expected = Some(60.0);
        assert_eq!(spec.normalize(30.0), 50.0);
        assert!((spec.denormalize(spec.normalize(17.0)) - 17.0).abs() < 1e-12);
    }
}
