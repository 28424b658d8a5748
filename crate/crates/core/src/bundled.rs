//! The default rule base shipped with the crate.

use crate::dsl::{DslError, RuleBase};

/// Linguistic variable declarations (`*.fvars`).
pub const VARIABLES: &str = include_str!("../data/styles.fvars");

/// Rules, one per line (`*.frules`).
pub const RULES: &str = include_str!("../data/styles.frules");

pub fn rule_base() -> Result<RuleBase, DslError> {
    RuleBase::parse(VARIABLES, RULES)
}
