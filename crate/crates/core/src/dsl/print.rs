use std::fmt::Write;

use super::{Aggregation, Rule, RuleBase, VariableKind, VariableSpec};

fn variable_line(out: &mut String, v: &VariableSpec) {
    let kind = match v.kind {
        VariableKind::Input => "input",
        VariableKind::Output => "output",
    };
    let u = v.universe();
    let _ = write!(
        out,
        "{kind} {} dim={} universe=[{},{}]",
        v.name(),
        v.dimension,
        u.lo(),
        u.hi()
    );
    if v.aggregation != Aggregation::Sum {
        let _ = write!(out, " agg={}", v.aggregation.as_str());
    }
    if let Some(max) = v.max_expected {
        let _ = write!(out, " max_expected={max}");
    }
    out.push_str(" {");
    for term in v.variable().terms() {
        let [a, b, c, d] = term.shape.breakpoints();
        let _ = write!(out, " {}=({a},{b},{c},{d})", term.label);
    }
    out.push_str(" }\n");
}

fn rule_line(out: &mut String, r: &Rule) {
    let _ = write!(out, "RULE {}: IF ", r.id);
    for (i, clause) in r.antecedent.iter().enumerate() {
        if i > 0 {
            out.push_str(" AND ");
        }
        let _ = write!(out, "{} IS {}", clause.variable, clause.term);
    }
    let _ = writeln!(out, " THEN {} IS {}", r.consequent.variable, r.consequent.term);
}

/// One declaration per line, in declaration order.
pub fn print_variables(vars: &[VariableSpec]) -> String {
    let mut out = String::new();
    for v in vars {
        variable_line(&mut out, v);
    }
    out
}

/// One rule per line, clauses in declaration order.
pub fn print_rules(rules: &[Rule]) -> String {
    let mut out = String::new();
    for r in rules {
        rule_line(&mut out, r);
    }
    out
}

/// Canonical single-document form: declarations, a blank line, then rules.
pub fn pretty_print(rb: &RuleBase) -> String {
    let mut out = print_variables(&rb.variables);
    if !rb.rules.is_empty() {
        out.push('\n');
        out.push_str(&print_rules(&rb.rules));
    }
    out
}
