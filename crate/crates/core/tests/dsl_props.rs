use proptest::prelude::*;
use stylegroup_core::dsl::{
    parse_rule_base, pretty_print, Aggregation, ClauseSpec, Rule, RuleBase, VariableKind, VariableSpec,
};
use stylegroup_core::Dimension;

fn breakpoints(lo: f64, hi: f64) -> impl Strategy<Value = (f64, f64, f64, f64)> {
    prop::array::uniform4(0.0..=1.0f64).prop_map(move |mut p| {
        p.sort_by(f64::total_cmp);
        let at = |s: f64| lo + s * (hi - lo);
        (at(p[0]), at(p[1]), at(p[2]), at(p[3]))
    })
}

fn variable(name: String, kind: VariableKind) -> impl Strategy<Value = VariableSpec> {
    (
        0usize..4,
        -50.0..50.0f64,
        0.5..100.0f64,
        prop::collection::vec(breakpoints(0.0, 1.0), 1..4),
        prop::sample::select(vec![Aggregation::Sum, Aggregation::Mean, Aggregation::Max]),
        prop::option::of(1.0..500.0f64),
    )
        .prop_map(move |(dim, lo, width, raw, agg, max)| {
            let hi = lo + width;
            let terms: Vec<(String, f64, f64, f64, f64)> = raw
                .iter()
                .enumerate()
                .map(|(i, &(a, b, c, d))| {
                    let at = |s: f64| lo + s * width;
                    (format!("t{i}"), at(a), at(b), at(c), at(d))
                })
                .collect();
            let refs: Vec<(&str, f64, f64, f64, f64)> = terms
                .iter()
                .map(|(l, a, b, c, d)| (l.as_str(), *a, *b, *c, *d))
                .collect();
            let mut v = VariableSpec::from_terms(&name, kind, Dimension::ALL[dim], (lo, hi), &refs).unwrap();
            if kind == VariableKind::Input {
                v.aggregation = agg;
                v.max_expected = max;
            }
            v
        })
}

/// Two to four inputs, one output per dimension, and rules over them.
fn rule_base() -> impl Strategy<Value = RuleBase> {
    let inputs = (2usize..5).prop_flat_map(|n| {
        (0..n)
            .map(|i| variable(format!("in_{i}"), VariableKind::Input))
            .collect::<Vec<_>>()
    });
    let outputs: Vec<_> = Dimension::ALL
        .iter()
        .map(|d| variable(format!("out_{d}"), VariableKind::Output))
        .collect();
    (inputs, outputs, prop::collection::vec((any::<u64>(), 0usize..4), 0..8)).prop_map(|(inputs, outputs, picks)| {
        let outputs: Vec<VariableSpec> = outputs
            .into_iter()
            .zip(Dimension::ALL)
            .map(|(mut v, d)| {
                v.dimension = d;
                v
            })
            .collect();
        let mut rules = Vec::new();
        for (i, (bits, dim)) in picks.into_iter().enumerate() {
            let out = &outputs[dim];
            let mut antecedent = Vec::new();
            for (j, v) in inputs.iter().enumerate() {
                if bits >> j & 1 == 1 || (antecedent.is_empty() && j + 1 == inputs.len()) {
                    let terms = v.variable().terms();
                    let t = &terms[(bits >> (8 + j * 4)) as usize % terms.len()];
                    antecedent.push(ClauseSpec::new(v.name(), t.label.clone()));
                }
            }
            let terms = out.variable().terms();
            let t = &terms[(bits >> 40) as usize % terms.len()];
            rules.push(Rule {
                id: format!("r{i}"),
                dimension: out.dimension,
                antecedent,
                consequent: ClauseSpec::new(out.name(), t.label.clone()),
            });
        }
        RuleBase::new(inputs.into_iter().chain(outputs).collect(), rules)
    })
}

proptest! {
    #[test]
    fn pretty_print_round_trips(rb in rule_base()) {
        let text = pretty_print(&rb);
        let parsed = parse_rule_base(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&parsed, &rb);
        prop_assert_eq!(pretty_print(&parsed), text);
    }

    #[test]
    fn parser_never_panics(text in "\\PC{0,200}") {
        let _ = parse_rule_base(&text);
    }

    #[test]
    fn parser_never_panics_on_mangled_rule_bases(rb in rule_base(), cut in 0usize..2000, junk in "[(){}\\[\\],=:#.0-9a-z \n-]{0,12}") {
        let mut text = pretty_print(&rb);
        let mut at = cut.min(text.len());
        while !text.is_char_boundary(at) {
            at -= 1;
        }
        text.insert_str(at, &junk);
        if let Err(e) = parse_rule_base(&text) {
            prop_assert!(e.position().line >= 1 && e.position().column >= 1);
        }
    }
}
