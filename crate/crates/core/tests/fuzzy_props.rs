use proptest::prelude::*;
use stylegroup_core::fuzzy::{
    exact_centroid, Activation, Defuzzifier, FuzzyOutput, LinguisticVariable, Term, Trapezoid, Universe,
};

fn trapezoid() -> impl Strategy<Value = Trapezoid> {
    prop::array::uniform4(0.0..12.0f64).prop_map(|mut p| {
        p.sort_by(f64::total_cmp);
        Trapezoid::new(p[0], p[1], p[2], p[3]).unwrap()
    })
}

fn output(terms: Vec<Trapezoid>) -> LinguisticVariable {
    let terms = terms
        .into_iter()
        .enumerate()
        .map(|(i, shape)| Term {
            label: format!("t{i}"),
            shape,
        })
        .collect();
    LinguisticVariable::new("y", Universe::new(0.0, 12.0).unwrap(), terms).unwrap()
}

proptest! {
    #[test]
    fn membership_range_plateau_and_support(t in trapezoid(), x in -1.0..13.0f64) {
        let mu = t.membership(x);
        prop_assert!((0.0..=1.0).contains(&mu));
        let [a, b, c, d] = t.breakpoints();
        if (b..=c).contains(&x) {
            prop_assert_eq!(mu, 1.0);
        }
        if x < a || x > d {
            prop_assert_eq!(mu, 0.0);
        }
    }

    #[test]
    fn membership_monotone_on_ramps(t in trapezoid(), u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let [a, b, c, d] = t.breakpoints();
        let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
        let rise = |s: f64| a + s * (b - a);
        let fall = |s: f64| c + s * (d - c);
        prop_assert!(t.membership(rise(lo)) <= t.membership(rise(hi)));
        prop_assert!(t.membership(fall(lo)) >= t.membership(fall(hi)));
    }

    #[test]
    fn classify_score_is_first_argmax(terms in prop::collection::vec(trapezoid(), 1..5), x in 0.0..12.0f64) {
        let var = output(terms);
        let degrees = var.degrees(x).unwrap();
        let best = degrees.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let first = degrees.iter().position(|&d| d == best).unwrap();
        prop_assert_eq!(var.classify_score(x).unwrap(), var.terms()[first].label.as_str());
    }

    #[test]
    fn centroid_inside_fired_support_and_scale_free(
        terms in prop::collection::vec(trapezoid(), 1..5),
        strengths in prop::collection::vec(0.05..1.0f64, 5),
        scale in 0.1..1.0f64,
    ) {
        let var = output(terms);
        let acts: Vec<Activation> = (0..var.terms().len())
            .map(|i| Activation { rule: i, term: i, strength: strengths[i] })
            .collect();
        let out = FuzzyOutput::new(&var, acts.clone());
        let Ok(c) = Defuzzifier::quadrature().centroid(&out) else {
            // every fired term may be a zero-width spike
            return Ok(());
        };
        let lo = var.terms().iter().map(|t| t.shape.a()).fold(f64::INFINITY, f64::min);
        let hi = var.terms().iter().map(|t| t.shape.d()).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(c >= lo - 1e-9 && c <= hi + 1e-9);

        let scaled: Vec<Activation> = acts.iter().map(|a| Activation { strength: a.strength * scale, ..*a }).collect();
        let c2 = Defuzzifier::quadrature().centroid(&FuzzyOutput::new(&var, scaled)).unwrap();
        prop_assert!((c - c2).abs() < 1e-9);

        let exact = exact_centroid(&out).unwrap();
        prop_assert!((c - exact).abs() < 1e-3, "quadrature {} exact {}", c, exact);
    }
}
