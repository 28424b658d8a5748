//! Trapezoidal fuzzy sets, fuzzification, Mamdani product inference and
//! centroid defuzzification.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance below which an aggregated envelope counts as empty.
pub const ZERO_AREA_TOLERANCE: f64 = 1e-12;

/// Default number of uniform grid points used by the centroid quadrature.
pub const DEFAULT_QUADRATURE_POINTS: usize = 1001;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("invalid trapezoid ({a}, {b}, {c}, {d}): breakpoints must be finite and ordered a <= b <= c <= d")]
    InvalidTrapezoid { a: f64, b: f64, c: f64, d: f64 },
    #[error("invalid universe [{lo}, {hi}]")]
    InvalidUniverse { lo: f64, hi: f64 },
    #[error("term `{term}` of `{variable}` lies outside the universe [{lo}, {hi}]")]
    TermOutsideUniverse {
        variable: String,
        term: String,
        lo: f64,
        hi: f64,
    },
    #[error("variable `{0}` has no terms")]
    NoTerms(String),
    #[error("variable `{variable}` declares term `{term}` twice")]
    DuplicateTerm { variable: String, term: String },
    #[error("value {value} is outside the universe [{lo}, {hi}] of `{variable}`")]
    OutOfUniverse {
        variable: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("rule antecedent is empty")]
    EmptyAntecedent,
    #[error("missing input for variable `{0}`")]
    MissingInput(String),
    #[error("no rule fired: the aggregated output envelope is identically zero")]
    NoRuleFired,
    #[error("rule `{rule}` references {what} index {index} which does not exist")]
    BadIndex {
        rule: String,
        what: &'static str,
        index: usize,
    },
    #[error("quadrature needs at least 2 points, got {0}")]
    TooFewPoints(usize),
}

pub type Result<T, E = FuzzyError> = std::result::Result<T, E>;

/// A trapezoidal fuzzy number `(a, b, c, d)`.
///
/// Membership rises linearly on `[a, b]`, is 1 on `[b, c]` and falls linearly
/// on `[c, d]`. Degenerate ramps (`a == b` or `c == d`) are vertical steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trapezoid {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Trapezoid {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let finite = [a, b, c, d].iter().all(|v| v.is_finite());
        if !finite || !(a <= b && b <= c && c <= d) {
            return Err(FuzzyError::InvalidTrapezoid { a, b, c, d });
        }
        Ok(Self { a, b, c, d })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn breakpoints(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Degree of membership of `x`, always in `[0, 1]`.
    pub fn membership(&self, x: f64) -> f64 {
        if x < self.a || x > self.d {
            0.0
        } else if x >= self.b && x <= self.c {
            1.0
        } else if x < self.b {
            // a < x < b, so b > a
            (x - self.a) / (self.b - self.a)
        } else {
            // c < x < d
            (self.d - x) / (self.d - self.c)
        }
    }

    /// Midpoint of the plateau `[b, c]`, the most representative value.
    pub fn prototype(&self) -> f64 {
        0.5 * (self.b + self.c)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.d)
    }
}

impl fmt::Display for Trapezoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.a, self.b, self.c, self.d)
    }
}

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Universe {
    lo: f64,
    hi: f64,
}

impl Universe {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(FuzzyError::InvalidUniverse { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub label: String,
    pub shape: Trapezoid,
}

/// A named variable over a universe with an ordered list of labelled terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticVariable {
    name: String,
    universe: Universe,
    terms: Vec<Term>,
}

impl LinguisticVariable {
    pub fn new(name: impl Into<String>, universe: Universe, terms: Vec<Term>) -> Result<Self> {
        let name = name.into();
        if terms.is_empty() {
            return Err(FuzzyError::NoTerms(name));
        }
        for (i, term) in terms.iter().enumerate() {
            if terms[..i].iter().any(|t| t.label == term.label) {
                return Err(FuzzyError::DuplicateTerm {
                    variable: name,
                    term: term.label.clone(),
                });
            }
            let (a, d) = term.shape.support();
            if a < universe.lo() || d > universe.hi() {
                return Err(FuzzyError::TermOutsideUniverse {
                    variable: name,
                    term: term.label.clone(),
                    lo: universe.lo(),
                    hi: universe.hi(),
                });
            }
        }
        Ok(Self { name, universe, terms })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term_index(&self, label: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.label == label)
    }

    pub fn term(&self, label: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.label == label)
    }

    fn check_in_universe(&self, x: f64) -> Result<()> {
        if self.universe.contains(x) {
            Ok(())
        } else {
            Err(FuzzyError::OutOfUniverse {
                variable: self.name.clone(),
                value: x,
                lo: self.universe.lo(),
                hi: self.universe.hi(),
            })
        }
    }

    /// Membership degree of `x` in every term, in declaration order.
    pub fn degrees(&self, x: f64) -> Result<Vec<f64>> {
        self.check_in_universe(x)?;
        Ok(self.terms.iter().map(|t| t.shape.membership(x)).collect())
    }

    /// Label → degree for every term. Degrees need not sum to one.
    pub fn fuzzify(&self, x: f64) -> Result<BTreeMap<String, f64>> {
        let degrees = self.degrees(x)?;
        Ok(self
            .terms
            .iter()
            .zip(degrees)
            .map(|(t, mu)| (t.label.clone(), mu))
            .collect())
    }

    /// Label of the term with maximal membership at `score`; the earliest
    /// declared term wins ties.
    pub fn classify_score(&self, score: f64) -> Result<&str> {
        let degrees = self.degrees(score)?;
        let mut best = 0;
        for (i, &mu) in degrees.iter().enumerate() {
            if mu > degrees[best] {
                best = i;
            }
        }
        Ok(&self.terms[best].label)
    }
}

/// Firing strength of a rule: the product of its antecedent degrees.
pub fn rule_strength(degrees: &[f64]) -> Result<f64> {
    if degrees.is_empty() {
        return Err(FuzzyError::EmptyAntecedent);
    }
    Ok(degrees.iter().product())
}

/// One `variable IS term` condition, by index into a [`RuleSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Clause {
    pub variable: usize,
    pub term: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MamdaniRule {
    pub id: String,
    pub antecedent: Vec<Clause>,
    /// Index of the consequent term in the output variable.
    pub consequent: usize,
}

/// Rules of one output variable together with the inputs they read.
#[derive(Debug, Clone)]
pub struct RuleSet {
    inputs: Vec<LinguisticVariable>,
    output: LinguisticVariable,
    rules: Vec<MamdaniRule>,
}

impl RuleSet {
    pub fn new(inputs: Vec<LinguisticVariable>, output: LinguisticVariable, rules: Vec<MamdaniRule>) -> Result<Self> {
        for rule in &rules {
            if rule.antecedent.is_empty() {
                return Err(FuzzyError::EmptyAntecedent);
            }
            if rule.consequent >= output.terms().len() {
                return Err(FuzzyError::BadIndex {
                    rule: rule.id.clone(),
                    what: "output term",
                    index: rule.consequent,
                });
            }
            for clause in &rule.antecedent {
                let var = inputs.get(clause.variable).ok_or_else(|| FuzzyError::BadIndex {
                    rule: rule.id.clone(),
                    what: "input variable",
                    index: clause.variable,
                })?;
                if clause.term >= var.terms().len() {
                    return Err(FuzzyError::BadIndex {
                        rule: rule.id.clone(),
                        what: "input term",
                        index: clause.term,
                    });
                }
            }
        }
        Ok(Self { inputs, output, rules })
    }

    pub fn inputs(&self) -> &[LinguisticVariable] {
        &self.inputs
    }

    pub fn output(&self) -> &LinguisticVariable {
        &self.output
    }

    pub fn rules(&self) -> &[MamdaniRule] {
        &self.rules
    }

    /// Product-implication Mamdani inference with max aggregation.
    ///
    /// Only variables referenced by some rule are looked up. A rule base
    /// where nothing fires yields an all-zero envelope, not an error.
    pub fn infer<'a, F>(&'a self, lookup: F) -> Result<FuzzyOutput<'a>>
    where
        F: Fn(&str) -> Option<f64>,
    {
        // Degrees are cached per referenced variable.
        let mut degrees: Vec<Option<Vec<f64>>> = vec![None; self.inputs.len()];
        for rule in &self.rules {
            for clause in &rule.antecedent {
                if degrees[clause.variable].is_none() {
                    let var = &self.inputs[clause.variable];
                    let x = lookup(var.name()).ok_or_else(|| FuzzyError::MissingInput(var.name().to_string()))?;
                    degrees[clause.variable] = Some(var.degrees(x)?);
                }
            }
        }
        let mut activations = Vec::with_capacity(self.rules.len());
        let mut buf = Vec::new();
        for (index, rule) in self.rules.iter().enumerate() {
            buf.clear();
            buf.extend(
                rule.antecedent
                    .iter()
                    .map(|c| degrees[c.variable].as_ref().expect("degrees cached above")[c.term]),
            );
            activations.push(Activation {
                rule: index,
                term: rule.consequent,
                strength: rule_strength(&buf)?,
            });
        }
        Ok(FuzzyOutput {
            variable: &self.output,
            activations,
        })
    }
}

/// A consequent term scaled by its rule's firing strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Activation {
    pub rule: usize,
    pub term: usize,
    pub strength: f64,
}

/// Aggregated output fuzzy set: pointwise max of scaled consequent terms.
#[derive(Debug, Clone)]
pub struct FuzzyOutput<'a> {
    variable: &'a LinguisticVariable,
    activations: Vec<Activation>,
}

impl<'a> FuzzyOutput<'a> {
    pub fn new(variable: &'a LinguisticVariable, activations: Vec<Activation>) -> Self {
        Self { variable, activations }
    }

    pub fn variable(&self) -> &'a LinguisticVariable {
        self.variable
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn fired(&self) -> impl Iterator<Item = &Activation> {
        self.activations.iter().filter(|a| a.strength > 0.0)
    }

    pub fn envelope(&self, x: f64) -> f64 {
        let terms = self.variable.terms();
        self.activations
            .iter()
            .map(|a| a.strength * terms[a.term].shape.membership(x))
            .fold(0.0, f64::max)
    }
}

/// How the centroid integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integration {
    /// Closed form over the piecewise-linear envelope.
    Exact,
    /// Composite trapezoidal rule on a uniform grid of `points` nodes.
    Trapezoidal { points: usize },
}

/// Centroid (centre of gravity) defuzzifier. Exact by default; a uniform
/// grid cannot resolve near-vertical term edges that fall between nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defuzzifier {
    integration: Integration,
}

impl Default for Defuzzifier {
    fn default() -> Self {
        Self::exact()
    }
}

impl Defuzzifier {
    pub fn exact() -> Self {
        Self {
            integration: Integration::Exact,
        }
    }

    /// Trapezoidal rule with [`DEFAULT_QUADRATURE_POINTS`] nodes.
    pub fn quadrature() -> Self {
        Self {
            integration: Integration::Trapezoidal {
                points: DEFAULT_QUADRATURE_POINTS,
            },
        }
    }

    pub fn with_points(points: usize) -> Result<Self> {
        if points < 2 {
            return Err(FuzzyError::TooFewPoints(points));
        }
        Ok(Self {
            integration: Integration::Trapezoidal { points },
        })
    }

    pub fn integration(&self) -> Integration {
        self.integration
    }

    pub fn centroid(&self, out: &FuzzyOutput<'_>) -> Result<f64> {
        match self.integration {
            Integration::Exact => exact_centroid(out),
            Integration::Trapezoidal { points } => trapezoidal_centroid(out, points),
        }
    }
}

fn trapezoidal_centroid(out: &FuzzyOutput<'_>, n: usize) -> Result<f64> {
    let universe = out.variable().universe();
    let step = universe.width() / (n - 1) as f64;
    let mut area = 0.0;
    let mut moment = 0.0;
    for i in 0..n {
        let x = if i == n - 1 {
            universe.hi()
        } else {
            universe.lo() + step * i as f64
        };
        let weight = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let mu = out.envelope(x);
        area += weight * mu;
        moment += weight * mu * x;
    }
    area *= step;
    moment *= step;
    if area.abs() < ZERO_AREA_TOLERANCE {
        return Err(FuzzyError::NoRuleFired);
    }
    Ok(universe.clamp(moment / area))
}

/// Closed-form centroid of the piecewise-linear envelope.
///
/// Every scaled term is linear between consecutive breakpoints, so the
/// envelope is linear between breakpoints and the crossings of those
/// pieces.
pub fn exact_centroid(out: &FuzzyOutput<'_>) -> Result<f64> {
    let universe = out.variable().universe();
    let terms = out.variable().terms();
    let fired: Vec<&Activation> = out.fired().collect();
    let mut knots = vec![universe.lo(), universe.hi()];
    for a in &fired {
        knots.extend(terms[a.term].shape.breakpoints().iter().map(|&x| universe.clamp(x)));
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    // Each fired term as a line on [x0, x1], evaluated just inside the
    // interval so vertical edges take the interior value.
    let mut points = Vec::new();
    for w in knots.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let span = x1 - x0;
        let lines: Vec<(f64, f64)> = fired
            .iter()
            .map(|a| {
                let t = &terms[a.term].shape;
                let e = span * 1e-9;
                let (y0, y1) = (t.membership(x0 + e), t.membership(x1 - e));
                let slope = (y1 - y0) / (span - 2.0 * e);
                let v0 = y0 - slope * e;
                (a.strength * v0, a.strength * (v0 + slope * span))
            })
            .collect();
        let mut xs = vec![0.0, 1.0];
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (d0, d1) = (lines[i].0 - lines[j].0, lines[i].1 - lines[j].1);
                if d0 * d1 < 0.0 {
                    xs.push(d0 / (d0 - d1));
                }
            }
        }
        xs.sort_by(f64::total_cmp);
        for u in xs {
            let y = lines.iter().map(|(a, b)| a + (b - a) * u).fold(0.0, f64::max);
            points.push((x0 + span * u, y));
        }
        points.push((f64::NAN, f64::NAN));
    }

    let (mut area, mut moment) = (0.0, 0.0);
    for w in points.windows(2) {
        let ((x0, f0), (x1, f1)) = (w[0], w[1]);
        if x0.is_nan() || x1.is_nan() {
            continue;
        }
        let dx = x1 - x0;
        area += 0.5 * (f0 + f1) * dx;
        moment += dx * (x0 * (2.0 * f0 + f1) + x1 * (f0 + 2.0 * f1)) / 6.0;
    }
    if area.abs() < ZERO_AREA_TOLERANCE {
        return Err(FuzzyError::NoRuleFired);
    }
    Ok(universe.clamp(moment / area))
}
