//! Per-dimension fuzzy inference over learner behaviour records, plus
//! agreement checks against questionnaire scores.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dimension::Dimension;
use crate::dsl::{validate, RuleBase};
use crate::fuzzy::{Clause, Defuzzifier, FuzzyError, MamdaniRule, RuleSet};
use crate::ingest::{BehaviorRecord, QuestionnaireRecord};
use crate::par::{map_slice, Execution};
use crate::stats::{pearson_r, StatsError};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("rule base has error diagnostics:\n{0}")]
    InvalidRuleBase(String),
    #[error("rule base has no rules for dimension {0}")]
    MissingDimension(Dimension),
    #[error("learner `{learner}` is missing feature `{variable}`")]
    MissingFeature { learner: String, variable: String },
    #[error("learner `{learner}`: no rule fired for dimension {dimension}")]
    NoRuleFired { learner: String, dimension: Dimension },
    #[error("learner `{learner}`: {source}")]
    Fuzzy {
        learner: String,
        #[source]
        source: FuzzyError,
    },
    #[error("fewer than 3 paired learners for dimension {0}")]
    InsufficientPairs(Dimension),
    #[error("correlation for {dimension}: {source}")]
    Correlation {
        dimension: Dimension,
        #[source]
        source: StatsError,
    },
    #[error("building rule set: {0}")]
    Build(#[from] FuzzyError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
}

impl ClassifyError {
    /// Learner the error belongs to, for per-learner failures.
    pub fn learner(&self) -> Option<&str> {
        match self {
            ClassifyError::MissingFeature { learner, .. }
            | ClassifyError::NoRuleFired { learner, .. }
            | ClassifyError::Fuzzy { learner, .. } => Some(learner),
            _ => None,
        }
    }
}

pub type Result<T, E = ClassifyError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionResult {
    pub dimension: Dimension,
    pub crisp_score: f64,
    pub label: String,
    pub term_memberships: BTreeMap<String, f64>,
    /// Rules with positive strength, in rule-base order.
    pub fired_rules: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleProfile {
    pub learner_id: String,
    /// One entry per dimension, in canonical dimension order.
    pub results: Vec<DimensionResult>,
}

impl StyleProfile {
    pub fn result(&self, dimension: Dimension) -> Option<&DimensionResult> {
        self.results.iter().find(|r| r.dimension == dimension)
    }

    pub fn labels(&self) -> [&str; 4] {
        let mut out = [""; 4];
        for r in &self.results {
            out[r.dimension.index()] = r.label.as_str();
        }
        out
    }

    pub fn scores(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for r in &self.results {
            out[r.dimension.index()] = r.crisp_score;
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Engine {
    dimension: Dimension,
    rules: RuleSet,
}

/// Compiled rule base: one Mamdani rule set per dimension.
#[derive(Debug, Clone)]
pub struct Classifier {
    engines: Vec<Engine>,
    defuzzifier: Defuzzifier,
}

fn compile(rb: &RuleBase, dimension: Dimension) -> Result<Engine> {
    let output = rb
        .output_for(dimension)
        .ok_or(ClassifyError::MissingDimension(dimension))?;
    let inputs = rb.referenced_inputs(dimension);
    let mut rules = Vec::new();
    for r in rb.rules_for(dimension) {
        let antecedent = r
            .antecedent
            .iter()
            .map(|c| {
                let variable = inputs
                    .iter()
                    .position(|v| v.name() == c.variable)
                    .expect("referenced input");
                let term = inputs[variable]
                    .variable()
                    .term_index(&c.term)
                    .expect("term checked by parser");
                Clause { variable, term }
            })
            .collect();
        let consequent = output
            .variable()
            .term_index(&r.consequent.term)
            .expect("term checked by parser");
        rules.push(MamdaniRule {
            id: r.id.clone(),
            antecedent,
            consequent,
        });
    }
    if rules.is_empty() {
        return Err(ClassifyError::MissingDimension(dimension));
    }
    let rules = RuleSet::new(
        inputs.iter().map(|v| v.variable().clone()).collect(),
        output.variable().clone(),
        rules,
    )?;
    Ok(Engine { dimension, rules })
}

impl Classifier {
    /// Fails when validation reports any error, or a dimension lacks rules.
    pub fn new(rb: &RuleBase) -> Result<Self> {
        let errors: Vec<String> = validate(rb)
            .into_iter()
            .filter(|d| d.is_error())
            .map(|d| d.to_string())
            .collect();
        if !errors.is_empty() {
            return Err(ClassifyError::InvalidRuleBase(errors.join("\n")));
        }
        let engines = Dimension::ALL
            .into_iter()
            .map(|d| compile(rb, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            engines,
            defuzzifier: Defuzzifier::default(),
        })
    }

    pub fn with_defuzzifier(mut self, defuzzifier: Defuzzifier) -> Self {
        self.defuzzifier = defuzzifier;
        self
    }

    /// Plateau midpoint of an output term, if the label exists.
    pub fn prototype_score(&self, dimension: Dimension, label: &str) -> Option<f64> {
        self.engines
            .iter()
            .find(|e| e.dimension == dimension)?
            .rules
            .output()
            .term(label)
            .map(|t| t.shape.prototype())
    }

    pub fn output_labels(&self, dimension: Dimension) -> Vec<&str> {
        self.engines
            .iter()
            .find(|e| e.dimension == dimension)
            .map(|e| e.rules.output().terms().iter().map(|t| t.label.as_str()).collect())
            .unwrap_or_default()
    }

    pub fn classify(&self, rec: &BehaviorRecord) -> Result<StyleProfile> {
        let learner = || rec.learner_id.clone();
        let mut results = Vec::with_capacity(self.engines.len());
        for engine in &self.engines {
            // Report missing features in a stable, declaration order.
            for var in engine.rules.inputs() {
                if rec.get(var.name()).is_none() {
                    return Err(ClassifyError::MissingFeature {
                        learner: learner(),
                        variable: var.name().to_string(),
                    });
                }
            }
            let out = engine
                .rules
                .infer(|name| rec.get(name))
                .map_err(|source| ClassifyError::Fuzzy {
                    learner: learner(),
                    source,
                })?;
            let crisp = match self.defuzzifier.centroid(&out) {
                Ok(v) => v,
                Err(FuzzyError::NoRuleFired) => {
                    return Err(ClassifyError::NoRuleFired {
                        learner: learner(),
                        dimension: engine.dimension,
                    })
                }
                Err(source) => {
                    return Err(ClassifyError::Fuzzy {
                        learner: learner(),
                        source,
                    })
                }
            };
            let output = engine.rules.output();
            let wrap = |source| ClassifyError::Fuzzy {
                learner: learner(),
                source,
            };
            let label = output.classify_score(crisp).map_err(wrap)?.to_string();
            let term_memberships = output.fuzzify(crisp).map_err(wrap)?;
            let fired_rules = out
                .fired()
                .map(|a| (engine.rules.rules()[a.rule].id.clone(), a.strength))
                .collect();
            results.push(DimensionResult {
                dimension: engine.dimension,
                crisp_score: crisp,
                label,
                term_memberships,
                fired_rules,
            });
        }
        Ok(StyleProfile {
            learner_id: rec.learner_id.clone(),
            results,
        })
    }

    /// Classifies every record independently. Profiles and errors keep
    /// input order whatever the execution mode.
    pub fn classify_cohort(&self, records: &[BehaviorRecord], exec: Execution) -> CohortResult {
        let mut out = CohortResult::default();
        for r in map_slice(records, exec, |rec| self.classify(rec)) {
            match r {
                Ok(p) => out.profiles.push(p),
                Err(e) => out.errors.push(e),
            }
        }
        out
    }
}

#[derive(Debug, Default)]
pub struct CohortResult {
    pub profiles: Vec<StyleProfile>,
    pub errors: Vec<ClassifyError>,
}

pub const PROFILE_HEADER: &str = "learner_id,dimension,crisp_score,label";

/// Long-format profile export, one row per learner and dimension.
pub fn write_profiles<W: Write>(output: W, profiles: &[StyleProfile]) -> Result<()> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(PROFILE_HEADER.split(','))?;
    for p in profiles {
        for r in &p.results {
            w.write_record([
                p.learner_id.as_str(),
                r.dimension.as_str(),
                &r.crisp_score.to_string(),
                r.label.as_str(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Summary row read back from a profile CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub learner_id: String,
    pub dimension: Dimension,
    pub crisp_score: f64,
    pub label: String,
}

/// Reads profile rows and regroups them per learner. Membership and
/// fired-rule detail is not part of the CSV and comes back empty.
pub fn read_profiles<R: Read>(input: R) -> Result<Vec<StyleProfile>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != PROFILE_HEADER {
        return Err(ClassifyError::MalformedRow {
            line: 1,
            reason: format!("expected header `{PROFILE_HEADER}`"),
        });
    }
    let mut by_learner: BTreeMap<String, Vec<DimensionResult>> = BTreeMap::new();
    let mut order = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let bad = |reason: String| ClassifyError::MalformedRow { line, reason };
        if row.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", row.len())));
        }
        let dimension: Dimension = row[1].parse().map_err(|e| bad(format!("{e}")))?;
        let crisp_score: f64 = row[2]
            .parse()
            .map_err(|_| bad(format!("`{}` is not a number", &row[2])))?;
        let entry = by_learner.entry(row[0].to_string()).or_insert_with(|| {
            order.push(row[0].to_string());
            Vec::new()
        });
        if entry.iter().any(|r| r.dimension == dimension) {
            return Err(bad(format!("duplicate {dimension} row for `{}`", &row[0])));
        }
        entry.push(DimensionResult {
            dimension,
            crisp_score,
            label: row[3].to_string(),
            term_memberships: BTreeMap::new(),
            fired_rules: Vec::new(),
        });
    }
    Ok(order
        .into_iter()
        .map(|id| {
            let mut results = by_learner.remove(&id).unwrap_or_default();
            results.sort_by_key(|r| r.dimension);
            StyleProfile {
                learner_id: id,
                results,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedRow {
    pub learner_id: String,
    pub dimension: Dimension,
    pub crisp_score: f64,
    pub questionnaire_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionCorrelation {
    pub dimension: Dimension,
    pub r: f64,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub per_dimension: Vec<DimensionCorrelation>,
    /// Pearson r over every paired row pooled across dimensions.
    pub overall_r: f64,
    /// Plain average of the per-dimension coefficients.
    pub mean_r: f64,
    pub rows: Vec<PairedRow>,
    /// Profiled learners with no questionnaire rows.
    pub dropped_profiles: usize,
    /// Questionnaire learners with no profile.
    pub dropped_questionnaire: usize,
}

impl ValidationReport {
    /// Recomputes the pooled coefficient from saved rows.
    pub fn pooled_r(rows: &[PairedRow]) -> Result<f64, StatsError> {
        let x: Vec<f64> = rows.iter().map(|r| r.crisp_score).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.questionnaire_score).collect();
        pearson_r(&x, &y)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("dimension\tpairs\tr\n");
        for d in &self.per_dimension {
            out.push_str(&format!("{}\t{}\t{:.4}\n", d.dimension, d.pairs, d.r));
        }
        out.push_str(&format!(
            "overall (pooled)\t{}\t{:.4}\n",
            self.rows.len(),
            self.overall_r
        ));
        out.push_str(&format!("mean of dimensions\t-\t{:.4}\n", self.mean_r));
        out.push_str(&format!(
            "dropped: {} profiles without questionnaire, {} questionnaire learners without profile\n",
            self.dropped_profiles, self.dropped_questionnaire
        ));
        out
    }
}

/// Inner-joins profiles with questionnaire scores on learner and dimension
/// and correlates crisp scores with questionnaire scores.
pub fn validate_against_questionnaire(
    profiles: &[StyleProfile],
    questionnaire: &[QuestionnaireRecord],
) -> Result<ValidationReport> {
    let mut q: BTreeMap<(&str, Dimension), f64> = BTreeMap::new();
    for r in questionnaire {
        q.insert((r.learner_id.as_str(), r.dimension), r.score);
    }
    let q_learners: BTreeSet<&str> = questionnaire.iter().map(|r| r.learner_id.as_str()).collect();
    let p_learners: BTreeSet<&str> = profiles.iter().map(|p| p.learner_id.as_str()).collect();

    let mut rows = Vec::new();
    for dim in Dimension::ALL {
        for p in profiles {
            let (Some(res), Some(&score)) = (p.result(dim), q.get(&(p.learner_id.as_str(), dim))) else {
                continue;
            };
            rows.push(PairedRow {
                learner_id: p.learner_id.clone(),
                dimension: dim,
                crisp_score: res.crisp_score,
                questionnaire_score: score,
            });
        }
    }

    let mut per_dimension = Vec::new();
    for dim in Dimension::ALL {
        let (x, y): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|r| r.dimension == dim)
            .map(|r| (r.crisp_score, r.questionnaire_score))
            .unzip();
        if x.len() < 3 {
            return Err(ClassifyError::InsufficientPairs(dim));
        }
        let r = pearson_r(&x, &y).map_err(|source| ClassifyError::Correlation { dimension: dim, source })?;
        per_dimension.push(DimensionCorrelation {
            dimension: dim,
            r,
            pairs: x.len(),
        });
    }
    let overall_r = ValidationReport::pooled_r(&rows).map_err(|source| ClassifyError::Correlation {
        dimension: Dimension::Processing,
        source,
    })?;
    let mean_r = per_dimension.iter().map(|d| d.r).sum::<f64>() / per_dimension.len() as f64;
    Ok(ValidationReport {
        per_dimension,
        overall_r,
        mean_r,
        rows,
        dropped_profiles: p_learners.difference(&q_learners).count(),
        dropped_questionnaire: q_learners.difference(&p_learners).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::dsl::parse_rule_base;

    fn classifier() -> (RuleBase, Classifier) {
        let rb = bundled::rule_base().unwrap();
        let c = Classifier::new(&rb).unwrap();
        (rb, c)
    }

    /// Every input at the plateau midpoint of the term named by `rule`;
    /// inputs not in the rule at their universe midpoint.
    fn prototype_record(rb: &RuleBase, id: &str, rule_ids: &[&str]) -> BehaviorRecord {
        let mut rec = BehaviorRecord::new(id);
        for v in rb.inputs() {
            let u = v.universe();
            rec = rec.with(v.name(), (u.lo() + u.hi()) / 2.0);
        }
        for rid in rule_ids {
            let rule = rb.rules.iter().find(|r| r.id == *rid).unwrap();
            for c in &rule.antecedent {
                let v = rb.variable(&c.variable).unwrap();
                rec = rec.with(&c.variable, v.variable().term(&c.term).unwrap().shape.prototype());
            }
        }
        rec
    }

    #[test]
    fn processing_pole_columns() {
        let (rb, c) = classifier();
        let rec = prototype_record(&rb, "x", &["p1", "s1", "e1", "u5"]);
        let p = c.classify(&rec).unwrap();
        let proc_ = p.result(Dimension::Processing).unwrap();
        assert_eq!(proc_.label, "reactive");
        assert!(proc_.crisp_score >= 0.0 && proc_.crisp_score <= 6.0);
        // single-rule centroid of (0,0,6,8) is 74/21
        assert!((proc_.crisp_score - 74.0 / 21.0).abs() < 1e-4);
        assert_eq!(proc_.fired_rules, vec![("p1".to_string(), 1.0)]);

        let rec = prototype_record(&rb, "y", &["p5", "s5", "e5", "u1"]);
        let p = c.classify(&rec).unwrap();
        assert_eq!(p.labels(), ["reflective", "intuitive", "verbal", "sequential"]);
    }

    #[test]
    fn every_rule_prototype_recovers_its_consequent() {
        let (rb, c) = classifier();
        for rule in &rb.rules {
            let rec = prototype_record(&rb, "x", &[rule.id.as_str()]);
            // Other dimensions may not fire from midpoints; check this one directly.
            let out = c.engines.iter().find(|e| e.dimension == rule.dimension).unwrap();
            let o = out.rules.infer(|n| rec.get(n)).unwrap();
            let crisp = c.defuzzifier.centroid(&o).unwrap();
            assert_eq!(
                out.rules.output().classify_score(crisp).unwrap(),
                rule.consequent.term,
                "rule {}",
                rule.id
            );
        }
    }

    const SMALL: &str = "
input a dim=processing universe=[0,10] { low=(0,0,4,6) much=(4,6,10,10) slope=(0,0,0,10) }
input b dim=perception universe=[0,10] { any=(0,0,10,10) }
input c dim=entrance universe=[0,10] { any=(0,0,10,10) }
input d dim=understanding universe=[0,10] { any=(0,0,10,10) }
output po dim=processing universe=[0,12] { lo=(0,0,4,8) hi=(4,8,12,12) }
output pe dim=perception universe=[0,12] { lo=(0,0,4,8) hi=(4,8,12,12) }
output en dim=entrance universe=[0,12] { lo=(0,0,4,8) hi=(4,8,12,12) }
output un dim=understanding universe=[0,12] { lo=(0,0,4,8) hi=(4,8,12,12) }
RULE s1: IF b IS any THEN pe IS hi
RULE e1: IF c IS any THEN en IS lo
RULE u1: IF d IS any THEN un IS hi
";

    fn small(extra: &str) -> Classifier {
        Classifier::new(&parse_rule_base(&format!("{SMALL}{extra}")).unwrap()).unwrap()
    }

    fn rec(a: f64) -> BehaviorRecord {
        BehaviorRecord::new("l")
            .with("a", a)
            .with("b", 1.0)
            .with("c", 1.0)
            .with("d", 1.0)
    }

    #[test]
    fn single_rule_crisp_score_ignores_strength() {
        let c = small("RULE p1: IF a IS slope THEN po IS hi\n");
        // slope membership is (10 - a) / 10
        let weak = c.classify(&rec(7.0)).unwrap();
        let strong = c.classify(&rec(1.0)).unwrap();
        let (w, s) = (weak.results[0].clone(), strong.results[0].clone());
        assert!((w.fired_rules[0].1 - 0.3).abs() < 1e-12);
        assert!((s.fired_rules[0].1 - 0.9).abs() < 1e-12);
        assert!((w.crisp_score - s.crisp_score).abs() < 1e-12);
    }

    #[test]
    fn competing_rules_at_half_strength() {
        let c = small("RULE p1: IF a IS low THEN po IS lo\nRULE p2: IF a IS much THEN po IS hi\n");
        let p = c.classify(&rec(5.0)).unwrap();
        let r = &p.results[0];
        assert_eq!(r.fired_rules, vec![("p1".into(), 0.5), ("p2".into(), 0.5)]);
        // brute-force midpoint integration of max(0.5 lo, 0.5 hi)
        let lo = crate::fuzzy::Trapezoid::new(0.0, 0.0, 4.0, 8.0).unwrap();
        let hi = crate::fuzzy::Trapezoid::new(4.0, 8.0, 12.0, 12.0).unwrap();
        let n = 1_000_000;
        let h = 12.0 / n as f64;
        let (mut area, mut moment) = (0.0, 0.0);
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            let mu = (0.5 * lo.membership(x)).max(0.5 * hi.membership(x));
            area += mu;
            moment += mu * x;
        }
        let oracle = moment / area;
        assert!((oracle - 6.0).abs() < 1e-9);
        assert!((r.crisp_score - oracle).abs() < 1e-9);
    }

    #[test]
    fn no_rule_fired_and_missing_feature() {
        let c = small("RULE p1: IF a IS much THEN po IS hi\n");
        assert!(matches!(
            c.classify(&rec(1.0)),
            Err(ClassifyError::NoRuleFired {
                dimension: Dimension::Processing,
                ..
            })
        ));
        let missing = BehaviorRecord::new("m").with("b", 1.0).with("c", 1.0).with("d", 1.0);
        let err = c.classify(&missing).unwrap_err();
        assert!(matches!(&err, ClassifyError::MissingFeature { variable, .. } if variable == "a"));
        assert_eq!(err.learner(), Some("m"));
    }

    #[test]
    fn cohort_collects_errors_in_order() {
        let c = small("RULE p1: IF a IS low THEN po IS lo\n");
        assert!(c.classify_cohort(&[], Execution::default()).profiles.is_empty());
        let missing = BehaviorRecord::new("m").with("b", 1.0);
        let res = c.classify_cohort(&[rec(1.0), missing], Execution::default());
        assert_eq!(res.profiles.len(), 1);
        assert_eq!(res.errors.len(), 1);
        assert_eq!(res.errors[0].learner(), Some("m"));
    }

    #[test]
    fn rejects_conflicting_rule_base() {
        let rb = parse_rule_base(&format!(
            "{SMALL}RULE p1: IF a IS low THEN po IS lo\nRULE p2: IF a IS low THEN po IS hi\n"
        ))
        .unwrap();
        assert!(matches!(Classifier::new(&rb), Err(ClassifyError::InvalidRuleBase(_))));
    }

    #[test]
    fn prototype_scores() {
        let (_, c) = classifier();
        assert_eq!(c.prototype_score(Dimension::Entrance, "visual"), Some(3.0));
        assert_eq!(c.prototype_score(Dimension::Entrance, "verbal"), Some(10.0));
        assert_eq!(c.prototype_score(Dimension::Entrance, "nope"), None);
    }

    fn profile(id: &str, scores: [f64; 4]) -> StyleProfile {
        StyleProfile {
            learner_id: id.into(),
            results: Dimension::ALL
                .into_iter()
                .map(|d| DimensionResult {
                    dimension: d,
                    crisp_score: scores[d.index()],
                    label: "x".into(),
                    term_memberships: BTreeMap::new(),
                    fired_rules: vec![],
                })
                .collect(),
        }
    }

    fn q(id: &str, d: Dimension, score: f64) -> QuestionnaireRecord {
        QuestionnaireRecord {
            learner_id: id.into(),
            dimension: d,
            score,
        }
    }

    #[test]
    fn questionnaire_agreement() {
        let profiles: Vec<_> = (0..5)
            .map(|i| {
                profile(
                    &format!("l{i}"),
                    [i as f64, 2.0 * i as f64, 1.0 + i as f64, (i * i) as f64],
                )
            })
            .collect();
        let affine: Vec<_> = profiles
            .iter()
            .flat_map(|p| Dimension::ALL.map(|d| q(&p.learner_id, d, 3.0 * p.scores()[d.index()] + 1.0)))
            .collect();
        let rep = validate_against_questionnaire(&profiles, &affine).unwrap();
        assert!(rep.per_dimension.iter().all(|d| (d.r - 1.0).abs() < 1e-12));
        assert!((rep.overall_r - 1.0).abs() < 1e-12);
        assert_eq!(ValidationReport::pooled_r(&rep.rows).unwrap(), rep.overall_r);

        let negated: Vec<_> = affine.iter().map(|r| q(&r.learner_id, r.dimension, -r.score)).collect();
        let rep = validate_against_questionnaire(&profiles, &negated).unwrap();
        assert!(rep.per_dimension.iter().all(|d| (d.r + 1.0).abs() < 1e-12));

        let mut extra = affine.clone();
        extra.push(q("ghost", Dimension::Entrance, 1.0));
        let rep = validate_against_questionnaire(&profiles[..4], &extra).unwrap();
        assert_eq!(rep.dropped_profiles, 0);
        assert_eq!(rep.dropped_questionnaire, 2);

        assert!(matches!(
            validate_against_questionnaire(&profiles[..2], &affine),
            Err(ClassifyError::InsufficientPairs(Dimension::Processing))
        ));
    }

    #[test]
    fn profile_csv_round_trip() {
        let (rb, c) = classifier();
        let rec = prototype_record(&rb, "x", &["p1", "s1", "e1", "u5"]);
        let p = c.classify(&rec).unwrap();
        let mut buf = Vec::new();
        write_profiles(&mut buf, std::slice::from_ref(&p)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("learner_id,dimension,crisp_score,label\nx,processing,"));
        let back = read_profiles(buf.as_slice()).unwrap();
        assert_eq!(back[0].labels(), p.labels());
        assert_eq!(back[0].scores(), p.scores());
    }
}
