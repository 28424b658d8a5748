//! Synthetic cohorts with known styles, generated by running the rule table
//! backwards, and synthetic exam scores for grouped cohorts.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::StyleProfile;
use crate::dimension::Dimension;
use crate::dsl::{Rule, RuleBase};
use crate::grouping::{GroupAssignment, StyleSignature};
use crate::ingest::{BehaviorRecord, QuestionnaireRecord, QUESTIONNAIRE_RANGE};
use crate::stats::{LikertScale, Sample};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("no rule concludes `{label}` for dimension {dimension}")]
    UnreachableLabel { dimension: Dimension, label: String },
    #[error("signature {0} needs contradictory terms for a shared input")]
    InconsistentSignature(StyleSignature),
    #[error("bad signature: {0}")]
    BadSignature(String),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;

// Independent ChaCha streams per purpose, so changing one stage (say the
// noise level) leaves the draws of the others untouched.
const STREAM_ORDER: u64 = 0;
const STREAM_FEATURES: u64 = 1;
const STREAM_QUESTIONNAIRE: u64 = 2;
const STREAM_SCORES: u64 = 3;
const STREAM_SATISFACTION: u64 = 4;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SatisfactionModel {
    /// Expected satisfaction percentage per arm.
    pub treated: f64,
    pub control: f64,
    #[serde(default)]
    pub scale: LikertScale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreModel {
    pub treated_mean: f64,
    pub control_mean: f64,
    pub sigma: f64,
    /// Per-signature overrides of `treated_mean`, keyed by signature text.
    #[serde(default)]
    pub signature_means: BTreeMap<String, f64>,
    #[serde(default)]
    pub satisfaction: Option<SatisfactionModel>,
}

impl Default for ScoreModel {
    fn default() -> Self {
        Self {
            treated_mean: 17.65,
            control_mean: 12.6,
            sigma: 2.5,
            signature_means: BTreeMap::new(),
            satisfaction: Some(SatisfactionModel {
                treated: 67.0,
                control: 37.0,
                scale: LikertScale::default(),
            }),
        }
    }
}

pub const SCORE_RANGE: (f64, f64) = (0.0, 20.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortSpec {
    /// Learner count per signature (`processing/perception/entrance/understanding`).
    pub counts: BTreeMap<String, usize>,
    /// Feature noise as a fraction of each universe's width.
    pub noise_sigma: f64,
    pub seed: u64,
    #[serde(default)]
    pub score_model: Option<ScoreModel>,
}

impl CohortSpec {
    pub fn signatures(&self) -> Result<Vec<(StyleSignature, usize)>> {
        if self.counts.is_empty() {
            return Err(SimError::InvalidSpec("no signatures".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(SimError::InvalidSpec(format!(
                "noise_sigma {} must be >= 0",
                self.noise_sigma
            )));
        }
        self.counts
            .iter()
            .map(|(s, &n)| {
                if n == 0 {
                    return Err(SimError::InvalidSpec(format!("count for {s} must be positive")));
                }
                Ok((s.parse().map_err(SimError::BadSignature)?, n))
            })
            .collect()
    }
}

/// Four planted signatures, 466 learners in total.
pub fn default_cohort(seed: u64) -> CohortSpec {
    let counts = [
        ("reflective/sensory/visual/global", 161),
        ("reactive/intuitive/verbal/sequential", 124),
        ("reflective/intuitive/visual/sequential", 115),
        ("reactive/sensory/verbal/global", 66),
    ]
    .into_iter()
    .map(|(s, n)| (s.to_string(), n))
    .collect();
    CohortSpec {
        counts,
        noise_sigma: 0.05,
        seed,
        score_model: Some(ScoreModel::default()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCohort {
    pub truth: Vec<(String, StyleSignature)>,
    pub behaviors: Vec<BehaviorRecord>,
    pub questionnaire: Vec<QuestionnaireRecord>,
}

/// Rule combinations (one per dimension) that realise a signature without
/// asking a shared input for two different terms.
fn consistent_choices<'a>(rb: &'a RuleBase, sig: &StyleSignature) -> Result<Vec<[&'a Rule; 4]>> {
    let mut per_dim: Vec<Vec<&Rule>> = Vec::new();
    for dim in Dimension::ALL {
        let label = sig.label(dim);
        let rules: Vec<&Rule> = rb.rules_for(dim).filter(|r| r.consequent.term == label).collect();
        if rules.is_empty() {
            return Err(SimError::UnreachableLabel {
                dimension: dim,
                label: label.to_string(),
            });
        }
        per_dim.push(rules);
    }
    let mut out = Vec::new();
    for &a in &per_dim[0] {
        for &b in &per_dim[1] {
            for &c in &per_dim[2] {
                for &d in &per_dim[3] {
                    let mut planted: BTreeMap<&str, &str> = BTreeMap::new();
                    let ok = [a, b, c, d]
                        .iter()
                        .flat_map(|r| &r.antecedent)
                        .all(|cl| *planted.entry(cl.variable.as_str()).or_insert(cl.term.as_str()) == cl.term);
                    if ok {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(SimError::InconsistentSignature(sig.clone()));
    }
    Ok(out)
}

fn learner_ids(n: usize) -> Vec<String> {
    let width = n.to_string().len().max(4);
    (1..=n).map(|i| format!("L{i:0width$}")).collect()
}

/// Builds a cohort whose features sit at plateau midpoints of the terms in
/// one randomly chosen producing rule per dimension, plus Gaussian noise of
/// `noise_sigma * width`, clamped to the universe. Inputs the chosen rules
/// do not read are drawn uniformly.
///
/// Questionnaire scores are the planted output prototype rescaled to the
/// questionnaire range, with the same relative noise.
pub fn generate(spec: &CohortSpec, rb: &RuleBase) -> Result<SyntheticCohort> {
    let sigs = spec.signatures()?;
    let mut choices = BTreeMap::new();
    for (sig, _) in &sigs {
        choices.insert(sig.clone(), consistent_choices(rb, sig)?);
    }
    let mut order: Vec<&StyleSignature> = sigs.iter().flat_map(|(s, n)| std::iter::repeat_n(s, *n)).collect();
    order.shuffle(&mut rng(spec.seed, STREAM_ORDER));
    let ids = learner_ids(order.len());

    let inputs: Vec<_> = rb.inputs().collect();
    let mut feat_rng = rng(spec.seed, STREAM_FEATURES);
    let mut q_rng = rng(spec.seed, STREAM_QUESTIONNAIRE);
    let (q_lo, q_hi) = QUESTIONNAIRE_RANGE;

    let mut truth = Vec::with_capacity(order.len());
    let mut behaviors = Vec::with_capacity(order.len());
    let mut questionnaire = Vec::with_capacity(order.len() * 4);
    for (id, sig) in ids.into_iter().zip(order) {
        let options = &choices[sig];
        let pick = options[feat_rng.random_range(0..options.len())];
        let planted: BTreeMap<&str, &str> = pick
            .iter()
            .flat_map(|r| &r.antecedent)
            .map(|c| (c.variable.as_str(), c.term.as_str()))
            .collect();
        let mut rec = BehaviorRecord::new(id.as_str());
        for v in &inputs {
            let u = v.universe();
            // Both draws happen for every input so the stream layout does
            // not depend on which rule was picked.
            let z: f64 = feat_rng.sample(StandardNormal);
            let uniform = feat_rng.random_range(u.lo()..=u.hi());
            let value = match planted.get(v.name()) {
                Some(term) => {
                    let proto = v
                        .variable()
                        .term(term)
                        .expect("term checked by parser")
                        .shape
                        .prototype();
                    u.clamp(proto + spec.noise_sigma * u.width() * z)
                }
                None => uniform,
            };
            rec = rec.with(v.name(), value);
        }
        for dim in Dimension::ALL {
            let out = rb.output_for(dim).expect("output checked by consistent_choices");
            let u = out.universe();
            let proto = out
                .variable()
                .term(sig.label(dim))
                .expect("label checked")
                .shape
                .prototype();
            let z: f64 = q_rng.sample(StandardNormal);
            let scaled = q_lo + (proto - u.lo()) / u.width() * (q_hi - q_lo);
            let score = (scaled + spec.noise_sigma * (q_hi - q_lo) * z).clamp(q_lo, q_hi);
            questionnaire.push(QuestionnaireRecord {
                learner_id: id.clone(),
                dimension: dim,
                score,
            });
        }
        behaviors.push(rec);
        truth.push((id, sig.clone()));
    }
    Ok(SyntheticCohort {
        truth,
        behaviors,
        questionnaire,
    })
}

pub const TRUTH_HEADER: &str = "learner_id,processing,perception,entrance,understanding";

pub fn write_truth<W: Write>(output: W, truth: &[(String, StyleSignature)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(TRUTH_HEADER.split(','))?;
    for (id, sig) in truth {
        w.write_record(std::iter::once(id.as_str()).chain(sig.0.iter().map(String::as_str)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_truth<R: Read>(input: R) -> Result<Vec<(String, StyleSignature)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != TRUTH_HEADER {
        return Err(SimError::MalformedRow {
            line: 1,
            reason: format!("expected header `{TRUTH_HEADER}`"),
        });
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        if row.len() != 5 {
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            return Err(SimError::MalformedRow {
                line,
                reason: "expected 5 fields".into(),
            });
        }
        out.push((
            row[0].to_string(),
            StyleSignature([1, 2, 3, 4].map(|i| row[i].to_string())),
        ));
    }
    Ok(out)
}

/// Fraction of (learner, dimension) labels recovered, over learners present
/// in both lists.
pub fn label_recovery(truth: &[(String, StyleSignature)], profiles: &[StyleProfile]) -> f64 {
    let planted: BTreeMap<&str, &StyleSignature> = truth.iter().map(|(id, s)| (id.as_str(), s)).collect();
    let (mut hit, mut total) = (0usize, 0usize);
    for p in profiles {
        if let Some(sig) = planted.get(p.learner_id.as_str()) {
            for r in &p.results {
                total += 1;
                hit += usize::from(sig.label(r.dimension) == r.label);
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    }
}

/// Exam scores per group plus the control group, and optional Likert
/// responses per arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSamples {
    /// `(learner_id, group_id, score)`; control learners have group 0.
    pub rows: Vec<(String, usize, f64)>,
    /// `(learner_id, group_id, item responses)`.
    pub satisfaction: Vec<(String, usize, Vec<u8>)>,
}

impl ScoreSamples {
    /// One sample per treatment group in id order, and the control sample
    /// when it has any members.
    pub fn samples(&self) -> (Vec<Sample>, Option<Sample>) {
        let mut by_group: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for (_, g, s) in &self.rows {
            by_group.entry(*g).or_default().push(*s);
        }
        let control = by_group
            .remove(&0)
            .map(|v| Sample::new("control", v).expect("scores are finite"));
        let groups = by_group
            .into_iter()
            .map(|(g, v)| Sample::new(format!("group {g}"), v).expect("scores are finite"))
            .collect();
        (groups, control)
    }

    /// Likert responses per arm: `treated` (all groups) and `control`.
    pub fn satisfaction_by_arm(&self) -> Vec<(String, Vec<Vec<u8>>)> {
        let mut treated = Vec::new();
        let mut control = Vec::new();
        for (_, g, items) in &self.satisfaction {
            if *g == 0 {
                control.push(items.clone());
            } else {
                treated.push(items.clone());
            }
        }
        let mut out = Vec::new();
        if !control.is_empty() {
            out.push(("control".to_string(), control));
        }
        if !treated.is_empty() {
            out.push(("treated".to_string(), treated));
        }
        out
    }
}

/// Gaussian exam scores clamped to `[0, 20]`: treated learners around their
/// signature's mean (or `treated_mean`), control learners around
/// `control_mean`. Likert items are `min + Binomial(max - min, p)` with `p`
/// the arm's expected satisfaction share.
pub fn generate_scores(
    truth: &[(String, StyleSignature)],
    assignment: &GroupAssignment,
    model: &ScoreModel,
    seed: u64,
) -> Result<ScoreSamples> {
    if !(model.sigma >= 0.0 && model.sigma.is_finite()) {
        return Err(SimError::InvalidSpec(format!("sigma {} must be >= 0", model.sigma)));
    }
    let sig_of: BTreeMap<&str, String> = truth.iter().map(|(id, s)| (id.as_str(), s.to_string())).collect();
    let mut score_rng = rng(seed, STREAM_SCORES);
    let mut sat_rng = rng(seed, STREAM_SATISFACTION);
    let members = assignment
        .groups
        .iter()
        .flat_map(|g| g.members.iter().map(move |m| (m, g.id)))
        .chain(assignment.control.iter().map(|c| (c, 0)));
    let mut out = ScoreSamples {
        rows: Vec::new(),
        satisfaction: Vec::new(),
    };
    for (id, group) in members {
        let mean = if group == 0 {
            model.control_mean
        } else {
            sig_of
                .get(id.as_str())
                .and_then(|s| model.signature_means.get(s))
                .copied()
                .unwrap_or(model.treated_mean)
        };
        let z: f64 = score_rng.sample(StandardNormal);
        let score = (mean + model.sigma * z).clamp(SCORE_RANGE.0, SCORE_RANGE.1);
        out.rows.push((id.clone(), group, score));
        if let Some(sat) = &model.satisfaction {
            let pct = if group == 0 { sat.control } else { sat.treated };
            let p = (pct / 100.0).clamp(0.0, 1.0);
            let span = u64::from(sat.scale.max - sat.scale.min);
            let dist = Binomial::new(span, p).map_err(|e| SimError::InvalidSpec(e.to_string()))?;
            let items = (0..sat.scale.items)
                .map(|_| sat.scale.min + dist.sample(&mut sat_rng) as u8)
                .collect();
            out.satisfaction.push((id.clone(), group, items));
        }
    }
    Ok(out)
}

pub const SCORES_HEADER: &str = "learner_id,group_id,score";

pub fn write_scores<W: Write>(output: W, s: &ScoreSamples) -> Result<()> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(SCORES_HEADER.split(','))?;
    for (id, g, score) in &s.rows {
        w.write_record([id.as_str(), &g.to_string(), &score.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Header is `learner_id,group_id` followed by one `qN` column per item.
pub fn write_satisfaction<W: Write>(output: W, s: &ScoreSamples) -> Result<()> {
    let mut w = csv::Writer::from_writer(output);
    let items = s.satisfaction.first().map(|r| r.2.len()).unwrap_or(0);
    let mut header = vec!["learner_id".to_string(), "group_id".to_string()];
    header.extend((1..=items).map(|i| format!("q{i}")));
    w.write_record(&header)?;
    for (id, g, responses) in &s.satisfaction {
        let mut row = vec![id.clone(), g.to_string()];
        row.extend(responses.iter().map(u8::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(raw: &str, line: u64, what: &str) -> Result<T> {
    raw.parse().map_err(|_| SimError::MalformedRow {
        line,
        reason: format!("bad {what} `{raw}`"),
    })
}

/// Reads scores and, optionally, satisfaction responses.
pub fn read_scores<R: Read, S: Read>(scores: R, satisfaction: Option<S>) -> Result<ScoreSamples> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(scores);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != SCORES_HEADER {
        return Err(SimError::MalformedRow {
            line: 1,
            reason: format!("expected header `{SCORES_HEADER}`"),
        });
    }
    let mut seen = BTreeSet::new();
    let mut out = ScoreSamples {
        rows: Vec::new(),
        satisfaction: Vec::new(),
    };
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != 3 {
            return Err(SimError::MalformedRow {
                line,
                reason: "expected 3 fields".into(),
            });
        }
        if !seen.insert(row[0].to_string()) {
            return Err(SimError::MalformedRow {
                line,
                reason: format!("duplicate learner `{}`", &row[0]),
            });
        }
        let score: f64 = parse_field(&row[2], line, "score")?;
        if !score.is_finite() {
            return Err(SimError::MalformedRow {
                line,
                reason: "non-finite score".into(),
            });
        }
        out.rows
            .push((row[0].to_string(), parse_field(&row[1], line, "group_id")?, score));
    }
    if let Some(sat) = satisfaction {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(sat);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.len() < 3 || header[0] != "learner_id" || header[1] != "group_id" {
            return Err(SimError::MalformedRow {
                line: 1,
                reason: "expected header `learner_id,group_id,q1,...`".into(),
            });
        }
        for row in rdr.records() {
            let row = row?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            if row.len() != header.len() {
                return Err(SimError::MalformedRow {
                    line,
                    reason: format!("expected {} fields", header.len()),
                });
            }
            let items = (2..row.len())
                .map(|i| parse_field::<u8>(&row[i], line, "response"))
                .collect::<Result<Vec<_>>>()?;
            out.satisfaction
                .push((row[0].to_string(), parse_field(&row[1], line, "group_id")?, items));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::classify::Classifier;
    use crate::grouping::{assign, GroupingParams};
    use crate::par::Execution;

    fn spec(noise: f64, seed: u64, per: usize) -> CohortSpec {
        let mut s = default_cohort(seed);
        for v in s.counts.values_mut() {
            *v = per;
        }
        s.noise_sigma = noise;
        s
    }

    #[test]
    fn zero_noise_features_sit_on_prototypes_and_are_recovered() {
        let rb = bundled::rule_base().unwrap();
        let cohort = generate(&spec(0.0, 1, 25), &rb).unwrap();
        assert_eq!(cohort.behaviors.len(), 100);
        let c = Classifier::new(&rb).unwrap();
        let res = c.classify_cohort(&cohort.behaviors, Execution::default());
        assert!(res.errors.is_empty(), "{:?}", res.errors.first());
        assert_eq!(label_recovery(&cohort.truth, &res.profiles), 1.0);
    }

    #[test]
    fn every_reachable_single_label_recovers() {
        let rb = bundled::rule_base().unwrap();
        let c = Classifier::new(&rb).unwrap();
        let sigs = [
            "reflective_reactive/sensory_intuitive/visual_verbal/sequential_global",
            "reactive/sensory/visual/global",
            "reflective/intuitive/verbal/sequential",
        ];
        for s in sigs {
            let spec = CohortSpec {
                counts: [(s.to_string(), 40)].into_iter().collect(),
                noise_sigma: 0.0,
                seed: 9,
                score_model: None,
            };
            let cohort = generate(&spec, &rb).unwrap();
            let res = c.classify_cohort(&cohort.behaviors, Execution::Sequential);
            assert!(res.errors.is_empty());
            assert_eq!(label_recovery(&cohort.truth, &res.profiles), 1.0, "{s}");
        }
    }

    #[test]
    fn unreachable_and_inconsistent_signatures() {
        let rb = bundled::rule_base().unwrap();
        let mut s = spec(0.0, 1, 1);
        s.counts = [("reflective/sensory/visual/nope".to_string(), 1)]
            .into_iter()
            .collect();
        assert!(matches!(
            generate(&s, &rb),
            Err(SimError::UnreachableLabel {
                dimension: Dimension::Understanding,
                ..
            })
        ));
        // sensory needs many studied examples, sequential needs few
        s.counts = [("reflective/sensory/visual/sequential".to_string(), 1)]
            .into_iter()
            .collect();
        assert!(matches!(generate(&s, &rb), Err(SimError::InconsistentSignature(_))));
    }

    #[test]
    fn deterministic_and_clamped() {
        let rb = bundled::rule_base().unwrap();
        let a = generate(&spec(0.3, 5, 10), &rb).unwrap();
        let b = generate(&spec(0.3, 5, 10), &rb).unwrap();
        assert_eq!(a, b);
        for rec in &a.behaviors {
            for (name, v) in &rec.features {
                assert!(rb.variable(name).unwrap().universe().contains(*v));
            }
        }
        assert!(a.questionnaire.iter().all(|q| (0.0..=11.0).contains(&q.score)));
        assert_ne!(a, generate(&spec(0.3, 6, 10), &rb).unwrap());
    }

    #[test]
    fn recovery_does_not_improve_with_noise() {
        let rb = bundled::rule_base().unwrap();
        let c = Classifier::new(&rb).unwrap();
        let mut rates = Vec::new();
        for noise in [0.0, 0.05, 0.15, 0.3] {
            let mut total = 0.0;
            for seed in 0..5 {
                let cohort = generate(&spec(noise, seed, 20), &rb).unwrap();
                let res = c.classify_cohort(&cohort.behaviors, Execution::default());
                // unclassifiable learners count as misses
                total += label_recovery(&cohort.truth, &res.profiles) * res.profiles.len() as f64
                    / cohort.truth.len() as f64;
            }
            rates.push(total / 5.0);
        }
        assert_eq!(rates[0], 1.0);
        assert!(rates.windows(2).all(|w| w[1] <= w[0]), "{rates:?}");
    }

    #[test]
    fn truth_csv_round_trip() {
        let rb = bundled::rule_base().unwrap();
        let cohort = generate(&spec(0.1, 2, 3), &rb).unwrap();
        let mut buf = Vec::new();
        write_truth(&mut buf, &cohort.truth).unwrap();
        assert_eq!(read_truth(buf.as_slice()).unwrap(), cohort.truth);
    }

    fn grouped(seed: u64) -> (Vec<(String, StyleSignature)>, GroupAssignment) {
        let rb = bundled::rule_base().unwrap();
        let cohort = generate(&spec(0.0, seed, 40), &rb).unwrap();
        let c = Classifier::new(&rb).unwrap();
        let profiles = c.classify_cohort(&cohort.behaviors, Execution::default()).profiles;
        let a = assign(
            &profiles,
            GroupingParams {
                control_fraction: 0.25,
                ..GroupingParams::new(seed)
            },
        )
        .unwrap();
        (cohort.truth, a)
    }

    #[test]
    fn scores_without_spread_equal_means() {
        let (truth, a) = grouped(3);
        let model = ScoreModel {
            sigma: 0.0,
            satisfaction: None,
            ..ScoreModel::default()
        };
        let s = generate_scores(&truth, &a, &model, 1).unwrap();
        let (groups, control) = s.samples();
        assert!(groups.iter().all(|g| g.values.iter().all(|&v| v == 17.65)));
        assert!(control.unwrap().values.iter().all(|&v| v == 12.6));
        assert!(s.satisfaction.is_empty());

        let no_control = GroupAssignment { control: vec![], ..a };
        assert!(generate_scores(&truth, &no_control, &model, 1)
            .unwrap()
            .samples()
            .1
            .is_none());
    }

    #[test]
    fn scores_csv_round_trip_and_satisfaction() {
        let (truth, a) = grouped(4);
        let s = generate_scores(&truth, &a, &ScoreModel::default(), 8).unwrap();
        assert!(s.rows.iter().all(|r| (0.0..=20.0).contains(&r.2)));
        let (mut sc, mut sat) = (Vec::new(), Vec::new());
        write_scores(&mut sc, &s).unwrap();
        write_satisfaction(&mut sat, &s).unwrap();
        let back = read_scores(sc.as_slice(), Some(sat.as_slice())).unwrap();
        assert_eq!(back, s);
        let arms = s.satisfaction_by_arm();
        assert_eq!(arms[0].0, "control");
        assert!(arms[1]
            .1
            .iter()
            .all(|r| r.len() == 7 && r.iter().all(|&v| (1..=5).contains(&v))));
    }
}
