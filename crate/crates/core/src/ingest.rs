//! Loading behaviour logs, questionnaire scores and demographics from CSV.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dimension::Dimension;
use crate::dsl::{Aggregation, RuleBase, VariableSpec};

/// Questionnaire scores live on this closed range.
pub const QUESTIONNAIRE_RANGE: (f64, f64) = (0.0, 11.0);

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: expected header `{expected}`")]
    BadHeader { line: u64, expected: &'static str },
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: unknown variable `{name}`")]
    UnknownVariable { line: u64, name: String },
    #[error("line {line}: value for `{variable}` is not finite")]
    NonFiniteValue { line: u64, variable: String },
    #[error("learner `{learner}`: `{variable}` = {value} lies outside [{lo}, {hi}]")]
    OutOfUniverse {
        learner: String,
        variable: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("line {line}: duplicate entry for learner `{learner}` in dimension {dimension}")]
    DuplicateEntry {
        line: u64,
        learner: String,
        dimension: Dimension,
    },
    #[error("line {line}: questionnaire score {score} outside [0, 11]")]
    ScoreOutOfRange { line: u64, score: f64 },
    #[error("line {line}: unknown dimension `{value}`")]
    UnknownDimension { line: u64, value: String },
    #[error("line {line}: invalid {field} `{value}`")]
    InvalidCategory {
        line: u64,
        field: &'static str,
        value: String,
    },
}

pub type Result<T, E = IngestError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClampPolicy {
    /// Out-of-universe values are moved to the nearer bound and reported;
    /// unknown variables are skipped.
    #[default]
    Clamp,
    /// Unknown variables and out-of-universe values are errors.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorRecord {
    pub learner_id: String,
    pub features: BTreeMap<String, f64>,
}

impl BehaviorRecord {
    pub fn new(learner_id: impl Into<String>) -> Self {
        Self {
            learner_id: learner_id.into(),
            features: BTreeMap::new(),
        }
    }

    pub fn with(mut self, variable: &str, value: f64) -> Self {
        self.features.insert(variable.to_string(), value);
        self
    }

    pub fn get(&self, variable: &str) -> Option<f64> {
        self.features.get(variable).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClampEvent {
    pub learner_id: String,
    pub variable: String,
    pub value: f64,
    pub clamped: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClampReport {
    pub clamped: Vec<ClampEvent>,
    /// Rows skipped because their variable is not declared, by name.
    pub skipped: BTreeMap<String, usize>,
}

impl ClampReport {
    pub fn clamp_count(&self) -> usize {
        self.clamped.len()
    }

    /// Line-delimited text: one `clamp` line per moved value, one `skip`
    /// line per undeclared variable.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.clamped {
            let _ = writeln!(
                out,
                "clamp\t{}\t{}\t{}\t{}",
                e.learner_id, e.variable, e.value, e.clamped
            );
        }
        for (name, count) in &self.skipped {
            let _ = writeln!(out, "skip\t{name}\t{count}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Behaviors {
    /// One record per learner, sorted by learner id.
    pub records: Vec<BehaviorRecord>,
    pub report: ClampReport,
}

fn check_header(headers: &csv::StringRecord, expected: &'static str) -> Result<()> {
    let got: Vec<&str> = headers.iter().collect();
    let want: Vec<&str> = expected.split(',').collect();
    if got == want {
        Ok(())
    } else {
        Err(IngestError::BadHeader { line: 1, expected })
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input)
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn fields(record: &csv::StringRecord, n: usize) -> Result<Vec<&str>> {
    if record.len() != n {
        return Err(IngestError::MalformedRow {
            line: line_of(record),
            reason: format!("expected {n} fields, found {}", record.len()),
        });
    }
    let values: Vec<&str> = record.iter().collect();
    if values[0].is_empty() {
        return Err(IngestError::MalformedRow {
            line: line_of(record),
            reason: "empty learner_id".into(),
        });
    }
    Ok(values)
}

fn parse_number(raw: &str, line: u64) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| IngestError::MalformedRow {
        line,
        reason: format!("`{raw}` is not a number"),
    })
}

fn aggregate(mode: Aggregation, mut values: Vec<f64>) -> f64 {
    // Sorting first makes the result independent of row order.
    values.sort_by(f64::total_cmp);
    match mode {
        Aggregation::Sum => values.iter().sum(),
        Aggregation::Mean => values.iter().sum::<f64>() / values.len() as f64,
        Aggregation::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Reads long-format `learner_id,variable,value` rows.
pub fn read_behaviors<R: Read>(input: R, vars: &[VariableSpec], policy: ClampPolicy) -> Result<Behaviors> {
    let by_name: BTreeMap<&str, &VariableSpec> = vars.iter().map(|v| (v.name(), v)).collect();
    let mut rdr = reader(input);
    check_header(rdr.headers()?, "learner_id,variable,value")?;

    let mut observations: BTreeMap<String, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    let mut report = ClampReport::default();
    for row in rdr.records() {
        let row = row?;
        let line = line_of(&row);
        let f = fields(&row, 3)?;
        let (learner, variable) = (f[0], f[1]);
        let value = parse_number(f[2], line)?;
        if !value.is_finite() {
            return Err(IngestError::NonFiniteValue {
                line,
                variable: variable.to_string(),
            });
        }
        if !by_name.contains_key(variable) {
            match policy {
                ClampPolicy::Strict => {
                    return Err(IngestError::UnknownVariable {
                        line,
                        name: variable.to_string(),
                    })
                }
                ClampPolicy::Clamp => {
                    *report.skipped.entry(variable.to_string()).or_default() += 1;
                    continue;
                }
            }
        }
        observations
            .entry(learner.to_string())
            .or_default()
            .entry(variable.to_string())
            .or_default()
            .push(value);
    }

    let mut records = Vec::with_capacity(observations.len());
    for (learner, per_var) in observations {
        let mut record = BehaviorRecord::new(learner.clone());
        for (name, values) in per_var {
            let spec = by_name[name.as_str()];
            let value = spec.normalize(aggregate(spec.aggregation, values));
            if !value.is_finite() {
                return Err(IngestError::NonFiniteValue {
                    line: 0,
                    variable: name,
                });
            }
            let universe = spec.universe();
            let value = if universe.contains(value) {
                value
            } else {
                match policy {
                    ClampPolicy::Strict => {
                        return Err(IngestError::OutOfUniverse {
                            learner,
                            variable: name,
                            value,
                            lo: universe.lo(),
                            hi: universe.hi(),
                        })
                    }
                    ClampPolicy::Clamp => {
                        let clamped = universe.clamp(value);
                        report.clamped.push(ClampEvent {
                            learner_id: learner.clone(),
                            variable: name.clone(),
                            value,
                            clamped,
                        });
                        clamped
                    }
                }
            };
            record.features.insert(name, value);
        }
        records.push(record);
    }
    Ok(Behaviors { records, report })
}

pub fn load_behaviors(path: impl AsRef<Path>, vars: &[VariableSpec], policy: ClampPolicy) -> Result<Behaviors> {
    read_behaviors(File::open(path)?, vars, policy)
}

/// Writes records in the long format [`read_behaviors`] consumes, mapping
/// values back to raw scale for variables with `max_expected`.
pub fn write_behaviors<W: Write>(output: W, records: &[BehaviorRecord], vars: &[VariableSpec]) -> Result<()> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(["learner_id", "variable", "value"])?;
    for rec in records {
        for spec in vars {
            if let Some(v) = rec.get(spec.name()) {
                w.write_record([rec.learner_id.as_str(), spec.name(), &spec.denormalize(v).to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionnaireRecord {
    pub learner_id: String,
    pub dimension: Dimension,
    pub score: f64,
}

pub fn read_questionnaire<R: Read>(input: R) -> Result<Vec<QuestionnaireRecord>> {
    let mut rdr = reader(input);
    check_header(rdr.headers()?, "learner_id,dimension,score")?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = line_of(&row);
        let f = fields(&row, 3)?;
        let dimension = f[1].parse::<Dimension>().map_err(|_| IngestError::UnknownDimension {
            line,
            value: f[1].to_string(),
        })?;
        let score = parse_number(f[2], line)?;
        if !(QUESTIONNAIRE_RANGE.0..=QUESTIONNAIRE_RANGE.1).contains(&score) {
            return Err(IngestError::ScoreOutOfRange { line, score });
        }
        if !seen.insert((f[0].to_string(), dimension)) {
            return Err(IngestError::DuplicateEntry {
                line,
                learner: f[0].to_string(),
                dimension,
            });
        }
        out.push(QuestionnaireRecord {
            learner_id: f[0].to_string(),
            dimension,
            score,
        });
    }
    Ok(out)
}

pub fn load_questionnaire(path: impl AsRef<Path>) -> Result<Vec<QuestionnaireRecord>> {
    read_questionnaire(File::open(path)?)
}

pub fn write_questionnaire<W: Write>(output: W, records: &[QuestionnaireRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(["learner_id", "dimension", "score"])?;
    for r in records {
        w.write_record([r.learner_id.as_str(), r.dimension.as_str(), &r.score.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

macro_rules! category {
    ($name:ident, $field:literal, { $($variant:ident => $code:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const FIELD: &'static str = $field;

            pub fn code(self) -> &'static str {
                match self { $($name::$variant => $code),+ }
            }
        }

        impl FromStr for $name {
            type Err = ();

            fn from_str(s: &str) -> Result<Self, ()> {
                match s.to_ascii_lowercase().as_str() {
                    $($code => Ok($name::$variant),)+
                    _ => Err(()),
                }
            }
        }
    };
}

category!(Gender, "gender", { Female => "f", Male => "m" });
category!(Employment, "employment", { Student => "student", Employed => "employed" });
category!(AgeBand, "age_band", { From20To25 => "20-25", From25To30 => "25-30", From30To35 => "30-35" });
category!(ExperienceBand, "experience_band", { Under5 => "<5", From5To10 => "5-10", Over10 => ">10" });
category!(Certificate, "certificate", { Associate => "associate", Bachelor => "bsc", Master => "msc" });

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demographics {
    pub learner_id: String,
    pub gender: Gender,
    pub employment: Employment,
    pub age_band: AgeBand,
    pub experience_band: ExperienceBand,
    pub certificate: Certificate,
}

fn category_field<T: FromStr>(raw: &str, field: &'static str, line: u64) -> Result<T> {
    raw.parse().map_err(|_| IngestError::InvalidCategory {
        line,
        field,
        value: raw.to_string(),
    })
}

/// Reads `learner_id,gender,employment,age_band,experience_band,certificate`.
pub fn read_demographics<R: Read>(input: R) -> Result<Vec<Demographics>> {
    let mut rdr = reader(input);
    check_header(
        rdr.headers()?,
        "learner_id,gender,employment,age_band,experience_band,certificate",
    )?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = line_of(&row);
        let f = fields(&row, 6)?;
        out.push(Demographics {
            learner_id: f[0].to_string(),
            gender: category_field(f[1], Gender::FIELD, line)?,
            employment: category_field(f[2], Employment::FIELD, line)?,
            age_band: category_field(f[3], AgeBand::FIELD, line)?,
            experience_band: category_field(f[4], ExperienceBand::FIELD, line)?,
            certificate: category_field(f[5], Certificate::FIELD, line)?,
        });
    }
    Ok(out)
}

pub fn load_demographics(path: impl AsRef<Path>) -> Result<Vec<Demographics>> {
    read_demographics(File::open(path)?)
}

/// Count of learners per category code, per field.
pub fn demographic_counts(rows: &[Demographics]) -> BTreeMap<&'static str, BTreeMap<&'static str, usize>> {
    let mut out: BTreeMap<&'static str, BTreeMap<&'static str, usize>> = BTreeMap::new();
    for r in rows {
        for (field, code) in [
            (Gender::FIELD, r.gender.code()),
            (Employment::FIELD, r.employment.code()),
            (AgeBand::FIELD, r.age_band.code()),
            (ExperienceBand::FIELD, r.experience_band.code()),
            (Certificate::FIELD, r.certificate.code()),
        ] {
            *out.entry(field).or_default().entry(code).or_default() += 1;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionCoverage {
    pub dimension: Dimension,
    /// Share of learners holding every variable the dimension's rules read;
    /// 1.0 for an empty cohort.
    pub fraction: f64,
    /// Learners lacking at least one variable, with the missing names.
    pub flagged: Vec<(String, Vec<String>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub learners: usize,
    pub dimensions: Vec<DimensionCoverage>,
}

impl CoverageReport {
    pub fn to_text(&self) -> String {
        let mut out = format!("learners\t{}\n", self.learners);
        for d in &self.dimensions {
            let _ = writeln!(out, "coverage\t{}\t{:.4}", d.dimension, d.fraction);
            for (learner, missing) in &d.flagged {
                let _ = writeln!(out, "missing\t{}\t{}\t{}", d.dimension, learner, missing.join(","));
            }
        }
        out
    }
}

pub fn feature_coverage(records: &[BehaviorRecord], rb: &RuleBase) -> CoverageReport {
    let dimensions = rb
        .active_dimensions()
        .into_iter()
        .map(|dimension| {
            let needed = rb.referenced_inputs(dimension);
            let flagged: Vec<(String, Vec<String>)> = records
                .iter()
                .filter_map(|r| {
                    let missing: Vec<String> = needed
                        .iter()
                        .filter(|v| !r.features.contains_key(v.name()))
                        .map(|v| v.name().to_string())
                        .collect();
                    (!missing.is_empty()).then(|| (r.learner_id.clone(), missing))
                })
                .collect();
            let fraction = if records.is_empty() {
                1.0
            } else {
                (records.len() - flagged.len()) as f64 / records.len() as f64
            };
            DimensionCoverage {
                dimension,
                fraction,
                flagged,
            }
        })
        .collect();
    CoverageReport {
        learners: records.len(),
        dimensions,
    }
}
