use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context};
use log::{info, warn};
use serde::Serialize;

use stylegroup_core::bundled;
use stylegroup_core::classify::{
    read_profiles, validate_against_questionnaire, write_profiles, Classifier, ClassifyError, StyleProfile,
};
use stylegroup_core::dsl::{parse_rules, parse_variables, validate, RuleBase};
use stylegroup_core::grouping::{assign, content_plan, write_assignment, GroupAssignment, GroupingParams};
use stylegroup_core::ingest::{
    demographic_counts, feature_coverage, load_behaviors, load_demographics, load_questionnaire, write_behaviors,
    write_questionnaire, Behaviors, ClampPolicy, IngestError,
};
use stylegroup_core::par::Execution;
use stylegroup_core::sim::{
    default_cohort, generate, generate_scores, label_recovery, read_scores, write_satisfaction, write_scores,
    write_truth, CohortSpec, ScoreSamples, SimError,
};
use stylegroup_core::stats::{evaluate_groups, EvaluationReport, LikertScale, TVariant};

use crate::config::RunConfig;
use crate::Failure;

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::io)
}

fn load_rule_base(cfg: &RunConfig) -> Result<RuleBase, Failure> {
    match (&cfg.vars, &cfg.rules) {
        (None, None) => {
            info!("using the bundled rule base");
            bundled::rule_base().map_err(|e| Failure::invalid(anyhow!("bundled rule base: {e}")))
        }
        (Some(vars_path), Some(rules_path)) => {
            let vars = parse_variables(&read_text(vars_path)?)
                .map_err(|e| Failure::invalid(anyhow!("{}:{e}", vars_path.display())))?;
            let rules = parse_rules(&read_text(rules_path)?, &vars)
                .map_err(|e| Failure::invalid(anyhow!("{}:{e}", rules_path.display())))?;
            Ok(RuleBase::new(vars, rules))
        }
        _ => Err(Failure::io(anyhow!("--vars and --rules must be given together"))),
    }
}

fn classifier(rb: &RuleBase) -> Result<Classifier, Failure> {
    Classifier::new(rb).map_err(Failure::invalid)
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, Failure> {
    let out = cfg.out()?;
    fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(Failure::io)?;
    Ok(out)
}

/// Creates `dir/name` and hands a buffered writer to `body`.
fn write_file<F, E>(dir: &Path, name: &str, body: F) -> Result<(), Failure>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), E>,
    E: Into<anyhow::Error>,
{
    let path = dir.join(name);
    let file = File::create(&path)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(Failure::io)?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .map_err(Into::into)
        .and_then(|()| w.flush().map_err(Into::into))
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::io)
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    write_file(dir, name, |w| w.write_all(text.as_bytes()))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Failure> {
    write_file(dir, name, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n").map_err(anyhow::Error::from)
    })
}

fn ingest_failure(e: IngestError) -> Failure {
    match e {
        IngestError::Io(_) => Failure::io(e),
        _ => Failure::invalid(e),
    }
}

fn sim_failure(e: SimError) -> Failure {
    match e {
        SimError::Io(_) => Failure::io(e),
        _ => Failure::invalid(e),
    }
}

pub fn validate_rules(cfg: &RunConfig) -> Result<(), Failure> {
    let rb = load_rule_base(cfg)?;
    let diags = validate(&rb);
    let mut text = String::new();
    for d in &diags {
        eprintln!("{d}");
        let _ = writeln!(text, "{d}");
    }
    let errors = diags.iter().filter(|d| d.is_error()).count();
    let warnings = diags.len() - errors;
    println!("{errors} errors, {warnings} warnings");
    if cfg.out.is_some() {
        write_text(out_dir(cfg)?, "diagnostics.tsv", &text)?;
    }
    if errors > 0 {
        return Err(Failure::invalid(anyhow!("rule base has {errors} error diagnostics")));
    }
    Ok(())
}

/// Classifies, writes profiles and sidecars, and returns the profiles.
fn classify_into(out: &Path, rb: &RuleBase, behaviors: &Behaviors) -> Result<Vec<StyleProfile>, Failure> {
    let c = classifier(rb)?;
    let result = c.classify_cohort(&behaviors.records, Execution::default());
    info!(
        "classified {} learners, {} failed",
        result.profiles.len(),
        result.errors.len()
    );
    if !result.errors.is_empty() {
        warn!(
            "{} learners could not be classified; see classify_errors.tsv",
            result.errors.len()
        );
    }
    write_file(out, "profiles.csv", |w| write_profiles(w, &result.profiles))?;
    write_json(out, "profiles.json", &result.profiles)?;
    let mut errors = String::from("learner_id\terror\n");
    for e in &result.errors {
        let _ = writeln!(errors, "{}\t{e}", e.learner().unwrap_or("-"));
    }
    write_text(out, "classify_errors.tsv", &errors)?;
    write_text(out, "clamp_report.tsv", &behaviors.report.to_text())?;
    write_text(out, "coverage.tsv", &feature_coverage(&behaviors.records, rb).to_text())?;
    Ok(result.profiles)
}

fn questionnaire_report(out: &Path, profiles: &[StyleProfile], questionnaire: &Path) -> Result<(), Failure> {
    let q = load_questionnaire(questionnaire).map_err(ingest_failure)?;
    let report = validate_against_questionnaire(profiles, &q).map_err(|e| match e {
        ClassifyError::Io(_) => Failure::io(e),
        _ => Failure::invalid(e),
    })?;
    write_text(out, "validation.txt", &report.to_text())?;
    write_json(out, "validation.json", &report)?;
    print!("{}", report.to_text());
    Ok(())
}

pub fn classify(cfg: &RunConfig) -> Result<(), Failure> {
    let rb = load_rule_base(cfg)?;
    let behaviors_path = RunConfig::require(&cfg.behaviors, "--behaviors")?;
    let policy = if cfg.strict.unwrap_or(false) {
        ClampPolicy::Strict
    } else {
        ClampPolicy::Clamp
    };
    let behaviors = load_behaviors(behaviors_path, &rb.variables, policy).map_err(ingest_failure)?;
    let out = out_dir(cfg)?;
    let profiles = classify_into(out, &rb, &behaviors)?;
    if cfg.questionnaire.is_some() {
        questionnaire_report(
            out,
            &profiles,
            RunConfig::require(&cfg.questionnaire, "--questionnaire")?,
        )?;
    }
    Ok(())
}

fn grouping_params(cfg: &RunConfig) -> anyhow::Result<GroupingParams> {
    let defaults = GroupingParams::new(cfg.seed()?);
    let params = GroupingParams {
        control_fraction: cfg.control_fraction.unwrap_or(defaults.control_fraction),
        target_k: cfg.target_k.unwrap_or(defaults.target_k),
        min_size: cfg.min_size.unwrap_or(defaults.min_size),
        seed: defaults.seed,
    };
    if !(0.0..1.0).contains(&params.control_fraction) {
        anyhow::bail!("--control-fraction must lie in [0, 1)");
    }
    Ok(params)
}

#[derive(Serialize)]
struct GroupSummary<'a> {
    params: &'a GroupingParams,
    groups: Vec<GroupLine<'a>>,
    control_size: usize,
    merges: &'a [stylegroup_core::grouping::MergeStep],
}

#[derive(Serialize)]
struct GroupLine<'a> {
    id: usize,
    size: usize,
    signature: String,
    centroid: &'a [f64; 4],
}

fn group_into(out: &Path, profiles: &[StyleProfile], params: GroupingParams) -> Result<GroupAssignment, Failure> {
    let a = assign(profiles, params).map_err(Failure::invalid)?;
    a.check_partition(profiles.iter().map(|p| p.learner_id.as_str()))
        .map_err(|e| Failure::invalid(anyhow!("partition check failed: {e}")))?;
    write_file(out, "assignment.csv", |w| write_assignment(w, &a))?;
    let plans: Vec<_> = a.groups.iter().map(content_plan).collect();
    write_json(out, "content_plans.json", &plans)?;
    let summary = GroupSummary {
        params: &a.params,
        groups: a
            .groups
            .iter()
            .map(|g| GroupLine {
                id: g.id,
                size: g.members.len(),
                signature: g.signature.to_string(),
                centroid: &g.centroid,
            })
            .collect(),
        control_size: a.control.len(),
        merges: &a.trace,
    };
    write_json(out, "groups.json", &summary)?;
    Ok(a)
}

pub fn group(cfg: &RunConfig) -> Result<(), Failure> {
    let params = grouping_params(cfg)?;
    let path = RunConfig::require(&cfg.profiles, "--profiles")?;
    let file = File::open(path)
        .with_context(|| format!("opening {}", path.display()))
        .map_err(Failure::io)?;
    let profiles = read_profiles(file).map_err(Failure::invalid)?;
    if let Some(p) = profiles.iter().find(|p| p.results.len() != 4) {
        return Err(Failure::invalid(anyhow!(
            "learner `{}` lacks some dimensions",
            p.learner_id
        )));
    }
    let a = group_into(out_dir(cfg)?, &profiles, params)?;
    for g in &a.groups {
        println!("group {}\t{}\t{}", g.id, g.members.len(), g.signature);
    }
    println!("control\t{}", a.control.len());
    Ok(())
}

fn evaluate_into(out: &Path, scores: &ScoreSamples, alpha: f64) -> Result<EvaluationReport, Failure> {
    let (groups, control) = scores.samples();
    let report = evaluate_groups(
        &groups,
        control.as_ref(),
        &scores.satisfaction_by_arm(),
        LikertScale::default(),
        alpha,
        TVariant::Welch,
    )
    .map_err(Failure::invalid)?;
    write_text(out, "evaluation.txt", &report.to_text())?;
    write_json(out, "evaluation.json", &report)?;
    Ok(report)
}

pub fn evaluate(cfg: &RunConfig) -> Result<(), Failure> {
    let alpha = cfg.alpha()?;
    let scores_path = RunConfig::require(&cfg.scores, "--scores")?;
    let open = |p: &Path| {
        File::open(p)
            .with_context(|| format!("opening {}", p.display()))
            .map_err(Failure::io)
    };
    let sat = match &cfg.satisfaction {
        Some(_) => Some(open(RunConfig::require(&cfg.satisfaction, "--satisfaction")?)?),
        None => None,
    };
    let scores = read_scores(open(scores_path)?, sat).map_err(sim_failure)?;
    let out = out_dir(cfg)?;
    if cfg.demographics.is_some() {
        let rows =
            load_demographics(RunConfig::require(&cfg.demographics, "--demographics")?).map_err(ingest_failure)?;
        write_json(out, "demographics.json", &demographic_counts(&rows))?;
    }
    let report = evaluate_into(out, &scores, alpha)?;
    print!("{}", report.to_text());
    Ok(())
}

fn cohort_spec(cfg: &RunConfig, seed: u64) -> Result<CohortSpec, Failure> {
    let mut spec = match &cfg.spec {
        Some(_) => {
            let path = RunConfig::require(&cfg.spec, "--spec")?;
            serde_json::from_str(&read_text(path)?)
                .with_context(|| format!("parsing {}", path.display()))
                .map_err(Failure::io)?
        }
        None => default_cohort(seed),
    };
    spec.seed = seed;
    Ok(spec)
}

struct Simulated {
    truth: Vec<(String, stylegroup_core::grouping::StyleSignature)>,
    spec: CohortSpec,
}

fn simulate_into(out: &Path, rb: &RuleBase, spec: CohortSpec) -> Result<Simulated, Failure> {
    let cohort = generate(&spec, rb).map_err(sim_failure)?;
    write_file(out, "truth.csv", |w| write_truth(w, &cohort.truth))?;
    write_file(out, "behaviors.csv", |w| {
        write_behaviors(w, &cohort.behaviors, &rb.variables)
    })?;
    write_file(out, "questionnaire.csv", |w| {
        write_questionnaire(w, &cohort.questionnaire)
    })?;
    write_json(out, "cohort_spec.json", &spec)?;
    info!("generated {} learners", cohort.truth.len());
    Ok(Simulated {
        truth: cohort.truth,
        spec,
    })
}

pub fn simulate(cfg: &RunConfig) -> Result<(), Failure> {
    let seed = cfg.seed()?;
    let rb = load_rule_base(cfg)?;
    let spec = cohort_spec(cfg, seed)?;
    let sim = simulate_into(out_dir(cfg)?, &rb, spec)?;
    println!("{} learners", sim.truth.len());
    Ok(())
}

pub fn pipeline(cfg: &RunConfig) -> Result<(), Failure> {
    let params = grouping_params(cfg)?;
    let alpha = cfg.alpha()?;
    let rb = load_rule_base(cfg)?;
    let spec = cohort_spec(cfg, params.seed)?;
    let out = out_dir(cfg)?;

    let sim = simulate_into(out, &rb, spec)?;
    // Read the cohort back from disk so the run exercises the same path as
    // real data.
    let behaviors =
        load_behaviors(out.join("behaviors.csv"), &rb.variables, ClampPolicy::Clamp).map_err(ingest_failure)?;
    let profiles = classify_into(out, &rb, &behaviors)?;
    questionnaire_report(out, &profiles, &out.join("questionnaire.csv"))?;
    let assignment = group_into(out, &profiles, params)?;

    let model = sim.spec.score_model.clone().unwrap_or_default();
    let scores = generate_scores(&sim.truth, &assignment, &model, params.seed).map_err(sim_failure)?;
    write_file(out, "scores.csv", |w| write_scores(w, &scores))?;
    if model.satisfaction.is_some() {
        write_file(out, "satisfaction.csv", |w| write_satisfaction(w, &scores))?;
    }
    let report = evaluate_into(out, &scores, alpha)?;

    let mut summary = String::new();
    let _ = writeln!(summary, "learners\t{}", sim.truth.len());
    let _ = writeln!(summary, "classified\t{}", profiles.len());
    let _ = writeln!(summary, "label recovery\t{:.4}", label_recovery(&sim.truth, &profiles));
    for g in &assignment.groups {
        let _ = writeln!(summary, "group {}\t{}\t{}", g.id, g.members.len(), g.signature);
    }
    let _ = writeln!(summary, "control\t{}", assignment.control.len());
    for row in &report.comparisons {
        let _ = writeln!(summary, "{} vs {}\t{}", row.group, row.control, row.verdict());
    }
    write_text(out, "summary.txt", &summary)?;
    print!("{summary}");
    Ok(())
}
