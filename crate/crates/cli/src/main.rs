//! `stylegroup`: classify learners' styles from behaviour logs, group them,
//! and evaluate grouped teaching against a control group.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

/// An error together with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub const VALIDATION: u8 = 1;
    pub const IO: u8 = 2;

    pub fn io(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: Self::IO,
            error: error.into(),
        }
    }

    pub fn invalid(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: Self::VALIDATION,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self::io(error)
    }
}

#[derive(Parser)]
#[command(name = "stylegroup", version, about = "Fuzzy learning-style grouping pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check a rule base; exit 1 on any error diagnostic.
    ValidateRules(ValidateArgs),
    /// Classify learners from a behaviour log.
    Classify(ClassifyArgs),
    /// Draw a control group and partition the rest into style groups.
    Group(GroupArgs),
    /// Compare group scores against the control group.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic cohort with known styles.
    Simulate(SimulateArgs),
    /// simulate, classify, group and evaluate in one run.
    Pipeline(PipelineArgs),
}

#[derive(Args, Default)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; nothing is written outside it.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Without both files the bundled rule base is used.
#[derive(Args, Default)]
struct RuleArgs {
    /// Variable declarations (.fvars).
    #[arg(long)]
    vars: Option<PathBuf>,
    /// Rules (.frules).
    #[arg(long)]
    rules: Option<PathBuf>,
}

#[derive(Args, Default)]
struct GroupingArgs {
    /// Share of learners drawn as control [default: 46/466].
    #[arg(long)]
    control_fraction: Option<f64>,
    /// Upper bound on the number of groups [default: 4].
    #[arg(long)]
    target_k: Option<usize>,
    /// Smallest allowed group [default: 10].
    #[arg(long)]
    min_size: Option<usize>,
    /// Seed for every random draw (required).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    rules: RuleArgs,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    rules: RuleArgs,
    /// Long-format behaviour log: learner_id,variable,value.
    #[arg(long)]
    behaviors: Option<PathBuf>,
    /// Questionnaire scores: learner_id,dimension,score.
    #[arg(long)]
    questionnaire: Option<PathBuf>,
    /// Reject unknown variables and out-of-range values instead of clamping.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct GroupArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grouping: GroupingArgs,
    /// Profiles written by `classify`.
    #[arg(long)]
    profiles: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    /// Exam scores: learner_id,group_id,score (group 0 is control).
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Likert responses: learner_id,group_id,q1,...
    #[arg(long)]
    satisfaction: Option<PathBuf>,
    /// Demographics table to summarise alongside the report.
    #[arg(long)]
    demographics: Option<PathBuf>,
    /// Significance level [default: 0.05].
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    rules: RuleArgs,
    /// Cohort spec (JSON); the built-in four-signature cohort if omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Seed for every random draw (required; overrides the spec's seed).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    rules: RuleArgs,
    #[command(flatten)]
    grouping: GroupingArgs,
    /// Cohort spec (JSON); the built-in four-signature cohort if omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Significance level [default: 0.05].
    #[arg(long)]
    alpha: Option<f64>,
}

impl Common {
    fn config(&self, mut flags: RunConfig) -> Result<RunConfig, Failure> {
        flags.out = self.out.clone();
        Ok(match &self.config {
            Some(path) => RunConfig::load(path)?.merge(flags),
            None => flags,
        })
    }
}

impl RuleArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.vars = self.vars.clone();
        c.rules = self.rules.clone();
    }
}

impl GroupingArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.control_fraction = self.control_fraction;
        c.target_k = self.target_k;
        c.min_size = self.min_size;
        c.seed = self.seed;
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut flags = RunConfig::default();
    match cli.command {
        Command::ValidateRules(a) => {
            a.rules.apply(&mut flags);
            commands::validate_rules(&a.common.config(flags)?)
        }
        Command::Classify(a) => {
            a.rules.apply(&mut flags);
            flags.behaviors = a.behaviors;
            flags.questionnaire = a.questionnaire;
            flags.strict = a.strict.then_some(true);
            commands::classify(&a.common.config(flags)?)
        }
        Command::Group(a) => {
            a.grouping.apply(&mut flags);
            flags.profiles = a.profiles;
            commands::group(&a.common.config(flags)?)
        }
        Command::Evaluate(a) => {
            flags.scores = a.scores;
            flags.satisfaction = a.satisfaction;
            flags.demographics = a.demographics;
            flags.alpha = a.alpha;
            commands::evaluate(&a.common.config(flags)?)
        }
        Command::Simulate(a) => {
            a.rules.apply(&mut flags);
            flags.spec = a.spec;
            flags.seed = a.seed;
            commands::simulate(&a.common.config(flags)?)
        }
        Command::Pipeline(a) => {
            a.rules.apply(&mut flags);
            a.grouping.apply(&mut flags);
            flags.spec = a.spec;
            flags.alpha = a.alpha;
            commands::pipeline(&a.common.config(flags)?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("STYLEGROUP_LOG", "warn"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
