use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Settings read from `--config`. Any flag given on the command line wins.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub vars: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub behaviors: Option<PathBuf>,
    pub questionnaire: Option<PathBuf>,
    pub demographics: Option<PathBuf>,
    pub profiles: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub satisfaction: Option<PathBuf>,
    pub spec: Option<PathBuf>,
    pub control_fraction: Option<f64>,
    pub target_k: Option<usize>,
    pub min_size: Option<usize>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub strict: Option<bool>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(Failure::io)?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))
            .map_err(Failure::io)
    }

    /// Flag values override config values field by field.
    pub fn merge(self, flags: RunConfig) -> RunConfig {
        RunConfig {
            vars: flags.vars.or(self.vars),
            rules: flags.rules.or(self.rules),
            behaviors: flags.behaviors.or(self.behaviors),
            questionnaire: flags.questionnaire.or(self.questionnaire),
            demographics: flags.demographics.or(self.demographics),
            profiles: flags.profiles.or(self.profiles),
            scores: flags.scores.or(self.scores),
            satisfaction: flags.satisfaction.or(self.satisfaction),
            spec: flags.spec.or(self.spec),
            control_fraction: flags.control_fraction.or(self.control_fraction),
            target_k: flags.target_k.or(self.target_k),
            min_size: flags.min_size.or(self.min_size),
            seed: flags.seed.or(self.seed),
            alpha: flags.alpha.or(self.alpha),
            strict: flags.strict.or(self.strict),
            out: flags.out.or(self.out),
        }
    }

    pub fn alpha(&self) -> anyhow::Result<f64> {
        let alpha = self.alpha.unwrap_or(0.05);
        if !(alpha > 0.0 && alpha < 1.0) {
            bail!("--alpha {alpha} must lie in (0, 1)");
        }
        Ok(alpha)
    }

    pub fn seed(&self) -> anyhow::Result<u64> {
        self.seed.context("--seed is required (no implicit randomness)")
    }

    pub fn out(&self) -> anyhow::Result<&Path> {
        self.out.as_deref().context("--out is required")
    }

    pub fn require<'a>(field: &'a Option<PathBuf>, flag: &str) -> anyhow::Result<&'a Path> {
        let path = field.as_deref().with_context(|| format!("{flag} is required"))?;
        if !path.is_file() {
            bail!("{flag}: {} does not exist", path.display());
        }
        Ok(path)
    }
}
