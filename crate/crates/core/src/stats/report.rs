use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::{
    normality_check, one_way_anova, posthoc_pairwise, satisfaction_score, two_sample_t, weighted_mean, AnovaResult,
    LikertScale, NormalityResult, PairwiseResult, Result, Sample, TVariant, TestResult,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSummary {
    pub label: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub normality: Option<NormalityResult>,
    /// Why the normality screen was skipped, if it was.
    pub normality_note: Option<String>,
}

/// One treatment group compared with the control group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub group: String,
    pub control: String,
    pub mean_difference: f64,
    pub test: Option<TestResult>,
    pub error: Option<String>,
}

impl ComparisonRow {
    /// `Positive` when the difference is significant at the report's alpha.
    pub fn verdict(&self) -> &'static str {
        match &self.test {
            Some(t) if t.significant => "Positive",
            Some(_) => "Negative",
            None => "n/a",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub alpha: f64,
    pub variant: TVariant,
    pub samples: Vec<SampleSummary>,
    pub comparisons: Vec<ComparisonRow>,
    pub anova: Option<AnovaResult>,
    pub anova_error: Option<String>,
    pub posthoc: Vec<PairwiseResult>,
    /// Mean of treatment-group means weighted by group size.
    pub treated_weighted_mean: Option<f64>,
    pub control_mean: Option<f64>,
    /// Satisfaction percentage per arm label.
    pub satisfaction: BTreeMap<String, f64>,
}

fn summarize(s: &Sample) -> SampleSummary {
    let (normality, normality_note) = match normality_check(s) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    SampleSummary {
        label: s.label.clone(),
        n: s.len(),
        mean: s.mean(),
        sd: s.variance().sqrt(),
        normality,
        normality_note,
    }
}

/// Compares every treatment group with the control group, runs ANOVA with
/// Bonferroni post-hoc comparisons over all samples, and aggregates means
/// and satisfaction.
pub fn evaluate_groups(
    groups: &[Sample],
    control: Option<&Sample>,
    satisfaction: &[(String, Vec<Vec<u8>>)],
    scale: LikertScale,
    alpha: f64,
    variant: TVariant,
) -> Result<EvaluationReport> {
    super::check_alpha(alpha)?;
    let mut all: Vec<Sample> = groups.to_vec();
    if let Some(c) = control {
        all.push(c.clone());
    }
    let samples = all.iter().map(summarize).collect();

    let comparisons = match control {
        Some(c) => groups
            .iter()
            .map(|g| {
                let (test, error) = match two_sample_t(g, c, variant, alpha) {
                    Ok(t) => (Some(t), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                ComparisonRow {
                    group: g.label.clone(),
                    control: c.label.clone(),
                    mean_difference: g.mean() - c.mean(),
                    test,
                    error,
                }
            })
            .collect(),
        None => Vec::new(),
    };

    let (anova, anova_error, posthoc) = match one_way_anova(&all, alpha) {
        Ok(a) => match posthoc_pairwise(&all, alpha) {
            Ok(p) => (Some(a), None, p),
            Err(e) => (Some(a), Some(format!("post-hoc: {e}")), Vec::new()),
        },
        Err(e) => (None, Some(e.to_string()), Vec::new()),
    };

    let treated_weighted_mean = if groups.is_empty() {
        None
    } else {
        let means: Vec<f64> = groups.iter().map(Sample::mean).collect();
        let sizes: Vec<f64> = groups.iter().map(|g| g.len() as f64).collect();
        Some(weighted_mean(&means, &sizes)?)
    };

    let mut sat = BTreeMap::new();
    for (arm, responses) in satisfaction {
        sat.insert(arm.clone(), satisfaction_score(responses, scale)?);
    }

    Ok(EvaluationReport {
        alpha,
        variant,
        samples,
        comparisons,
        anova,
        anova_error,
        posthoc,
        treated_weighted_mean,
        control_mean: control.map(Sample::mean),
        satisfaction: sat,
    })
}

impl EvaluationReport {
    /// Plain-text report led by the group-vs-control t-test table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<32} {:>14} {:>12}  Significant difference",
            "Group", "Significance", "t statistic"
        );
        for row in &self.comparisons {
            let name = format!("{} vs {}", row.group, row.control);
            match &row.test {
                Some(t) => {
                    let _ = writeln!(
                        out,
                        "{:<32} {:>13.2}% {:>12.3}  {}",
                        name,
                        100.0 * t.p_value,
                        t.statistic,
                        row.verdict()
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        "{:<32} {:>14} {:>12}  n/a ({})",
                        name,
                        "-",
                        "-",
                        row.error.as_deref().unwrap_or("")
                    );
                }
            }
        }
        let _ = writeln!(out);
        match (&self.anova, &self.anova_error) {
            (Some(a), _) => {
                let _ = writeln!(
                    out,
                    "one-way ANOVA: F({}, {}) = {:.4}, p = {:.6}, {}",
                    a.test.df1,
                    a.test.df2.unwrap_or(0.0),
                    a.test.statistic,
                    a.test.p_value,
                    if a.test.significant {
                        "significant"
                    } else {
                        "not significant"
                    }
                );
            }
            (None, Some(e)) => {
                let _ = writeln!(out, "one-way ANOVA: not computed ({e})");
            }
            (None, None) => {}
        }
        for p in &self.posthoc {
            let _ = writeln!(
                out,
                "post-hoc {} vs {}: t = {:.4}, p = {:.6}, adjusted alpha = {:.6}, {}",
                p.first,
                p.second,
                p.result.statistic,
                p.result.p_value,
                p.result.alpha,
                if p.result.significant {
                    "significant"
                } else {
                    "not significant"
                }
            );
        }
        let _ = writeln!(out);
        for s in &self.samples {
            let normality = match (&s.normality, &s.normality_note) {
                (Some(n), _) => format!(
                    "JB = {:.4}, p = {:.4}{}",
                    n.jarque_bera,
                    n.p_value,
                    if n.advisory {
                        ", consider a non-parametric test"
                    } else {
                        ""
                    }
                ),
                (None, Some(note)) => format!("normality not checked ({note})"),
                (None, None) => String::new(),
            };
            let _ = writeln!(
                out,
                "{}: n = {}, mean = {:.3}, sd = {:.3}; {}",
                s.label, s.n, s.mean, s.sd, normality
            );
        }
        if let Some(m) = self.treated_weighted_mean {
            let _ = writeln!(out, "weighted mean (treatment groups): {m:.3}");
        }
        if let Some(m) = self.control_mean {
            let _ = writeln!(out, "mean (control): {m:.3}");
        }
        for (arm, pct) in &self.satisfaction {
            let _ = writeln!(out, "satisfaction ({arm}): {pct:.1}%");
        }
        out
    }
}
