//! Correlation, two-sample t-tests, one-way ANOVA with Bonferroni post-hoc
//! comparisons, Jarque-Bera normality screening and score aggregation.

mod report;
pub mod special;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use report::{evaluate_groups, ComparisonRow, EvaluationReport, SampleSummary};
pub use special::{f_upper_p, reg_inc_beta, t_two_sided_p};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("continued fraction did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("zero variance")]
    ZeroVariance,
    #[error("both samples have zero variance")]
    ZeroVarianceBoth,
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("within-group variance is zero")]
    ZeroWithinVariance,
    #[error("weights sum to zero")]
    ZeroWeightSum,
    #[error("negative or non-finite weight {0}")]
    BadWeight(f64),
    #[error("non-finite value in sample `{0}`")]
    NonFinite(String),
    #[error("response {learner}: item {item} = {value} outside [{min}, {max}]")]
    ItemOutOfRange {
        learner: usize,
        item: usize,
        value: u8,
        min: u8,
        max: u8,
    },
    #[error("response {learner}: expected {expected} items, found {found}")]
    WrongItemCount {
        learner: usize,
        expected: usize,
        found: usize,
    },
    #[error("no responses")]
    NoResponses,
    #[error("significance level {0} outside (0, 1)")]
    BadAlpha(f64),
}

pub type Result<T, E = StatsError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub label: String,
    pub values: Vec<f64>,
}

impl Sample {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if values.is_empty() {
            return Err(StatsError::TooFewObservations { needed: 1, got: 0 });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite(label));
        }
        Ok(Self { label, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Unbiased sample variance (`n - 1` denominator); 0 for `n < 2`.
    pub fn variance(&self) -> f64 {
        variance(&self.values)
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub(crate) fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(StatsError::BadAlpha(alpha))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// t or F.
    pub statistic: f64,
    pub df1: f64,
    /// Denominator degrees of freedom for F tests.
    pub df2: Option<f64>,
    pub p_value: f64,
    pub alpha: f64,
    pub significant: bool,
}

impl TestResult {
    fn new(statistic: f64, df1: f64, df2: Option<f64>, p_value: f64, alpha: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            statistic,
            df1,
            df2,
            p_value,
            alpha,
            significant: p_value < alpha,
        }
    }
}

/// Sample Pearson correlation, clamped to `[-1, 1]`.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewObservations {
            needed: 3,
            got: x.len(),
        });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TVariant {
    /// Pooled variance, `df = n1 + n2 - 2`.
    Student,
    /// Unequal variances, Welch-Satterthwaite degrees of freedom.
    #[default]
    Welch,
}

/// Two-sided two-sample t-test of `mean(a) - mean(b)`.
pub fn two_sample_t(a: &Sample, b: &Sample, variant: TVariant, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let (n1, n2) = (a.len(), b.len());
    if n1 < 2 || n2 < 2 {
        return Err(StatsError::TooFewObservations {
            needed: 2,
            got: n1.min(n2),
        });
    }
    let (v1, v2) = (a.variance(), b.variance());
    if v1 == 0.0 && v2 == 0.0 {
        return Err(StatsError::ZeroVarianceBoth);
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let diff = a.mean() - b.mean();
    let (t, df) = match variant {
        TVariant::Student => {
            let pooled = ((n1f - 1.0) * v1 + (n2f - 1.0) * v2) / (n1f + n2f - 2.0);
            let se = (pooled * (1.0 / n1f + 1.0 / n2f)).sqrt();
            (diff / se, n1f + n2f - 2.0)
        }
        TVariant::Welch => {
            let (q1, q2) = (v1 / n1f, v2 / n2f);
            let se = (q1 + q2).sqrt();
            let df = (q1 + q2).powi(2) / (q1 * q1 / (n1f - 1.0) + q2 * q2 / (n2f - 1.0));
            (diff / se, df)
        }
    };
    let p = t_two_sided_p(t, df)?;
    Ok(TestResult::new(t, df, None, p, alpha))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaResult {
    pub test: TestResult,
    pub means: Vec<f64>,
    pub ss_between: f64,
    pub ss_within: f64,
}

pub fn one_way_anova(groups: &[Sample], alpha: f64) -> Result<AnovaResult> {
    check_alpha(alpha)?;
    let k = groups.len();
    if k < 2 {
        return Err(StatsError::TooFewGroups(k));
    }
    if let Some(small) = groups.iter().find(|g| g.len() < 2) {
        return Err(StatsError::TooFewObservations {
            needed: 2,
            got: small.len(),
        });
    }
    let n: usize = groups.iter().map(Sample::len).sum();
    let grand = groups.iter().flat_map(|g| g.values.iter()).sum::<f64>() / n as f64;
    let means: Vec<f64> = groups.iter().map(Sample::mean).collect();
    let ss_between: f64 = groups
        .iter()
        .zip(&means)
        .map(|(g, m)| g.len() as f64 * (m - grand).powi(2))
        .sum();
    let ss_within: f64 = groups
        .iter()
        .zip(&means)
        .map(|(g, m)| g.values.iter().map(|x| (x - m).powi(2)).sum::<f64>())
        .sum();
    if ss_within == 0.0 {
        return Err(StatsError::ZeroWithinVariance);
    }
    let (df1, df2) = ((k - 1) as f64, (n - k) as f64);
    let f = (ss_between / df1) / (ss_within / df2);
    let p = f_upper_p(f, df1, df2)?;
    Ok(AnovaResult {
        test: TestResult::new(f, df1, Some(df2), p, alpha),
        means,
        ss_between,
        ss_within,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseResult {
    pub first: String,
    pub second: String,
    /// Student t for the pair; `alpha` and `significant` are Bonferroni
    /// adjusted.
    pub result: TestResult,
    pub p_adjusted: f64,
}

/// Student t on every unordered pair, judged at `alpha / C(k, 2)`.
pub fn posthoc_pairwise(groups: &[Sample], alpha: f64) -> Result<Vec<PairwiseResult>> {
    check_alpha(alpha)?;
    let k = groups.len();
    if k < 2 {
        return Err(StatsError::TooFewGroups(k));
    }
    let pairs = (k * (k - 1) / 2) as f64;
    let adjusted = alpha / pairs;
    let mut out = Vec::with_capacity(pairs as usize);
    for i in 0..k {
        for j in i + 1..k {
            let mut result = two_sample_t(&groups[i], &groups[j], TVariant::Student, alpha)?;
            result.alpha = adjusted;
            result.significant = result.p_value < adjusted;
            out.push(PairwiseResult {
                first: groups[i].label.clone(),
                second: groups[j].label.clone(),
                p_adjusted: (result.p_value * pairs).min(1.0),
                result,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityResult {
    pub jarque_bera: f64,
    /// Chi-square(2) upper tail, `exp(-JB / 2)`.
    pub p_value: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Set when `p < 0.05`: prefer a non-parametric comparison.
    pub advisory: bool,
}

pub const NORMALITY_MIN_N: usize = 8;
pub const NORMALITY_ALPHA: f64 = 0.05;

pub fn normality_check(sample: &Sample) -> Result<NormalityResult> {
    let n = sample.len();
    if n < NORMALITY_MIN_N {
        return Err(StatsError::TooFewObservations {
            needed: NORMALITY_MIN_N,
            got: n,
        });
    }
    let m = sample.mean();
    let moment = |p: i32| sample.values.iter().map(|x| (x - m).powi(p)).sum::<f64>() / n as f64;
    let (m2, m3, m4) = (moment(2), moment(3), moment(4));
    if m2 == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let skewness = m3 / m2.powf(1.5);
    let excess_kurtosis = m4 / (m2 * m2) - 3.0;
    let jarque_bera = n as f64 / 6.0 * (skewness.powi(2) + excess_kurtosis.powi(2) / 4.0);
    let p_value = (-jarque_bera / 2.0).exp();
    Ok(NormalityResult {
        jarque_bera,
        p_value,
        skewness,
        excess_kurtosis,
        advisory: p_value < NORMALITY_ALPHA,
    })
}

pub fn weighted_mean(values: &[f64], weights: &[f64]) -> Result<f64> {
    if values.len() != weights.len() {
        return Err(StatsError::LengthMismatch(values.len(), weights.len()));
    }
    if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(StatsError::BadWeight(w));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(StatsError::ZeroWeightSum);
    }
    Ok(values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total)
}

/// Response scale and length of the satisfaction questionnaire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikertScale {
    pub min: u8,
    pub max: u8,
    pub items: usize,
}

impl Default for LikertScale {
    fn default() -> Self {
        Self {
            min: 1,
            max: 5,
            items: 7,
        }
    }
}

/// Mean response over all items and learners, rescaled from the Likert range
/// to `[0, 100]`.
pub fn satisfaction_score(responses: &[Vec<u8>], scale: LikertScale) -> Result<f64> {
    if responses.is_empty() {
        return Err(StatsError::NoResponses);
    }
    let mut total = 0u64;
    for (learner, r) in responses.iter().enumerate() {
        if r.len() != scale.items {
            return Err(StatsError::WrongItemCount {
                learner,
                expected: scale.items,
                found: r.len(),
            });
        }
        for (item, &value) in r.iter().enumerate() {
            if value < scale.min || value > scale.max {
                return Err(StatsError::ItemOutOfRange {
                    learner,
                    item,
                    value,
                    min: scale.min,
                    max: scale.max,
                });
            }
            total += u64::from(value);
        }
    }
    let mean = total as f64 / (responses.len() * scale.items) as f64;
    Ok(100.0 * (mean - f64::from(scale.min)) / f64::from(scale.max - scale.min))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(label: &str, v: &[f64]) -> Sample {
        Sample::new(label, v.to_vec()).unwrap()
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson_r(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_r(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        // deviations give sxy = 3, sxx = syy = 5
        let r = pearson_r(&x, &[2.0, 1.0, 4.0, 3.0]).unwrap();
        assert!((r - 0.6).abs() < 1e-15, "{r}");
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(
            pearson_r(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(StatsError::LengthMismatch(3, 2))
        );
        assert_eq!(
            pearson_r(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::ZeroVariance)
        );
        assert!(matches!(
            pearson_r(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::TooFewObservations { .. })
        ));
    }

    #[test]
    fn t_identical_samples() {
        let a = s("a", &[1.0, 2.0, 4.0]);
        let r = two_sample_t(&a, &a.clone(), TVariant::Welch, 0.05).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.significant);
    }

    #[test]
    fn student_t_hand_example() {
        let r = two_sample_t(
            &s("a", &[1.0, 2.0, 3.0]),
            &s("b", &[4.0, 5.0, 6.0]),
            TVariant::Student,
            0.05,
        )
        .unwrap();
        // pooled s^2 = 1, se = sqrt(2/3)
        assert!((r.statistic - (-3.0 / (2.0f64 / 3.0).sqrt())).abs() < 1e-12);
        assert!((r.statistic + 3.6742).abs() < 1e-4);
        assert_eq!(r.df1, 4.0);
    }

    #[test]
    fn t_errors() {
        let one = s("a", &[1.0]);
        let two = s("b", &[1.0, 2.0]);
        assert!(matches!(
            two_sample_t(&one, &two, TVariant::Welch, 0.05),
            Err(StatsError::TooFewObservations { .. })
        ));
        let flat = s("c", &[3.0, 3.0]);
        assert_eq!(
            two_sample_t(&flat, &flat, TVariant::Student, 0.05),
            Err(StatsError::ZeroVarianceBoth)
        );
        assert_eq!(
            two_sample_t(&two, &two, TVariant::Student, 1.5),
            Err(StatsError::BadAlpha(1.5))
        );
    }

    #[test]
    fn anova_two_groups_is_t_squared() {
        let a = s("a", &[3.1, 4.7, 5.2, 6.0, 2.2]);
        let b = s("b", &[7.3, 6.1, 8.8, 5.9]);
        let f = one_way_anova(&[a.clone(), b.clone()], 0.05).unwrap();
        let t = two_sample_t(&a, &b, TVariant::Student, 0.05).unwrap();
        assert!((f.test.statistic - t.statistic.powi(2)).abs() < 1e-9);
        assert!((f.test.p_value - t.p_value).abs() < 1e-9);
    }

    #[test]
    fn anova_identical_groups() {
        let g = s("g", &[1.0, 2.0, 3.0, 4.0]);
        let r = one_way_anova(&[g.clone(), g.clone(), g], 0.05).unwrap();
        assert!(r.test.statistic.abs() < 1e-12);
        assert!((r.test.p_value - 1.0).abs() < 1e-12);
        assert_eq!(r.test.df2, Some(9.0));
    }

    #[test]
    fn anova_errors() {
        let g = s("g", &[1.0, 2.0]);
        assert_eq!(
            one_way_anova(std::slice::from_ref(&g), 0.05).unwrap_err(),
            StatsError::TooFewGroups(1)
        );
        let flat = [s("a", &[1.0, 1.0]), s("b", &[2.0, 2.0])];
        assert_eq!(one_way_anova(&flat, 0.05).unwrap_err(), StatsError::ZeroWithinVariance);
    }

    #[test]
    fn posthoc_pair_counts() {
        let groups: Vec<Sample> = (0..5)
            .map(|i| s(&format!("g{i}"), &[i as f64, i as f64 + 1.0, i as f64 + 3.0]))
            .collect();
        let pairs = posthoc_pairwise(&groups, 0.05).unwrap();
        assert_eq!(pairs.len(), 10);
        assert!(pairs.iter().all(|p| (p.result.alpha - 0.005).abs() < 1e-15));
        let two = posthoc_pairwise(&groups[..2], 0.05).unwrap();
        assert_eq!(two.len(), 1);
        assert_eq!(two[0].result.alpha, 0.05);
    }

    #[test]
    fn jarque_bera_zero_for_normal_moments() {
        // mass 1/6 at each of +-1 and 2/3 at 0 has skew 0 and kurtosis 3
        let mut v = vec![0.0; 8];
        v.extend([-1.0, -1.0, 1.0, 1.0]);
        let r = normality_check(&s("x", &v)).unwrap();
        assert!(r.jarque_bera.abs() < 1e-12);
        assert!(!r.advisory);
        assert!(matches!(
            normality_check(&s("y", &[1.0, 2.0, 3.0, 4.0, 5.0])),
            Err(StatsError::TooFewObservations { needed: 8, got: 5 })
        ));
    }

    #[test]
    fn weighted_mean_examples() {
        assert_eq!(weighted_mean(&[1.0, 2.0, 6.0], &[1.0, 1.0, 1.0]).unwrap(), 3.0);
        assert_eq!(weighted_mean(&[4.0, 9.0], &[1.0, 0.0]).unwrap(), 4.0);
        let m = weighted_mean(&[17.0, 18.0, 17.5, 18.2], &[145.0, 112.0, 104.0, 59.0]).unwrap();
        // (2465 + 2016 + 1820 + 1073.8) / 420
        assert!((m - 7374.8 / 420.0).abs() < 1e-12);
        assert!((m - 17.559).abs() < 0.0005);
        assert_eq!(weighted_mean(&[1.0], &[0.0]), Err(StatsError::ZeroWeightSum));
        assert_eq!(weighted_mean(&[1.0], &[-1.0]), Err(StatsError::BadWeight(-1.0)));
    }

    #[test]
    fn satisfaction_examples() {
        let scale = LikertScale::default();
        let all = |v: u8| vec![vec![v; 7]; 3];
        assert_eq!(satisfaction_score(&all(5), scale).unwrap(), 100.0);
        assert_eq!(satisfaction_score(&all(1), scale).unwrap(), 0.0);
        assert_eq!(satisfaction_score(&all(3), scale).unwrap(), 50.0);
        assert!(matches!(
            satisfaction_score(&[vec![3; 6]], scale),
            Err(StatsError::WrongItemCount { found: 6, .. })
        ));
        assert!(matches!(
            satisfaction_score(&[vec![6; 7]], scale),
            Err(StatsError::ItemOutOfRange { value: 6, .. })
        ));
    }
}
