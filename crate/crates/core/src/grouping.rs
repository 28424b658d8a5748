//! Control-group sampling, signature-based homogeneous grouping and
//! per-group content plans.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::StyleProfile;
use crate::dimension::Dimension;

#[derive(Debug, Error)]
pub enum GroupingError {
    #[error("cohort is empty")]
    EmptyCohort,
    #[error("control fraction {fraction} of {n} learners leaves one side empty")]
    DegenerateFraction { fraction: f64, n: usize },
    #[error("{n} learners cannot form {target_k} groups")]
    InfeasibleConstraints { n: usize, target_k: usize },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("duplicate learner id `{0}`")]
    DuplicateLearner(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
}

pub type Result<T, E = GroupingError> = std::result::Result<T, E>;

/// Per-dimension labels in canonical dimension order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StyleSignature(pub [String; 4]);

impl StyleSignature {
    pub fn of(profile: &StyleProfile) -> Self {
        Self(profile.labels().map(str::to_string))
    }

    pub fn label(&self, dimension: Dimension) -> &str {
        &self.0[dimension.index()]
    }
}

/// Slash-joined labels: `processing/perception/entrance/understanding`.
impl fmt::Display for StyleSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.join("/"))
    }
}

impl FromStr for StyleSignature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split('/').map(str::trim).collect();
        match parts.as_slice() {
            [a, b, c, d] if parts.iter().all(|p| !p.is_empty()) => Ok(Self([a, b, c, d].map(|p| p.to_string()))),
            _ => Err(format!(
                "`{s}` is not a processing/perception/entrance/understanding signature"
            )),
        }
    }
}

/// Splits off a uniformly sampled control group of `round(fraction * n)`
/// learners. Both halves keep input order.
pub fn split_control(learner_ids: &[String], fraction: f64, seed: u64) -> Result<(Vec<String>, Vec<String>)> {
    let n = learner_ids.len();
    if n == 0 {
        return Err(GroupingError::EmptyCohort);
    }
    let k = (fraction * n as f64).round();
    if !(fraction > 0.0 && fraction < 1.0) || k < 1.0 || k >= n as f64 {
        return Err(GroupingError::DegenerateFraction { fraction, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked: BTreeSet<usize> = rand::seq::index::sample(&mut rng, n, k as usize).into_iter().collect();
    let (mut treatment, mut control) = (Vec::new(), Vec::new());
    for (i, id) in learner_ids.iter().enumerate() {
        if picked.contains(&i) {
            control.push(id.clone());
        } else {
            treatment.push(id.clone());
        }
    }
    Ok((treatment, control))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub id: usize,
    pub members: Vec<String>,
    /// Mean crisp score per dimension.
    pub centroid: [f64; 4],
    /// Most frequent member signature; ties go to the smallest.
    pub signature: StyleSignature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    pub from: usize,
    pub into: usize,
    pub distance: f64,
    pub groups_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub groups: Vec<Group>,
    pub trace: Vec<MergeStep>,
}

struct Work<'a> {
    id: usize,
    members: Vec<&'a StyleProfile>,
    centroid: [f64; 4],
}

fn centroid(members: &[&StyleProfile]) -> [f64; 4] {
    let mut c = [0.0; 4];
    for p in members {
        for (acc, s) in c.iter_mut().zip(p.scores()) {
            *acc += s;
        }
    }
    c.map(|v| v / members.len() as f64)
}

fn distance(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn mode(members: &[&StyleProfile]) -> StyleSignature {
    let mut counts: BTreeMap<StyleSignature, usize> = BTreeMap::new();
    for p in members {
        *counts.entry(StyleSignature::of(p)).or_default() += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    counts
        .into_iter()
        .find(|(_, c)| *c == best)
        .map(|(s, _)| s)
        .expect("non-empty group")
}

/// Groups learners by exact signature, then repeatedly merges the smallest
/// group into the group with the nearest centroid until at most `target_k`
/// groups remain and each has at least `min_size` members (or only one
/// group is left).
///
/// Initial ids are 1.. by descending size, ties by signature. The smallest
/// group is the one merged away, latest id first on ties; the nearest
/// target goes to the smaller id on ties. Ids are renumbered 1.. at the end.
pub fn homogeneous_partition(profiles: &[StyleProfile], target_k: usize, min_size: usize) -> Result<Partition> {
    if profiles.is_empty() {
        return Err(GroupingError::EmptyCohort);
    }
    if target_k == 0 {
        return Err(GroupingError::BadParameter("target_k must be at least 1".into()));
    }
    if profiles.len() < target_k {
        return Err(GroupingError::InfeasibleConstraints {
            n: profiles.len(),
            target_k,
        });
    }
    let mut by_sig: BTreeMap<StyleSignature, Vec<&StyleProfile>> = BTreeMap::new();
    for p in profiles {
        by_sig.entry(StyleSignature::of(p)).or_default().push(p);
    }
    let mut initial: Vec<(StyleSignature, Vec<&StyleProfile>)> = by_sig.into_iter().collect();
    initial.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));
    let mut work: Vec<Work> = initial
        .into_iter()
        .enumerate()
        .map(|(i, (_, members))| Work {
            id: i + 1,
            centroid: centroid(&members),
            members,
        })
        .collect();

    let mut trace = Vec::new();
    while work.len() > 1 && (work.len() > target_k || work.iter().any(|g| g.members.len() < min_size)) {
        let from = (0..work.len())
            .min_by(|&a, &b| {
                work[a]
                    .members
                    .len()
                    .cmp(&work[b].members.len())
                    .then(work[b].id.cmp(&work[a].id))
            })
            .expect("at least two groups");
        let (into, dist) = (0..work.len())
            .filter(|&i| i != from)
            .map(|i| (i, distance(&work[from].centroid, &work[i].centroid)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(work[a.0].id.cmp(&work[b.0].id)))
            .expect("at least two groups");
        let moved = work.remove(from);
        let into = if into > from { into - 1 } else { into };
        let target = &mut work[into];
        target.members.extend(moved.members);
        target.centroid = centroid(&target.members);
        trace.push(MergeStep {
            from: moved.id,
            into: target.id,
            distance: dist,
            groups_after: work.len(),
        });
    }

    let groups = work
        .into_iter()
        .enumerate()
        .map(|(i, g)| Group {
            id: i + 1,
            members: g.members.iter().map(|p| p.learner_id.clone()).collect(),
            centroid: g.centroid,
            signature: mode(&g.members),
        })
        .collect();
    Ok(Partition { groups, trace })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupingParams {
    /// Share of the cohort drawn as control; 0 disables the control group.
    pub control_fraction: f64,
    pub target_k: usize,
    pub min_size: usize,
    pub seed: u64,
}

impl GroupingParams {
    pub const DEFAULT_TARGET_K: usize = 4;
    pub const DEFAULT_MIN_SIZE: usize = 10;

    pub fn new(seed: u64) -> Self {
        Self {
            control_fraction: 46.0 / 466.0,
            target_k: Self::DEFAULT_TARGET_K,
            min_size: Self::DEFAULT_MIN_SIZE,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAssignment {
    pub groups: Vec<Group>,
    pub control: Vec<String>,
    pub params: GroupingParams,
    pub trace: Vec<MergeStep>,
}

/// Draws the control group first, then partitions the rest.
pub fn assign(profiles: &[StyleProfile], params: GroupingParams) -> Result<GroupAssignment> {
    if profiles.is_empty() {
        return Err(GroupingError::EmptyCohort);
    }
    let mut seen = BTreeSet::new();
    for p in profiles {
        if !seen.insert(p.learner_id.as_str()) {
            return Err(GroupingError::DuplicateLearner(p.learner_id.clone()));
        }
    }
    let ids: Vec<String> = profiles.iter().map(|p| p.learner_id.clone()).collect();
    let control = if params.control_fraction == 0.0 {
        Vec::new()
    } else {
        split_control(&ids, params.control_fraction, params.seed)?.1
    };
    let in_control: BTreeSet<&str> = control.iter().map(String::as_str).collect();
    let treatment: Vec<StyleProfile> = profiles
        .iter()
        .filter(|p| !in_control.contains(p.learner_id.as_str()))
        .cloned()
        .collect();
    let partition = homogeneous_partition(&treatment, params.target_k, params.min_size)?;
    Ok(GroupAssignment {
        groups: partition.groups,
        control,
        params,
        trace: partition.trace,
    })
}

impl GroupAssignment {
    /// Checks that groups and control are disjoint and cover `cohort`.
    pub fn check_partition<'a>(&self, cohort: impl IntoIterator<Item = &'a str>) -> Result<(), String> {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let all = self
            .groups
            .iter()
            .flat_map(|g| g.members.iter())
            .chain(self.control.iter());
        for id in all {
            if !seen.insert(id.as_str()) {
                return Err(format!("learner `{id}` assigned twice"));
            }
        }
        if let Some(g) = self.groups.iter().find(|g| g.members.is_empty()) {
            return Err(format!("group {} is empty", g.id));
        }
        let cohort: BTreeSet<&str> = cohort.into_iter().collect();
        if cohort != seen {
            let missing = cohort.difference(&seen).count();
            let extra = seen.difference(&cohort).count();
            return Err(format!(
                "{missing} learners unassigned, {extra} unknown learners assigned"
            ));
        }
        Ok(())
    }

    /// `group_id` per learner; control learners get 0.
    pub fn group_of(&self) -> BTreeMap<&str, usize> {
        let mut out = BTreeMap::new();
        for g in &self.groups {
            for m in &g.members {
                out.insert(m.as_str(), g.id);
            }
        }
        for c in &self.control {
            out.insert(c.as_str(), 0);
        }
        out
    }
}

pub const ASSIGNMENT_HEADER: &str = "learner_id,group_id,is_control";

/// Rows sorted by group id, members in group order; control (group 0) last.
pub fn write_assignment<W: Write>(output: W, a: &GroupAssignment) -> Result<()> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(ASSIGNMENT_HEADER.split(','))?;
    for g in &a.groups {
        for m in &g.members {
            w.write_record([m.as_str(), &g.id.to_string(), "false"])?;
        }
    }
    for c in &a.control {
        w.write_record([c.as_str(), "0", "true"])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentRow {
    pub learner_id: String,
    pub group_id: usize,
    pub is_control: bool,
}

pub fn read_assignment<R: Read>(input: R) -> Result<Vec<AssignmentRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != ASSIGNMENT_HEADER {
        return Err(GroupingError::MalformedRow {
            line: 1,
            reason: format!("expected header `{ASSIGNMENT_HEADER}`"),
        });
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let bad = |reason: String| GroupingError::MalformedRow { line, reason };
        if row.len() != 3 {
            return Err(bad(format!("expected 3 fields, found {}", row.len())));
        }
        let group_id: usize = row[1].parse().map_err(|_| bad(format!("bad group_id `{}`", &row[1])))?;
        let is_control: bool = row[2]
            .parse()
            .map_err(|_| bad(format!("bad is_control `{}`", &row[2])))?;
        if is_control != (group_id == 0) {
            return Err(bad("control rows must have group_id 0".into()));
        }
        if !seen.insert(row[0].to_string()) {
            return Err(GroupingError::DuplicateLearner(row[0].to_string()));
        }
        out.push(AssignmentRow {
            learner_id: row[0].to_string(),
            group_id,
            is_control,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Media {
    /// Pictures, diagrams, video.
    Visual,
    /// Text and audio.
    Verbal,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    PartByPart,
    Overview,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activity {
    GroupStudy,
    IndividualStudy,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grounding {
    Examples,
    Theory,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentPlan {
    pub group_id: usize,
    pub signature: StyleSignature,
    pub activity: Activity,
    pub grounding: Grounding,
    pub media: Media,
    pub structure: Structure,
}

/// Maps a group's signature mode to delivery preferences. Hybrid or
/// unrecognized labels give `Mixed`.
pub fn content_plan(group: &Group) -> ContentPlan {
    let s = &group.signature;
    let activity = match s.label(Dimension::Processing) {
        "reflective" => Activity::GroupStudy,
        "reactive" | "active" => Activity::IndividualStudy,
        _ => Activity::Mixed,
    };
    let grounding = match s.label(Dimension::Perception) {
        "sensory" => Grounding::Examples,
        "intuitive" => Grounding::Theory,
        _ => Grounding::Mixed,
    };
    let media = match s.label(Dimension::Entrance) {
        "visual" => Media::Visual,
        "verbal" => Media::Verbal,
        _ => Media::Mixed,
    };
    let structure = match s.label(Dimension::Understanding) {
        "sequential" => Structure::PartByPart,
        "global" => Structure::Overview,
        _ => Structure::Mixed,
    };
    ContentPlan {
        group_id: group.id,
        signature: s.clone(),
        activity,
        grounding,
        media,
        structure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::DimensionResult;

    fn profile(id: &str, labels: [&str; 4], scores: [f64; 4]) -> StyleProfile {
        StyleProfile {
            learner_id: id.into(),
            results: Dimension::ALL
                .into_iter()
                .map(|d| DimensionResult {
                    dimension: d,
                    crisp_score: scores[d.index()],
                    label: labels[d.index()].into(),
                    term_memberships: BTreeMap::new(),
                    fired_rules: vec![],
                })
                .collect(),
        }
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("l{i}")).collect()
    }

    #[test]
    fn control_split_sizes_and_determinism() {
        let cohort = ids(466);
        let (t, c) = split_control(&cohort, 46.0 / 466.0, 7).unwrap();
        assert_eq!(c.len(), 46);
        assert_eq!(t.len(), 420);
        assert_eq!(split_control(&cohort, 46.0 / 466.0, 7).unwrap(), (t.clone(), c.clone()));
        assert_ne!(split_control(&cohort, 46.0 / 466.0, 8).unwrap().1, c);
        assert!(matches!(
            split_control(&ids(10), 0.01, 1),
            Err(GroupingError::DegenerateFraction { .. })
        ));
        assert!(matches!(
            split_control(&ids(10), 0.99, 1),
            Err(GroupingError::DegenerateFraction { .. })
        ));
        assert!(matches!(split_control(&[], 0.5, 1), Err(GroupingError::EmptyCohort)));
    }

    const A: [&str; 4] = ["reflective", "sensory", "visual", "global"];
    const B: [&str; 4] = ["reactive", "intuitive", "verbal", "sequential"];

    #[test]
    fn exact_signatures_without_merging() {
        let ps = vec![
            profile("a1", A, [9.0, 3.0, 3.0, 9.0]),
            profile("b1", B, [3.0, 9.0, 9.0, 3.0]),
            profile("a2", A, [9.0, 3.0, 3.0, 9.0]),
            profile("b2", B, [3.0, 9.0, 9.0, 3.0]),
        ];
        let part = homogeneous_partition(&ps, 2, 1).unwrap();
        assert_eq!(part.groups.len(), 2);
        assert!(part.trace.is_empty());
        // equal sizes: signature order decides, and "reactive..." < "reflective..."
        assert_eq!(part.groups[0].members, vec!["b1", "b2"]);
        assert_eq!(part.groups[1].members, vec!["a1", "a2"]);
        assert_eq!(part.groups[1].signature.to_string(), "reflective/sensory/visual/global");
    }

    #[test]
    fn k_is_a_ceiling() {
        let ps: Vec<_> = (0..5).map(|i| profile(&format!("l{i}"), A, [9.0; 4])).collect();
        assert_eq!(homogeneous_partition(&ps, 3, 1).unwrap().groups.len(), 1);
        assert!(matches!(
            homogeneous_partition(&ps[..2], 3, 1),
            Err(GroupingError::InfeasibleConstraints { n: 2, target_k: 3 })
        ));
    }

    #[test]
    fn small_group_merges_into_nearest() {
        let near = ["reflective", "sensory", "visual", "sequential_global"];
        let mut ps: Vec<_> = (0..12)
            .map(|i| profile(&format!("a{i}"), A, [9.0, 3.0, 3.0, 9.0]))
            .collect();
        ps.extend((0..12).map(|i| profile(&format!("b{i}"), B, [3.0, 9.0, 9.0, 3.0])));
        ps.push(profile("n0", near, [9.0, 3.0, 3.0, 7.5]));
        let part = homogeneous_partition(&ps, 4, 10).unwrap();
        assert_eq!(part.groups.len(), 2);
        assert_eq!(part.trace.len(), 1);
        let a = part
            .groups
            .iter()
            .find(|g| g.members.contains(&"a0".to_string()))
            .unwrap();
        assert!(a.members.contains(&"n0".to_string()));
        assert_eq!(a.members.len(), 13);
        assert_eq!(a.signature.0, A.map(String::from));
    }

    #[test]
    fn content_plans() {
        let g = Group {
            id: 1,
            members: vec![],
            centroid: [0.0; 4],
            signature: StyleSignature(["reactive", "sensory_intuitive", "visual", "sequential"].map(String::from)),
        };
        let plan = content_plan(&g);
        assert_eq!(plan.media, Media::Visual);
        assert_eq!(plan.structure, Structure::PartByPart);
        assert_eq!(plan.grounding, Grounding::Mixed);
        assert_eq!(plan.activity, Activity::IndividualStudy);
        let g = Group {
            signature: StyleSignature(["reflective", "intuitive", "visual_verbal", "global"].map(String::from)),
            ..g
        };
        let plan = content_plan(&g);
        assert_eq!(plan.media, Media::Mixed);
        assert_eq!(plan.activity, Activity::GroupStudy);
        assert_eq!(plan.grounding, Grounding::Theory);
        assert_eq!(plan.structure, Structure::Overview);
    }

    #[test]
    fn assignment_round_trip_and_partition_check() {
        let mut ps: Vec<_> = (0..30)
            .map(|i| profile(&format!("a{i:02}"), A, [9.0, 3.0, 3.0, 9.0]))
            .collect();
        ps.extend((0..30).map(|i| profile(&format!("b{i:02}"), B, [3.0, 9.0, 9.0, 3.0])));
        let params = GroupingParams {
            control_fraction: 0.1,
            target_k: 4,
            min_size: 5,
            seed: 3,
        };
        let a = assign(&ps, params).unwrap();
        assert_eq!(a.control.len(), 6);
        a.check_partition(ps.iter().map(|p| p.learner_id.as_str())).unwrap();
        let mut buf = Vec::new();
        write_assignment(&mut buf, &a).unwrap();
        let rows = read_assignment(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 60);
        let map = a.group_of();
        assert!(rows.iter().all(|r| map[r.learner_id.as_str()] == r.group_id));
        assert_eq!(rows.iter().filter(|r| r.is_control).count(), 6);

        let mut again = Vec::new();
        write_assignment(&mut again, &assign(&ps, params).unwrap()).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn signature_parse() {
        let s: StyleSignature = "reflective/sensory/visual/global".parse().unwrap();
        assert_eq!(s.0, A.map(String::from));
        assert!("a/b/c".parse::<StyleSignature>().is_err());
        assert!("a//c/d".parse::<StyleSignature>().is_err());
    }
}
