//! The six detectors.
//!
//! Each detector computes a few detector-specific relations procedurally
//! (similarity scores, license identification, link and page scanning),
//! adds them to the base relations of the fact store, and evaluates its rule
//! pack. Every `violation_sN` fact becomes a [`Violation`]; facts of the
//! `unavailable_sN`/`unresolved_sN` relations become [`Diagnostic`]s.

mod s1;
mod s2;
mod s5;
mod s6;
mod s8;
mod s9;
pub mod stackoverflow;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use chrono::NaiveDate;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fact_model::{BehaviorType, FactError, FactStore, RepoId, Subject, Violation};
use crate::license::{LicenseCatalog, LicenseError};
use crate::rules::{base, evaluate_edb, Atom, Edb, Literal, Model, RuleError, RuleSet, Term, Value};
use crate::similarity::{SimilarityError, DEFAULT_K};
use crate::source::SourceFilter;

pub use s1::detect_s1;
pub use s2::detect_s2;
pub use s5::detect_s5;
pub use s6::detect_s6;
pub use s8::detect_s8;
pub use s9::detect_s9;

/// Cached external pages by URL; `None` marks a page that could not be
/// retrieved.
pub type PageCache = BTreeMap<String, Option<String>>;

pub const DEFAULT_EXCLUDED_SEGMENTS: &[&str] =
    &["/issues/", "/pull/", "/commit/", "/tree/", "/releases/", "/blob/", "/runs/"];

pub const DEFAULT_PAID_MARKERS: &[&str] = &["in-app purchase"];

#[derive(Debug, Error)]
pub enum DetectorError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("rule pack {pack}: {source}")]
    Rules {
        pack: String,
        #[source]
        source: RuleError,
    },
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    License(#[from] LicenseError),
    #[error(transparent)]
    Fact(#[from] FactError),
    #[error("no issue facts for `{0}`; capture the snapshot with issues to run issue-level detectors")]
    NoIssueFacts(RepoId),
    #[error("issue #{number} not found in `{repo}`")]
    UnknownIssue { repo: RepoId, number: u64 },
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Tunable detector parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Minimum containment of an answer's code in a file.
    pub s1_threshold: f64,
    /// Compare files byte-for-byte (after line-ending normalization); when
    /// false, files are compared as token streams.
    pub s2_require_exact: bool,
    pub s9_stale_days: i64,
    pub s8_excluded_path_segments: Vec<String>,
    /// Distinct repositories resolved per issue.
    pub s8_max_candidates: usize,
    pub so_link_pattern: String,
    /// Case-insensitive phrases marking a paid app listing.
    pub s9_paid_markers: Vec<String>,
    pub gram_length: usize,
    pub source_filter: SourceFilter,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            s1_threshold: 0.10,
            s2_require_exact: true,
            s9_stale_days: 183,
            s8_excluded_path_segments: DEFAULT_EXCLUDED_SEGMENTS.iter().map(|s| s.to_string()).collect(),
            s8_max_candidates: 10,
            so_link_pattern: stackoverflow::DEFAULT_LINK_PATTERN.to_string(),
            s9_paid_markers: DEFAULT_PAID_MARKERS.iter().map(|s| s.to_string()).collect(),
            gram_length: DEFAULT_K,
            source_filter: SourceFilter::default(),
        }
    }
}

impl DetectorConfig {
    /// Only full question links are recognised; short `/a/` and `/q/` links are ignored.
    pub fn with_full_links_only(mut self) -> Self {
        self.so_link_pattern = stackoverflow::FULL_LINK_PATTERN.to_string();
        self
    }

    pub fn validate(&self) -> Result<(), DetectorError> {
        let bad = |m: String| Err(DetectorError::Config(m));
        if !(self.s1_threshold > 0.0 && self.s1_threshold <= 1.0) {
            return bad(format!("s1 threshold {} is outside (0, 1]", self.s1_threshold));
        }
        if self.s9_stale_days <= 0 {
            return bad(format!("s9 stale days {} must be positive", self.s9_stale_days));
        }
        if self.gram_length == 0 {
            return bad("gram length must be positive".into());
        }
        if self.s8_max_candidates == 0 {
            return bad("s8 candidate limit must be positive".into());
        }
        if self.s8_excluded_path_segments.iter().any(|s| s.is_empty()) {
            return bad("empty s8 excluded segment".into());
        }
        if self.s9_paid_markers.is_empty() || self.s9_paid_markers.iter().any(|m| m.trim().is_empty()) {
            return bad("s9 paid markers must be non-empty".into());
        }
        Regex::new(&self.so_link_pattern).map_err(|e| DetectorError::Config(format!("link pattern: {e}")))?;
        Ok(())
    }

    /// The s1 threshold in basis points, the unit of `snippet_score`.
    pub fn s1_threshold_bp(&self) -> i64 {
        (self.s1_threshold * 10_000.0).round() as i64
    }

    fn link_regex(&self) -> Result<Regex, DetectorError> {
        Regex::new(&self.so_link_pattern).map_err(|e| DetectorError::Config(format!("link pattern: {e}")))
    }
}

const BUNDLED_RULES: [(BehaviorType, &str); 6] = [
    (BehaviorType::S1, include_str!("../../../../rules/s1.rules")),
    (BehaviorType::S2, include_str!("../../../../rules/s2.rules")),
    (BehaviorType::S5, include_str!("../../../../rules/s5.rules")),
    (BehaviorType::S6, include_str!("../../../../rules/s6.rules")),
    (BehaviorType::S8, include_str!("../../../../rules/s8.rules")),
    (BehaviorType::S9, include_str!("../../../../rules/s9.rules")),
];

/// Relations each detector supplies on top of the base predicates.
const SUPPLIED: &[(&str, usize)] = &[
    ("analyzed", 1),
    ("analyzed_issue", 1),
    ("evaluation_date", 1),
    ("page_unavailable", 1),
    ("so_link", 3),
    ("answer_owner", 2),
    ("snippet_score", 4),
    ("link_in_file", 3),
    ("s1_threshold", 1),
    ("compared_pair", 2),
    ("identical_sources", 2),
    ("license_detected", 3),
    ("license_change", 4),
    ("announced", 1),
    ("repo_link", 4),
    ("excluded_segment", 1),
    ("s9_stale_days", 1),
    ("readme_link", 2),
    ("page_marker", 2),
];

/// Head predicate and arity every pack must define.
fn violation_head(t: BehaviorType) -> (String, usize) {
    let arity = match t {
        BehaviorType::S1 | BehaviorType::S8 | BehaviorType::S9 => 3,
        BehaviorType::S2 | BehaviorType::S6 => 2,
        BehaviorType::S5 => 1,
    };
    (format!("violation_{}", t.code()), arity)
}

/// One rule set per behavior type.
#[derive(Debug, Clone)]
pub struct RulePacks {
    packs: BTreeMap<BehaviorType, RuleSet>,
}

impl RulePacks {
    pub fn bundled() -> Self {
        let mut packs = BTreeMap::new();
        for (t, text) in BUNDLED_RULES {
            packs.insert(t, Self::compile(t, text).expect("bundled rule pack is valid"));
        }
        RulePacks { packs }
    }

    /// Loads `s1.rules` … `s9.rules` from `dir`; missing files fall back to
    /// the bundled pack.
    pub fn from_dir(dir: &Path) -> Result<Self, DetectorError> {
        let mut packs = Self::bundled();
        for t in BehaviorType::ALL {
            let path = dir.join(format!("{}.rules", t.code()));
            if path.exists() {
                let text = read(&path)?;
                packs.packs.insert(t, Self::compile(t, &text)?);
            }
        }
        Ok(packs)
    }

    /// Adds the rules in `text` to the pack of `t`.
    pub fn with_extra(mut self, t: BehaviorType, text: &str) -> Result<Self, DetectorError> {
        let wrap = |source| DetectorError::Rules {
            pack: t.code().to_string(),
            source,
        };
        let extra = RuleSet::parse(text).map_err(wrap)?;
        let merged = self.packs[&t].extend(&extra).map_err(wrap)?;
        self.packs.insert(t, merged);
        Ok(self)
    }

    pub fn get(&self, t: BehaviorType) -> &RuleSet {
        &self.packs[&t]
    }

    fn compile(t: BehaviorType, text: &str) -> Result<RuleSet, DetectorError> {
        let wrap = |source| DetectorError::Rules {
            pack: t.code().to_string(),
            source,
        };
        let rs = RuleSet::parse(text).map_err(wrap)?;
        let (head, arity) = violation_head(t);
        match rs.arities().get(&head) {
            Some(&a) if a == arity && rs.head_predicates().contains(head.as_str()) => Ok(rs),
            _ => Err(DetectorError::Config(format!(
                "rule pack {} must define {head}/{arity}",
                t.code()
            ))),
        }
    }
}

fn read(path: &Path) -> Result<String, DetectorError> {
    std::fs::read_to_string(path).map_err(|source| DetectorError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A subject that could not be fully checked.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Diagnostic {
    pub behavior_type: BehaviorType,
    pub subject: Subject,
    pub reason: String,
    pub location: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Findings {
    pub violations: Vec<Violation>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Findings {
    pub fn extend(&mut self, other: Findings) {
        self.violations.extend(other.violations);
        self.diagnostics.extend(other.diagnostics);
    }
}

/// Everything a detector reads. Detectors never modify any of it.
#[derive(Debug, Clone, Copy)]
pub struct Detection<'a> {
    pub store: &'a FactStore,
    pub pages: &'a PageCache,
    pub config: &'a DetectorConfig,
    pub catalog: &'a LicenseCatalog,
    pub rules: &'a RulePacks,
    pub evaluation_date: NaiveDate,
}

/// What to check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Targets {
    pub repo: RepoId,
    /// Second repository for S2.
    pub pair: Option<RepoId>,
    /// Restricts issue-level detectors to one issue.
    pub issue: Option<u64>,
}

impl Targets {
    pub fn repo(repo: RepoId) -> Self {
        Targets {
            repo,
            pair: None,
            issue: None,
        }
    }
}

/// Base relations of the whole store with every supplied relation declared.
fn base_edb(store: &FactStore) -> Edb {
    let mut edb = base::from_store(store);
    for (p, arity) in SUPPLIED {
        edb.declare(p, *arity);
    }
    edb
}

fn s(v: &str) -> Value {
    Value::from(v)
}

fn evaluate_pack(det: &Detection, t: BehaviorType, edb: &Edb) -> Result<Model, DetectorError> {
    evaluate_edb(det.rules.get(t), edb).map_err(|source| DetectorError::Rules {
        pack: t.code().to_string(),
        source,
    })
}

/// The derivation of a `violation_sN` fact: the fact itself followed by the
/// grounded body literals of the rule that derived it.
fn trace(det: &Detection, t: BehaviorType, model: &Model, fact: &[Value]) -> Vec<String> {
    let (head, _) = violation_head(t);
    let atom = Atom::new(&head, fact.iter().cloned().map(Term::Const).collect());
    let mut out = vec![Literal::Positive(atom).to_string()];
    if let Some(body) = det.rules.get(t).explain(model, &head, fact) {
        out.extend(body.iter().map(ToString::to_string));
    }
    out
}

fn str_arg(tuple: &[Value], i: usize) -> &str {
    match &tuple[i] {
        Value::Str(s) => s,
        other => panic!("expected a string argument, found {other}"),
    }
}

/// Resolves the repository of `id` in the store, with its canonical id.
fn resolve<'a>(
    store: &'a FactStore,
    id: &RepoId,
) -> Result<(&'a RepoId, &'a crate::fact_model::RepositoryFacts), DetectorError> {
    store.resolve(id).ok_or_else(|| FactError::UnknownRepo(id.clone()).into())
}

/// Issues of `repo` selected by `number`, or all of them.
fn selected_issues<'a>(
    store: &'a FactStore,
    repo: &RepoId,
    number: Option<u64>,
) -> Result<&'a [crate::fact_model::IssueFacts], DetectorError> {
    let (id, _) = resolve(store, repo)?;
    if !store.has_issue_facts(id) {
        return Err(DetectorError::NoIssueFacts(id.clone()));
    }
    let all = store.issues_of(id)?;
    match number {
        None => Ok(all),
        Some(n) => match all.iter().position(|i| i.number == n) {
            Some(p) => Ok(&all[p..=p]),
            None => Err(DetectorError::UnknownIssue {
                repo: id.clone(),
                number: n,
            }),
        },
    }
}

/// Milliseconds spent per detector.
pub type Timings = BTreeMap<BehaviorType, f64>;

/// Runs the requested detectors against `targets`.
pub fn run_detectors(
    det: &Detection,
    targets: &Targets,
    types: &[BehaviorType],
) -> Result<(Findings, Timings), DetectorError> {
    det.config.validate()?;
    let mut findings = Findings::default();
    let mut timings = Timings::new();
    for &t in types {
        let start = Instant::now();
        let found = run_one(det, targets, t)?;
        timings.insert(t, start.elapsed().as_secs_f64() * 1000.0);
        findings.extend(found);
    }
    findings.violations.sort_by(|a, b| (&a.subject, a.behavior_type).cmp(&(&b.subject, b.behavior_type)));
    findings.diagnostics.sort();
    Ok((findings, timings))
}

fn run_one(det: &Detection, targets: &Targets, t: BehaviorType) -> Result<Findings, DetectorError> {
    Ok(match t {
        BehaviorType::S1 => detect_s1(det, &targets.repo, targets.issue)?,
        BehaviorType::S2 => {
            let pair = targets
                .pair
                .as_ref()
                .ok_or_else(|| DetectorError::Config("s2 needs a second repository".into()))?;
            detect_s2(det, &targets.repo, pair)?
        }
        BehaviorType::S5 => detect_s5(det, &targets.repo)?,
        BehaviorType::S6 => detect_s6(det, &targets.repo)?,
        BehaviorType::S8 => detect_s8(det, &targets.repo, targets.issue)?,
        BehaviorType::S9 => detect_s9(det, &targets.repo)?,
    })
}

/// The model a detector evaluates for `targets`, for checking rule traces.
pub fn detector_model(det: &Detection, targets: &Targets, t: BehaviorType) -> Result<Model, DetectorError> {
    let edb = match t {
        BehaviorType::S1 => s1::prepare(det, &targets.repo, targets.issue)?.edb,
        BehaviorType::S2 => {
            let pair = targets
                .pair
                .as_ref()
                .ok_or_else(|| DetectorError::Config("s2 needs a second repository".into()))?;
            s2::prepare(det, &targets.repo, pair)?.edb
        }
        BehaviorType::S5 => s5::prepare(det, &targets.repo)?.edb,
        BehaviorType::S6 => s6::prepare(det, &targets.repo)?.edb,
        BehaviorType::S8 => s8::prepare(det, &targets.repo, targets.issue)?.edb,
        BehaviorType::S9 => s9::prepare(det, &targets.repo)?.edb,
    };
    evaluate_pack(det, t, &edb)
}

/// Store listing links, as matched by the S9 rule pack.
pub const STORE_LINK_PATTERN: &str = r"^https?://play\.google\.com/store/apps/details\?";

/// External pages the detectors may consult for `repo` and its `issues`:
/// every Stack Overflow link in any comment (broad form) and every store
/// listing link in the repository metadata or README.
pub fn referenced_pages(
    repo: &crate::fact_model::RepositoryFacts,
    issues: &[crate::fact_model::IssueFacts],
) -> Vec<String> {
    let so = Regex::new(stackoverflow::DEFAULT_LINK_PATTERN).expect("valid pattern");
    let store = Regex::new(STORE_LINK_PATTERN).expect("valid pattern");
    let mut out: Vec<String> = Vec::new();
    let mut push = |u: String| {
        if !out.contains(&u) {
            out.push(u);
        }
    };
    for issue in issues {
        for c in &issue.body_and_comments {
            stackoverflow::extract_links(&so, &c.text).into_iter().for_each(&mut push);
        }
    }
    for link in repo.external_links.iter().cloned().chain(s9::readme_links(repo)) {
        if store.is_match(&link) {
            push(link);
        }
    }
    out
}

/// Repositories linked by issue openers that S8 would need to resolve,
/// lowercased, in order of first appearance.
pub fn linked_repositories(issues: &[crate::fact_model::IssueFacts], config: &DetectorConfig) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for issue in issues {
        let own = issue.repo.key();
        for link in s8::opener_links(issue, config.s8_max_candidates) {
            if link.repo != own && !out.contains(&link.repo) {
                out.push(link.repo);
            }
        }
    }
    out
}

/// Root README of a repository, if present.
fn root_readme(repo: &crate::fact_model::RepositoryFacts) -> Option<&crate::fact_model::FileContent> {
    repo.readme_file.as_ref().filter(|f| f.is_root()).or_else(|| {
        repo.files
            .iter()
            .find(|f| f.is_root() && f.file_name().eq_ignore_ascii_case("README.md"))
    })
}
