//! Offline fixture cases and the suite runner.
//!
//! Each case lives in its own directory under the fixture root with a
//! `case.json` manifest, the snapshots it names and a README. The first
//! snapshot is the subject of the check; the others supply linked or paired
//! repositories.

mod corpus;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detectors::{run_detectors, Detection, DetectorConfig, DetectorError, RulePacks, Targets};
use crate::fact_model::{BehaviorType, RepoId};
use crate::ingestion::{build_store, load_snapshot, IngestError};
use crate::license::LicenseCatalog;

pub use corpus::{
    build_corpus, clean_snapshot, s5_missing_snapshot, write_corpus, GeneratedCase, CLEAN_SNAPSHOT, S5_MISSING_SNAPSHOT,
};

pub const CASE_FILE: &str = "case.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FixtureCase {
    pub name: String,
    pub description: String,
    pub snapshot_paths: Vec<String>,
    /// Expected violation count per detector code.
    pub expected: BTreeMap<String, usize>,
    /// Expected cannot-evaluate count per detector code; unchecked when
    /// absent for a detector.
    #[serde(default)]
    pub expected_diagnostics: BTreeMap<String, usize>,
    /// Known false-positive class the case reproduces.
    #[serde(default)]
    pub fp_class: Option<String>,
    /// Detector condition the case falsifies; `None` for the case where all
    /// conditions hold.
    #[serde(default)]
    pub falsified: Option<String>,
    pub evaluation_date: NaiveDate,
    #[serde(default)]
    pub pair: Option<String>,
    #[serde(default)]
    pub issue: Option<u64>,
    /// Recognise only full question links.
    #[serde(default)]
    pub full_links_only: bool,
    #[serde(default)]
    pub excluded_segments: Option<Vec<String>>,
}

impl FixtureCase {
    pub fn config(&self) -> DetectorConfig {
        let mut config = DetectorConfig::default();
        if self.full_links_only {
            config = config.with_full_links_only();
        }
        if let Some(segments) = &self.excluded_segments {
            config.s8_excluded_path_segments = segments.clone();
        }
        config
    }

    pub fn detectors(&self) -> Result<Vec<BehaviorType>, FixtureError> {
        self.expected
            .keys()
            .chain(self.expected_diagnostics.keys())
            .map(|code| {
                code.parse::<BehaviorType>().map_err(|message| FixtureError::Case {
                    name: self.name.clone(),
                    message,
                })
            })
            .collect::<Result<std::collections::BTreeSet<_>, _>>()
            .map(|set| set.into_iter().collect())
    }
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("missing fixture file `{0}`")]
    Missing(PathBuf),
    #[error("fixture `{name}`: {message}")]
    Case { name: String, message: String },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("fixture `{name}`: {source}")]
    Detector {
        name: String,
        #[source]
        source: DetectorError,
    },
}

/// One cell of the suite matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureOutcome {
    pub case: String,
    pub detector: BehaviorType,
    pub expected: Option<usize>,
    pub actual: usize,
    pub expected_diagnostics: Option<usize>,
    pub actual_diagnostics: usize,
    pub fp_class: Option<String>,
}

impl FixtureOutcome {
    pub fn passed(&self) -> bool {
        self.expected.is_none_or(|e| e == self.actual)
            && self.expected_diagnostics.is_none_or(|e| e == self.actual_diagnostics)
    }
}

pub fn load_case(dir: &Path) -> Result<FixtureCase, FixtureError> {
    let path = dir.join(CASE_FILE);
    let text = std::fs::read_to_string(&path).map_err(|_| FixtureError::Missing(path.clone()))?;
    serde_json::from_str(&text).map_err(|e| FixtureError::Case {
        name: dir.display().to_string(),
        message: e.to_string(),
    })
}

/// Runs the detectors named by `case` over its snapshots in `dir`.
pub fn run_case(dir: &Path, case: &FixtureCase) -> Result<Vec<FixtureOutcome>, FixtureError> {
    let mut snapshots = Vec::new();
    for rel in &case.snapshot_paths {
        let path = dir.join(rel);
        if !path.exists() {
            return Err(FixtureError::Missing(path));
        }
        snapshots.push(load_snapshot(&path)?);
    }
    let Some(first) = snapshots.first() else {
        return Err(FixtureError::Case {
            name: case.name.clone(),
            message: "no snapshots".into(),
        });
    };
    let bad = |message: String| FixtureError::Case {
        name: case.name.clone(),
        message,
    };
    let repo = first.repo.id().map_err(|e| bad(e.to_string()))?;
    let pair = case
        .pair
        .as_deref()
        .map(|p| p.parse::<RepoId>().map_err(|e| bad(e.to_string())))
        .transpose()?;
    let (store, pages) = build_store(&snapshots)?;
    let config = case.config();
    let catalog = LicenseCatalog::bundled();
    let rules = RulePacks::bundled();
    let det = Detection {
        store: &store,
        pages: &pages,
        config: &config,
        catalog: &catalog,
        rules: &rules,
        evaluation_date: case.evaluation_date,
    };
    let targets = Targets {
        repo,
        pair,
        issue: case.issue,
    };
    let mut out = Vec::new();
    for t in case.detectors()? {
        let (findings, _) = run_detectors(&det, &targets, &[t]).map_err(|source| FixtureError::Detector {
            name: case.name.clone(),
            source,
        })?;
        out.push(FixtureOutcome {
            case: case.name.clone(),
            detector: t,
            expected: case.expected.get(t.code()).copied(),
            actual: findings.violations.len(),
            expected_diagnostics: case.expected_diagnostics.get(t.code()).copied(),
            actual_diagnostics: findings.diagnostics.len(),
            fp_class: case.fp_class.clone(),
        });
    }
    Ok(out)
}

/// Case directories under `root`, sorted by name.
pub fn case_dirs(root: &Path) -> Result<Vec<PathBuf>, FixtureError> {
    let entries = std::fs::read_dir(root).map_err(|_| FixtureError::Missing(root.to_path_buf()))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.join(CASE_FILE).is_file())
        .collect();
    dirs.sort();
    Ok(dirs)
}

/// Runs every case under `root` and returns the (case, detector) matrix.
pub fn run_fixture_suite(root: &Path) -> Result<Vec<FixtureOutcome>, FixtureError> {
    let dirs = case_dirs(root)?;
    if dirs.is_empty() {
        return Err(FixtureError::Missing(root.join("*").join(CASE_FILE)));
    }
    let mut out = Vec::new();
    for dir in dirs {
        let case = load_case(&dir)?;
        out.extend(run_case(&dir, &case)?);
    }
    Ok(out)
}

pub fn render_matrix(outcomes: &[FixtureOutcome]) -> String {
    let show = |v: Option<usize>| v.map_or("-".to_string(), |n| n.to_string());
    let mut out = String::new();
    let _ = writeln!(out, "{:<44} {:<4} {:>8} {:>6} {:>8} {:>6}  result", "case", "type", "expected", "actual", "exp.diag", "diag");
    for o in outcomes {
        let _ = writeln!(
            out,
            "{:<44} {:<4} {:>8} {:>6} {:>8} {:>6}  {}{}",
            o.case,
            o.detector,
            show(o.expected),
            o.actual,
            show(o.expected_diagnostics),
            o.actual_diagnostics,
            if o.passed() { "pass" } else { "FAIL" },
            o.fp_class.as_deref().map(|c| format!(" (known FP: {c})")).unwrap_or_default()
        );
    }
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    let _ = writeln!(out, "{} cells, {} failed", outcomes.len(), failed);
    out
}
