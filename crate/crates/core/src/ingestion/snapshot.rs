use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::detectors::{referenced_pages, PageCache};
use crate::fact_model::{FactStore, IssueFacts, RepositoryFacts};

use super::IngestError;

pub const FORMAT_VERSION: u32 = 1;

/// Offline bundle of one repository's facts. `issues` is `None` for a
/// repository-level capture; `external_pages` maps a URL to its text, or to
/// `None` when the page could not be retrieved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Snapshot {
    pub format_version: u32,
    pub captured_at: DateTime<Utc>,
    pub repo: RepositoryFacts,
    pub issues: Option<Vec<IssueFacts>>,
    pub external_pages: BTreeMap<String, Option<String>>,
}

impl Snapshot {
    pub fn new(repo: RepositoryFacts, captured_at: DateTime<Utc>) -> Self {
        Snapshot {
            format_version: FORMAT_VERSION,
            captured_at,
            repo,
            issues: None,
            external_pages: BTreeMap::new(),
        }
    }

    pub fn with_issues(mut self, issues: Vec<IssueFacts>) -> Self {
        self.issues = Some(issues);
        self
    }

    pub fn with_page(mut self, url: &str, text: Option<&str>) -> Self {
        self.external_pages.insert(url.to_string(), text.map(str::to_string));
        self
    }

    /// Checks the fact invariants and that every page a detector may consult
    /// is present in `external_pages`.
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.format_version != FORMAT_VERSION {
            return Err(IngestError::VersionMismatch {
                found: self.format_version.to_string(),
            });
        }
        self.repo.validate()?;
        let id = self.repo.id()?;
        let issues = self.issues.as_deref().unwrap_or(&[]);
        let mut numbers = std::collections::BTreeSet::new();
        for (i, issue) in issues.iter().enumerate() {
            let field = format!("issues[{i}]");
            issue.validate(&field)?;
            if !issue.repo.same_repo(&id) {
                return Err(IngestError::Schema {
                    field: format!("{field}.repo"),
                    message: format!("`{}` does not match `{id}`", issue.repo),
                });
            }
            if !numbers.insert(issue.number) {
                return Err(IngestError::Schema {
                    field: format!("{field}.number"),
                    message: format!("duplicate number {}", issue.number),
                });
            }
        }
        for url in referenced_pages(&self.repo, issues) {
            if !self.external_pages.contains_key(&url) {
                return Err(IngestError::Schema {
                    field: "externalPages".into(),
                    message: format!("no entry for referenced page `{url}`; use null for an unavailable page"),
                });
            }
        }
        Ok(())
    }
}

pub fn snapshot_from_str(text: &str, path: &str) -> Result<Snapshot, IngestError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| IngestError::Json {
        path: path.to_string(),
        message: e.to_string(),
    })?;
    match value.get("formatVersion") {
        Some(v) if v.as_u64() == Some(FORMAT_VERSION as u64) => {}
        Some(v) => return Err(IngestError::VersionMismatch { found: v.to_string() }),
        None => {
            return Err(IngestError::Schema {
                field: "formatVersion".into(),
                message: "missing field".into(),
            })
        }
    }
    let snapshot: Snapshot = serde_path_to_error::deserialize(value).map_err(|e| IngestError::Schema {
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    snapshot.validate()?;
    Ok(snapshot)
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    snapshot_from_str(&text, &path.display().to_string())
}

/// Writes `snapshot` as pretty-printed JSON, replacing `path` atomically.
pub fn save_snapshot(snapshot: &Snapshot, path: &Path) -> Result<(), IngestError> {
    let io = |source| IngestError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut text = serde_json::to_string_pretty(snapshot).map_err(|e| IngestError::Json {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    text.push('\n');
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Merges snapshots into one store and one page cache. A repository
/// captured without issues has no issue-level facts in the store.
pub fn build_store(snapshots: &[Snapshot]) -> Result<(FactStore, PageCache), IngestError> {
    let mut builder = FactStore::builder();
    let mut pages = PageCache::new();
    for snap in snapshots {
        builder = builder.repo(snap.repo.clone());
        if let Some(issues) = &snap.issues {
            builder = builder.issues(snap.repo.id()?, issues.clone());
        }
        for (url, text) in &snap.external_pages {
            let slot = pages.entry(url.clone()).or_insert(None);
            if slot.is_none() {
                *slot = text.clone();
            }
        }
    }
    Ok((builder.build()?, pages))
}
