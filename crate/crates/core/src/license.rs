//! License identification for a repository's root directory and for the
//! commit history of its license file.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fact_model::{CommitInfo, FileContent, RepositoryFacts};

const BUNDLED_CATALOG: &str = include_str!("../../../data/licenses.json");

/// Root-directory basenames accepted as license files, in priority order.
pub const LICENSE_FILE_NAMES: &[&str] = &["LICENSE", "LICENSE.md", "LICENSE.txt", "COPYING", "COPYING.md"];

/// spdxId reported for a license file whose text matches no catalog entry.
pub const UNKNOWN: &str = "unknown";

#[derive(Debug, Error)]
pub enum LicenseError {
    #[error("cannot read license catalog `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid license catalog: {0}")]
    Catalog(String),
    #[error("commit {sha} has no diff text")]
    MissingDiff { sha: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CatalogEntry {
    pub spdx_id: String,
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    /// Distinctive phrases of the license text; all must occur for a match.
    pub phrases: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    licenses: Vec<CatalogEntry>,
}

/// Phrase count, total phrase length, earliest position (reversed).
type TextRank = (usize, usize, std::cmp::Reverse<usize>);
/// Position, label length (reversed).
type MentionRank = (usize, std::cmp::Reverse<usize>);

struct Prepared {
    entry: CatalogEntry,
    phrases: Vec<String>,
    /// Name, aliases and SPDX id, normalized, longest first.
    labels: Vec<String>,
}

/// The set of known licenses with their matching phrases.
pub struct LicenseCatalog {
    entries: Vec<Prepared>,
}

impl std::fmt::Debug for LicenseCatalog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.entries.iter().map(|p| &p.entry.spdx_id)).finish()
    }
}

/// Lowercases and collapses every whitespace run to one space.
fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

/// Byte offset of the first occurrence of `needle` in `hay` that is not
/// glued to a neighbouring alphanumeric character.
fn find_word(hay: &str, needle: &str) -> Option<usize> {
    let mut from = 0;
    while let Some(rel) = hay[from..].find(needle) {
        let at = from + rel;
        let end = at + needle.len();
        let before = hay[..at].chars().next_back();
        let after = hay[end..].chars().next();
        let glued = |c: Option<char>| c.is_some_and(char::is_alphanumeric);
        if !glued(before) && !glued(after) {
            return Some(at);
        }
        from = at + hay[at..].chars().next().map_or(1, char::len_utf8);
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identified {
    pub spdx_id: String,
    pub matched_name: String,
}

impl LicenseCatalog {
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_CATALOG).expect("bundled catalog is valid")
    }

    pub fn load(path: &Path) -> Result<Self, LicenseError> {
        let text = std::fs::read_to_string(path).map_err(|source| LicenseError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, LicenseError> {
        let file: CatalogFile = serde_json::from_str(text).map_err(|e| LicenseError::Catalog(e.to_string()))?;
        Self::new(file.licenses)
    }

    pub fn new(entries: Vec<CatalogEntry>) -> Result<Self, LicenseError> {
        let mut seen = std::collections::BTreeSet::new();
        let mut prepared = Vec::with_capacity(entries.len());
        for entry in entries {
            if entry.spdx_id.trim().is_empty() || entry.spdx_id == UNKNOWN {
                return Err(LicenseError::Catalog(format!("invalid spdxId `{}`", entry.spdx_id)));
            }
            if !seen.insert(entry.spdx_id.to_ascii_lowercase()) {
                return Err(LicenseError::Catalog(format!("duplicate spdxId `{}`", entry.spdx_id)));
            }
            if entry.phrases.is_empty() || entry.phrases.iter().any(|p| p.trim().is_empty()) {
                return Err(LicenseError::Catalog(format!("`{}` needs non-empty phrases", entry.spdx_id)));
            }
            let phrases = entry.phrases.iter().map(|p| normalize(p)).collect();
            let mut labels: Vec<String> = std::iter::once(&entry.name)
                .chain(&entry.aliases)
                .chain(std::iter::once(&entry.spdx_id))
                .map(|s| normalize(s))
                .filter(|s| !s.is_empty())
                .collect();
            labels.sort_by_key(|l| std::cmp::Reverse(l.len()));
            labels.dedup();
            prepared.push(Prepared { entry, phrases, labels });
        }
        Ok(LicenseCatalog { entries: prepared })
    }

    pub fn entries(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.iter().map(|p| &p.entry)
    }

    /// Identifies a full license text: the entry with the most matched
    /// phrases wins (all of an entry's phrases must occur), then the longest
    /// total phrase length, then the earliest match.
    pub fn identify_text(&self, text: &str) -> Option<Identified> {
        let norm = normalize(text);
        let mut best: Option<(TextRank, &Prepared)> = None;
        for p in &self.entries {
            let positions: Option<Vec<usize>> = p.phrases.iter().map(|ph| norm.find(ph.as_str())).collect();
            let Some(positions) = positions else { continue };
            let first = positions.iter().copied().min().unwrap_or(0);
            let key = (
                p.phrases.len(),
                p.phrases.iter().map(String::len).sum(),
                std::cmp::Reverse(first),
            );
            if best.as_ref().is_none_or(|(k, _)| key > *k) {
                best = Some((key, p));
            }
        }
        best.map(|(_, p)| Identified {
            spdx_id: p.entry.spdx_id.clone(),
            matched_name: p.entry.name.clone(),
        })
    }

    /// Finds a license mentioned by name, alias or SPDX id, case-insensitively
    /// and on word boundaries. The earliest mention wins, then the longest.
    pub fn identify_mention(&self, text: &str) -> Option<Identified> {
        let norm = normalize(text);
        let mut best: Option<(MentionRank, &Prepared, &str)> = None;
        for p in &self.entries {
            for label in &p.labels {
                if let Some(at) = find_word(&norm, label) {
                    let key = (at, std::cmp::Reverse(label.len()));
                    if best.as_ref().is_none_or(|(k, _, _)| key < *k) {
                        best = Some((key, p, label));
                    }
                }
            }
        }
        best.map(|(_, p, label)| Identified {
            spdx_id: p.entry.spdx_id.clone(),
            matched_name: original_label(&p.entry, label),
        })
    }

    /// Full-text phrases first, then mentions.
    pub fn identify(&self, text: &str) -> Option<Identified> {
        self.identify_text(text).or_else(|| self.identify_mention(text))
    }
}

fn original_label(entry: &CatalogEntry, normalized: &str) -> String {
    std::iter::once(&entry.name)
        .chain(&entry.aliases)
        .chain(std::iter::once(&entry.spdx_id))
        .find(|s| normalize(s) == normalized)
        .cloned()
        .unwrap_or_else(|| entry.name.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum LicenseSource {
    LicenseFile,
    Readme,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LicenseInfo {
    pub spdx_id: String,
    pub source: LicenseSource,
    pub matched_name: String,
    /// Root-relative path of the file the license was found in.
    pub path: String,
}

fn license_file_rank(file: &FileContent) -> Option<usize> {
    if !file.is_root() {
        return None;
    }
    LICENSE_FILE_NAMES
        .iter()
        .position(|n| n.eq_ignore_ascii_case(file.file_name()))
}

fn is_root_readme(file: &FileContent) -> bool {
    file.is_root() && file.file_name().eq_ignore_ascii_case("README.md")
}

/// Root license file of `repo`, if any. The dedicated `licenseFile` field
/// wins over tree entries; only files directly in the root are considered.
pub fn root_license_file(repo: &RepositoryFacts) -> Option<&FileContent> {
    if let Some(f) = repo.license_file.as_ref().filter(|f| f.is_root()) {
        return Some(f);
    }
    repo.files
        .iter()
        .filter_map(|f| license_file_rank(f).map(|r| (r, f)))
        .min_by_key(|(r, f)| (*r, f.path.as_str()))
        .map(|(_, f)| f)
}

fn root_readme(repo: &RepositoryFacts) -> Option<&FileContent> {
    repo.readme_file
        .as_ref()
        .filter(|f| f.is_root())
        .or_else(|| repo.files.iter().find(|f| is_root_readme(f)))
}

/// Looks for a license in the root license file, then in the root README.
/// A root license file whose text is not recognised still counts, with
/// spdxId [`UNKNOWN`].
pub fn detect_repo_license(repo: &RepositoryFacts, catalog: &LicenseCatalog) -> Option<LicenseInfo> {
    if let Some(file) = root_license_file(repo) {
        let found = file.text().and_then(|t| catalog.identify(&t));
        return Some(match found {
            Some(id) => LicenseInfo {
                spdx_id: id.spdx_id,
                source: LicenseSource::LicenseFile,
                matched_name: id.matched_name,
                path: file.path.clone(),
            },
            None => LicenseInfo {
                spdx_id: UNKNOWN.to_string(),
                source: LicenseSource::LicenseFile,
                matched_name: file.file_name().to_string(),
                path: file.path.clone(),
            },
        });
    }
    let readme = root_readme(repo)?;
    let id = catalog.identify_mention(&readme.text()?)?;
    Some(LicenseInfo {
        spdx_id: id.spdx_id,
        source: LicenseSource::Readme,
        matched_name: id.matched_name,
        path: readme.path.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LicenseChangeEvent {
    pub commit: CommitInfo,
    pub from_license: String,
    pub to_license: String,
}

/// Added and removed lines of a unified diff, without their markers.
fn diff_sides(patch: &str) -> (String, String) {
    let (mut added, mut removed) = (String::new(), String::new());
    for line in patch.lines() {
        if line.starts_with("+++") || line.starts_with("---") {
            continue;
        }
        if let Some(rest) = line.strip_prefix('+') {
            added.push_str(rest);
            added.push('\n');
        } else if let Some(rest) = line.strip_prefix('-') {
            removed.push_str(rest);
            removed.push('\n');
        }
    }
    (added, removed)
}

/// License transitions in the license file's history. The first commit
/// only establishes the initial license. A later commit yields an event when
/// its added lines identify a license different from the current one.
pub fn extract_license_changes(
    repo: &RepositoryFacts,
    catalog: &LicenseCatalog,
) -> Result<Vec<LicenseChangeEvent>, LicenseError> {
    let mut events = Vec::new();
    let mut current: Option<String> = None;
    for (i, commit) in repo.license_commits.iter().enumerate() {
        let patch = commit.code_change.as_deref().ok_or_else(|| LicenseError::MissingDiff {
            sha: commit.sha.clone(),
        })?;
        let (added, removed) = diff_sides(patch);
        let new = catalog.identify(&added).map(|id| id.spdx_id);
        if i == 0 {
            current = new;
            continue;
        }
        let Some(new) = new else { continue };
        let from = current
            .clone()
            .or_else(|| catalog.identify(&removed).map(|id| id.spdx_id))
            .unwrap_or_else(|| UNKNOWN.to_string());
        if from != new {
            events.push(LicenseChangeEvent {
                commit: commit.clone(),
                from_license: from,
                to_license: new.clone(),
            });
        }
        current = Some(new);
    }
    Ok(events)
}
