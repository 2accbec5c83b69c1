//! Typed in-memory model of repository facts.
//!
//! A [`FactStore`] holds repositories, their contributors, files, license
//! history and issues. Pull requests are stored as issues with
//! [`IssueKind::PullRequest`], so every query that accepts issues also sees
//! pull requests.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use base64::Engine as _;
use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FactError {
    #[error("unknown repository `{0}`")]
    UnknownRepo(RepoId),
    #[error("invalid repository identifier `{0}` (expected OWNER/NAME)")]
    InvalidRepoId(String),
    #[error("duplicate repository `{0}`")]
    DuplicateRepo(RepoId),
    #[error("{field}: {reason}")]
    Invariant { field: String, reason: String },
}

fn invariant(field: impl Into<String>, reason: impl Into<String>) -> FactError {
    FactError::Invariant {
        field: field.into(),
        reason: reason.into(),
    }
}

/// `owner/name` identifier of a repository.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RepoId(String);

impl RepoId {
    pub fn new(owner: &str, name: &str) -> Result<Self, FactError> {
        format!("{owner}/{name}").parse()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn owner(&self) -> &str {
        self.0.split_once('/').map(|(o, _)| o).unwrap_or_default()
    }

    pub fn name(&self) -> &str {
        self.0.split_once('/').map(|(_, n)| n).unwrap_or_default()
    }

    /// Hosting services treat repository names case-insensitively.
    pub fn same_repo(&self, other: &RepoId) -> bool {
        self.0.eq_ignore_ascii_case(&other.0)
    }

    /// Lowercased form, equal for any two identifiers naming the same repo.
    pub fn key(&self) -> String {
        self.0.to_ascii_lowercase()
    }
}

impl FromStr for RepoId {
    type Err = FactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let valid_part = |p: &str| {
            !p.is_empty()
                && p.chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        };
        match s.split_once('/') {
            Some((o, n)) if valid_part(o) && valid_part(n) => Ok(RepoId(s.to_string())),
            _ => Err(FactError::InvalidRepoId(s.to_string())),
        }
    }
}

impl TryFrom<String> for RepoId {
    type Error = FactError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<RepoId> for String {
    fn from(id: RepoId) -> String {
        id.0
    }
}

impl fmt::Display for RepoId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An account on the hosting service. Logins compare case-sensitively.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserRef(String);

impl UserRef {
    pub fn new(login: impl Into<String>) -> Self {
        UserRef(login.into())
    }

    pub fn login(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UserRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Raw file bytes.
///
/// Serialized as a JSON string when the bytes are valid UTF-8, otherwise as
/// `{"base64": "..."}` so that arbitrary blobs survive a snapshot round-trip.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Blob(Vec<u8>);

impl Blob {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        Blob(bytes.into())
    }

    pub fn bytes(&self) -> &[u8] {
        &self.0
    }

    /// Lossy UTF-8 view used by every text-level analysis.
    pub fn text(&self) -> std::borrow::Cow<'_, str> {
        String::from_utf8_lossy(&self.0)
    }

    /// Files with a NUL byte are treated as binary and skipped by similarity scans.
    pub fn is_binary(&self) -> bool {
        self.0.contains(&0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<&str> for Blob {
    fn from(s: &str) -> Self {
        Blob(s.as_bytes().to_vec())
    }
}

impl From<String> for Blob {
    fn from(s: String) -> Self {
        Blob(s.into_bytes())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BlobRepr {
    Text(String),
    Encoded {
        base64: String,
    },
}

impl Serialize for Blob {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match std::str::from_utf8(&self.0) {
            Ok(text) => BlobRepr::Text(text.to_string()),
            Err(_) => BlobRepr::Encoded {
                base64: base64::engine::general_purpose::STANDARD.encode(&self.0),
            },
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Blob {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match BlobRepr::deserialize(deserializer)? {
            BlobRepr::Text(text) => Ok(Blob(text.into_bytes())),
            BlobRepr::Encoded { base64 } => base64::engine::general_purpose::STANDARD
                .decode(base64.as_bytes())
                .map(Blob)
                .map_err(serde::de::Error::custom),
        }
    }
}

/// One file of a repository. `content` is `None` when the file is listed in
/// the tree but its body was not retrieved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FileContent {
    pub path: String,
    pub content: Option<Blob>,
    pub content_count: u64,
}

impl FileContent {
    pub fn new(path: impl Into<String>, content: impl Into<Blob>) -> Self {
        let content = content.into();
        FileContent {
            path: path.into(),
            content_count: content.len() as u64,
            content: Some(content),
        }
    }

    /// A tree entry whose body has not been fetched.
    pub fn listed(path: impl Into<String>) -> Self {
        FileContent {
            path: path.into(),
            content: None,
            content_count: 0,
        }
    }

    pub fn text(&self) -> Option<std::borrow::Cow<'_, str>> {
        self.content.as_ref().map(Blob::text)
    }

    pub fn is_root(&self) -> bool {
        !self.path.contains('/')
    }

    pub fn file_name(&self) -> &str {
        self.path.rsplit('/').next().unwrap_or(&self.path)
    }

    pub fn extension(&self) -> Option<&str> {
        let name = self.file_name();
        name.rsplit_once('.')
            .filter(|(stem, _)| !stem.is_empty())
            .map(|(_, ext)| ext)
    }

    fn validate(&self, field: &str) -> Result<(), FactError> {
        if self.path.is_empty() {
            return Err(invariant(format!("{field}.path"), "empty path"));
        }
        if self.path.starts_with('/') || self.path.contains('\\') {
            return Err(invariant(
                format!("{field}.path"),
                format!("`{}` must be relative and use forward slashes", self.path),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CommitInfo {
    pub sha: String,
    pub timestamp: DateTime<Utc>,
    pub code_change: Option<String>,
    pub pull_request_count: u32,
}

impl CommitInfo {
    fn validate(&self, field: &str) -> Result<(), FactError> {
        let ok = (7..=40).contains(&self.sha.len())
            && self
                .sha
                .chars()
                .all(|c| c.is_ascii_digit() || ('a'..='f').contains(&c));
        if ok {
            Ok(())
        } else {
            Err(invariant(
                format!("{field}.sha"),
                format!("`{}` is not 7-40 lowercase hex characters", self.sha),
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ReleaseInfo {
    pub tag: String,
    pub published_date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RepositoryFacts {
    pub owner: String,
    pub name: String,
    pub is_fork: bool,
    pub parent_full_name: Option<RepoId>,
    pub fork_list: Vec<RepoId>,
    pub file_count: u64,
    pub files: Vec<FileContent>,
    pub license_file: Option<FileContent>,
    pub readme_file: Option<FileContent>,
    pub changelog_file: Option<FileContent>,
    pub contributors: BTreeSet<UserRef>,
    pub latest_release: Option<ReleaseInfo>,
    pub license_commits: Vec<CommitInfo>,
    pub external_links: Vec<String>,
}

impl RepositoryFacts {
    /// An empty, non-fork repository with no files.
    pub fn new(owner: &str, name: &str) -> Self {
        RepositoryFacts {
            owner: owner.to_string(),
            name: name.to_string(),
            is_fork: false,
            parent_full_name: None,
            fork_list: Vec::new(),
            file_count: 0,
            files: Vec::new(),
            license_file: None,
            readme_file: None,
            changelog_file: None,
            contributors: BTreeSet::new(),
            latest_release: None,
            license_commits: Vec::new(),
            external_links: Vec::new(),
        }
    }

    pub fn id(&self) -> Result<RepoId, FactError> {
        RepoId::new(&self.owner, &self.name)
    }

    /// The tree listing is complete when every counted file is present.
    pub fn is_tree_complete(&self) -> bool {
        self.file_count == self.files.len() as u64
    }

    pub fn file(&self, path: &str) -> Option<&FileContent> {
        self.files.iter().find(|f| f.path == path)
    }

    pub fn root_files(&self) -> impl Iterator<Item = &FileContent> {
        self.files.iter().filter(|f| f.is_root())
    }

    pub fn validate(&self) -> Result<(), FactError> {
        let id = self.id()?;
        for (i, f) in self.files.iter().enumerate() {
            f.validate(&format!("files[{i}]"))?;
        }
        if let Some(license) = &self.license_file {
            license.validate("licenseFile")?;
            if !license.is_root() {
                return Err(invariant(
                    "licenseFile.path",
                    format!("`{}` is not in the repository root", license.path),
                ));
            }
        }
        for (field, file) in [
            ("readmeFile", &self.readme_file),
            ("changelogFile", &self.changelog_file),
        ] {
            if let Some(file) = file {
                file.validate(field)?;
            }
        }
        if self.fork_list.iter().any(|f| f.same_repo(&id)) {
            return Err(invariant(
                "forkList",
                format!("contains the repository's own identifier `{id}`"),
            ));
        }
        if self.contributors.iter().any(|u| u.login().is_empty()) {
            return Err(invariant("contributors", "empty login"));
        }
        let mut seen = BTreeSet::new();
        for (i, c) in self.license_commits.iter().enumerate() {
            let field = format!("licenseCommits[{i}]");
            c.validate(&field)?;
            if !seen.insert(c.sha.as_str()) {
                return Err(invariant(
                    format!("{field}.sha"),
                    format!("duplicate commit `{}`", c.sha),
                ));
            }
        }
        if self
            .license_commits
            .windows(2)
            .any(|w| w[0].timestamp > w[1].timestamp)
        {
            return Err(invariant(
                "licenseCommits",
                "not sorted ascending by timestamp",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum IssueKind {
    Issue,
    PullRequest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Comment {
    pub author: UserRef,
    pub text: String,
}

impl Comment {
    pub fn new(author: &str, text: impl Into<String>) -> Self {
        Comment {
            author: UserRef::new(author),
            text: text.into(),
        }
    }
}

/// An issue or pull request. The first entry of `body_and_comments` is the
/// opening body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct IssueFacts {
    pub repo: RepoId,
    pub number: u64,
    pub kind: IssueKind,
    pub owner: UserRef,
    pub body_and_comments: Vec<Comment>,
    pub linked_commits: Vec<CommitInfo>,
}

impl IssueFacts {
    pub fn validate(&self, field: &str) -> Result<(), FactError> {
        if self.number == 0 {
            return Err(invariant(format!("{field}.number"), "must be positive"));
        }
        if self.owner.login().is_empty() {
            return Err(invariant(format!("{field}.owner"), "empty login"));
        }
        if self.kind == IssueKind::Issue && !self.linked_commits.is_empty() {
            return Err(invariant(
                format!("{field}.linkedCommits"),
                "only pull requests carry linked commits",
            ));
        }
        for (i, c) in self.linked_commits.iter().enumerate() {
            c.validate(&format!("{field}.linkedCommits[{i}]"))?;
        }
        Ok(())
    }

    pub fn subject(&self) -> Subject {
        Subject::issue(self.repo.clone(), self.number)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BehaviorType {
    S1,
    S2,
    S5,
    S6,
    S8,
    S9,
}

impl BehaviorType {
    pub const ALL: [BehaviorType; 6] = [
        BehaviorType::S1,
        BehaviorType::S2,
        BehaviorType::S5,
        BehaviorType::S6,
        BehaviorType::S8,
        BehaviorType::S9,
    ];

    /// Issue-level detectors take an issue or pull request as input.
    pub fn is_issue_level(self) -> bool {
        matches!(self, BehaviorType::S1 | BehaviorType::S8)
    }

    pub fn title(self) -> &'static str {
        match self {
            BehaviorType::S1 => "No attribution to the author in code",
            BehaviorType::S2 => "Soft forking",
            BehaviorType::S5 => "No license provided in public repository",
            BehaviorType::S6 => "Uninformed license change",
            BehaviorType::S8 => "Self-promotion",
            BehaviorType::S9 => "Unmaintained Android project with paid service",
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            BehaviorType::S1 => "s1",
            BehaviorType::S2 => "s2",
            BehaviorType::S5 => "s5",
            BehaviorType::S6 => "s6",
            BehaviorType::S8 => "s8",
            BehaviorType::S9 => "s9",
        }
    }
}

impl fmt::Display for BehaviorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for BehaviorType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BehaviorType::ALL
            .into_iter()
            .find(|t| t.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown behavior type `{s}`"))
    }
}

/// What a violation is about: a repository, or one issue of a repository.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subject {
    pub repo: RepoId,
    pub issue: Option<u64>,
}

impl Subject {
    pub fn repo(repo: RepoId) -> Self {
        Subject { repo, issue: None }
    }

    pub fn issue(repo: RepoId, number: u64) -> Self {
        Subject {
            repo,
            issue: Some(number),
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.issue {
            Some(n) => write!(f, "{}#{n}", self.repo),
            None => write!(f, "{}", self.repo),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceItem {
    pub label: String,
    pub value: String,
    pub location: Option<String>,
}

impl EvidenceItem {
    pub fn new(label: &str, value: impl Into<String>) -> Self {
        EvidenceItem {
            label: label.to_string(),
            value: value.into(),
            location: None,
        }
    }

    pub fn at(mut self, location: impl Into<String>) -> Self {
        self.location = Some(location.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Violation {
    pub behavior_type: BehaviorType,
    pub subject: Subject,
    pub evidence: Vec<EvidenceItem>,
    pub rule_trace: Vec<String>,
}

/// Immutable collection of repositories and their issues.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FactStore {
    repos: BTreeMap<RepoId, RepositoryFacts>,
    issues: BTreeMap<RepoId, Vec<IssueFacts>>,
}

impl FactStore {
    pub fn builder() -> FactStoreBuilder {
        FactStoreBuilder::default()
    }

    pub fn repo(&self, id: &RepoId) -> Option<&RepositoryFacts> {
        self.repos.get(id)
    }

    /// Case-insensitive lookup, returning the stored identifier.
    pub fn resolve(&self, id: &RepoId) -> Option<(&RepoId, &RepositoryFacts)> {
        self.repos
            .get_key_value(id)
            .or_else(|| self.repos.iter().find(|(k, _)| k.same_repo(id)))
    }

    pub fn repos(&self) -> impl Iterator<Item = (&RepoId, &RepositoryFacts)> {
        self.repos.iter()
    }

    /// Whether issue-level facts were captured for `repo`.
    pub fn has_issue_facts(&self, repo: &RepoId) -> bool {
        self.issues.contains_key(repo)
    }

    /// All issues and pull requests of `repo`, ordered by number.
    pub fn issues_of(&self, repo: &RepoId) -> Result<&[IssueFacts], FactError> {
        if !self.repos.contains_key(repo) {
            return Err(FactError::UnknownRepo(repo.clone()));
        }
        Ok(self.issues.get(repo).map(Vec::as_slice).unwrap_or(&[]))
    }

    pub fn issue(&self, repo: &RepoId, number: u64) -> Option<&IssueFacts> {
        self.issues
            .get(repo)?
            .iter()
            .find(|issue| issue.number == number)
    }

    pub fn is_contributor(&self, user: &UserRef, repo: &RepoId) -> Result<bool, FactError> {
        self.repos
            .get(repo)
            .map(|r| r.contributors.contains(user))
            .ok_or_else(|| FactError::UnknownRepo(repo.clone()))
    }
}

#[derive(Debug, Default)]
pub struct FactStoreBuilder {
    repos: Vec<RepositoryFacts>,
    issues: Vec<(RepoId, Vec<IssueFacts>)>,
}

impl FactStoreBuilder {
    pub fn repo(mut self, repo: RepositoryFacts) -> Self {
        self.repos.push(repo);
        self
    }

    /// Registers the issue list of `repo`; an empty list still marks the
    /// repository as having issue-level facts.
    pub fn issues(mut self, repo: RepoId, issues: Vec<IssueFacts>) -> Self {
        self.issues.push((repo, issues));
        self
    }

    pub fn build(self) -> Result<FactStore, FactError> {
        let mut repos = BTreeMap::new();
        for repo in self.repos {
            repo.validate()?;
            let id = repo.id()?;
            if repos.keys().any(|k: &RepoId| k.same_repo(&id)) {
                return Err(FactError::DuplicateRepo(id));
            }
            repos.insert(id, repo);
        }
        let mut issues: BTreeMap<RepoId, Vec<IssueFacts>> = BTreeMap::new();
        for (repo, list) in self.issues {
            if !repos.contains_key(&repo) {
                return Err(FactError::UnknownRepo(repo));
            }
            let entry = issues.entry(repo.clone()).or_default();
            for issue in list {
                let field = format!("issues[{}#{}]", repo, issue.number);
                issue.validate(&field)?;
                if issue.repo != repo {
                    return Err(invariant(
                        format!("{field}.repo"),
                        format!("`{}` does not match `{repo}`", issue.repo),
                    ));
                }
                if entry.iter().any(|i| i.number == issue.number) {
                    return Err(invariant(
                        format!("{field}.number"),
                        "duplicate number among issues and pull requests",
                    ));
                }
                entry.push(issue);
            }
            entry.sort_by_key(|i| i.number);
        }
        Ok(FactStore { repos, issues })
    }
}
