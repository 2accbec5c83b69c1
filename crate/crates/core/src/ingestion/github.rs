use std::collections::BTreeSet;
use std::time::Duration;

use base64::Engine as _;
use chrono::{DateTime, Utc};
use reqwest::blocking::{Client, Response};
use reqwest::StatusCode;
use serde_json::Value;

use crate::detectors::referenced_pages;
use crate::fact_model::{
    Blob, Comment, CommitInfo, FileContent, IssueFacts, IssueKind, ReleaseInfo, RepoId, RepositoryFacts, UserRef,
};
use crate::license::root_license_file;
use crate::source::SourceFilter;

use super::{BudgetTracker, FetchBudget, IngestError, PageFetcher, Snapshot};

pub const DEFAULT_API_BASE: &str = "https://api.github.com";
pub const TOKEN_VAR: &str = "ETHOSCAN_TOKEN";

const USER_AGENT: &str = concat!("ethoscan/", env!("CARGO_PKG_VERSION"));

/// Which facts to capture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    RepoLevel,
    IssueLevel,
    Both,
}

impl Scope {
    fn repo_level(self) -> bool {
        self != Scope::IssueLevel
    }

    fn issue_level(self) -> bool {
        self != Scope::RepoLevel
    }
}

impl std::str::FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "repoLevel" | "repo" => Ok(Scope::RepoLevel),
            "issueLevel" | "issue" => Ok(Scope::IssueLevel),
            "both" => Ok(Scope::Both),
            other => Err(format!("unknown scope `{other}` (expected repo, issue or both)")),
        }
    }
}

/// Blocking client for the hosting REST API. All requests, including
/// external pages, are charged to one budget.
pub struct GitHubClient {
    http: Client,
    base: String,
    token: Option<String>,
    tracker: BudgetTracker,
    pages: PageFetcher,
    source_filter: SourceFilter,
}

impl GitHubClient {
    pub fn new(budget: FetchBudget, token: Option<String>) -> Result<Self, IngestError> {
        budget.validate()?;
        let http = Client::builder()
            .user_agent(USER_AGENT)
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| IngestError::Network {
                url: DEFAULT_API_BASE.into(),
                message: e.to_string(),
            })?;
        Ok(GitHubClient {
            http,
            base: DEFAULT_API_BASE.into(),
            token: token.filter(|t| !t.is_empty()),
            tracker: BudgetTracker::new(budget),
            pages: PageFetcher::new()?,
            source_filter: SourceFilter::default(),
        })
    }

    /// A client authenticated by `ETHOSCAN_TOKEN` when set.
    pub fn from_env(budget: FetchBudget) -> Result<Self, IngestError> {
        Self::new(budget, std::env::var(TOKEN_VAR).ok())
    }

    pub fn with_api_base(mut self, base: &str) -> Self {
        self.base = base.trim_end_matches('/').to_string();
        self
    }

    pub fn with_page_origin(mut self, origin: &str) -> Result<Self, IngestError> {
        self.pages = self.pages.with_origin(origin)?;
        Ok(self)
    }

    pub fn with_source_filter(mut self, filter: SourceFilter) -> Self {
        self.source_filter = filter;
        self
    }

    pub fn requests_used(&self) -> u32 {
        self.tracker.used()
    }

    fn send(&mut self, url: &str) -> Result<Response, IngestError> {
        self.tracker.acquire()?;
        let mut req = self
            .http
            .get(url)
            .header("Accept", "application/vnd.github+json");
        if let Some(token) = &self.token {
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(|e| IngestError::Network {
            url: url.to_string(),
            message: e.to_string(),
        })?;
        let status = resp.status();
        if status.is_success() || status == StatusCode::CONFLICT || status == StatusCode::NOT_FOUND {
            return Ok(resp);
        }
        let exhausted = resp
            .headers()
            .get("x-ratelimit-remaining")
            .and_then(|v| v.to_str().ok())
            .is_some_and(|v| v.trim() == "0");
        match status {
            StatusCode::UNAUTHORIZED => Err(IngestError::Auth(format!("HTTP 401 from {url}"))),
            StatusCode::FORBIDDEN | StatusCode::TOO_MANY_REQUESTS if exhausted || status == StatusCode::TOO_MANY_REQUESTS => {
                Err(IngestError::RateLimited {
                    used: self.tracker.used(),
                })
            }
            _ => Err(IngestError::Http {
                url: url.to_string(),
                status: status.as_u16(),
            }),
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}/{}", self.base, path)
    }

    fn json(url: &str, resp: Response) -> Result<Value, IngestError> {
        if resp.status() == StatusCode::NO_CONTENT {
            return Ok(Value::Array(Vec::new()));
        }
        let bytes = resp.bytes().map_err(|e| IngestError::Network {
            url: url.to_string(),
            message: e.to_string(),
        })?;
        serde_json::from_slice(&bytes).map_err(|e| IngestError::Response {
            url: url.to_string(),
            message: e.to_string(),
        })
    }

    /// `None` on 404.
    fn get_optional(&mut self, path: &str) -> Result<Option<Value>, IngestError> {
        let url = self.url(path);
        let resp = self.send(&url)?;
        match resp.status() {
            StatusCode::NOT_FOUND => Ok(None),
            StatusCode::CONFLICT => Err(IngestError::Http { url, status: 409 }),
            _ => Self::json(&url, resp).map(Some),
        }
    }

    fn get(&mut self, path: &str) -> Result<Value, IngestError> {
        self.get_optional(path)?
            .ok_or_else(|| IngestError::NotFound(path.to_string()))
    }

    /// Every element of a paginated list, following `rel="next"` links.
    fn get_all(&mut self, path: &str) -> Result<Vec<Value>, IngestError> {
        let sep = if path.contains('?') { '&' } else { '?' };
        let mut next = Some(self.url(&format!("{path}{sep}per_page=100")));
        let mut out = Vec::new();
        while let Some(url) = next.take() {
            let resp = self.send(&url)?;
            match resp.status() {
                StatusCode::NOT_FOUND => return Err(IngestError::NotFound(path.to_string())),
                StatusCode::CONFLICT => return Ok(out),
                _ => {}
            }
            next = resp
                .headers()
                .get("link")
                .and_then(|v| v.to_str().ok())
                .and_then(next_link);
            match Self::json(&url, resp)? {
                Value::Array(items) => out.extend(items),
                _ => {
                    return Err(IngestError::Response {
                        url,
                        message: "expected a JSON array".into(),
                    })
                }
            }
        }
        Ok(out)
    }

    fn file_content(&mut self, repo: &str, path: &str, branch: &str) -> Result<Blob, IngestError> {
        let v = self.get(&format!("repos/{repo}/contents/{}?ref={branch}", encode_path(path)))?;
        let encoded = v["content"].as_str().unwrap_or("");
        if v["encoding"].as_str() != Some("base64") {
            return Err(IngestError::Partial {
                missing: vec![format!("content of {path} (not served inline)")],
            });
        }
        let compact: String = encoded.chars().filter(|c| !c.is_whitespace()).collect();
        base64::engine::general_purpose::STANDARD
            .decode(compact)
            .map(Blob::new)
            .map_err(|e| IngestError::Response {
                url: path.to_string(),
                message: format!("bad base64 content: {e}"),
            })
    }

    fn commit_info(&mut self, repo: &str, sha: &str, license_path: &str) -> Result<CommitInfo, IngestError> {
        let v = self.get(&format!("repos/{repo}/commits/{sha}"))?;
        let timestamp = commit_time(&v, sha)?;
        let code_change = v["files"].as_array().and_then(|files| {
            files
                .iter()
                .find(|f| f["filename"].as_str() == Some(license_path))
                .and_then(|f| f["patch"].as_str())
                .map(str::to_string)
        });
        let pulls = self.get_all(&format!("repos/{repo}/commits/{sha}/pulls"))?;
        Ok(CommitInfo {
            sha: sha.to_ascii_lowercase(),
            timestamp,
            code_change,
            pull_request_count: pulls.len() as u32,
        })
    }

    /// Repository metadata and contributors only, as needed to resolve a
    /// repository linked from an issue.
    pub fn fetch_contributors(&mut self, owner: &str, name: &str) -> Result<Snapshot, IngestError> {
        let full = format!("{owner}/{name}");
        let meta = self.get(&format!("repos/{full}"))?;
        let mut repo = RepositoryFacts::new(owner, name);
        apply_meta(&mut repo, &meta)?;
        repo.contributors = self.contributors(&full)?;
        // Only contributors are consulted for a linked repository.
        repo.external_links.clear();
        Ok(Snapshot::new(repo, Utc::now()))
    }

    fn contributors(&mut self, full: &str) -> Result<BTreeSet<UserRef>, IngestError> {
        Ok(self
            .get_all(&format!("repos/{full}/contributors"))?
            .iter()
            .filter_map(|c| c["login"].as_str())
            .map(UserRef::new)
            .collect())
    }

    pub fn fetch_repository(&mut self, owner: &str, name: &str, scope: Scope) -> Result<Snapshot, IngestError> {
        let full = format!("{owner}/{name}");
        let meta = self.get(&format!("repos/{full}"))?;
        let mut repo = RepositoryFacts::new(owner, name);
        apply_meta(&mut repo, &meta)?;
        let branch = meta["default_branch"].as_str().unwrap_or("main").to_string();

        let tree = self.get_tree(&full, &branch)?;
        repo.file_count = tree.len() as u64;
        for (path, size) in tree {
            let wanted = !path.contains('/') || self.source_filter.is_source(&path);
            let file = if wanted {
                let blob = self.file_content(&full, &path, &branch)?;
                FileContent::new(path, blob)
            } else {
                FileContent {
                    content_count: size,
                    ..FileContent::listed(path)
                }
            };
            repo.files.push(file);
        }
        let root = |pred: &dyn Fn(&str) -> bool| {
            repo.files
                .iter()
                .filter(|f| f.is_root() && pred(&f.path.to_ascii_lowercase()))
                .min_by_key(|f| f.path.len())
                .cloned()
        };
        repo.readme_file = root(&|p| p == "readme.md" || p == "readme" || p.starts_with("readme."));
        repo.changelog_file = root(&|p| p == "changelog.md" || p == "changelog" || p.starts_with("changelog."));
        repo.license_file = root_license_file(&repo).cloned();
        repo.contributors = self.contributors(&full)?;

        if scope.repo_level() {
            if let Some(path) = repo.license_file.as_ref().map(|f| f.path.clone()) {
                let mut listed = self.get_all(&format!("repos/{full}/commits?path={}", encode_path(&path)))?;
                listed.reverse();
                let mut commits = Vec::new();
                for c in &listed {
                    let sha = c["sha"].as_str().ok_or_else(|| IngestError::Response {
                        url: format!("repos/{full}/commits"),
                        message: "commit without sha".into(),
                    })?;
                    commits.push(self.commit_info(&full, sha, &path)?);
                }
                commits.sort_by_key(|c| c.timestamp);
                repo.license_commits = commits;
            }
            repo.latest_release = match self.get_optional(&format!("repos/{full}/releases/latest"))? {
                Some(r) => release(&r),
                None => None,
            };
            repo.fork_list = self
                .get_all(&format!("repos/{full}/forks"))?
                .iter()
                .filter_map(|f| f["full_name"].as_str())
                .filter_map(|s| s.parse::<RepoId>().ok())
                .collect();
        }

        let issues = if scope.issue_level() {
            Some(self.issues(&full, &repo.id()?)?)
        } else {
            None
        };

        let mut snap = Snapshot::new(repo, Utc::now());
        snap.issues = issues;
        for url in referenced_pages(&snap.repo, snap.issues.as_deref().unwrap_or(&[])) {
            let page = self.pages.fetch(&mut self.tracker, &url)?;
            snap.external_pages.insert(url, page);
        }
        snap.validate()?;
        Ok(snap)
    }

    fn get_tree(&mut self, full: &str, branch: &str) -> Result<Vec<(String, u64)>, IngestError> {
        let url = self.url(&format!("repos/{full}/git/trees/{branch}?recursive=1"));
        let resp = self.send(&url)?;
        if matches!(resp.status(), StatusCode::CONFLICT | StatusCode::NOT_FOUND) {
            return Ok(Vec::new());
        }
        let v = Self::json(&url, resp)?;
        if v["truncated"].as_bool() == Some(true) {
            return Err(IngestError::Partial {
                missing: vec!["file tree (listing truncated by the server)".into()],
            });
        }
        Ok(v["tree"]
            .as_array()
            .map(|entries| {
                entries
                    .iter()
                    .filter(|e| e["type"].as_str() == Some("blob"))
                    .filter_map(|e| Some((e["path"].as_str()?.to_string(), e["size"].as_u64().unwrap_or(0))))
                    .collect()
            })
            .unwrap_or_default())
    }

    fn issues(&mut self, full: &str, id: &RepoId) -> Result<Vec<IssueFacts>, IngestError> {
        let listed = self.get_all(&format!("repos/{full}/issues?state=all"))?;
        let mut out = Vec::new();
        for item in listed {
            let number = item["number"].as_u64().unwrap_or(0);
            let owner = item["user"]["login"].as_str().unwrap_or("").to_string();
            let is_pr = item.get("pull_request").is_some_and(|p| !p.is_null());
            let mut texts = vec![Comment::new(&owner, item["body"].as_str().unwrap_or(""))];
            if item["comments"].as_u64().unwrap_or(1) > 0 {
                for c in self.get_all(&format!("repos/{full}/issues/{number}/comments"))? {
                    texts.push(Comment::new(
                        c["user"]["login"].as_str().unwrap_or(""),
                        c["body"].as_str().unwrap_or(""),
                    ));
                }
            }
            let mut linked_commits = Vec::new();
            if is_pr {
                for c in self.get_all(&format!("repos/{full}/pulls/{number}/commits"))? {
                    let sha = c["sha"].as_str().unwrap_or("").to_ascii_lowercase();
                    linked_commits.push(CommitInfo {
                        timestamp: commit_time(&c, &sha)?,
                        sha,
                        code_change: None,
                        pull_request_count: 1,
                    });
                }
            }
            out.push(IssueFacts {
                repo: id.clone(),
                number,
                kind: if is_pr { IssueKind::PullRequest } else { IssueKind::Issue },
                owner: UserRef::new(owner),
                body_and_comments: texts,
                linked_commits,
            });
        }
        out.sort_by_key(|i| i.number);
        Ok(out)
    }
}

fn apply_meta(repo: &mut RepositoryFacts, meta: &Value) -> Result<(), IngestError> {
    repo.is_fork = meta["fork"].as_bool().unwrap_or(false);
    repo.parent_full_name = meta["parent"]["full_name"].as_str().and_then(|s| s.parse().ok());
    if let Some(home) = meta["homepage"].as_str().filter(|h| !h.trim().is_empty()) {
        repo.external_links.push(home.trim().to_string());
    }
    Ok(())
}

fn release(v: &Value) -> Option<ReleaseInfo> {
    let tag = v["tag_name"].as_str()?.to_string();
    let when = v["published_at"].as_str().or(v["created_at"].as_str())?;
    let published: DateTime<Utc> = when.parse().ok()?;
    Some(ReleaseInfo {
        tag,
        published_date: published.date_naive(),
    })
}

fn commit_time(v: &Value, sha: &str) -> Result<DateTime<Utc>, IngestError> {
    let c = &v["commit"];
    c["committer"]["date"]
        .as_str()
        .or(c["author"]["date"].as_str())
        .and_then(|d| DateTime::parse_from_rfc3339(d).ok())
        .map(|d| d.with_timezone(&Utc))
        .ok_or_else(|| IngestError::Response {
            url: format!("commit {sha}"),
            message: "missing commit date".into(),
        })
}

/// Target of the `rel="next"` entry of a `Link` header.
fn next_link(header: &str) -> Option<String> {
    header.split(',').find_map(|part| {
        let (target, params) = part.split_once(';')?;
        params
            .split(';')
            .any(|p| p.trim() == "rel=\"next\"")
            .then(|| target.trim().trim_start_matches('<').trim_end_matches('>').to_string())
    })
}

fn encode_path(path: &str) -> String {
    path.split('/')
        .map(|seg| url::form_urlencoded::byte_serialize(seg.as_bytes()).collect::<String>().replace('+', "%20"))
        .collect::<Vec<_>>()
        .join("/")
}

/// Captures `owner/name` from the public API, authenticated by
/// `ETHOSCAN_TOKEN` when set.
pub fn fetch_repository(owner: &str, name: &str, budget: FetchBudget, scope: Scope) -> Result<Snapshot, IngestError> {
    GitHubClient::from_env(budget)?.fetch_repository(owner, name, scope)
}

pub fn fetch_contributors(owner: &str, name: &str, budget: FetchBudget) -> Result<Snapshot, IngestError> {
    GitHubClient::from_env(budget)?.fetch_contributors(owner, name)
}
