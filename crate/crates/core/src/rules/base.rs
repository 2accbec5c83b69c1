//! Base predicates exported from a [`FactStore`].
//!
//! Repository identifiers are lowercased so that relations join regardless of
//! how a name was capitalized at its source.
//!
//! | predicate | meaning |
//! |---|---|
//! | `repository(R)` | `R` is a repository (`owner/name`) |
//! | `is_fork(R)` | `R` is registered as a fork |
//! | `parent(R, P)` | `R` was forked from `P` |
//! | `fork_listed(R, F)` | `F` appears in the fork list of `R` |
//! | `contributor(R, U)` | login `U` contributes to `R` |
//! | `file(R, Path)` | `R` contains a file at `Path` |
//! | `file_count(R, N)` | `R` has `N` files |
//! | `latest_release(R, Date)` | publication date of the latest release |
//! | `license_commit(R, Sha)` | commit touching the license file |
//! | `commit_pr_count(Sha, N)` | number of pull requests containing the commit |
//! | `external_link(R, Url)` | link declared in repository metadata |
//! | `issue(I, R)` | issue or pull request `I` (`owner/name#n`) of `R` |
//! | `pull_request(I)` | `I` is a pull request |
//! | `issue_number(I, N)` | number of `I` |
//! | `issue_opener(I, U)` | login that opened `I` |
//! | `comment_author(I, U)` | login that wrote the body or a comment of `I` |
//! | `linked_commit(I, Sha)` | commit of pull request `I` |

use crate::fact_model::{FactStore, IssueFacts, IssueKind, RepositoryFacts};

use super::ast::Value;
use super::eval::Edb;

pub const BASE_PREDICATES: &[(&str, usize)] = &[
    ("repository", 1),
    ("is_fork", 1),
    ("parent", 2),
    ("fork_listed", 2),
    ("contributor", 2),
    ("file", 2),
    ("file_count", 2),
    ("latest_release", 2),
    ("license_commit", 2),
    ("commit_pr_count", 2),
    ("external_link", 2),
    ("issue", 2),
    ("pull_request", 1),
    ("issue_number", 2),
    ("issue_opener", 2),
    ("comment_author", 2),
    ("linked_commit", 2),
];

/// Identifier used for issues in relations: `owner/name#number`.
pub fn issue_key(issue: &IssueFacts) -> String {
    format!("{}#{}", issue.repo.key(), issue.number)
}

/// Identifier used for repositories in relations: lowercased `owner/name`.
pub fn repo_key(repo: &RepositoryFacts) -> String {
    format!("{}/{}", repo.owner, repo.name).to_ascii_lowercase()
}

/// An [`Edb`] with every base predicate declared and no facts.
pub fn schema() -> Edb {
    let mut edb = Edb::new();
    for (p, arity) in BASE_PREDICATES {
        edb.declare(p, *arity);
    }
    edb
}

pub fn add_repo(edb: &mut Edb, repo: &RepositoryFacts) {
    let id = repo_key(repo);
    let r = || Value::from(id.as_str());
    edb.insert("repository", vec![r()]);
    if repo.is_fork {
        edb.insert("is_fork", vec![r()]);
    }
    if let Some(parent) = &repo.parent_full_name {
        edb.insert("parent", vec![r(), parent.key().into()]);
    }
    for fork in &repo.fork_list {
        edb.insert("fork_listed", vec![r(), fork.key().into()]);
    }
    for user in &repo.contributors {
        edb.insert("contributor", vec![r(), user.login().into()]);
    }
    for file in &repo.files {
        edb.insert("file", vec![r(), file.path.as_str().into()]);
    }
    edb.insert("file_count", vec![r(), Value::Int(repo.file_count as i64)]);
    if let Some(release) = &repo.latest_release {
        edb.insert("latest_release", vec![r(), Value::Date(release.published_date)]);
    }
    for commit in &repo.license_commits {
        edb.insert("license_commit", vec![r(), commit.sha.as_str().into()]);
        edb.insert(
            "commit_pr_count",
            vec![commit.sha.as_str().into(), Value::Int(commit.pull_request_count as i64)],
        );
    }
    for link in &repo.external_links {
        edb.insert("external_link", vec![r(), link.as_str().into()]);
    }
}

pub fn add_issue(edb: &mut Edb, issue: &IssueFacts) {
    let key = issue_key(issue);
    let i = || Value::from(key.as_str());
    edb.insert("issue", vec![i(), issue.repo.key().into()]);
    if issue.kind == IssueKind::PullRequest {
        edb.insert("pull_request", vec![i()]);
    }
    edb.insert("issue_number", vec![i(), Value::Int(issue.number as i64)]);
    edb.insert("issue_opener", vec![i(), issue.owner.login().into()]);
    for c in &issue.body_and_comments {
        edb.insert("comment_author", vec![i(), c.author.login().into()]);
    }
    for commit in &issue.linked_commits {
        edb.insert("linked_commit", vec![i(), commit.sha.as_str().into()]);
        edb.insert(
            "commit_pr_count",
            vec![commit.sha.as_str().into(), Value::Int(commit.pull_request_count as i64)],
        );
    }
}

/// Every base fact of every repository and issue in `store`.
pub fn from_store(store: &FactStore) -> Edb {
    let mut edb = schema();
    for (id, repo) in store.repos() {
        add_repo(&mut edb, repo);
        for issue in store.issues_of(id).expect("repo from the store itself") {
            add_issue(&mut edb, issue);
        }
    }
    edb
}
