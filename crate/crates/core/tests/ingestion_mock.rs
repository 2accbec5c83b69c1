mod support;

use std::time::Instant;

use base64::Engine as _;
use ethoscan::fact_model::{Blob, FileContent, IssueKind, RepositoryFacts};
use ethoscan::ingestion::{
    build_store, load_snapshot, save_snapshot, snapshot_from_str, FetchBudget, GitHubClient, IngestError, PageFetcher,
    BudgetTracker, Scope, Snapshot,
};
use support::mock_http::{MockServer, Reply};

const STORE: &str = "https://play.google.com/store/apps/details?id=com.o.r";

fn client(server: &MockServer, max_requests: u32) -> GitHubClient {
    let budget = FetchBudget {
        max_requests,
        min_interval_ms: 0,
    };
    GitHubClient::new(budget, Some("t0ken".into()))
        .unwrap()
        .with_api_base(&server.base)
        .with_page_origin(&server.base)
        .unwrap()
}

fn contents(text: &str) -> Reply {
    let mut encoded = base64::engine::general_purpose::STANDARD.encode(text);
    if encoded.len() > 8 {
        encoded.insert_str(8, "\\n");
    }
    Reply::json(&format!(r#"{{"encoding":"base64","content":"{encoded}"}}"#))
}

fn full_repo() -> Vec<(&'static str, Reply)> {
    vec![
        (
            "/repos/o/r",
            Reply::json(&format!(r#"{{"fork":false,"parent":null,"default_branch":"main","homepage":"{STORE}"}}"#)),
        ),
        (
            "/repos/o/r/git/trees/main?recursive=1",
            Reply::json(
                r#"{"truncated":false,"tree":[
                {"path":"LICENSE","type":"blob","size":20},
                {"path":"README.md","type":"blob","size":8},
                {"path":"src","type":"tree"},
                {"path":"src/main.c","type":"blob","size":30},
                {"path":"docs/guide.txt","type":"blob","size":10}]}"#,
            ),
        ),
        ("/repos/o/r/contents/LICENSE?ref=main", contents("MIT License\n\nPermission is hereby granted")),
        ("/repos/o/r/contents/README.md?ref=main", contents("# r\n")),
        ("/repos/o/r/contents/src/main.c?ref=main", contents("int main(void) { return 0; }\n")),
        ("/repos/o/r/contributors?per_page=100", Reply::json(r#"[{"login":"alice"},{"login":"bob"}]"#)),
        (
            "/repos/o/r/commits?path=LICENSE&per_page=100",
            Reply::json(r#"[{"sha":"bbbbbbbbbb"},{"sha":"aaaaaaaaaa"}]"#),
        ),
        (
            "/repos/o/r/commits/aaaaaaaaaa",
            Reply::json(
                r#"{"commit":{"committer":{"date":"2020-01-01T10:00:00+02:00"}},
                   "files":[{"filename":"LICENSE","patch":"@@ -0,0 +1 @@\n+Apache License"}]}"#,
            ),
        ),
        ("/repos/o/r/commits/aaaaaaaaaa/pulls?per_page=100", Reply::json("[]")),
        (
            "/repos/o/r/commits/bbbbbbbbbb",
            Reply::json(
                r#"{"commit":{"committer":{"date":"2021-06-01T00:00:00Z"}},
                   "files":[{"filename":"LICENSE","patch":"@@ -1 +1 @@\n-Apache License\n+MIT License"}]}"#,
            ),
        ),
        ("/repos/o/r/commits/bbbbbbbbbb/pulls?per_page=100", Reply::json(r#"[{"number":9}]"#)),
        (
            "/repos/o/r/releases/latest",
            Reply::json(r#"{"tag_name":"v1.0","published_at":"2021-01-02T03:04:05Z"}"#),
        ),
        ("/repos/o/r/forks?per_page=100", Reply::json(r#"[{"full_name":"x/r"}]"#)),
        (
            "/repos/o/r/issues?state=all&per_page=100",
            Reply::json(r#"[{"number":1,"user":{"login":"carol"},"body":"crash on start","comments":1}]"#)
                .header("Link", r#"<{base}/repos/o/r/issues?state=all&per_page=100&page=2>; rel="next""#),
        ),
        (
            "/repos/o/r/issues?state=all&per_page=100&page=2",
            Reply::json(r#"[{"number":2,"user":{"login":"dave"},"body":"fix","comments":0,"pull_request":{}}]"#),
        ),
        (
            "/repos/o/r/issues/1/comments?per_page=100",
            Reply::json(
                r#"[{"user":{"login":"alice"},"body":"see https://stackoverflow.com/questions/11/x and https://stackoverflow.com/questions/12/gone"}]"#,
            ),
        ),
        (
            "/repos/o/r/pulls/2/commits?per_page=100",
            Reply::json(r#"[{"sha":"cccccccccc","commit":{"committer":{"date":"2021-07-01T00:00:00Z"}}}]"#),
        ),
        ("/store/apps/details?id=com.o.r", Reply::json("Contains ads. In-app purchases.")),
        ("/questions/11/x", Reply::json("<div data-answerid=\"5\"><pre><code>x++;</code></pre></div>")),
    ]
}

#[test]
fn empty_repository() {
    let server = MockServer::start(vec![
        ("/repos/octo/empty-repo", Reply::json(r#"{"fork":false,"default_branch":"main"}"#)),
        ("/repos/octo/empty-repo/git/trees/main?recursive=1", Reply::status(409)),
        ("/repos/octo/empty-repo/contributors?per_page=100", Reply::status(204)),
        ("/repos/octo/empty-repo/forks?per_page=100", Reply::json("[]")),
    ]);
    let snap = client(&server, 100).fetch_repository("octo", "empty-repo", Scope::RepoLevel).unwrap();
    assert_eq!(snap.repo.file_count, 0);
    assert!(snap.repo.files.is_empty());
    assert!(snap.repo.license_file.is_none());
    assert!(snap.repo.latest_release.is_none());
    assert!(snap.issues.is_none());
}

#[test]
fn budget_of_one_aborts_a_multi_request_fetch() {
    let server = MockServer::start(full_repo());
    let err = client(&server, 1).fetch_repository("o", "r", Scope::Both).unwrap_err();
    assert!(matches!(err, IngestError::BudgetExhausted { used: 1 }), "{err:?}");
    assert_eq!(server.hits().len(), 1);
}

#[test]
fn pagination_is_never_truncated_silently() {
    // Enough for everything up to the first issue page, but not the second.
    let server = MockServer::start(full_repo());
    let mut c = client(&server, 1000);
    c.fetch_repository("o", "r", Scope::Both).unwrap();
    let needed = c.requests_used();
    let page2 = server.hits().iter().position(|h| h.ends_with("page=2")).unwrap() as u32;
    let server = MockServer::start(full_repo());
    let err = client(&server, page2).fetch_repository("o", "r", Scope::Both).unwrap_err();
    assert!(matches!(err, IngestError::BudgetExhausted { .. }), "{err:?}");
    assert!(page2 < needed);
}

#[test]
fn both_scopes_capture_two_issues_and_pages() {
    let server = MockServer::start(full_repo());
    let snap = client(&server, 1000).fetch_repository("o", "r", Scope::Both).unwrap();
    let issues = snap.issues.as_ref().unwrap();
    assert_eq!(issues.len(), 2);
    assert_eq!(issues[0].kind, IssueKind::Issue);
    assert_eq!(issues[0].body_and_comments.len(), 2);
    assert_eq!(issues[1].kind, IssueKind::PullRequest);
    assert_eq!(issues[1].linked_commits.len(), 1);

    let repo = &snap.repo;
    assert_eq!(repo.file_count, 4);
    assert_eq!(repo.file("src/main.c").unwrap().text().unwrap(), "int main(void) { return 0; }\n");
    assert!(repo.file("docs/guide.txt").unwrap().content.is_none());
    assert_eq!(repo.license_file.as_ref().unwrap().path, "LICENSE");
    assert_eq!(repo.readme_file.as_ref().unwrap().path, "README.md");
    let shas: Vec<_> = repo.license_commits.iter().map(|c| c.sha.as_str()).collect();
    assert_eq!(shas, ["aaaaaaaaaa", "bbbbbbbbbb"]);
    assert_eq!(repo.license_commits[0].timestamp.to_rfc3339(), "2020-01-01T08:00:00+00:00");
    assert_eq!(repo.license_commits[1].pull_request_count, 1);
    assert_eq!(repo.latest_release.as_ref().unwrap().published_date.to_string(), "2021-01-02");
    assert_eq!(repo.fork_list[0].as_str(), "x/r");
    assert_eq!(repo.contributors.len(), 2);

    assert_eq!(snap.external_pages[STORE].as_deref(), Some("Contains ads. In-app purchases."));
    assert!(snap.external_pages["https://stackoverflow.com/questions/11/x"].is_some());
    assert_eq!(snap.external_pages["https://stackoverflow.com/questions/12/gone"], None);
}

#[test]
fn fetched_snapshot_passes_the_load_schema() {
    let server = MockServer::start(full_repo());
    let snap = client(&server, 1000).fetch_repository("o", "r", Scope::Both).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    save_snapshot(&snap, &path).unwrap();
    assert_eq!(load_snapshot(&path).unwrap(), snap);
    let (store, pages) = build_store(&[snap]).unwrap();
    assert_eq!(store.repos().count(), 1);
    assert_eq!(pages.len(), 3);
}

#[test]
fn repo_level_scope_has_no_issue_facts() {
    let server = MockServer::start(full_repo());
    let snap = client(&server, 1000).fetch_repository("o", "r", Scope::RepoLevel).unwrap();
    assert!(snap.issues.is_none());
    assert!(!server.hits().iter().any(|h| h.contains("/issues")));
}

#[test]
fn issue_level_scope_skips_license_history() {
    let server = MockServer::start(full_repo());
    let snap = client(&server, 1000).fetch_repository("o", "r", Scope::IssueLevel).unwrap();
    assert_eq!(snap.issues.as_ref().unwrap().len(), 2);
    assert!(snap.repo.license_commits.is_empty());
    assert!(!server.hits().iter().any(|h| h.contains("/commits?path=")));
}

#[test]
fn error_statuses() {
    let server = MockServer::start(vec![
        ("/repos/o/auth", Reply::status(401)),
        ("/repos/o/limited", Reply::status(403).header("X-RateLimit-Remaining", "0")),
        ("/repos/o/big", Reply::json(r#"{"fork":false,"default_branch":"main"}"#)),
        ("/repos/o/big/git/trees/main?recursive=1", Reply::json(r#"{"truncated":true,"tree":[]}"#)),
    ]);
    let mut c = client(&server, 100);
    assert!(matches!(c.fetch_repository("o", "auth", Scope::RepoLevel), Err(IngestError::Auth(_))));
    assert!(matches!(
        c.fetch_repository("o", "limited", Scope::RepoLevel),
        Err(IngestError::RateLimited { used: 2 })
    ));
    assert!(matches!(c.fetch_repository("o", "missing", Scope::RepoLevel), Err(IngestError::NotFound(_))));
    assert!(matches!(c.fetch_repository("o", "big", Scope::RepoLevel), Err(IngestError::Partial { .. })));
}

#[test]
fn requests_are_paced() {
    let server = MockServer::start(full_repo());
    let budget = FetchBudget {
        max_requests: 1000,
        min_interval_ms: 15,
    };
    let mut c = GitHubClient::new(budget, None)
        .unwrap()
        .with_api_base(&server.base)
        .with_page_origin(&server.base)
        .unwrap();
    let start = Instant::now();
    c.fetch_repository("o", "r", Scope::Both).unwrap();
    let floor = 15 * (c.requests_used() as u128 - 1);
    assert!(start.elapsed().as_millis() >= floor);
}

#[test]
fn contributors_of_a_linked_repository() {
    let server = MockServer::start(vec![
        ("/repos/a/lib", Reply::json(r#"{"fork":false,"homepage":"https://example.com"}"#)),
        ("/repos/a/lib/contributors?per_page=100", Reply::json(r#"[{"login":"carol"}]"#)),
    ]);
    let snap = client(&server, 10).fetch_contributors("a", "lib").unwrap();
    assert_eq!(snap.repo.contributors.iter().next().unwrap().login(), "carol");
    snap.validate().unwrap();
}

#[test]
fn external_pages() {
    let server = MockServer::start(full_repo());
    let fetcher = PageFetcher::new().unwrap().with_origin(&server.base).unwrap();
    let mut tracker = BudgetTracker::new(FetchBudget::authenticated());
    let page = fetcher.fetch(&mut tracker, STORE).unwrap();
    assert!(page.unwrap().contains("In-app purchases"));
    assert_eq!(fetcher.fetch(&mut tracker, "https://stackoverflow.com/questions/404/none").unwrap(), None);
    assert!(matches!(
        fetcher.fetch(&mut tracker, "https://blog.example.com/post"),
        Err(IngestError::DisallowedHost(_))
    ));
    assert_eq!(tracker.used(), 2);
}

#[test]
fn non_utf8_content_is_stable_over_two_round_trips() {
    let mut repo = RepositoryFacts::new("o", "bin");
    let bytes: Vec<u8> = (0u8..=255).chain([0xc3, 0x28, 0xe2, 0x82]).collect();
    repo.files.push(FileContent::new("assets/raw.dat", Blob::new(bytes.clone())));
    repo.files.push(FileContent::new("main.c", "int x;\r\n"));
    repo.file_count = 2;
    let snap = Snapshot::new(repo, "2023-03-04T05:06:07Z".parse().unwrap());
    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.json"), dir.path().join("b.json"));
    save_snapshot(&snap, &p1).unwrap();
    let once = load_snapshot(&p1).unwrap();
    save_snapshot(&once, &p2).unwrap();
    let twice = load_snapshot(&p2).unwrap();
    assert_eq!(twice.repo.files[0].content.as_ref().unwrap().bytes(), &bytes[..]);
    assert_eq!(twice.repo.files[1].content.as_ref().unwrap().bytes(), b"int x;\r\n");
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    assert_eq!(twice, snap);
}

#[test]
fn loader_rejects_bad_documents() {
    let snap = Snapshot::new(RepositoryFacts::new("o", "r"), "2023-03-04T05:06:07Z".parse().unwrap());
    let mut v = serde_json::to_value(&snap).unwrap();
    v["formatVersion"] = 2.into();
    assert!(matches!(snapshot_from_str(&v.to_string(), "x"), Err(IngestError::VersionMismatch { .. })));

    let mut v = serde_json::to_value(&snap).unwrap();
    v["extra"] = true.into();
    assert!(matches!(snapshot_from_str(&v.to_string(), "x"), Err(IngestError::Schema { field, .. }) if field == "extra"));

    let mut v = serde_json::to_value(&snap).unwrap();
    v["repo"]["fileCount"] = "many".into();
    assert!(matches!(snapshot_from_str(&v.to_string(), "x"), Err(IngestError::Schema { field, .. }) if field == "repo.fileCount"));
}
