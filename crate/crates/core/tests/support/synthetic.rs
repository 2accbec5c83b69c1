//! A large synthetic capture for throughput checks.

use chrono::{DateTime, NaiveDate, Utc};
use ethoscan::fact_model::{Comment, CommitInfo, FileContent, IssueFacts, IssueKind, ReleaseInfo, RepositoryFacts, UserRef};
use ethoscan::ingestion::Snapshot;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const STORE: &str = "https://play.google.com/store/apps/details?id=com.synth.app";

fn captured() -> DateTime<Utc> {
    "2022-01-01T00:00:00Z".parse().unwrap()
}

/// About `lines` lines of plausible JavaScript.
fn js_source(rng: &mut StdRng, lines: usize) -> String {
    const NAMES: &[&str] = &["value", "items", "count", "node", "index", "result", "total", "next", "state", "buffer"];
    let mut out = String::new();
    let mut n = 0;
    while n < lines {
        let f = NAMES[rng.gen_range(0..NAMES.len())];
        let a = NAMES[rng.gen_range(0..NAMES.len())];
        let b = NAMES[rng.gen_range(0..NAMES.len())];
        out.push_str(&format!("export function {f}{n}({a}, {b}) {{\n"));
        out.push_str(&format!("  let {f} = {a} + {b} * {};\n", rng.gen_range(0..100)));
        out.push_str(&format!("  for (let i = 0; i < {a}.length; i++) {{ {f} += {b}[i]; }}\n"));
        out.push_str(&format!("  return {f};\n}}\n\n"));
        n += 6;
    }
    out
}

fn so_page(answer: u64, owner: &str, code: &str) -> String {
    let escaped = code.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    format!(
        r#"<html><body><div id="answer-{answer}" class="answer" data-answerid="{answer}">
<div class="s-prose js-post-body"><pre><code>{escaped}</code></pre></div>
<div class="post-signature"><div class="user-details"><a href="/users/1/x">{owner}</a></div></div>
</div></body></html>"#
    )
}

/// A repository with `files` source files; every fifth issue quotes a
/// Stack Overflow answer whose code was copied into one of the files.
pub fn snapshot(seed: u64, files: usize, issues: usize) -> Snapshot {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut r = RepositoryFacts::new("synth", "app");
    r.files.push(FileContent::new("README.md", format!("# app\n\nGet it on {STORE}\n")));
    r.readme_file = Some(FileContent::new("README.md", format!("# app\n\nGet it on {STORE}\n")));
    for i in 0..files {
        r.files.push(FileContent::new(format!("src/module{i:03}.js"), js_source(&mut rng, 120)));
    }
    r.file_count = r.files.len() as u64;
    r.contributors = ["alice", "bob"].iter().map(|l| UserRef::new(*l)).collect();
    r.latest_release = Some(ReleaseInfo {
        tag: "v2.0.0".into(),
        published_date: NaiveDate::from_ymd_opt(2021, 1, 1).unwrap(),
    });
    r.license_commits = vec![CommitInfo {
        sha: "a".repeat(40),
        timestamp: "2020-01-01T00:00:00Z".parse().unwrap(),
        code_change: Some("@@ -0,0 +1,1 @@\n+MIT License\n".into()),
        pull_request_count: 0,
    }];
    r.external_links.push(STORE.into());

    let mut snap_issues = Vec::new();
    let mut pages = Vec::new();
    for n in 1..=issues as u64 {
        let opener = format!("user{n}");
        let mut comments = vec![Comment::new(&opener, format!("Issue {n}: {}", js_source(&mut rng, 6)))];
        for c in 0..rng.gen_range(2..6) {
            comments.push(Comment::new("alice", format!("Reply {c} on #{n}, see https://github.com/synth/app/issues/{}", n + 1)));
        }
        if n % 5 == 0 {
            let answer = 9000 + n;
            let url = format!("https://stackoverflow.com/questions/{n}/q/{answer}");
            let target = rng.gen_range(1..=files);
            let code = r.files[target].text().unwrap().lines().take(12).collect::<Vec<_>>().join("\n");
            pages.push((url.clone(), so_page(answer, "someone", &code)));
            comments.push(Comment::new("mallory", format!("Fixed using {url}")));
        }
        if n % 7 == 0 {
            comments[0].text.push_str("\nTry https://github.com/vendor/lib instead.");
        }
        snap_issues.push(IssueFacts {
            repo: "synth/app".parse().unwrap(),
            number: n,
            kind: IssueKind::Issue,
            owner: UserRef::new(&opener),
            body_and_comments: comments,
            linked_commits: Vec::new(),
        });
    }
    let mut snap = Snapshot::new(r, captured())
        .with_issues(snap_issues)
        .with_page(STORE, Some("<html>Contains ads · In-app purchases</html>"));
    for (url, page) in pages {
        snap = snap.with_page(&url, Some(&page));
    }
    snap
}

/// An unrelated copy of `snap`'s repository under another owner.
pub fn copy_of(snap: &Snapshot, owner: &str) -> Snapshot {
    let mut r = snap.repo.clone();
    r.owner = owner.to_string();
    r.external_links.clear();
    r.files.retain(|f| f.path != "README.md");
    r.readme_file = None;
    r.file_count = r.files.len() as u64;
    Snapshot::new(r, captured())
}

/// Contributors of the repository linked from issues.
pub fn linked_repo() -> Snapshot {
    let mut r = RepositoryFacts::new("vendor", "lib");
    r.contributors = (1..=50).map(|n| UserRef::new(format!("user{n}"))).collect();
    Snapshot::new(r, captured())
}
