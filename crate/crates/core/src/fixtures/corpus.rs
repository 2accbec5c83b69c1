//! The synthetic fixture corpus, generated in code so the files on disk can
//! be checked for drift.

use std::path::Path;

use chrono::{DateTime, NaiveDate, Utc};

use crate::fact_model::{
    Comment, CommitInfo, FileContent, IssueFacts, IssueKind, ReleaseInfo, RepoId, RepositoryFacts, UserRef,
};
use crate::ingestion::{save_snapshot, IngestError, Snapshot};

use super::{FixtureCase, CASE_FILE};

pub const CLEAN_SNAPSHOT: &str = "clean.json";
pub const S5_MISSING_SNAPSHOT: &str = "s5_missing.json";

const EVAL_DATE: (i32, u32, u32) = (2022, 1, 1);

const MIT: &str = "MIT License

Copyright (c) 2020 The Authors

Permission is hereby granted, free of charge, to any person obtaining a copy
of this software and associated documentation files (the \"Software\"), to deal
in the Software without restriction, including without limitation the rights
to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
copies of the Software.

The above copyright notice and this permission notice shall be included in all
copies or substantial portions of the Software.

THE SOFTWARE IS PROVIDED \"AS IS\", WITHOUT WARRANTY OF ANY KIND.
";

const APACHE: &str = "                                 Apache License
                           Version 2.0, January 2004
                        http://www.apache.org/licenses/

   TERMS AND CONDITIONS FOR USE, REPRODUCTION, AND DISTRIBUTION
";

const GPL3: &str = "                    GNU GENERAL PUBLIC LICENSE
                       Version 3, 29 June 2007

 Copyright (C) 2007 Free Software Foundation, Inc.
";

const C_MAIN: &str = "#include <stdio.h>

int main(void) {
    printf(\"hello\\n\");
    return 0;
}
";

/// A case ready to be written: manifest, snapshots and README.
#[derive(Debug, Clone)]
pub struct GeneratedCase {
    pub dir: String,
    pub case: FixtureCase,
    pub snapshots: Vec<(String, Snapshot)>,
    pub readme: String,
}

fn captured() -> DateTime<Utc> {
    "2022-01-01T00:00:00Z".parse().expect("valid timestamp")
}

fn eval_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(EVAL_DATE.0, EVAL_DATE.1, EVAL_DATE.2).expect("valid date")
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}

fn ts(s: &str) -> DateTime<Utc> {
    s.parse().expect("valid timestamp")
}

fn repo(full: &str) -> RepositoryFacts {
    let (owner, name) = full.split_once('/').expect("owner/name");
    RepositoryFacts::new(owner, name)
}

fn id(full: &str) -> RepoId {
    full.parse().expect("valid repository id")
}

fn add(r: &mut RepositoryFacts, path: &str, text: &str) {
    r.files.push(FileContent::new(path, text));
    r.file_count = r.files.len() as u64;
    let root = !path.contains('/');
    let lower = path.to_ascii_lowercase();
    if root && lower.starts_with("readme") {
        r.readme_file = Some(FileContent::new(path, text));
    }
    if root && lower.starts_with("changelog") {
        r.changelog_file = Some(FileContent::new(path, text));
    }
}

fn contributors(r: &mut RepositoryFacts, logins: &[&str]) {
    r.contributors = logins.iter().map(|l| UserRef::new(*l)).collect();
}

fn added(text: &str) -> String {
    let lines: Vec<&str> = text.lines().collect();
    let mut out = format!("@@ -0,0 +1,{} @@\n", lines.len());
    for l in lines {
        out.push('+');
        out.push_str(l);
        out.push('\n');
    }
    out
}

fn replaced(old: &str, new: &str) -> String {
    let (a, b): (Vec<&str>, Vec<&str>) = (old.lines().collect(), new.lines().collect());
    let mut out = format!("@@ -1,{} +1,{} @@\n", a.len(), b.len());
    for l in a {
        out.push('-');
        out.push_str(l);
        out.push('\n');
    }
    for l in b {
        out.push('+');
        out.push_str(l);
        out.push('\n');
    }
    out
}

fn commit(sha: &str, when: &str, patch: String, prs: u32) -> CommitInfo {
    CommitInfo {
        sha: sha.to_string(),
        timestamp: ts(when),
        code_change: Some(patch),
        pull_request_count: prs,
    }
}

fn issue(repo: &str, number: u64, opener: &str, texts: &[(&str, &str)]) -> IssueFacts {
    IssueFacts {
        repo: id(repo),
        number,
        kind: IssueKind::Issue,
        owner: UserRef::new(opener),
        body_and_comments: texts.iter().map(|(who, t)| Comment::new(who, *t)).collect(),
        linked_commits: Vec::new(),
    }
}

fn file_name(r: &RepositoryFacts) -> String {
    format!("{}__{}.json", r.owner, r.name)
}

struct Draft {
    dir: String,
    description: String,
    expected: Vec<(&'static str, usize)>,
    diagnostics: Vec<(&'static str, usize)>,
    fp_class: Option<String>,
    falsified: Option<String>,
    snapshots: Vec<Snapshot>,
    pair: Option<String>,
    full_links_only: bool,
    excluded_segments: Option<Vec<String>>,
}

impl Draft {
    fn new(dir: &str, description: &str, snapshots: Vec<Snapshot>) -> Self {
        Draft {
            dir: dir.to_string(),
            description: description.to_string(),
            expected: Vec::new(),
            diagnostics: Vec::new(),
            fp_class: None,
            falsified: None,
            snapshots,
            pair: None,
            full_links_only: false,
            excluded_segments: None,
        }
    }

    fn expect(mut self, code: &'static str, n: usize) -> Self {
        self.expected.push((code, n));
        self
    }

    fn diag(mut self, code: &'static str, n: usize) -> Self {
        self.diagnostics.push((code, n));
        self
    }

    fn fp(mut self, class: &str) -> Self {
        self.fp_class = Some(class.to_string());
        self
    }

    fn falsifies(mut self, condition: &str) -> Self {
        self.falsified = Some(condition.to_string());
        self
    }

    fn pair(mut self, full: &str) -> Self {
        self.pair = Some(full.to_string());
        self
    }

    fn full_links_only(mut self) -> Self {
        self.full_links_only = true;
        self
    }

    fn finish(self) -> GeneratedCase {
        let snapshots: Vec<(String, Snapshot)> = self.snapshots.into_iter().map(|s| (file_name(&s.repo), s)).collect();
        let case = FixtureCase {
            name: self.dir.clone(),
            description: self.description,
            snapshot_paths: snapshots.iter().map(|(f, _)| f.clone()).collect(),
            expected: self.expected.iter().map(|(c, n)| (c.to_string(), *n)).collect(),
            expected_diagnostics: self.diagnostics.iter().map(|(c, n)| (c.to_string(), *n)).collect(),
            fp_class: self.fp_class,
            falsified: self.falsified,
            evaluation_date: eval_date(),
            pair: self.pair,
            issue: None,
            full_links_only: self.full_links_only,
            excluded_segments: self.excluded_segments,
        };
        let readme = readme(&case);
        GeneratedCase {
            dir: self.dir,
            case,
            snapshots,
            readme,
        }
    }
}

fn readme(case: &FixtureCase) -> String {
    let mut out = format!("# {}\n\n{}\n\n", case.name, case.description);
    let counts: Vec<String> = case.expected.iter().map(|(c, n)| format!("{c}={n}")).collect();
    out.push_str(&format!("Expected violations: {}\n", counts.join(", ")));
    if !case.expected_diagnostics.is_empty() {
        let d: Vec<String> = case.expected_diagnostics.iter().map(|(c, n)| format!("{c}={n}")).collect();
        out.push_str(&format!("Expected cannot-evaluate diagnostics: {}\n", d.join(", ")));
    }
    match &case.falsified {
        Some(c) => out.push_str(&format!("Falsified condition: {c}\n")),
        None if case.fp_class.is_none() => out.push_str("All detector conditions hold.\n"),
        None => {}
    }
    if let Some(fp) = &case.fp_class {
        out.push_str(&format!("Known false positive: {fp}. The tool reports it by design.\n"));
    }
    out.push_str(&format!("Evaluation date: {}\n", case.evaluation_date));
    out
}

// ---------------------------------------------------------------- S1

const SO_FULL: &str = "https://stackoverflow.com/questions/4000/how-to-debounce-a-function/4001";
const SO_SHORT: &str = "https://stackoverflow.com/a/4001";

const SNIPPET: &str = "function debounce(fn, wait) {
  let timer = null;
  return function (...args) {
    clearTimeout(timer);
    timer = setTimeout(() => fn.apply(this, args), wait);
  };
}";

fn so_page(owner: &str, code: &str) -> String {
    let escaped = code.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    format!(
        r#"<html><body>
<div class="question"><pre><code>window.onresize = handler;</code></pre>
<div class="post-signature owner"><div class="user-details"><a href="/users/10/asker">asker</a></div></div></div>
<div id="answer-4001" class="answer" data-answerid="4001">
<div class="s-prose js-post-body"><p>Wrap the handler:</p><pre class="lang-js"><code>{escaped}</code></pre></div>
<div class="post-signature owner"><div class="user-details"><a href="/users/11/x">{owner}</a></div></div>
</div>
</body></html>"#
    )
}

fn s1_repo(file_text: &str) -> RepositoryFacts {
    let mut r = repo("acme/dashboard");
    add(&mut r, "LICENSE", MIT);
    add(&mut r, "README.md", "# dashboard\n\nCharts for the browser.\n");
    add(&mut r, "src/util.js", file_text);
    add(&mut r, "src/chart.js", "export function draw(ctx, points) {\n  points.forEach(p => ctx.lineTo(p.x, p.y));\n}\n");
    contributors(&mut r, &["mallory", "alice"]);
    r
}

fn copied_file(extra: &str) -> String {
    format!("// helpers\n{extra}{SNIPPET}\n\nexport default debounce;\n")
}

fn s1_snapshot(r: RepositoryFacts, poster: &str, comment: &str, page: Option<String>) -> Snapshot {
    let i = issue(
        "acme/dashboard",
        12,
        "reporter",
        &[("reporter", "Resize events fire too often."), (poster, comment)],
    );
    let mut snap = Snapshot::new(r, captured()).with_issues(vec![i]);
    for link in [SO_FULL, SO_SHORT] {
        if comment.contains(link) {
            snap.external_pages.insert(link.to_string(), page.clone());
        }
    }
    snap
}

fn s1_cases() -> Vec<GeneratedCase> {
    let page = Some(so_page("Jane Doe", SNIPPET));
    let comment = format!("I used the answer at {SO_FULL} for this.");
    let unrelated = "export function clamp(v, lo, hi) {\n  return Math.min(hi, Math.max(lo, v));\n}\n";
    let boilerplate = "public static void main(String[] args) {\n    Scanner in = new Scanner(System.in);\n    int n = in.nextInt();\n    System.out.println(n);\n}";
    let mut boiler_repo = repo("acme/exercises");
    add(&mut boiler_repo, "README.md", "# exercises\n");
    add(
        &mut boiler_repo,
        "Main.java",
        "import java.util.Scanner;\n\npublic class Main {\n    public static void main(String[] args) {\n        Scanner in = new Scanner(System.in);\n        int n = in.nextInt();\n        long total = 0;\n        for (int i = 1; i <= n; i++) total += i;\n        System.out.println(total);\n    }\n}\n",
    );
    let boiler_issue = issue(
        "acme/exercises",
        3,
        "student",
        &[("student", "Reading input fails."), ("helper", &format!("Input reading is covered in {SO_FULL}"))],
    );
    let boiler = Snapshot::new(boiler_repo, captured())
        .with_issues(vec![boiler_issue])
        .with_page(SO_FULL, Some(&so_page("Jane Doe", boilerplate)));

    vec![
        Draft::new(
            "s1_tp_copied_without_attribution",
            "A commenter links a Stack Overflow answer written by someone else; the answer's code is in src/util.js, which does not cite the answer.",
            vec![s1_snapshot(s1_repo(&copied_file("")), "mallory", &comment, page.clone())],
        )
        .expect("s1", 1)
        .finish(),
        Draft::new(
            "s1_no_link",
            "The answer's code is in src/util.js but no Stack Overflow link appears in the discussion.",
            vec![s1_snapshot(s1_repo(&copied_file("")), "mallory", "I wrote a debounce helper.", None)],
        )
        .expect("s1", 0)
        .falsifies("a Stack Overflow link is posted in the issue")
        .finish(),
        Draft::new(
            "s1_poster_is_answer_author",
            "The link is posted by the author of the answer, so there is no one to attribute.",
            vec![s1_snapshot(s1_repo(&copied_file("")), "jdoe", &comment, Some(so_page("jdoe", SNIPPET)))],
        )
        .expect("s1", 0)
        .falsifies("the answer was posted by someone other than the link poster")
        .finish(),
        Draft::new(
            "s1_code_not_copied",
            "The linked answer's code does not occur in any repository file.",
            vec![s1_snapshot(s1_repo(unrelated), "mallory", &comment, page.clone())],
        )
        .expect("s1", 0)
        .falsifies("the answer's code is contained in a repository file at or above the threshold")
        .finish(),
        Draft::new(
            "s1_link_cited_in_file",
            "src/util.js contains the answer's code and cites the answer link in a comment.",
            vec![s1_snapshot(
                s1_repo(&copied_file(&format!("// adapted from {SO_FULL}\n"))),
                "mallory",
                &comment,
                page.clone(),
            )],
        )
        .expect("s1", 0)
        .falsifies("the file containing the code does not contain the link")
        .finish(),
        Draft::new(
            "s1_fp_boilerplate_code",
            "The linked answer is generic input-reading boilerplate that also appears, independently written, in Main.java.",
            vec![boiler],
        )
        .expect("s1", 1)
        .fp("common boilerplate code shared with the answer")
        .finish(),
        Draft::new(
            "s1_fp_file_cites_short_link",
            "The discussion uses the full answer link while src/util.js cites the same answer through its short link.",
            vec![s1_snapshot(
                s1_repo(&copied_file(&format!("// from {SO_SHORT}\n"))),
                "mallory",
                &comment,
                page.clone(),
            )],
        )
        .expect("s1", 1)
        .fp("citation written with the short link")
        .finish(),
        Draft::new(
            "s1_fp_author_under_other_name",
            "The answer author posts the link from a GitHub account whose login differs from the Stack Overflow display name.",
            vec![s1_snapshot(s1_repo(&copied_file("")), "janedoe", &comment, page.clone())],
        )
        .expect("s1", 1)
        .fp("answer author uses a different name on GitHub")
        .finish(),
        Draft::new(
            "s1_short_link_full_links_only",
            "The discussion cites the answer through its short link; with only full question links recognised the link is missed.",
            vec![s1_snapshot(
                s1_repo(&copied_file("")),
                "mallory",
                &format!("See {SO_SHORT}"),
                page.clone(),
            )],
        )
        .expect("s1", 0)
        .full_links_only()
        .finish(),
        Draft::new(
            "s1_short_link_default",
            "The discussion cites the answer through its short link, which the default link pattern recognises.",
            vec![s1_snapshot(s1_repo(&copied_file("")), "mallory", &format!("See {SO_SHORT}"), page)],
        )
        .expect("s1", 1)
        .finish(),
        Draft::new(
            "s1_page_unavailable",
            "The linked answer page could not be retrieved, so the issue cannot be evaluated.",
            vec![s1_snapshot(s1_repo(&copied_file("")), "mallory", &comment, None)],
        )
        .expect("s1", 0)
        .diag("s1", 1)
        .finish(),
    ]
}

// ---------------------------------------------------------------- S2

fn s2_original() -> RepositoryFacts {
    let mut r = repo("alice/widget");
    add(&mut r, "LICENSE", MIT);
    add(&mut r, "README.md", "# widget\n\nA small widget toolkit.\n");
    add(&mut r, "src/widget.c", "#include \"widget.h\"\n\nint widget_area(struct widget *w) {\n    return w->width * w->height;\n}\n");
    add(&mut r, "src/widget.h", "struct widget { int width; int height; };\nint widget_area(struct widget *w);\n");
    add(&mut r, "src/main.c", C_MAIN);
    contributors(&mut r, &["alice"]);
    r
}

fn s2_copy(edit: impl Fn(&mut RepositoryFacts)) -> RepositoryFacts {
    let mut r = s2_original();
    r.owner = "bob".into();
    r.name = "widget-copy".into();
    r.readme_file = None;
    r.files.retain(|f| f.path != "README.md");
    add(&mut r, "README.md", "# widget-copy\n\nMy widget toolkit.\n");
    contributors(&mut r, &["bob"]);
    edit(&mut r);
    r.file_count = r.files.len() as u64;
    r
}

fn s2_case(dir: &str, description: &str, a: RepositoryFacts, b: RepositoryFacts) -> Draft {
    Draft::new(dir, description, vec![Snapshot::new(a, captured()), Snapshot::new(b, captured())]).pair("bob/widget-copy")
}

fn s2_cases() -> Vec<GeneratedCase> {
    vec![
        s2_case(
            "s2_tp_soft_fork",
            "bob/widget-copy has exactly the source files of alice/widget and is not registered as its fork.",
            s2_original(),
            s2_copy(|_| {}),
        )
        .expect("s2", 1)
        .finish(),
        s2_case(
            "s2_sources_differ",
            "bob/widget-copy changed one source file.",
            s2_original(),
            s2_copy(|r| {
                r.files.retain(|f| f.path != "src/main.c");
                r.files.push(FileContent::new("src/main.c", C_MAIN.replace("hello", "hi")));
            }),
        )
        .expect("s2", 0)
        .falsifies("the two repositories have identical source files")
        .finish(),
        s2_case(
            "s2_registered_fork_parent",
            "bob/widget-copy is identical and names alice/widget as its parent.",
            s2_original(),
            s2_copy(|r| {
                r.is_fork = true;
                r.parent_full_name = Some(id("alice/widget"));
            }),
        )
        .expect("s2", 0)
        .falsifies("neither repository is an official fork of the other")
        .finish(),
        s2_case(
            "s2_registered_fork_list",
            "bob/widget-copy is identical and appears in the fork list of alice/widget.",
            {
                let mut r = s2_original();
                r.fork_list.push(id("bob/widget-copy"));
                r
            },
            s2_copy(|_| {}),
        )
        .expect("s2", 0)
        .falsifies("neither repository is an official fork of the other")
        .finish(),
        s2_case(
            "s2_tn_renamed_file",
            "bob/widget-copy has the same code but moved src/main.c to src/app.c.",
            s2_original(),
            s2_copy(|r| {
                for f in &mut r.files {
                    if f.path == "src/main.c" {
                        f.path = "src/app.c".into();
                    }
                }
            }),
        )
        .expect("s2", 0)
        .finish(),
        s2_case(
            "s2_tn_extra_source_file",
            "bob/widget-copy adds one source file to otherwise identical code.",
            s2_original(),
            s2_copy(|r| r.files.push(FileContent::new("src/extra.c", "int extra(void) { return 1; }\n"))),
        )
        .expect("s2", 0)
        .finish(),
    ]
}

// ---------------------------------------------------------------- S5

fn s5_snapshot(full: &str, files: &[(&str, &str)]) -> Snapshot {
    let mut r = repo(full);
    for (p, t) in files {
        add(&mut r, p, t);
    }
    contributors(&mut r, &["owner"]);
    Snapshot::new(r, captured())
}

fn s5_cases() -> Vec<GeneratedCase> {
    let src = ("src/main.c", C_MAIN);
    vec![
        Draft::new(
            "s5_tp_no_license",
            "A repository with source code and a README that names no license, and no license file.",
            vec![s5_snapshot("octo/tool", &[("README.md", "# tool\n\nA command line tool.\n"), src])],
        )
        .expect("s5", 1)
        .finish(),
        Draft::new(
            "s5_tp_no_readme",
            "A repository with source code only: no license file and no README.",
            vec![s5_snapshot("octo/bare", &[src, ("Makefile", "all:\n\tcc src/main.c\n")])],
        )
        .expect("s5", 1)
        .finish(),
        Draft::new(
            "s5_license_file",
            "A root LICENSE file with the MIT license text.",
            vec![s5_snapshot("octo/licensed", &[("LICENSE", MIT), ("README.md", "# licensed\n"), src])],
        )
        .expect("s5", 0)
        .falsifies("no license file in the repository root")
        .finish(),
        Draft::new(
            "s5_readme_declares_license",
            "No license file, but the README declares the Apache License 2.0.",
            vec![s5_snapshot(
                "octo/declared",
                &[("README.md", "# declared\n\n## License\n\nLicensed under the Apache License 2.0.\n"), src],
            )],
        )
        .expect("s5", 0)
        .falsifies("the README names no license")
        .finish(),
        Draft::new(
            "s5_tn_copying_file",
            "A root COPYING file with the GPL-3.0 text.",
            vec![s5_snapshot("octo/gnu-tool", &[("COPYING", GPL3), src])],
        )
        .expect("s5", 0)
        .finish(),
        Draft::new(
            "s5_fp_license_in_subfolder",
            "The only license file is lib/LICENSE, below the repository root.",
            vec![s5_snapshot("octo/nested", &[("README.md", "# nested\n"), ("lib/LICENSE", MIT), src])],
        )
        .expect("s5", 1)
        .fp("license file placed in an inner folder")
        .finish(),
        Draft::new(
            "s5_fp_disclaimer_readme",
            "The README carries a disclaimer that the code is shared for reference only, instead of a license.",
            vec![s5_snapshot(
                "octo/reference",
                &[
                    ("README.md", "# reference\n\nDisclaimer: this code is shared for reference only and comes with no warranty. Do not use it in production.\n"),
                    src,
                ],
            )],
        )
        .expect("s5", 1)
        .fp("README disclaimer used in place of a license")
        .finish(),
        Draft::new(
            "s5_fp_education_repository",
            "Course homework solutions published for grading.",
            vec![s5_snapshot(
                "octo/cs101-homework",
                &[("README.md", "# CS101 homework\n\nSolutions for week 1 to 4, submitted for grading.\n"), ("week1/sum.py", "print(sum(range(10)))\n")],
            )],
        )
        .expect("s5", 1)
        .fp("educational repository")
        .finish(),
        Draft::new(
            "s5_fp_no_source_code",
            "The repository holds only a data set and notes, no source code.",
            vec![s5_snapshot(
                "octo/datasets",
                &[("README.md", "# datasets\n\nMeasurements from 2020.\n"), ("data/measurements.csv", "day,value\n1,3.5\n2,4.0\n")],
            )],
        )
        .expect("s5", 1)
        .fp("repository without source code")
        .finish(),
        Draft::new(
            "s5_fp_organization_license",
            "The owning organization states its license at the organization level, which a single-repository snapshot does not include.",
            vec![s5_snapshot(
                "bigorg/service",
                &[("README.md", "# service\n\nPart of the bigorg platform.\n"), src],
            )],
        )
        .expect("s5", 1)
        .fp("license declared at the organization level")
        .finish(),
    ]
}

// ---------------------------------------------------------------- S6

fn s6_snapshot(full: &str, commits: Vec<CommitInfo>, current: &str, changelog: Option<&str>) -> Snapshot {
    let mut r = repo(full);
    add(&mut r, "LICENSE", current);
    add(&mut r, "README.md", "# lib\n");
    add(&mut r, "src/lib.rs", "pub fn add(a: i32, b: i32) -> i32 {\n    a + b\n}\n");
    if let Some(text) = changelog {
        add(&mut r, "CHANGELOG.md", text);
    }
    r.license_file = r.file("LICENSE").cloned();
    r.license_commits = commits;
    contributors(&mut r, &["owner"]);
    Snapshot::new(r, captured())
}

fn s6_cases() -> Vec<GeneratedCase> {
    let first = || commit("a1a1a1a", "2020-03-01T10:00:00Z", added(MIT), 0);
    let change = |prs| commit("b2b2b2b", "2021-05-01T10:00:00Z", replaced(MIT, APACHE), prs);
    let changelog = "# Changelog\n\n## 2.0.0\n\n- Relicensed under the Apache License 2.0.\n";
    vec![
        Draft::new(
            "s6_tp_silent_change",
            "The license file changes from MIT to Apache-2.0 in a direct commit and the changelog is silent about it.",
            vec![s6_snapshot("octo/lib", vec![first(), change(0)], APACHE, Some("# Changelog\n\n## 2.0.0\n\n- Faster parsing.\n"))],
        )
        .expect("s6", 1)
        .finish(),
        Draft::new(
            "s6_no_license_change",
            "A later commit edits the copyright line of the MIT license; the license stays MIT.",
            vec![s6_snapshot(
                "octo/lib",
                vec![
                    first(),
                    commit(
                        "c3c3c3c",
                        "2021-05-01T10:00:00Z",
                        "@@ -3 +3 @@\n-Copyright (c) 2020 The Authors\n+Copyright (c) 2021 The Authors\n".into(),
                        0,
                    ),
                ],
                MIT,
                None,
            )],
        )
        .expect("s6", 0)
        .falsifies("the license changes")
        .finish(),
        Draft::new(
            "s6_announced_in_changelog",
            "The MIT to Apache-2.0 change is announced in CHANGELOG.md.",
            vec![s6_snapshot("octo/lib", vec![first(), change(0)], APACHE, Some(changelog))],
        )
        .expect("s6", 0)
        .falsifies("the change is not announced in the changelog")
        .finish(),
        Draft::new(
            "s6_via_pull_request",
            "The MIT to Apache-2.0 change is merged through a pull request.",
            vec![s6_snapshot("octo/lib", vec![first(), change(1)], APACHE, None)],
        )
        .expect("s6", 0)
        .falsifies("the change is not made through a pull request")
        .finish(),
        Draft::new(
            "s6_fp_license_restored",
            "The license is changed from MIT to GPL-3.0 by mistake and restored to MIT shortly after; both direct commits are reported, the second flagged as a restore.",
            vec![s6_snapshot(
                "octo/lib",
                vec![
                    first(),
                    commit("d4d4d4d", "2021-05-01T10:00:00Z", replaced(MIT, GPL3), 0),
                    commit("e5e5e5e", "2021-05-02T09:00:00Z", replaced(GPL3, MIT), 0),
                ],
                MIT,
                None,
            )],
        )
        .expect("s6", 2)
        .fp("license changed back to the previous license")
        .finish(),
    ]
}

// ---------------------------------------------------------------- S8

const FASTLIB: &str = "https://github.com/eve/fastlib";

fn s8_snapshots(r1_contributors: &[&str], r2_contributors: Option<&[&str]>, texts: &[(&str, &str)]) -> Vec<Snapshot> {
    let mut r1 = repo("acme/app");
    add(&mut r1, "LICENSE", MIT);
    add(&mut r1, "README.md", "# app\n");
    contributors(&mut r1, r1_contributors);
    let mut out = vec![Snapshot::new(r1, captured()).with_issues(vec![issue("acme/app", 7, "eve", texts)])];
    if let Some(c) = r2_contributors {
        let mut r2 = repo("eve/fastlib");
        add(&mut r2, "LICENSE", MIT);
        contributors(&mut r2, c);
        out.push(Snapshot::new(r2, captured()));
    }
    out
}

fn s8_cases() -> Vec<GeneratedCase> {
    let promo = format!("Parsing is slow. Try {FASTLIB} instead, it is much faster.");
    let mut cases = vec![
        Draft::new(
            "s8_tp_self_promotion",
            "The opener of acme/app#7 links eve/fastlib, a repository they contribute to, without contributing to acme/app.",
            s8_snapshots(&["alice"], Some(&["eve"]), &[("eve", &promo)]),
        )
        .expect("s8", 1)
        .finish(),
        Draft::new(
            "s8_no_repository_link",
            "The opener describes a problem without linking any repository.",
            s8_snapshots(&["alice"], Some(&["eve"]), &[("eve", "Parsing is slow on large files.")]),
        )
        .expect("s8", 0)
        .falsifies("the opener links another repository")
        .finish(),
        Draft::new(
            "s8_opener_contributes_here",
            "The opener is also a contributor of acme/app.",
            s8_snapshots(&["alice", "eve"], Some(&["eve"]), &[("eve", &promo)]),
        )
        .expect("s8", 0)
        .falsifies("the opener is not a contributor of the issue's repository")
        .finish(),
        Draft::new(
            "s8_opener_not_contributor_of_link",
            "The opener links eve/fastlib but is not among its contributors.",
            s8_snapshots(&["alice"], Some(&["zed"]), &[("eve", &promo)]),
        )
        .expect("s8", 0)
        .falsifies("the opener is a contributor of the linked repository")
        .finish(),
        Draft::new(
            "s8_links_own_repository",
            "The opener links acme/app itself (with different letter case). A repository cannot be promoted in its own issue tracker; because the opener is not a contributor of acme/app, the contributor conditions cannot both hold either.",
            s8_snapshots(&["alice"], Some(&["eve"]), &[("eve", "Same as https://github.com/ACME/App described in the docs.")]),
        )
        .expect("s8", 0)
        .falsifies("the linked repository is not the issue's repository")
        .finish(),
        Draft::new(
            "s8_link_posted_by_other_user",
            "The link to eve/fastlib is posted by another participant, not the opener.",
            s8_snapshots(&["alice"], Some(&["eve"]), &[("eve", "Parsing is slow."), ("alice", &promo)]),
        )
        .expect("s8", 0)
        .falsifies("the link is written by the opener")
        .finish(),
        Draft::new(
            "s8_fp_disclosed_affiliation",
            "The opener states in plain words that they maintain the linked library.",
            s8_snapshots(
                &["alice"],
                Some(&["eve"]),
                &[("eve", &format!("Disclosure: I maintain {FASTLIB}. It may help with the slow parsing here."))],
            ),
        )
        .expect("s8", 1)
        .fp("affiliation disclosed in natural language")
        .finish(),
        Draft::new(
            "s8_fp_asking_for_suggestions",
            "The opener asks the maintainers whether their own library would fit, seeking suggestions rather than promoting it.",
            s8_snapshots(
                &["alice"],
                Some(&["eve"]),
                &[("eve", &format!("Would {FASTLIB} be a reasonable fit here? Looking for suggestions before I open a PR."))],
            ),
        )
        .expect("s8", 1)
        .fp("opener asking for suggestions")
        .finish(),
        Draft::new(
            "s8_linked_repository_unresolved",
            "The linked repository is not part of the input, so its contributors are unknown.",
            s8_snapshots(&["alice"], None, &[("eve", &promo)]),
        )
        .expect("s8", 0)
        .diag("s8", 1)
        .finish(),
    ];
    for seg in crate::detectors::DEFAULT_EXCLUDED_SEGMENTS {
        let name = seg.trim_matches('/');
        let url = format!("{FASTLIB}{seg}42");
        cases.push(
            Draft::new(
                &format!("s8_excluded_{name}"),
                &format!("The opener links {url}; links containing `{seg}` show related work rather than promote it."),
                s8_snapshots(&["alice"], Some(&["eve"]), &[("eve", &format!("Same bug as {url}"))]),
            )
            .expect("s8", 0)
            .falsifies("the link path contains no excluded segment")
            .finish(),
        );
    }
    cases
}

// ---------------------------------------------------------------- S9

const STORE: &str = "https://play.google.com/store/apps/details?id=com.droid.notes";

fn s9_snapshot(
    full: &str,
    release: Option<NaiveDate>,
    fork: bool,
    link: bool,
    page: Option<&str>,
    readme: &str,
) -> Snapshot {
    let mut r = repo(full);
    add(&mut r, "LICENSE", GPL3);
    add(&mut r, "README.md", readme);
    add(&mut r, "app/src/main/java/Main.java", "public class Main {}\n");
    contributors(&mut r, &["droid"]);
    r.latest_release = release.map(|d| ReleaseInfo {
        tag: "v1.4.0".into(),
        published_date: d,
    });
    if fork {
        r.is_fork = true;
        r.parent_full_name = Some(id("upstream/notes"));
    }
    if link {
        r.external_links.push(STORE.into());
    }
    let mut snap = Snapshot::new(r, captured());
    if link || readme.contains(STORE) {
        snap.external_pages.insert(STORE.into(), page.map(str::to_string));
    }
    snap
}

fn s9_cases() -> Vec<GeneratedCase> {
    let old = Some(date(2021, 1, 1));
    let paid = Some("<html><body><h1>Notes</h1><div>Contains ads</div><div>In-app purchases</div></body></html>");
    let readme = "# notes\n\nA note taking app for Android.\n";
    vec![
        Draft::new(
            "s9_tp_stale_paid_app",
            "An original Android app whose latest release is a year old while its store listing offers in-app purchases.",
            vec![s9_snapshot("droid/notes", old, false, true, paid, readme)],
        )
        .expect("s9", 1)
        .finish(),
        Draft::new(
            "s9_recent_release",
            "The latest release is one month old.",
            vec![s9_snapshot("droid/notes", Some(date(2021, 12, 1)), false, true, paid, readme)],
        )
        .expect("s9", 0)
        .falsifies("the latest release is older than the staleness bound")
        .finish(),
        Draft::new(
            "s9_is_fork",
            "The repository is a fork of upstream/notes.",
            vec![s9_snapshot("droid/notes", old, true, true, paid, readme)],
        )
        .expect("s9", 0)
        .falsifies("the repository is not a fork")
        .finish(),
        Draft::new(
            "s9_no_store_link",
            "No store listing is linked from the repository.",
            vec![s9_snapshot("droid/notes", old, false, false, None, readme)],
        )
        .expect("s9", 0)
        .falsifies("the repository links a store listing")
        .finish(),
        Draft::new(
            "s9_free_listing",
            "The store listing offers no paid features.",
            vec![s9_snapshot(
                "droid/notes",
                old,
                false,
                true,
                Some("<html><body><h1>Notes</h1><div>Free</div></body></html>"),
                readme,
            )],
        )
        .expect("s9", 0)
        .falsifies("the store listing mentions in-app purchases")
        .finish(),
        Draft::new(
            "s9_no_release",
            "The repository has never published a release.",
            vec![s9_snapshot("droid/notes", None, false, true, paid, readme)],
        )
        .expect("s9", 0)
        .finish(),
        Draft::new(
            "s9_store_page_unavailable",
            "The store listing could not be retrieved, so the repository cannot be evaluated.",
            vec![s9_snapshot("droid/notes", old, false, true, None, readme)],
        )
        .expect("s9", 0)
        .diag("s9", 1)
        .finish(),
        Draft::new(
            "s9_fp_library_repository",
            "An Android library whose README links a demo app with in-app purchases; the library itself is not the paid app.",
            vec![s9_snapshot(
                "droid/charts-lib",
                old,
                false,
                false,
                paid,
                &format!("# charts-lib\n\nAn Android charting library. See it in the demo app: {STORE}\n"),
            )],
        )
        .expect("s9", 1)
        .fp("library repository rather than an app")
        .finish(),
    ]
}

/// Every fixture case, in directory order.
pub fn build_corpus() -> Vec<GeneratedCase> {
    let mut all = Vec::new();
    all.extend(s1_cases());
    all.extend(s2_cases());
    all.extend(s5_cases());
    all.extend(s6_cases());
    all.extend(s8_cases());
    all.extend(s9_cases());
    all.sort_by(|a, b| a.dir.cmp(&b.dir));
    all
}

/// A repository on which no detector fires on the default evaluation date.
pub fn clean_snapshot() -> Snapshot {
    let mut r = repo("octo/clean");
    add(&mut r, "LICENSE", MIT);
    add(&mut r, "README.md", "# clean\n\nReleased under the MIT License.\n");
    add(&mut r, "src/main.c", C_MAIN);
    r.license_file = r.file("LICENSE").cloned();
    r.license_commits = vec![commit("f6f6f6f", "2020-02-01T08:00:00Z", added(MIT), 0)];
    r.latest_release = Some(ReleaseInfo {
        tag: "v2.1.0".into(),
        published_date: date(2021, 12, 1),
    });
    contributors(&mut r, &["octocat"]);
    let issues = vec![issue("octo/clean", 1, "octocat", &[("octocat", "Add a --quiet flag.")])];
    Snapshot::new(r, captured()).with_issues(issues)
}

pub fn s5_missing_snapshot() -> Snapshot {
    s5_snapshot("octo/nolicense", &[("README.md", "# nolicense\n"), ("src/main.c", C_MAIN)])
}

/// Writes the corpus under `root`, replacing existing files.
pub fn write_corpus(root: &Path) -> Result<(), IngestError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| IngestError::Io { path, source }
    };
    std::fs::create_dir_all(root).map_err(io(root))?;
    for g in build_corpus() {
        let dir = root.join(&g.dir);
        std::fs::create_dir_all(&dir).map_err(io(&dir))?;
        for (file, snap) in &g.snapshots {
            save_snapshot(snap, &dir.join(file))?;
        }
        let manifest = dir.join(CASE_FILE);
        let mut text = serde_json::to_string_pretty(&g.case).expect("case is serializable");
        text.push('\n');
        std::fs::write(&manifest, text).map_err(io(&manifest))?;
        let readme = dir.join("README.md");
        std::fs::write(&readme, &g.readme).map_err(io(&readme))?;
    }
    save_snapshot(&clean_snapshot(), &root.join(CLEAN_SNAPSHOT))?;
    save_snapshot(&s5_missing_snapshot(), &root.join(S5_MISSING_SNAPSHOT))?;
    Ok(())
}
