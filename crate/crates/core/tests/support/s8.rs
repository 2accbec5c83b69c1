//! Issue stores for the self-promotion detector with a generated link.

use ethoscan::detectors::{run_detectors, Detection, DetectorConfig, PageCache, RulePacks, Targets};
use ethoscan::fact_model::{BehaviorType, Comment, FactStore, IssueFacts, IssueKind, RepoId, RepositoryFacts, UserRef};
use ethoscan::license::LicenseCatalog;
use rand::Rng;

pub const LINKED: &str = "https://github.com/eve/fastlib";

/// acme/app#7 opened by eve, who contributes to eve/fastlib only, with
/// `body` as the opening text.
pub fn store(body: &str) -> FactStore {
    let mut app = RepositoryFacts::new("acme", "app");
    app.contributors.insert(UserRef::new("alice"));
    let mut lib = RepositoryFacts::new("eve", "fastlib");
    lib.contributors.insert(UserRef::new("eve"));
    let id: RepoId = "acme/app".parse().unwrap();
    let issue = IssueFacts {
        repo: id.clone(),
        number: 7,
        kind: IssueKind::Issue,
        owner: UserRef::new("eve"),
        body_and_comments: vec![Comment::new("eve", body)],
        linked_commits: Vec::new(),
    };
    FactStore::builder().repo(app).repo(lib).issues(id, vec![issue]).build().unwrap()
}

pub fn violations(body: &str, config: &DetectorConfig) -> usize {
    let store = store(body);
    let pages = PageCache::new();
    let catalog = LicenseCatalog::bundled();
    let rules = RulePacks::bundled();
    let det = Detection {
        store: &store,
        pages: &pages,
        config,
        catalog: &catalog,
        rules: &rules,
        evaluation_date: chrono::NaiveDate::from_ymd_opt(2022, 1, 1).unwrap(),
    };
    let targets = Targets::repo("acme/app".parse().unwrap());
    let (findings, _) = run_detectors(&det, &targets, &[BehaviorType::S8]).unwrap();
    findings.violations.len()
}

fn word(rng: &mut impl Rng) -> String {
    const ALPHA: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789-_";
    let n = rng.gen_range(1..10);
    (0..n).map(|_| ALPHA[rng.gen_range(0..ALPHA.len())] as char).collect()
}

/// A link into eve/fastlib whose path contains `segment`, with random
/// trailing path, query and fragment.
pub fn url_with_segment(rng: &mut impl Rng, segment: &str) -> String {
    let mut url = format!("{LINKED}{segment}{}", word(rng));
    for _ in 0..rng.gen_range(0..3) {
        url.push('/');
        url.push_str(&word(rng));
    }
    if rng.gen_bool(0.3) {
        url.push_str(&format!("?ref={}", word(rng)));
    }
    if rng.gen_bool(0.3) {
        url.push_str(&format!("#L{}", rng.gen_range(1..500)));
    }
    url
}

/// Opening text that links `url` among other prose.
pub fn body_with(rng: &mut impl Rng, url: &str) -> String {
    match rng.gen_range(0..3) {
        0 => format!("See {url} for a faster parser."),
        1 => format!("Parsing is slow.\n\n{url}\n"),
        _ => format!("Compare with ({url}), it avoids the copy."),
    }
}
