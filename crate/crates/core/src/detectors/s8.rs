use std::collections::BTreeMap;

use regex::Regex;

use crate::fact_model::{BehaviorType, EvidenceItem, IssueFacts, RepoId, Subject, Violation};
use crate::rules::{base, Edb};

use super::{base_edb, evaluate_pack, s, selected_issues, str_arg, trace, Detection, DetectorError, Diagnostic, Findings};

/// First path components on the hosting site that are not account names.
const RESERVED_OWNERS: &[&str] = &[
    "about", "apps", "collections", "contact", "customer-stories", "enterprise", "explore", "features",
    "issues", "login", "marketplace", "new", "notifications", "orgs", "pricing", "pulls", "search",
    "security", "settings", "site", "sponsors", "topics", "trending", "users",
];

/// A link to a repository on the hosting site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepoLink {
    pub url: String,
    /// Lowercased `owner/name`.
    pub repo: String,
    /// Lowercased URL path with a trailing slash, e.g. `/o/r/pull/3/`.
    pub path: String,
}

/// Repository links in `text`, in order of appearance.
pub fn repo_links(text: &str) -> Vec<RepoLink> {
    let re = Regex::new(r"https?://(?:www\.)?github\.com/([A-Za-z0-9-]+)/([A-Za-z0-9_.-]+)((?:/[^\s)\]>'<`]*)?)")
        .expect("valid pattern");
    let mut out = Vec::new();
    for c in re.captures_iter(text) {
        let owner = &c[1];
        if RESERVED_OWNERS.iter().any(|r| r.eq_ignore_ascii_case(owner)) {
            continue;
        }
        let url = c[0].trim_end_matches(['.', ',', ';', ':', '"', '!', '?']).to_string();
        let name = c[2].trim_end_matches(['.', ',', ';', ':', '!', '?']);
        let name = name.strip_suffix(".git").unwrap_or(name);
        if name.is_empty() {
            continue;
        }
        let tail_start = url.find("github.com").map_or(0, |i| i + "github.com".len());
        let mut path = url[tail_start..].split(['?', '#']).next().unwrap_or("").to_ascii_lowercase();
        if !path.ends_with('/') {
            path.push('/');
        }
        out.push(RepoLink {
            repo: format!("{owner}/{name}").to_ascii_lowercase(),
            path,
            url,
        });
    }
    out
}

/// Links written by the opener of `issue`, limited to the first `limit`
/// distinct repositories other than the issue's own.
pub(super) fn opener_links(issue: &IssueFacts, limit: usize) -> Vec<RepoLink> {
    let own = issue.repo.key();
    let mut seen: Vec<String> = Vec::new();
    let mut out: Vec<RepoLink> = Vec::new();
    for c in issue.body_and_comments.iter().filter(|c| c.author == issue.owner) {
        for link in repo_links(&c.text) {
            if link.repo != own && !seen.contains(&link.repo) {
                if seen.len() == limit {
                    continue;
                }
                seen.push(link.repo.clone());
            }
            if !out.iter().any(|l| l.url == link.url) {
                out.push(link);
            }
        }
    }
    out
}

pub(super) struct Prepared {
    pub edb: Edb,
    repo: RepoId,
    issues: BTreeMap<String, (u64, String)>,
    order: BTreeMap<(String, String), usize>,
}

pub(super) fn prepare(det: &Detection, repo: &RepoId, issue: Option<u64>) -> Result<Prepared, DetectorError> {
    let issues = selected_issues(det.store, repo, issue)?;
    let (id, _) = super::resolve(det.store, repo)?;
    let mut edb = base_edb(det.store);
    for seg in &det.config.s8_excluded_path_segments {
        edb.insert("excluded_segment", vec![s(&seg.to_ascii_lowercase())]);
    }
    let mut keys = BTreeMap::new();
    let mut order = BTreeMap::new();
    for issue in issues {
        let key = base::issue_key(issue);
        edb.insert("analyzed_issue", vec![s(&key)]);
        for (i, link) in opener_links(issue, det.config.s8_max_candidates).into_iter().enumerate() {
            edb.insert("repo_link", vec![s(&key), s(&link.url), s(&link.repo), s(&link.path)]);
            order.insert((key.clone(), link.url), i);
        }
        keys.insert(key, (issue.number, issue.owner.login().to_string()));
    }
    Ok(Prepared {
        edb,
        repo: id.clone(),
        issues: keys,
        order,
    })
}

/// Issue-level check for an opener who links a repository they contribute
/// to while not contributing to the repository of the issue. Links whose
/// path contains an excluded segment are treated as demonstrations. At most
/// one violation is reported per issue, for the earliest qualifying link.
pub fn detect_s8(det: &Detection, repo: &RepoId, issue: Option<u64>) -> Result<Findings, DetectorError> {
    let t = BehaviorType::S8;
    let p = prepare(det, repo, issue)?;
    let model = evaluate_pack(det, t, &p.edb)?;
    let mut out = Findings::default();
    let pos = |key: &str, url: &str| p.order.get(&(key.to_string(), url.to_string())).copied().unwrap_or(usize::MAX);

    let mut first: BTreeMap<&str, &Vec<crate::rules::Value>> = BTreeMap::new();
    for fact in model.facts("violation_s8") {
        let key = str_arg(fact, 0);
        let earlier = first.get(key).is_some_and(|f| pos(key, str_arg(f, 1)) <= pos(key, str_arg(fact, 1)));
        if !earlier {
            first.insert(key, fact);
        }
    }
    for (key, fact) in &first {
        let (number, opener) = &p.issues[*key];
        let (url, r2) = (str_arg(fact, 1), str_arg(fact, 2));
        out.violations.push(Violation {
            behavior_type: t,
            subject: Subject::issue(p.repo.clone(), *number),
            evidence: vec![
                EvidenceItem::new("link", url).at(url),
                EvidenceItem::new("opener", opener.as_str()),
                EvidenceItem::new(
                    "contributorProof",
                    format!("{opener} is a contributor of {r2} and not of {}", p.repo),
                ),
                EvidenceItem::new(
                    "confirmation",
                    "requires human confirmation: a disclosure of the relationship in the discussion is not analyzed",
                ),
            ],
            rule_trace: trace(det, t, &model, fact),
        });
    }
    for fact in model.facts("unresolved_s8") {
        let key = str_arg(fact, 0);
        if first.contains_key(key) {
            continue;
        }
        out.diagnostics.push(Diagnostic {
            behavior_type: t,
            subject: Subject::issue(p.repo.clone(), p.issues[key].0),
            reason: format!("cannot evaluate: contributors of {} are not in the input", str_arg(fact, 2)),
            location: Some(str_arg(fact, 1).to_string()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_repository_links() {
        let links = repo_links(
            "Try https://github.com/Alice/Nano-Colors. Or https://github.com/a/b/pull/3#x and https://github.com/orgs/x/people",
        );
        let got: Vec<_> = links.iter().map(|l| (l.repo.as_str(), l.path.as_str())).collect();
        assert_eq!(got, [("alice/nano-colors", "/alice/nano-colors/"), ("a/b", "/a/b/pull/3/")]);
        assert_eq!(links[0].url, "https://github.com/Alice/Nano-Colors");
    }

    #[test]
    fn strips_git_suffix() {
        assert_eq!(repo_links("git clone https://github.com/o/r.git")[0].repo, "o/r");
    }
}
