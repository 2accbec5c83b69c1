use chrono::NaiveDate;
use regex::Regex;

use crate::fact_model::{BehaviorType, EvidenceItem, RepoId, RepositoryFacts, Subject, Violation};
use crate::rules::{base, Edb, Value};

use super::{base_edb, evaluate_pack, root_readme, s, str_arg, trace, Detection, DetectorError, Diagnostic, Findings};

pub(super) struct Prepared {
    pub edb: Edb,
    repo: RepoId,
    release: Option<(String, NaiveDate)>,
}

/// URLs in the README of `repo`, in order of appearance.
pub fn readme_links(repo: &RepositoryFacts) -> Vec<String> {
    let Some(text) = root_readme(repo).and_then(|f| f.text()) else {
        return Vec::new();
    };
    let re = Regex::new(r#"https?://[^\s)\]>"'<`]+"#).expect("valid pattern");
    let mut out: Vec<String> = Vec::new();
    for m in re.find_iter(&text) {
        let url = m.as_str().trim_end_matches(['.', ',', ';', ':', '!']).to_string();
        if !out.contains(&url) {
            out.push(url);
        }
    }
    out
}

pub(super) fn prepare(det: &Detection, repo: &RepoId) -> Result<Prepared, DetectorError> {
    let (id, facts) = super::resolve(det.store, repo)?;
    let key = base::repo_key(facts);
    let mut edb = base_edb(det.store);
    edb.insert("analyzed", vec![s(&key)]);
    edb.insert("evaluation_date", vec![Value::Date(det.evaluation_date)]);
    edb.insert("s9_stale_days", vec![Value::Int(det.config.s9_stale_days)]);
    let readme = readme_links(facts);
    for link in &readme {
        edb.insert("readme_link", vec![s(&key), s(link)]);
    }
    for link in facts.external_links.iter().chain(&readme) {
        match det.pages.get(link) {
            Some(Some(page)) => {
                let lower = page.to_lowercase();
                for marker in &det.config.s9_paid_markers {
                    if lower.contains(&marker.to_lowercase()) {
                        edb.insert("page_marker", vec![s(link), s(marker)]);
                    }
                }
            }
            _ => edb.insert("page_unavailable", vec![s(link)]),
        }
    }
    Ok(Prepared {
        edb,
        repo: id.clone(),
        release: facts
            .latest_release
            .as_ref()
            .map(|r| (r.tag.clone(), r.published_date)),
    })
}

/// Repository-level check for an original repository whose latest release
/// is older than the staleness bound while its app store listing offers
/// paid features. A repository without releases is not reported.
pub fn detect_s9(det: &Detection, repo: &RepoId) -> Result<Findings, DetectorError> {
    let t = BehaviorType::S9;
    let p = prepare(det, repo)?;
    let model = evaluate_pack(det, t, &p.edb)?;
    let mut out = Findings::default();
    let found = model.facts("violation_s9").next();
    if let Some(fact) = found {
        let (link, marker) = (str_arg(fact, 1), str_arg(fact, 2));
        let mut evidence = Vec::new();
        if let Some((tag, date)) = &p.release {
            evidence.push(EvidenceItem::new("latestRelease", format!("{tag} published {date}")));
            evidence.push(EvidenceItem::new(
                "daysSinceRelease",
                format!("{} as of {}", (det.evaluation_date - *date).num_days(), det.evaluation_date),
            ));
        }
        evidence.push(EvidenceItem::new("storeLink", link).at(link));
        evidence.push(EvidenceItem::new("paidMarker", marker).at(link));
        out.violations.push(Violation {
            behavior_type: t,
            subject: Subject::repo(p.repo.clone()),
            evidence,
            rule_trace: trace(det, t, &model, fact),
        });
    }
    for fact in model.facts("unavailable_s9").filter(|_| found.is_none()) {
        out.diagnostics.push(Diagnostic {
            behavior_type: t,
            subject: Subject::repo(p.repo.clone()),
            reason: "cannot evaluate: store listing page is unavailable".into(),
            location: Some(str_arg(fact, 1).to_string()),
        });
    }
    Ok(out)
}
