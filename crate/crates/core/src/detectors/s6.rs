use std::collections::BTreeMap;

use crate::fact_model::{BehaviorType, EvidenceItem, RepoId, RepositoryFacts, Subject, Violation};
use crate::license::{extract_license_changes, LicenseChangeEvent, LicenseCatalog};
use crate::rules::{base, Edb};

use super::{base_edb, evaluate_pack, s, str_arg, trace, Detection, DetectorError, Findings};

pub(super) struct Prepared {
    pub edb: Edb,
    repo: RepoId,
    events: BTreeMap<String, (LicenseChangeEvent, Option<String>)>,
    changelog: Option<String>,
}

fn changelog(repo: &RepositoryFacts) -> Option<&crate::fact_model::FileContent> {
    repo.changelog_file.as_ref().filter(|f| f.is_root()).or_else(|| {
        repo.files
            .iter()
            .find(|f| f.is_root() && f.file_name().eq_ignore_ascii_case("CHANGELOG.md"))
    })
}

fn announced(repo: &RepositoryFacts, catalog: &LicenseCatalog) -> bool {
    changelog(repo)
        .and_then(|f| f.text())
        .is_some_and(|t| catalog.identify_mention(&t).is_some())
}

pub(super) fn prepare(det: &Detection, repo: &RepoId) -> Result<Prepared, DetectorError> {
    let (id, facts) = super::resolve(det.store, repo)?;
    let key = base::repo_key(facts);
    let mut edb = base_edb(det.store);
    edb.insert("analyzed", vec![s(&key)]);
    if announced(facts, det.catalog) {
        edb.insert("announced", vec![s(&key)]);
    }
    let initial = facts
        .license_commits
        .first()
        .and_then(|c| c.code_change.as_deref())
        .and_then(|patch| {
            let added: String = patch
                .lines()
                .filter(|l| l.starts_with('+') && !l.starts_with("+++"))
                .map(|l| format!("{}\n", &l[1..]))
                .collect();
            det.catalog.identify(&added).map(|i| i.spdx_id)
        });
    let mut held: Vec<String> = initial.into_iter().collect();
    let mut events = BTreeMap::new();
    for event in extract_license_changes(facts, det.catalog)? {
        edb.insert(
            "license_change",
            vec![s(&key), s(&event.commit.sha), s(&event.from_license), s(&event.to_license)],
        );
        let restores = held.contains(&event.to_license).then(|| event.to_license.clone());
        held.push(event.from_license.clone());
        held.push(event.to_license.clone());
        events.insert(event.commit.sha.clone(), (event, restores));
    }
    Ok(Prepared {
        edb,
        repo: id.clone(),
        events,
        changelog: changelog(facts).map(|f| f.path.clone()),
    })
}

/// Repository-level check for license changes made outside any pull request
/// and not announced in the changelog. The first commit of the license file
/// creates the license and is never a change.
pub fn detect_s6(det: &Detection, repo: &RepoId) -> Result<Findings, DetectorError> {
    let t = BehaviorType::S6;
    let p = prepare(det, repo)?;
    let model = evaluate_pack(det, t, &p.edb)?;
    let mut out = Findings::default();
    for fact in model.facts("violation_s6") {
        let sha = str_arg(fact, 1);
        let mut evidence = vec![EvidenceItem::new("commit", sha).at(sha)];
        if let Some((event, restores)) = p.events.get(sha) {
            evidence.push(EvidenceItem::new(
                "licenseChange",
                format!("{} -> {}", event.from_license, event.to_license),
            ));
            evidence.push(EvidenceItem::new("pullRequestCount", event.commit.pull_request_count.to_string()));
            if let Some(previous) = restores {
                evidence.push(EvidenceItem::new(
                    "restoresPreviousLicense",
                    format!("{previous} was in use earlier; a restore is a known false-positive pattern"),
                ));
            }
        }
        evidence.push(EvidenceItem::new(
            "changelog",
            match &p.changelog {
                Some(path) => format!("{path} mentions no license"),
                None => "no root CHANGELOG.md".to_string(),
            },
        ));
        out.violations.push(Violation {
            behavior_type: t,
            subject: Subject::repo(p.repo.clone()),
            evidence,
            rule_trace: trace(det, t, &model, fact),
        });
    }
    Ok(out)
}
