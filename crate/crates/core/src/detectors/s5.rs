use crate::fact_model::{BehaviorType, EvidenceItem, RepoId, Subject, Violation};
use crate::license::{detect_repo_license, LicenseSource, LICENSE_FILE_NAMES};
use crate::rules::{base, Edb};

use super::{base_edb, evaluate_pack, root_readme, s, trace, Detection, DetectorError, Findings};

pub(super) struct Prepared {
    pub edb: Edb,
    repo: RepoId,
    readme: Option<String>,
}

pub(super) fn prepare(det: &Detection, repo: &RepoId) -> Result<Prepared, DetectorError> {
    let (id, facts) = super::resolve(det.store, repo)?;
    let key = base::repo_key(facts);
    let mut edb = base_edb(det.store);
    edb.insert("analyzed", vec![s(&key)]);
    if let Some(info) = detect_repo_license(facts, det.catalog) {
        let source = match info.source {
            LicenseSource::LicenseFile => "licenseFile",
            LicenseSource::Readme => "readme",
        };
        edb.insert("license_detected", vec![s(&key), s(&info.spdx_id), s(source)]);
    }
    Ok(Prepared {
        edb,
        repo: id.clone(),
        readme: root_readme(facts).map(|f| f.path.clone()),
    })
}

/// Repository-level check for a missing license: neither a root license
/// file nor a license named in the root README.
pub fn detect_s5(det: &Detection, repo: &RepoId) -> Result<Findings, DetectorError> {
    let t = BehaviorType::S5;
    let p = prepare(det, repo)?;
    let model = evaluate_pack(det, t, &p.edb)?;
    let mut out = Findings::default();
    for fact in model.facts("violation_s5") {
        out.violations.push(Violation {
            behavior_type: t,
            subject: Subject::repo(p.repo.clone()),
            evidence: vec![
                EvidenceItem::new("searched", format!("{} in the repository root", LICENSE_FILE_NAMES.join(", "))),
                EvidenceItem::new(
                    "readme",
                    match &p.readme {
                        Some(path) => format!("{path} names no known license"),
                        None => "no root README.md".to_string(),
                    },
                ),
            ],
            rule_trace: trace(det, t, &model, fact),
        });
    }
    Ok(out)
}
