use crate::fact_model::{BehaviorType, EvidenceItem, RepoId, RepositoryFacts, Subject, Violation};
use crate::rules::{base, Edb};
use crate::similarity::{repos_identical, source_file_count, tokenize, SimilarityError};
use crate::source::SourceFilter;

use super::{base_edb, evaluate_pack, s, trace, Detection, DetectorError, Findings};

pub(super) struct Prepared {
    pub edb: Edb,
    r1: RepoId,
    r2: RepoId,
    matched: usize,
}

/// Token-level identity: same source paths, and each pair of files lexes
/// to the same token stream.
fn token_identical(a: &RepositoryFacts, b: &RepositoryFacts, filter: &SourceFilter) -> Result<bool, SimilarityError> {
    // Reuse the exact comparison for its completeness checks.
    if repos_identical(a, b, filter)? {
        return Ok(true);
    }
    let sources = |r: &RepositoryFacts| {
        let mut v: Vec<(String, Vec<String>)> = r
            .files
            .iter()
            .filter(|f| filter.is_source(&f.path))
            .map(|f| {
                let ext = f.extension().unwrap_or("").to_ascii_lowercase();
                (f.path.clone(), tokenize(&f.text().unwrap_or_default(), &ext).tokens)
            })
            .collect();
        v.sort();
        v
    };
    Ok(sources(a) == sources(b))
}

pub(super) fn prepare(det: &Detection, r1: &RepoId, r2: &RepoId) -> Result<Prepared, DetectorError> {
    let (id1, f1) = super::resolve(det.store, r1)?;
    let (id2, f2) = super::resolve(det.store, r2)?;
    let (k1, k2) = (base::repo_key(f1), base::repo_key(f2));
    let filter = &det.config.source_filter;
    let identical = if det.config.s2_require_exact {
        repos_identical(f1, f2, filter)?
    } else {
        token_identical(f1, f2, filter)?
    };
    let mut edb = base_edb(det.store);
    edb.insert("analyzed", vec![s(&k1)]);
    edb.insert("compared_pair", vec![s(&k1), s(&k2)]);
    if identical {
        edb.insert("identical_sources", vec![s(&k1), s(&k2)]);
    }
    Ok(Prepared {
        edb,
        r1: id1.clone(),
        r2: id2.clone(),
        matched: if identical { source_file_count(f1, filter) } else { 0 },
    })
}

/// Repository-level check that `r2` copies every source file of `r1`
/// without either being an official fork of the other.
pub fn detect_s2(det: &Detection, r1: &RepoId, r2: &RepoId) -> Result<Findings, DetectorError> {
    let t = BehaviorType::S2;
    let p = prepare(det, r1, r2)?;
    let model = evaluate_pack(det, t, &p.edb)?;
    let mut out = Findings::default();
    for fact in model.facts("violation_s2") {
        out.violations.push(Violation {
            behavior_type: t,
            subject: Subject::repo(p.r1.clone()),
            evidence: vec![
                EvidenceItem::new("pair", format!("{} and {}", p.r1, p.r2)),
                EvidenceItem::new("matchedSourceFiles", p.matched.to_string()),
                EvidenceItem::new(
                    "forkRelation",
                    format!("{} is not in the fork list of {} and neither names the other as parent", p.r2, p.r1),
                ),
            ],
            rule_trace: trace(det, t, &model, fact),
        });
    }
    Ok(out)
}
