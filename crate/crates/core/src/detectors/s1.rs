use std::collections::BTreeMap;

use crate::fact_model::{BehaviorType, EvidenceItem, RepoId, Subject, Violation};
use crate::rules::{base, Edb, Value};
use crate::similarity::{containment_counts, tokenize, FingerprintSet};
use crate::source::SourceFilter;

use super::stackoverflow::{answer_id, extract_links, parse_answer};
use super::{base_edb, evaluate_pack, s, selected_issues, str_arg, trace, Detection, DetectorError, Diagnostic, Findings};

pub(super) struct Prepared {
    pub edb: Edb,
    repo: RepoId,
    issues: BTreeMap<String, u64>,
    owners: BTreeMap<String, String>,
    posters: BTreeMap<(String, String), Vec<String>>,
    scores: BTreeMap<(String, String), (usize, usize)>,
    missing_content: usize,
}

pub(super) fn prepare(det: &Detection, repo: &RepoId, issue: Option<u64>) -> Result<Prepared, DetectorError> {
    let issues = selected_issues(det.store, repo, issue)?;
    let (id, facts) = super::resolve(det.store, repo)?;
    let rkey = base::repo_key(facts);
    let link_re = det.config.link_regex()?;
    let mut edb = base_edb(det.store);
    edb.insert("s1_threshold", vec![Value::Int(det.config.s1_threshold_bp())]);

    let mut keys = BTreeMap::new();
    let mut posters: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
    let mut links: Vec<String> = Vec::new();
    for issue in issues {
        let key = base::issue_key(issue);
        edb.insert("analyzed_issue", vec![s(&key)]);
        for comment in &issue.body_and_comments {
            for w in extract_links(&link_re, &comment.text) {
                edb.insert("so_link", vec![s(&key), s(&w), s(comment.author.login())]);
                let who = posters.entry((key.clone(), w.clone())).or_default();
                if !who.iter().any(|p| p == comment.author.login()) {
                    who.push(comment.author.login().to_string());
                }
                if !links.contains(&w) {
                    links.push(w);
                }
            }
        }
        keys.insert(key, issue.number);
    }

    let filter: &SourceFilter = &det.config.source_filter;
    let k = det.config.gram_length;
    let candidates: Vec<_> = facts
        .files
        .iter()
        .filter(|f| filter.is_source(&f.path))
        .collect();
    let missing_content = candidates.iter().filter(|f| f.content.is_none()).count();
    let files: Vec<_> = candidates
        .into_iter()
        .filter_map(|f| f.content.as_ref().filter(|c| !c.is_binary()).map(|c| (f, c.text())))
        .collect();
    let mut file_prints: BTreeMap<&str, FingerprintSet> = BTreeMap::new();

    let mut owners = BTreeMap::new();
    let mut scores = BTreeMap::new();
    for w in &links {
        let Some(Some(html)) = det.pages.get(w) else {
            edb.insert("page_unavailable", vec![s(w)]);
            continue;
        };
        let answer = parse_answer(html, answer_id(w));
        if let Some(owner) = &answer.owner {
            edb.insert("answer_owner", vec![s(w), s(owner)]);
            owners.insert(w.clone(), owner.clone());
        }
        let mut snippet_prints: BTreeMap<String, FingerprintSet> = BTreeMap::new();
        for (file, text) in &files {
            if text.contains(w.as_str()) {
                edb.insert("link_in_file", vec![s(&rkey), s(&file.path), s(w)]);
            }
            let ext = file.extension().unwrap_or("").to_ascii_lowercase();
            let needle = snippet_prints
                .entry(ext.clone())
                .or_insert_with(|| FingerprintSet::of(&tokenize(&answer.code, &ext), k));
            if needle.is_empty() {
                continue;
            }
            let hay = file_prints
                .entry(file.path.as_str())
                .or_insert_with(|| FingerprintSet::of(&tokenize(text, &ext), k));
            let (hit, total) = containment_counts(needle, hay)?;
            if hit > 0 {
                let bp = (hit * 10_000 / total) as i64;
                edb.insert("snippet_score", vec![s(&rkey), s(w), s(&file.path), Value::Int(bp)]);
                scores.insert((w.clone(), file.path.clone()), (hit, total));
            }
        }
    }

    Ok(Prepared {
        edb,
        repo: id.clone(),
        issues: keys,
        owners,
        posters,
        scores,
        missing_content,
    })
}

/// Issue-level check for code copied from a Stack Overflow answer linked in
/// the discussion. A violation needs the link's poster to differ from the
/// answer's author, the answer's code to be contained in a repository file
/// at or above the threshold, and that file not to contain the link.
pub fn detect_s1(det: &Detection, repo: &RepoId, issue: Option<u64>) -> Result<Findings, DetectorError> {
    let t = BehaviorType::S1;
    let p = prepare(det, repo, issue)?;
    let model = evaluate_pack(det, t, &p.edb)?;
    let mut out = Findings::default();
    let subject = |key: &str| Subject::issue(p.repo.clone(), p.issues[key]);

    for fact in model.facts("violation_s1") {
        let (key, w, file) = (str_arg(fact, 0), str_arg(fact, 1), str_arg(fact, 2));
        let mut evidence = vec![EvidenceItem::new("link", w).at(w), EvidenceItem::new("file", file).at(file)];
        if let Some((hit, total)) = p.scores.get(&(w.to_string(), file.to_string())) {
            evidence.push(EvidenceItem::new(
                "containment",
                format!("{:.4} ({hit} of {total} snippet grams)", *hit as f64 / *total as f64),
            ));
        }
        if let Some(owner) = p.owners.get(w) {
            evidence.push(EvidenceItem::new("answerOwner", owner));
        }
        if let Some(who) = p.posters.get(&(key.to_string(), w.to_string())) {
            evidence.push(EvidenceItem::new("linkPostedBy", who.join(", ")));
        }
        out.violations.push(Violation {
            behavior_type: t,
            subject: subject(key),
            evidence,
            rule_trace: trace(det, t, &model, fact),
        });
    }
    for fact in model.facts("unavailable_s1") {
        let (key, w) = (str_arg(fact, 0), str_arg(fact, 1));
        out.diagnostics.push(Diagnostic {
            behavior_type: t,
            subject: subject(key),
            reason: "cannot evaluate: linked page is unavailable".into(),
            location: Some(w.to_string()),
        });
    }
    let any_link = model.facts("so_link").next().is_some();
    if any_link && p.missing_content > 0 {
        out.diagnostics.push(Diagnostic {
            behavior_type: t,
            subject: Subject::repo(p.repo.clone()),
            reason: format!("{} source files have no content; they were not compared", p.missing_content),
            location: None,
        });
    }
    Ok(out)
}
