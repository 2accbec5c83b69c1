//! Token k-gram fingerprints, directional containment, and exact repository
//! comparison.

mod tokenize;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::fact_model::RepositoryFacts;
use crate::source::SourceFilter;

pub use tokenize::{tokenize, TokenStream};

/// Gram length used unless configured otherwise.
pub const DEFAULT_K: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimilarityError {
    #[error("needle fingerprint is empty")]
    EmptyNeedle,
    #[error("gram length mismatch: needle k={needle}, hay k={hay}")]
    KMismatch { needle: usize, hay: usize },
    #[error("incomplete file tree for `{repo}`: {detail}")]
    IncompleteTree { repo: String, detail: String },
}

/// 64-bit FNV-1a over the token bytes, with a 0xff separator (never valid
/// UTF-8) after each token.
fn hash_gram(gram: &[String]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for token in gram {
        for b in token.bytes().chain(std::iter::once(0xff)) {
            h ^= u64::from(b);
            h = h.wrapping_mul(PRIME);
        }
    }
    h
}

/// Multiset of k-gram hashes of a token stream, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FingerprintSet {
    k: usize,
    hashes: Vec<u64>,
}

impl FingerprintSet {
    /// Hashes every window of `k` consecutive tokens.
    ///
    /// # Panics
    ///
    /// Panics if `k` is zero.
    pub fn from_tokens(tokens: &[String], k: usize) -> Self {
        assert!(k > 0, "gram length must be positive");
        let mut hashes: Vec<u64> = tokens.windows(k).map(hash_gram).collect();
        hashes.sort_unstable();
        FingerprintSet { k, hashes }
    }

    pub fn of(stream: &TokenStream, k: usize) -> Self {
        Self::from_tokens(&stream.tokens, k)
    }

    /// Winnowed fingerprint: the minimum hash of every window of `window`
    /// consecutive grams, deduplicated by position. Keeps far fewer hashes
    /// on large inputs at the cost of exact multiset semantics.
    pub fn winnowed(tokens: &[String], k: usize, window: usize) -> Self {
        assert!(k > 0 && window > 0, "gram length and window must be positive");
        let grams: Vec<u64> = tokens.windows(k).map(hash_gram).collect();
        let mut picked: Vec<(usize, u64)> = Vec::new();
        if grams.len() <= window {
            if let Some((pos, h)) = grams.iter().enumerate().min_by_key(|(i, h)| (**h, usize::MAX - i)) {
                picked.push((pos, *h));
            }
        } else {
            for start in 0..=grams.len() - window {
                let (pos, h) = grams[start..start + window]
                    .iter()
                    .enumerate()
                    .map(|(j, h)| (start + j, *h))
                    .min_by_key(|(j, h)| (*h, usize::MAX - j))
                    .expect("window is non-empty");
                if picked.last() != Some(&(pos, h)) {
                    picked.push((pos, h));
                }
            }
        }
        let mut hashes: Vec<u64> = picked.into_iter().map(|(_, h)| h).collect();
        hashes.sort_unstable();
        FingerprintSet { k, hashes }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.hashes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hashes.is_empty()
    }

    pub fn hashes(&self) -> &[u64] {
        &self.hashes
    }
}

/// Size of the multiset intersection of two sorted hash lists.
fn intersection_size(a: &[u64], b: &[u64]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Matched and total needle grams, the two terms of [`containment`].
pub fn containment_counts(
    needle: &FingerprintSet,
    hay: &FingerprintSet,
) -> Result<(usize, usize), SimilarityError> {
    if needle.k != hay.k {
        return Err(SimilarityError::KMismatch {
            needle: needle.k,
            hay: hay.k,
        });
    }
    if needle.is_empty() {
        return Err(SimilarityError::EmptyNeedle);
    }
    Ok((intersection_size(&needle.hashes, &hay.hashes), needle.len()))
}

/// Fraction of the needle's grams (as a multiset) that also occur in `hay`.
pub fn containment(needle: &FingerprintSet, hay: &FingerprintSet) -> Result<f64, SimilarityError> {
    let (hit, total) = containment_counts(needle, hay)?;
    Ok(hit as f64 / total as f64)
}

fn normalized_sources<'a>(
    repo: &'a RepositoryFacts,
    filter: &SourceFilter,
) -> Result<BTreeMap<&'a str, Vec<u8>>, SimilarityError> {
    let repo_name = format!("{}/{}", repo.owner, repo.name);
    if !repo.is_tree_complete() {
        return Err(SimilarityError::IncompleteTree {
            repo: repo_name,
            detail: format!("fileCount is {} but {} files are listed", repo.file_count, repo.files.len()),
        });
    }
    let mut out = BTreeMap::new();
    for file in repo.files.iter().filter(|f| filter.is_source(&f.path)) {
        let Some(content) = &file.content else {
            return Err(SimilarityError::IncompleteTree {
                repo: repo_name,
                detail: format!("no content for source file `{}`", file.path),
            });
        };
        out.insert(file.path.as_str(), normalize_line_endings(content.bytes()));
    }
    Ok(out)
}

fn normalize_line_endings(bytes: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\r' {
            out.push(b'\n');
            if bytes.get(i + 1) == Some(&b'\n') {
                i += 1;
            }
        } else {
            out.push(bytes[i]);
        }
        i += 1;
    }
    out
}

/// True iff both repositories have the same set of source-file paths and
/// every pair of corresponding files is byte-equal after line-ending
/// normalization. Non-source files are ignored.
pub fn repos_identical(
    a: &RepositoryFacts,
    b: &RepositoryFacts,
    filter: &SourceFilter,
) -> Result<bool, SimilarityError> {
    Ok(normalized_sources(a, filter)? == normalized_sources(b, filter)?)
}

/// Number of source files compared by [`repos_identical`].
pub fn source_file_count(repo: &RepositoryFacts, filter: &SourceFilter) -> usize {
    repo.files.iter().filter(|f| filter.is_source(&f.path)).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fact_model::FileContent;
    use proptest::prelude::*;

    fn fp(text: &str, ext: &str) -> FingerprintSet {
        FingerprintSet::of(&tokenize(text, ext), DEFAULT_K)
    }

    const SNIPPET: &str = "function debounce(fn, wait) { let t; return (...args) => { clearTimeout(t); t = setTimeout(() => fn(...args), wait); }; }";

    #[test]
    fn identical_texts_fully_contained() {
        assert_eq!(containment(&fp(SNIPPET, "js"), &fp(SNIPPET, "js")).unwrap(), 1.0);
    }

    #[test]
    fn disjoint_texts_not_contained() {
        let other = "alpha beta gamma delta epsilon zeta eta theta iota kappa";
        assert_eq!(containment(&fp(SNIPPET, "js"), &fp(other, "txt")).unwrap(), 0.0);
    }

    #[test]
    fn gram_count_matches_token_count() {
        for n in 0usize..12 {
            let tokens: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
            let f = FingerprintSet::from_tokens(&tokens, DEFAULT_K);
            assert_eq!(f.len(), (n + 1).saturating_sub(DEFAULT_K));
        }
    }

    #[test]
    fn containment_errors() {
        let short = fp("a b", "txt");
        assert_eq!(containment(&short, &fp(SNIPPET, "js")), Err(SimilarityError::EmptyNeedle));
        let k3 = FingerprintSet::of(&tokenize(SNIPPET, "js"), 3);
        assert_eq!(
            containment(&k3, &fp(SNIPPET, "js")),
            Err(SimilarityError::KMismatch { needle: 3, hay: 5 })
        );
    }

    #[test]
    fn hashes_are_stable_across_runs() {
        // Frozen value: FNV-1a is platform independent.
        let f = FingerprintSet::from_tokens(&["a", "b", "c", "d", "e"].map(String::from), 5);
        assert_eq!(f.hashes(), &[hash_gram(&["a", "b", "c", "d", "e"].map(String::from))]);
        assert_eq!(hash_gram(&[String::new()]), 0xaf64_724c_8602_eb6e);
    }

    #[test]
    fn winnowing_keeps_a_subset() {
        let tokens: Vec<String> = (0..200).map(|i| format!("t{}", i % 37)).collect();
        let full = FingerprintSet::from_tokens(&tokens, 5);
        let w = FingerprintSet::winnowed(&tokens, 5, 4);
        assert!(w.len() < full.len());
        assert!(w.hashes().iter().all(|h| full.hashes().binary_search(h).is_ok()));
    }

    fn repo(files: &[(&str, &str)]) -> RepositoryFacts {
        let mut r = RepositoryFacts::new("o", "r");
        r.files = files.iter().map(|(p, c)| FileContent::new(*p, *c)).collect();
        r.file_count = r.files.len() as u64;
        r
    }

    #[test]
    fn repo_identity() {
        let f = SourceFilter::default();
        let a = repo(&[("src/a.js", "let x = 1;\n"), ("b.py", "print(1)\n")]);
        assert!(repos_identical(&a, &a, &f).unwrap());

        let b = repo(&[("src/a.js", "let x = 2;\n"), ("b.py", "print(1)\n")]);
        assert!(!repos_identical(&a, &b, &f).unwrap());

        let c = repo(&[("src/a.js", "let x = 1;\r\n"), ("b.py", "print(1)\n"), ("README.md", "hi")]);
        assert!(repos_identical(&a, &c, &f).unwrap());

        let d = repo(&[("src/a.js", "let x = 1;\n")]);
        assert!(!repos_identical(&a, &d, &f).unwrap());
    }

    #[test]
    fn incomplete_tree_rejected() {
        let f = SourceFilter::default();
        let a = repo(&[("a.js", "x")]);
        let mut missing = a.clone();
        missing.file_count = 2;
        assert!(matches!(repos_identical(&a, &missing, &f), Err(SimilarityError::IncompleteTree { .. })));
        let mut unfetched = a.clone();
        unfetched.files[0].content = None;
        assert!(matches!(repos_identical(&unfetched, &a, &f), Err(SimilarityError::IncompleteTree { .. })));
    }

    fn js_words() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec(
            prop_oneof![
                "[a-z]{1,6}".prop_map(String::from),
                Just("(".to_string()),
                Just(")".to_string()),
                Just(";".to_string()),
                Just("=".to_string()),
                "[0-9]{1,3}".prop_map(String::from),
            ],
            5..80,
        )
    }

    proptest! {
        #[test]
        fn self_containment_is_one(words in js_words()) {
            let f = fp(&words.join(" "), "js");
            prop_assume!(!f.is_empty());
            prop_assert_eq!(containment(&f, &f).unwrap(), 1.0);
        }

        #[test]
        fn whitespace_edits_do_not_change_containment(
            words in js_words(),
            hay in js_words(),
            seps in prop::collection::vec(prop_oneof![Just(" "), Just("\n"), Just("\t  "), Just("\r\n")], 80),
        ) {
            let needle = fp(&words.join(" "), "js");
            prop_assume!(!needle.is_empty());
            let mut spaced = String::new();
            for (i, w) in words.iter().enumerate() {
                spaced.push_str(w);
                spaced.push_str(seps[i % seps.len()]);
            }
            let hay_text = format!("{} {}", hay.join(" "), words.join(" "));
            let hay_spaced = format!("{}\n\n{}", hay.join("\t"), spaced);
            let c1 = containment(&needle, &fp(&hay_text, "js")).unwrap();
            let c2 = containment(&fp(&spaced, "js"), &fp(&hay_spaced, "js")).unwrap();
            prop_assert_eq!(c1, c2);
        }
    }
}
